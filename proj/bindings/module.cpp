#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "seqhygan/corpus.hpp"
#include "seqhygan/errors.hpp"
#include "seqhygan/hypergraph.hpp"
#include "seqhygan/metrics.hpp"
#include "seqhygan/model.hpp"
#include "seqhygan/tokenize.hpp"
#include "seqhygan/trainer.hpp"

namespace py = pybind11;
using namespace seqhygan;

namespace {

TokenizerSpec make_tokenizer_spec(const std::string& method, std::size_t k,
                                  std::uint64_t beta_freq, std::size_t max_merges) {
    TokenizerSpec spec;
    if (method == "kmer") {
        spec.method = TokenizeMethod::kmer;
    } else if (method == "espf") {
        spec.method = TokenizeMethod::espf;
    } else {
        throw std::invalid_argument("method must be 'kmer' or 'espf'");
    }
    spec.k = k;
    spec.beta_freq = beta_freq;
    spec.max_merges = max_merges;
    return spec;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Sequence hypergraph attention classifier (C++ core)";

    py::register_exception<DataError>(m, "DataError");
    py::register_exception<NumericError>(m, "NumericError");

    py::class_<SequenceRecord>(m, "SequenceRecord")
        .def_readonly("id", &SequenceRecord::id)
        .def_readonly("symbols", &SequenceRecord::symbols)
        .def_readonly("label", &SequenceRecord::label)
        .def("__repr__", [](const SequenceRecord& r) {
            return "SequenceRecord(id=" + std::to_string(r.id) + ", label='" + r.label + "')";
        });

    py::class_<LabeledCorpus>(m, "Corpus")
        .def_readonly("records", &LabeledCorpus::records)
        .def_readonly("label_set", &LabeledCorpus::label_set)
        .def("__len__", &LabeledCorpus::size)
        .def_property_readonly("num_classes", &LabeledCorpus::num_classes);

    m.def(
        "load_corpus",
        [](const std::string& path, const std::string& format) {
            return load_corpus(path, format == "fasta" ? CorpusFormat::fasta : CorpusFormat::csv);
        },
        py::arg("path"), py::arg("format") = "csv");

    m.def(
        "group_labels",
        [](const LabeledCorpus& corpus, std::size_t keep_top, const py::object& other_name) {
            std::optional<std::string> other;
            if (!other_name.is_none()) other = other_name.cast<std::string>();
            return group_labels(corpus, keep_top, other);
        },
        py::arg("corpus"), py::arg("keep_top"), py::arg("other_name") = py::none());

    py::class_<SplitAssignment>(m, "SplitAssignment")
        .def_readonly("train_ids", &SplitAssignment::train_ids)
        .def_readonly("val_ids", &SplitAssignment::val_ids)
        .def_readonly("test_ids", &SplitAssignment::test_ids)
        .def_readonly("seed", &SplitAssignment::seed);

    m.def(
        "make_split",
        [](const LabeledCorpus& corpus, double train, double val, double test, std::uint64_t seed,
           bool stratified) {
            return make_split(corpus, {train, val, test}, seed, stratified);
        },
        py::arg("corpus"), py::arg("train") = 0.8, py::arg("val") = 0.1, py::arg("test") = 0.1,
        py::arg("seed") = 0, py::arg("stratified") = false);

    m.def("decompose_kmer",
          [](const std::string& seq, std::size_t k) { return decompose_kmer(seq, k); },
          py::arg("sequence"), py::arg("k"));

    py::class_<SubseqVocabulary>(m, "SubseqVocabulary")
        .def_property_readonly("entries",
                               [](const SubseqVocabulary& v) {
                                   std::vector<std::pair<std::string, std::uint64_t>> out;
                                   for (const auto& e : v.entries) out.emplace_back(e.token, e.freq);
                                   return out;
                               })
        .def_readonly("alphabet_size", &SubseqVocabulary::alphabet_size)
        .def_readonly("merges", &SubseqVocabulary::merges)
        .def_readonly("beta_freq", &SubseqVocabulary::beta_freq)
        .def("__len__", [](const SubseqVocabulary& v) { return v.entries.size(); })
        .def("save", [](const SubseqVocabulary& v, const std::string& path) { save_vocabulary(v, path); })
        .def_static("load", &load_vocabulary);

    m.def("train_espf", &train_espf, py::arg("corpus"), py::arg("beta_freq"), py::arg("max_merges"));

    m.def(
        "encode_espf",
        [](const std::string& seq, const SubseqVocabulary& vocab) {
            TokenizedSequence t = encode_espf(seq, vocab);
            return py::make_tuple(t.tokens, t.unknown_symbols);
        },
        py::arg("sequence"), py::arg("vocab"), "Returns (tokens, unknown_symbols)");

    m.def(
        "build_debruijn",
        [](const std::string& seq, std::size_t k) {
            DeBruijnGraph g = build_debruijn(seq, k);
            return py::make_tuple(g.nodes, g.edges);
        },
        py::arg("sequence"), py::arg("k"), "Returns (nodes, edges)");

    m.def(
        "tokenize_corpus",
        [](const LabeledCorpus& corpus, const std::string& method, std::size_t k,
           std::uint64_t beta_freq, std::size_t max_merges) {
            CorpusTokenization tok =
                tokenize_corpus(corpus, make_tokenizer_spec(method, k, beta_freq, max_merges));
            return py::make_tuple(tok.tokens, tok.vocab);
        },
        py::arg("corpus"), py::arg("method") = "kmer", py::arg("k") = 3, py::arg("beta_freq") = 5,
        py::arg("max_merges") = 0, "Returns (per-sequence token lists, vocabulary)");

    py::class_<SequenceHypergraph>(m, "Hypergraph")
        .def_property_readonly("num_nodes", &SequenceHypergraph::num_nodes)
        .def_property_readonly("num_edges", &SequenceHypergraph::num_edges)
        .def_readonly("node_names", &SequenceHypergraph::node_names)
        .def_readonly("edge_nodes", &SequenceHypergraph::edge_nodes)
        .def_readonly("labels", &SequenceHypergraph::labels)
        .def_readonly("label_names", &SequenceHypergraph::label_names)
        .def_readonly("nnz", &SequenceHypergraph::nnz)
        .def("stats",
             [](const SequenceHypergraph& hg) {
                 HypergraphStats s = stats(hg);
                 py::dict d;
                 d["n"] = s.n;
                 d["m"] = s.m;
                 d["nnz"] = s.nnz;
                 d["kappa"] = s.kappa;
                 d["chi"] = s.chi;
                 return d;
             })
        .def("export_incidence",
             [](const SequenceHypergraph& hg, const std::string& path) { export_incidence(hg, path); });

    m.def("build_hypergraph", &build_hypergraph, py::arg("corpus"), py::arg("tokens"));

    m.def(
        "evaluate",
        [](const std::vector<std::size_t>& predictions, const std::vector<std::size_t>& truths,
           const std::string& averaging) {
            Scores s = evaluate(predictions, truths,
                                averaging == "weighted" ? Averaging::weighted : Averaging::macro);
            return py::make_tuple(s.precision, s.recall, s.f1);
        },
        py::arg("predictions"), py::arg("truths"), py::arg("averaging") = "macro",
        "Returns (precision, recall, f1)");

    m.def(
        "run_experiment_json",
        [](const LabeledCorpus& corpus, const std::string& method, std::size_t k,
           std::uint64_t beta_freq, std::size_t max_merges, std::size_t repeats,
           std::uint64_t seed, double train_fraction, bool stratified, bool grid, double lr,
           std::size_t hidden, double dropout, double weight_decay, std::size_t max_epochs,
           std::size_t patience, bool attention) {
            ExperimentConfig cfg;
            cfg.tokenizer = make_tokenizer_spec(method, k, beta_freq, max_merges);
            cfg.repeats = repeats;
            cfg.master_seed = seed;
            cfg.train_fraction = train_fraction;
            cfg.stratified = stratified;
            if (grid) cfg.grid = GridSpec{};
            cfg.train.lr = lr;
            cfg.train.hidden = hidden;
            cfg.train.dropout = dropout;
            cfg.train.weight_decay = weight_decay;
            cfg.train.max_epochs = max_epochs;
            cfg.train.patience = patience;
            cfg.train.attention = attention;
            ExperimentResult result = run_experiment(corpus, cfg);
            cfg.train = result.chosen;
            return report_json(result, cfg);
        },
        py::arg("corpus"), py::arg("method") = "kmer", py::arg("k") = 3, py::arg("beta_freq") = 5,
        py::arg("max_merges") = 0, py::arg("repeats") = 5, py::arg("seed") = 0,
        py::arg("train_fraction") = 0.8, py::arg("stratified") = false, py::arg("grid") = false,
        py::arg("lr") = 1e-2, py::arg("hidden") = 32, py::arg("dropout") = 0.1,
        py::arg("weight_decay") = 1e-2, py::arg("max_epochs") = 1000, py::arg("patience") = 200,
        py::arg("attention") = true, "Runs the full pipeline and returns the report as JSON text");
}

// seqhygan command line: tokenize, build-graph, train, evaluate,
// inspect-attention. Exit codes: 0 success, 1 usage error, 2 data error,
// 3 numeric failure.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "seqhygan/corpus.hpp"
#include "seqhygan/errors.hpp"
#include "seqhygan/hypergraph.hpp"
#include "seqhygan/metrics.hpp"
#include "seqhygan/model.hpp"
#include "seqhygan/tokenize.hpp"
#include "seqhygan/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace seqhygan;

namespace {

std::uint64_t fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file for digest: " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

std::map<std::string, std::string> load_kv_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw DataError(path + ":" + std::to_string(line_no) + ": expected key=value");
        }
        auto trim = [](std::string s) {
            std::size_t x = s.find_first_not_of(" \t\r");
            if (x == std::string::npos) return std::string();
            std::size_t y = s.find_last_not_of(" \t\r");
            return s.substr(x, y - x + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

CorpusFormat parse_format(const std::string& format, const std::string& input) {
    if (format == "csv") return CorpusFormat::csv;
    if (format == "fasta") return CorpusFormat::fasta;
    if (format == "auto") {
        std::string ext = fs::path(input).extension().string();
        return ext == ".fa" || ext == ".fasta" || ext == ".fna" ? CorpusFormat::fasta
                                                                : CorpusFormat::csv;
    }
    throw UsageError("unknown format: " + format);
}

struct TokenizerFlags {
    std::string method = "kmer";
    std::size_t k = 3;
    std::uint64_t beta_freq = 5;
    std::size_t max_vocab = 0;
    std::string config_file;

    TokenizerSpec resolve() const {
        TokenizerFlags merged = *this;
        if (!config_file.empty()) {
            auto kv = load_kv_config(config_file);
            if (kv.count("method")) merged.method = kv["method"];
            if (kv.count("k")) merged.k = std::stoull(kv["k"]);
            if (kv.count("beta_freq")) merged.beta_freq = std::stoull(kv["beta_freq"]);
            if (kv.count("max_vocab")) merged.max_vocab = std::stoull(kv["max_vocab"]);
        }
        TokenizerSpec spec;
        if (merged.method == "kmer") {
            spec.method = TokenizeMethod::kmer;
        } else if (merged.method == "espf") {
            spec.method = TokenizeMethod::espf;
        } else {
            throw UsageError("unknown tokenizer method: " + merged.method);
        }
        spec.k = merged.k;
        spec.beta_freq = merged.beta_freq;
        if (merged.max_vocab != 0) spec.max_merges = merged.max_vocab;
        return spec;
    }

    ordered_json json(const TokenizerSpec& spec) const {
        if (spec.method == TokenizeMethod::kmer) {
            return {{"method", "kmer"}, {"k", spec.k}};
        }
        return {{"method", "espf"}, {"beta_freq", spec.beta_freq}, {"max_merges", spec.max_merges}};
    }
};

Activation parse_activation(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "leaky_relu") return Activation::leaky_relu;
    if (s == "identity") return Activation::identity;
    throw UsageError("unknown activation: " + s);
}

const char* activation_str(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::leaky_relu: return "leaky_relu";
        case Activation::identity: return "identity";
    }
    return "relu";
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write: " + path);
    out << content;
    if (!out) throw DataError("short write: " + path);
}

struct ModelConfigFile {
    ModelConfig cfg;
    void save(const std::string& path) const {
        ordered_json j;
        j["input_dim"] = cfg.input_dim;
        j["hidden_dim"] = cfg.hidden_dim;
        j["num_classes"] = cfg.num_classes;
        j["leaky_slope"] = cfg.leaky_slope;
        j["attention"] = cfg.attention;
        j["activation"] = activation_str(cfg.activation);
        j["node_features"] = cfg.node_features == NodeFeatureMode::edge_mean ? "edge_mean" : "one_hot";
        j["layers"] = cfg.layers;
        write_text(path, j.dump(2) + "\n");
    }
    static ModelConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open model config: " + path);
        ordered_json j = ordered_json::parse(in, nullptr, true);
        ModelConfig cfg;
        cfg.input_dim = j.at("input_dim").get<std::size_t>();
        cfg.hidden_dim = j.at("hidden_dim").get<std::size_t>();
        cfg.num_classes = j.at("num_classes").get<std::size_t>();
        cfg.leaky_slope = j.at("leaky_slope").get<double>();
        cfg.attention = j.at("attention").get<bool>();
        cfg.activation = parse_activation(j.at("activation").get<std::string>());
        cfg.node_features = j.at("node_features").get<std::string>() == "one_hot"
                                ? NodeFeatureMode::one_hot
                                : NodeFeatureMode::edge_mean;
        cfg.layers = j.at("layers").get<std::size_t>();
        return cfg;
    }
};

int cmd_tokenize(const std::string& input, const std::string& format, const TokenizerFlags& tf,
                 const std::string& out_dir) {
    LabeledCorpus corpus = load_corpus(input, parse_format(format, input));
    TokenizerSpec spec = tf.resolve();
    CorpusTokenization tok = tokenize_corpus(corpus, spec);

    std::size_t nodes = build_hypergraph(corpus, tok.tokens).num_nodes();

    fs::create_directories(out_dir);
    save_vocabulary(tok.vocab, (fs::path(out_dir) / "vocab.tsv").string());
    {
        std::ofstream out(fs::path(out_dir) / "tokens.tsv");
        if (!out) throw DataError("cannot write tokens.tsv");
        for (std::size_t i = 0; i < tok.tokens.size(); ++i) {
            out << i << "\t";
            for (std::size_t t = 0; t < tok.tokens[i].size(); ++t) {
                if (t) out << " ";
                out << tok.tokens[i][t];
            }
            out << "\n";
        }
    }

    ordered_json manifest;
    manifest["command"] = "tokenize";
    manifest["input"] = {{"path", input}, {"fnv1a64", fnv1a_file(input)}};
    manifest["tokenizer"] = tf.json(spec);
    manifest["artifacts"] = {"vocab.tsv", "tokens.tsv"};
    manifest["nodes"] = nodes;
    write_text((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");

    std::cout << "sequences=" << corpus.size() << "\n";
    std::cout << "vocabulary=" << tok.vocab.entries.size() << "\n";
    std::cout << "nodes=" << nodes << "\n";
    return 0;
}

void export_graph_artifacts(const SequenceHypergraph& hg, const std::string& out_dir) {
    export_incidence(hg, (fs::path(out_dir) / "incidence.tsv").string());
    export_edge_labels(hg, (fs::path(out_dir) / "labels.tsv").string());
    export_node_names(hg, (fs::path(out_dir) / "nodes.txt").string());
}

int cmd_build_graph(const std::string& input, const std::string& format, const TokenizerFlags& tf,
                    const std::string& out_dir) {
    LabeledCorpus corpus = load_corpus(input, parse_format(format, input));
    TokenizerSpec spec = tf.resolve();
    CorpusTokenization tok = tokenize_corpus(corpus, spec);
    SequenceHypergraph hg = build_hypergraph(corpus, tok.tokens);
    HypergraphStats s = stats(hg);

    fs::create_directories(out_dir);
    save_vocabulary(tok.vocab, (fs::path(out_dir) / "vocab.tsv").string());
    export_graph_artifacts(hg, out_dir);

    ordered_json manifest;
    manifest["command"] = "build-graph";
    manifest["input"] = {{"path", input}, {"fnv1a64", fnv1a_file(input)}};
    manifest["tokenizer"] = tf.json(spec);
    manifest["artifacts"] = {"vocab.tsv", "incidence.tsv", "labels.tsv", "nodes.txt"};
    write_text((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");

    std::cout << "nodes=" << s.n << "\n"
              << "hyperedges=" << s.m << "\n"
              << "nnz=" << s.nnz << "\n"
              << "kappa=" << s.kappa << "\n"
              << "chi=" << s.chi << "\n";
    return 0;
}

struct TrainFlags {
    std::string input;
    std::string format = "auto";
    TokenizerFlags tokenizer;
    std::string config_file;
    bool grid = false;
    std::size_t repeats = 5;
    std::uint64_t seed = 0;
    double train_fraction = 0.8;
    bool no_attention = false;
    bool stratified = false;
    std::string out_dir;
};

TrainConfig train_config_from_kv(const std::map<std::string, std::string>& kv, TrainConfig cfg) {
    auto get = [&](const char* key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    };
    if (auto v = get("lr")) cfg.lr = std::stod(*v);
    if (auto v = get("hidden")) cfg.hidden = std::stoull(*v);
    if (auto v = get("dropout")) cfg.dropout = std::stod(*v);
    if (auto v = get("weight_decay")) cfg.weight_decay = std::stod(*v);
    if (auto v = get("max_epochs")) cfg.max_epochs = std::stoull(*v);
    if (auto v = get("patience")) cfg.patience = std::stoull(*v);
    if (auto v = get("activation")) cfg.activation = parse_activation(*v);
    if (auto v = get("layers")) cfg.layers = std::stoull(*v);
    if (auto v = get("leaky_slope")) cfg.leaky_slope = std::stod(*v);
    if (auto v = get("inverse_freq_weights")) cfg.inverse_freq_weights = *v == "true" || *v == "1";
    if (auto v = get("attention")) cfg.attention = *v == "true" || *v == "1";
    return cfg;
}

int cmd_train(const TrainFlags& flags) {
    if (flags.grid && !flags.config_file.empty()) {
        throw UsageError("--grid and --config are mutually exclusive");
    }
    LabeledCorpus corpus = load_corpus(flags.input, parse_format(flags.format, flags.input));

    ExperimentConfig cfg;
    cfg.tokenizer = flags.tokenizer.resolve();
    if (!flags.config_file.empty()) {
        cfg.train = train_config_from_kv(load_kv_config(flags.config_file), cfg.train);
    }
    if (flags.grid) cfg.grid = GridSpec{};
    if (flags.no_attention) cfg.train.attention = false;
    cfg.repeats = flags.repeats;
    cfg.master_seed = flags.seed;
    cfg.train_fraction = flags.train_fraction;
    cfg.stratified = flags.stratified;

    ExperimentResult result = run_experiment(corpus, cfg);
    cfg.train = result.chosen; // resolved hyperparameters

    fs::create_directories(flags.out_dir);
    const fs::path out(flags.out_dir);
    write_text((out / "report.json").string(), report_json(result, cfg));
    result.first_repeat_params.save((out / "checkpoint.bin").string());
    save_vocabulary(result.vocab, (out / "vocab.tsv").string());
    export_graph_artifacts(result.hypergraph, flags.out_dir);

    ModelConfigFile mcf;
    mcf.cfg.input_dim = result.hypergraph.num_edges();
    mcf.cfg.hidden_dim = result.chosen.hidden;
    mcf.cfg.num_classes = result.hypergraph.label_names.size();
    mcf.cfg.leaky_slope = result.chosen.leaky_slope;
    mcf.cfg.attention = result.chosen.attention;
    mcf.cfg.activation = result.chosen.activation;
    mcf.cfg.node_features = result.chosen.node_features;
    mcf.cfg.layers = result.chosen.layers;
    mcf.save((out / "model.json").string());

    const double rest = (1.0 - cfg.train_fraction) / 2.0;
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
        SplitAssignment split = make_split(
            corpus, {cfg.train_fraction, rest, 1.0 - cfg.train_fraction - rest},
            cfg.master_seed + r, cfg.stratified);
        export_split(split, (out / ("split" + std::to_string(r) + ".tsv")).string());
    }

    {
        IncidencePatterns patterns = incidence_patterns(result.hypergraph);
        ForwardPass pass(result.hypergraph, patterns, one_hot_edge_features(result.hypergraph),
                         result.first_repeat_params, mcf.cfg, false, 0, false);
        export_attention(result.hypergraph, pass.trace(), (out / "attention.tsv").string());
    }

    ordered_json manifest;
    manifest["command"] = "train";
    manifest["input"] = {{"path", flags.input}, {"fnv1a64", fnv1a_file(flags.input)}};
    manifest["tokenizer"] = flags.tokenizer.json(cfg.tokenizer);
    manifest["config"] = {{"lr", result.chosen.lr},
                          {"hidden", result.chosen.hidden},
                          {"dropout", result.chosen.dropout},
                          {"weight_decay", result.chosen.weight_decay},
                          {"max_epochs", result.chosen.max_epochs},
                          {"patience", result.chosen.patience},
                          {"attention", result.chosen.attention},
                          {"activation", activation_str(result.chosen.activation)},
                          {"layers", result.chosen.layers},
                          {"grid", flags.grid},
                          {"repeats", cfg.repeats},
                          {"master_seed", cfg.master_seed},
                          {"train_fraction", cfg.train_fraction},
                          {"stratified", cfg.stratified}};
    manifest["artifacts"] = {"report.json", "checkpoint.bin", "model.json", "vocab.tsv",
                             "incidence.tsv", "labels.tsv", "nodes.txt", "attention.tsv"};
    write_text((out / "manifest.json").string(), manifest.dump(2) + "\n");

    auto pct = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f%%", 100.0 * v);
        return std::string(buf);
    };
    std::cout << "graph: nodes=" << result.graph_stats.n << " hyperedges=" << result.graph_stats.m
              << " nnz=" << result.graph_stats.nnz << "\n";
    for (std::size_t r = 0; r < result.repeats.size(); ++r) {
        const Scores& s = result.repeats[r].test_metrics.macro;
        std::cout << "repeat " << r << ": test P=" << pct(s.precision) << " R=" << pct(s.recall)
                  << " F1=" << pct(s.f1) << " (best epoch " << result.repeats[r].best_epoch << ")\n";
    }
    const Scores& mean = result.mean_test.macro;
    std::cout << "mean test (macro): P=" << pct(mean.precision) << " R=" << pct(mean.recall)
              << " F1=" << pct(mean.f1) << "\n";
    std::cout << "report: " << (out / "report.json").string() << "\n";
    return 0;
}

SequenceHypergraph load_graph_dir(const std::string& dir) {
    const fs::path p(dir);
    return import_hypergraph((p / "incidence.tsv").string(), (p / "labels.tsv").string(),
                             (p / "nodes.txt").string());
}

int cmd_evaluate(const std::string& checkpoint, const std::string& graph_dir,
                 const std::string& split_path) {
    SequenceHypergraph hg = load_graph_dir(graph_dir);
    ModelConfig cfg = ModelConfigFile::load((fs::path(graph_dir) / "model.json").string());
    ParamStore params = ParamStore::load(checkpoint);

    IncidencePatterns patterns = incidence_patterns(hg);
    ForwardPass pass(hg, patterns, one_hot_edge_features(hg), params, cfg, false, 0, false);
    std::vector<std::size_t> preds = argmax_rows(pass.logits());

    auto report = [&](const char* name, const std::vector<std::size_t>& ids) {
        if (ids.empty()) return;
        std::vector<std::size_t> p, t;
        for (std::size_t id : ids) {
            if (id >= hg.num_edges()) throw DataError("split id out of range: " + std::to_string(id));
            p.push_back(preds[id]);
            t.push_back(hg.labels[id]);
        }
        Scores macro = evaluate(p, t, Averaging::macro);
        Scores weighted = evaluate(p, t, Averaging::weighted);
        std::cout << name << ": macro P=" << macro.precision << " R=" << macro.recall
                  << " F1=" << macro.f1 << " | weighted P=" << weighted.precision
                  << " R=" << weighted.recall << " F1=" << weighted.f1 << "\n";
    };

    if (split_path.empty()) {
        std::vector<std::size_t> all(hg.num_edges());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        report("all", all);
    } else {
        SplitAssignment split = import_split(split_path);
        report("train", split.train_ids);
        report("val", split.val_ids);
        report("test", split.test_ids);
    }
    return 0;
}

int cmd_inspect(const std::string& checkpoint, const std::string& graph_dir,
                std::size_t sequence_id, std::size_t top_n) {
    SequenceHypergraph hg = load_graph_dir(graph_dir);
    if (sequence_id >= hg.num_edges()) {
        throw DataError("unknown sequence id " + std::to_string(sequence_id) + " (have " +
                        std::to_string(hg.num_edges()) + " hyperedges)");
    }
    ModelConfig cfg = ModelConfigFile::load((fs::path(graph_dir) / "model.json").string());
    ParamStore params = ParamStore::load(checkpoint);

    IncidencePatterns patterns = incidence_patterns(hg);
    ForwardPass pass(hg, patterns, one_hot_edge_features(hg), params, cfg, false, 0, false);
    ForwardTrace trace = pass.trace();

    // delta for members of this hyperedge, from the node-major enumeration
    std::vector<std::pair<double, std::size_t>> members;
    std::size_t k = 0;
    for (std::size_t i = 0; i < hg.num_nodes(); ++i) {
        for (std::size_t j : hg.node_edges[i]) {
            if (j == sequence_id) members.emplace_back(trace.delta[k], i);
            ++k;
        }
    }
    std::sort(members.begin(), members.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::cout << "sequence " << sequence_id << " label=" << hg.label_names[hg.labels[sequence_id]]
              << " members=" << members.size() << "\n";
    for (std::size_t i = 0; i < std::min(top_n, members.size()); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6f", members[i].first);
        std::cout << (i + 1) << "\t" << hg.node_names[members[i].second] << "\t" << buf << "\n";
    }
    return 0;
}

void add_tokenizer_flags(CLI::App* cmd, TokenizerFlags& tf) {
    cmd->add_option("--method", tf.method, "Subsequence method: kmer or espf")
        ->check(CLI::IsMember({"kmer", "espf"}));
    cmd->add_option("--k", tf.k, "k-mer window length");
    cmd->add_option("--beta-freq", tf.beta_freq, "ESPF pair-frequency threshold");
    cmd->add_option("--max-vocab", tf.max_vocab, "ESPF merge cap (0 = unlimited)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sequence classification with a two-level attention hypergraph network"};
    app.require_subcommand(1);

    std::string tk_input, tk_format = "auto", tk_out;
    TokenizerFlags tk_flags;
    CLI::App* tokenize = app.add_subcommand("tokenize", "Build a subsequence vocabulary and token lists");
    tokenize->add_option("--input", tk_input, "Input corpus (csv or fasta-like)")->required();
    tokenize->add_option("--format", tk_format, "csv, fasta or auto");
    add_tokenizer_flags(tokenize, tk_flags);
    tokenize->add_option("--out", tk_out, "Output directory")->required();

    std::string bg_input, bg_format = "auto", bg_out;
    TokenizerFlags bg_flags;
    CLI::App* build_graph = app.add_subcommand("build-graph", "Construct and export the sequence hypergraph");
    build_graph->add_option("--input", bg_input, "Input corpus")->required();
    build_graph->add_option("--format", bg_format, "csv, fasta or auto");
    add_tokenizer_flags(build_graph, bg_flags);
    build_graph->add_option("--out", bg_out, "Output directory")->required();

    TrainFlags tr;
    CLI::App* train = app.add_subcommand("train", "Train the model with repeated splits");
    train->add_option("--input", tr.input, "Input corpus")->required();
    train->add_option("--format", tr.format, "csv, fasta or auto");
    add_tokenizer_flags(train, tr.tokenizer);
    train->add_option("--tokenizer-config", tr.tokenizer.config_file, "key=value tokenizer config");
    train->add_option("--config", tr.config_file, "key=value training config");
    train->add_flag("--grid", tr.grid, "Grid-search hyperparameters on the first split");
    train->add_option("--repeats", tr.repeats, "Number of repeated splits");
    train->add_option("--seed", tr.seed, "Master seed");
    train->add_option("--train-fraction", tr.train_fraction, "Training fraction (rest splits evenly)");
    train->add_flag("--no-attention", tr.no_attention, "Mean aggregation instead of attention");
    train->add_flag("--stratified", tr.stratified, "Stratify splits by class");
    train->add_option("--out-dir", tr.out_dir, "Output directory")->required();

    std::string ev_checkpoint, ev_graph, ev_split;
    CLI::App* evaluate = app.add_subcommand("evaluate", "Score a checkpoint on a stored graph");
    evaluate->add_option("--checkpoint", ev_checkpoint, "checkpoint.bin path")->required();
    evaluate->add_option("--graph", ev_graph, "Directory with incidence.tsv/labels.tsv/nodes.txt/model.json")
        ->required();
    evaluate->add_option("--split", ev_split, "Optional split manifest (id<TAB>bucket)");

    std::string in_checkpoint, in_graph;
    std::size_t in_seq = 0, in_top = 10;
    CLI::App* inspect = app.add_subcommand("inspect-attention", "Rank a sequence's subsequences by attention");
    inspect->add_option("--checkpoint", in_checkpoint, "checkpoint.bin path")->required();
    inspect->add_option("--graph", in_graph, "Directory with graph artifacts")->required();
    inspect->add_option("--sequence-id", in_seq, "Hyperedge id to inspect")->required();
    inspect->add_option("--top", in_top, "How many members to print");

    try {
        app.parse(argc, argv);
        if (tokenize->parsed()) return cmd_tokenize(tk_input, tk_format, tk_flags, tk_out);
        if (build_graph->parsed()) return cmd_build_graph(bg_input, bg_format, bg_flags, bg_out);
        if (train->parsed()) return cmd_train(tr);
        if (evaluate->parsed()) return cmd_evaluate(ev_checkpoint, ev_graph, ev_split);
        if (inspect->parsed()) return cmd_inspect(in_checkpoint, in_graph, in_seq, in_top);
        return 1;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

#include "seqhygan/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "seqhygan/errors.hpp"

namespace seqhygan {

std::uint64_t seed_mix(std::uint64_t a, std::uint64_t b) {
    // splitmix64 over the combined words
    std::uint64_t x = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

namespace {

struct Masks {
    std::vector<std::uint8_t> train;
    std::vector<std::uint8_t> val;
    std::vector<std::uint8_t> test;
};

Masks build_masks(const SequenceHypergraph& hg, const SplitAssignment& split) {
    Masks m;
    m.train.assign(hg.num_edges(), 0);
    m.val.assign(hg.num_edges(), 0);
    m.test.assign(hg.num_edges(), 0);
    for (std::size_t id : split.train_ids) m.train.at(id) = 1;
    for (std::size_t id : split.val_ids) m.val.at(id) = 1;
    for (std::size_t id : split.test_ids) m.test.at(id) = 1;
    return m;
}

std::vector<double> class_weights(const SequenceHypergraph& hg, const Masks& masks,
                                  const TrainConfig& cfg) {
    std::vector<double> w(hg.label_names.size(), 1.0);
    if (!cfg.inverse_freq_weights) return w;
    std::vector<std::size_t> counts(hg.label_names.size(), 0);
    std::size_t total = 0;
    for (std::size_t j = 0; j < hg.num_edges(); ++j) {
        if (masks.train[j]) {
            ++counts[hg.labels[j]];
            ++total;
        }
    }
    // normalized so the mean train-sample weight is 1
    for (std::size_t c = 0; c < w.size(); ++c) {
        w[c] = counts[c] == 0 ? 1.0
                              : static_cast<double>(total) /
                                    (static_cast<double>(w.size()) * static_cast<double>(counts[c]));
    }
    return w;
}

MetricsPair metrics_on(const std::vector<std::size_t>& preds, const SequenceHypergraph& hg,
                       const std::vector<std::size_t>& ids) {
    std::vector<std::size_t> p, t;
    p.reserve(ids.size());
    t.reserve(ids.size());
    for (std::size_t id : ids) {
        p.push_back(preds[id]);
        t.push_back(hg.labels[id]);
    }
    MetricsPair out;
    out.macro = evaluate(p, t, Averaging::macro);
    out.weighted = evaluate(p, t, Averaging::weighted);
    return out;
}

ModelConfig model_config(const SequenceHypergraph& hg, const TrainConfig& cfg) {
    ModelConfig mc;
    mc.input_dim = hg.num_edges(); // one-hot hyperedge features
    mc.hidden_dim = cfg.hidden;
    mc.num_classes = hg.label_names.size();
    mc.leaky_slope = cfg.leaky_slope;
    mc.dropout = cfg.dropout;
    mc.attention = cfg.attention;
    mc.activation = cfg.activation;
    mc.node_features = cfg.node_features;
    mc.layers = cfg.layers;
    return mc;
}

nlohmann::ordered_json scores_json(const Scores& s) {
    return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

nlohmann::ordered_json metrics_json(const MetricsPair& m) {
    return {{"macro", scores_json(m.macro)}, {"weighted", scores_json(m.weighted)}};
}

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::leaky_relu: return "leaky_relu";
        case Activation::identity: return "identity";
    }
    return "relu";
}

} // namespace

TrainOutcome train_once(const SequenceHypergraph& hg, const SplitAssignment& split,
                        const TrainConfig& cfg) {
    const Masks masks = build_masks(hg, split);
    const std::vector<double> weights = class_weights(hg, masks, cfg);
    const ModelConfig mcfg = model_config(hg, cfg);
    const Matrix x0 = one_hot_edge_features(hg);
    const IncidencePatterns patterns = incidence_patterns(hg);

    ParamStore params = init_parameters(hg, mcfg, cfg.seed);
    ParamStore best_params = params;
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t best_epoch = 0;
    std::size_t bad_epochs = 0;

    RepeatOutcome stats;
    stats.split_seed = split.seed;
    stats.train_seed = cfg.seed;

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        double train_loss, val_loss;
        try {
            ForwardPass train_pass(hg, patterns, x0, params, mcfg, /*train_mode=*/true,
                                   seed_mix(cfg.seed, epoch), /*build_grad=*/true);
            train_loss = train_pass.loss(hg.labels, masks.train, weights);
            train_pass.backward();
            adam_step(params, train_pass.param_grads(), cfg.lr, cfg.weight_decay);

            ForwardPass val_pass(hg, patterns, x0, params, mcfg, /*train_mode=*/false, 0,
                                 /*build_grad=*/false);
            val_loss = val_pass.loss(hg.labels, masks.val, weights);
        } catch (const NumericError& e) {
            throw NumericError("training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
        }
        stats.train_curve.push_back(train_loss);
        stats.val_curve.push_back(val_loss);
        stats.epochs_run = epoch;

        if (val_loss < best_val - cfg.improve_tol) {
            best_val = val_loss;
            best_epoch = epoch;
            best_params = params;
            bad_epochs = 0;
        } else {
            ++bad_epochs;
        }
        if (bad_epochs >= std::max<std::size_t>(cfg.patience, 1)) break;
    }

    stats.best_epoch = best_epoch;
    stats.best_val_loss = best_val;

    ForwardPass final_pass(hg, patterns, x0, best_params, mcfg, /*train_mode=*/false, 0,
                           /*build_grad=*/false);
    const std::vector<std::size_t> preds = argmax_rows(final_pass.logits());
    stats.val_metrics = metrics_on(preds, hg, split.val_ids);
    stats.test_metrics = metrics_on(preds, hg, split.test_ids);

    TrainOutcome out;
    out.best_params = std::move(best_params);
    out.stats = std::move(stats);
    return out;
}

TrainConfig grid_search(const SequenceHypergraph& hg, const SplitAssignment& split,
                        const GridSpec& grid, const TrainConfig& base, SelectionMetric metric) {
    if (grid.lr.empty() || grid.hidden.empty() || grid.dropout.empty() || grid.weight_decay.empty()) {
        throw std::invalid_argument("grid_search: every grid dimension must be non-empty");
    }
    TrainConfig best_cfg = base;
    double best_score = -std::numeric_limits<double>::infinity();
    double best_loss = std::numeric_limits<double>::infinity();
    bool first = true;
    for (double lr : grid.lr) {
        for (std::size_t hidden : grid.hidden) {
            for (double dropout : grid.dropout) {
                for (double wd : grid.weight_decay) {
                    TrainConfig cand = base;
                    cand.lr = lr;
                    cand.hidden = hidden;
                    cand.dropout = dropout;
                    cand.weight_decay = wd;
                    TrainOutcome out = train_once(hg, split, cand);
                    const double score = metric == SelectionMetric::val_f1
                                             ? out.stats.val_metrics.macro.f1
                                             : -out.stats.best_val_loss;
                    const double loss = out.stats.best_val_loss;
                    if (first || score > best_score ||
                        (score == best_score && loss < best_loss)) {
                        first = false;
                        best_score = score;
                        best_loss = loss;
                        best_cfg = cand;
                    }
                }
            }
        }
    }
    return best_cfg;
}

ExperimentResult run_experiment(const LabeledCorpus& corpus, const ExperimentConfig& cfg) {
    if (cfg.repeats < 1) throw std::invalid_argument("run_experiment: repeats must be >= 1");
    if (cfg.train_fraction <= 0.0 || cfg.train_fraction >= 1.0) {
        throw std::invalid_argument("run_experiment: train_fraction must be in (0,1)");
    }

    CorpusTokenization tok = tokenize_corpus(corpus, cfg.tokenizer);
    ExperimentResult result;
    result.hypergraph = build_hypergraph(corpus, tok.tokens);
    result.vocab = std::move(tok.vocab);
    result.graph_stats = stats(result.hypergraph);

    const double rest = (1.0 - cfg.train_fraction) / 2.0;
    const std::array<double, 3> ratio = {cfg.train_fraction, rest, 1.0 - cfg.train_fraction - rest};

    result.chosen = cfg.train;
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
        SplitAssignment split = make_split(corpus, ratio, cfg.master_seed + r, cfg.stratified);
        if (r == 0 && cfg.grid) {
            TrainConfig base = cfg.train;
            base.seed = seed_mix(cfg.master_seed, 0);
            result.chosen = grid_search(result.hypergraph, split, *cfg.grid, base);
        }
        TrainConfig tc = result.chosen;
        tc.seed = seed_mix(cfg.master_seed, r);
        TrainOutcome out = train_once(result.hypergraph, split, tc);
        if (r == 0) result.first_repeat_params = std::move(out.best_params);
        result.repeats.push_back(std::move(out.stats));
    }

    auto add = [](Scores& acc, const Scores& s) {
        acc.precision += s.precision;
        acc.recall += s.recall;
        acc.f1 += s.f1;
    };
    for (const RepeatOutcome& r : result.repeats) {
        add(result.mean_test.macro, r.test_metrics.macro);
        add(result.mean_test.weighted, r.test_metrics.weighted);
    }
    const double inv = 1.0 / static_cast<double>(result.repeats.size());
    for (Scores* s : {&result.mean_test.macro, &result.mean_test.weighted}) {
        s->precision *= inv;
        s->recall *= inv;
        s->f1 *= inv;
    }
    return result;
}

std::string report_json(const ExperimentResult& result, const ExperimentConfig& cfg) {
    nlohmann::ordered_json j;
    j["seqhygan_report"] = 1;
    if (cfg.tokenizer.method == TokenizeMethod::kmer) {
        j["tokenizer"] = {{"method", "kmer"}, {"k", cfg.tokenizer.k}};
    } else {
        j["tokenizer"] = {{"method", "espf"},
                          {"beta_freq", cfg.tokenizer.beta_freq},
                          {"max_merges", cfg.tokenizer.max_merges}};
    }
    j["graph"] = {{"nodes", result.graph_stats.n},
                  {"edges", result.graph_stats.m},
                  {"nnz", result.graph_stats.nnz},
                  {"kappa", result.graph_stats.kappa},
                  {"chi", result.graph_stats.chi}};
    const TrainConfig& t = result.chosen;
    j["config"] = {{"lr", t.lr},
                   {"hidden", t.hidden},
                   {"dropout", t.dropout},
                   {"weight_decay", t.weight_decay},
                   {"max_epochs", t.max_epochs},
                   {"patience", t.patience},
                   {"attention", t.attention},
                   {"activation", activation_name(t.activation)},
                   {"layers", t.layers},
                   {"inverse_freq_weights", t.inverse_freq_weights},
                   {"grid_searched", cfg.grid.has_value()},
                   {"master_seed", cfg.master_seed},
                   {"repeats", cfg.repeats},
                   {"train_fraction", cfg.train_fraction},
                   {"stratified", cfg.stratified}};
    j["repeats"] = nlohmann::ordered_json::array();
    for (const RepeatOutcome& r : result.repeats) {
        nlohmann::ordered_json rj;
        rj["split_seed"] = r.split_seed;
        rj["train_seed"] = r.train_seed;
        rj["best_epoch"] = r.best_epoch;
        rj["epochs_run"] = r.epochs_run;
        rj["best_val_loss"] = r.best_val_loss;
        rj["val"] = metrics_json(r.val_metrics);
        rj["test"] = metrics_json(r.test_metrics);
        rj["curve"] = {{"train", r.train_curve}, {"val", r.val_curve}};
        j["repeats"].push_back(std::move(rj));
    }
    j["mean_test"] = metrics_json(result.mean_test);
    return j.dump(2) + "\n";
}

} // namespace seqhygan

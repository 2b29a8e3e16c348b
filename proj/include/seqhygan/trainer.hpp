#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "seqhygan/corpus.hpp"
#include "seqhygan/hypergraph.hpp"
#include "seqhygan/metrics.hpp"
#include "seqhygan/model.hpp"
#include "seqhygan/tokenize.hpp"

namespace seqhygan {

struct TrainConfig {
    double lr = 1e-2;
    std::size_t hidden = 32;
    double dropout = 0.1;
    double weight_decay = 1e-2;
    std::size_t max_epochs = 1000;
    std::size_t patience = 200;
    double improve_tol = 1e-6; // val loss must improve by more than this
    bool attention = true;
    Activation activation = Activation::relu;
    double leaky_slope = 0.01;
    NodeFeatureMode node_features = NodeFeatureMode::edge_mean;
    std::size_t layers = 1;
    bool inverse_freq_weights = false;
    std::uint64_t seed = 0;
};

struct MetricsPair {
    Scores macro;
    Scores weighted;
};

struct RepeatOutcome {
    std::uint64_t split_seed = 0;
    std::uint64_t train_seed = 0;
    std::size_t best_epoch = 0; // 1-based epoch whose parameters were kept
    std::size_t epochs_run = 0;
    double best_val_loss = 0.0;
    std::vector<double> train_curve;
    std::vector<double> val_curve;
    MetricsPair val_metrics;
    MetricsPair test_metrics;
};

struct TrainOutcome {
    ParamStore best_params;
    RepeatOutcome stats;
};

// Full-batch transductive training: the loss sees only train-masked
// hyperedges; validation loss drives early stopping (stop after `patience`
// consecutive epochs without improvement > improve_tol; patience 0 stops at
// the first non-improving epoch); parameters restore to the best epoch.
TrainOutcome train_once(const SequenceHypergraph& hg, const SplitAssignment& split,
                        const TrainConfig& cfg);

struct GridSpec {
    std::vector<double> lr = {1e-2, 5e-2, 1e-3, 5e-3};
    std::vector<std::size_t> hidden = {32, 64, 128};
    std::vector<double> dropout = {0.1, 0.5};
    std::vector<double> weight_decay = {1e-2, 1e-3};

    std::size_t size() const { return lr.size() * hidden.size() * dropout.size() * weight_decay.size(); }
};

enum class SelectionMetric { val_f1, val_loss };

// Exhaustive product in declaration order (lr outermost, weight_decay
// innermost). Best validation macro F1 wins; ties fall to lower validation
// loss, then earlier enumeration.
TrainConfig grid_search(const SequenceHypergraph& hg, const SplitAssignment& split,
                        const GridSpec& grid, const TrainConfig& base,
                        SelectionMetric metric = SelectionMetric::val_f1);

struct ExperimentConfig {
    TokenizerSpec tokenizer;
    TrainConfig train;
    std::optional<GridSpec> grid; // searched once on repeat 0's split
    std::size_t repeats = 5;
    std::uint64_t master_seed = 0;
    double train_fraction = 0.8; // val/test split the remainder evenly
    bool stratified = false;
};

struct ExperimentResult {
    TrainConfig chosen;
    HypergraphStats graph_stats;
    std::vector<RepeatOutcome> repeats;
    MetricsPair mean_test;
    ParamStore first_repeat_params;
    SequenceHypergraph hypergraph;
    SubseqVocabulary vocab;
};

ExperimentResult run_experiment(const LabeledCorpus& corpus, const ExperimentConfig& cfg);

// Deterministic JSON rendering of the experiment (fixed key order, no
// timestamps): identical runs serialize to identical bytes.
std::string report_json(const ExperimentResult& result, const ExperimentConfig& cfg);

std::uint64_t seed_mix(std::uint64_t a, std::uint64_t b);

} // namespace seqhygan

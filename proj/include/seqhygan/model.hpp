#pragma once

#include <cstdint>
#include <vector>

#include "seqhygan/hypergraph.hpp"
#include "seqhygan/matrix.hpp"
#include "seqhygan/optimizer.hpp"
#include "seqhygan/tape.hpp"

namespace seqhygan {

enum class Activation { relu, leaky_relu, identity };
enum class NodeFeatureMode { edge_mean, one_hot };

struct ModelConfig {
    std::size_t input_dim = 0;  // f, hyperedge feature width
    std::size_t hidden_dim = 0; // f'
    std::size_t num_classes = 0;
    double leaky_slope = 0.01; // attention score activation
    double dropout = 0.0;
    bool attention = true;          // false reproduces plain mean aggregation
    Activation activation = Activation::relu; // aggregation nonlinearity
    NodeFeatureMode node_features = NodeFeatureMode::edge_mean;
    std::size_t layers = 1;
};

// One-hot rows, one per hyperedge (f = m).
Matrix one_hot_edge_features(const SequenceHypergraph& hg);

// Layer-0 node features: the unweighted mean of incident hyperedge rows of
// X0, or one-hot node ids.
Matrix initial_node_features(const SequenceHypergraph& hg, const Matrix& edge_features,
                             NodeFeatureMode mode);

std::size_t node_feature_dim(const SequenceHypergraph& hg, const ModelConfig& cfg);

// Incidence in mask form for the two softmax directions.
struct IncidencePatterns {
    SparsityPattern node_major; // n x m, row i = hyperedges of node i
    SparsityPattern edge_major; // m x n, row j = nodes of hyperedge j
};

IncidencePatterns incidence_patterns(const SequenceHypergraph& hg);

// Glorot-initialized weights. Per layer: W1 transforms hyperedge features
// into node aggregates, W2/W3 produce hyperedge-on-node attention scores,
// W4 transforms node features into hyperedge aggregates, W5/W6 produce
// node-in-hyperedge scores. Wc projects the final hyperedge representation
// onto class logits.
ParamStore init_parameters(const SequenceHypergraph& hg, const ModelConfig& cfg, std::uint64_t seed);

struct ForwardTrace {
    Matrix node_reps;   // n x f'
    Matrix edge_reps;   // m x f'
    Matrix logits;      // m x C
    // Aligned with the node-major nonzero enumeration (i ascending, then j):
    // gamma[k] is edge j's attention on node i, delta[k] node i's attention
    // inside edge j. Per node the gammas sum to 1, per edge the deltas.
    std::vector<double> gamma;
    std::vector<double> delta;
};

// One forward evaluation; owns the tape. patterns must outlive the pass.
class ForwardPass {
public:
    ForwardPass(const SequenceHypergraph& hg, const IncidencePatterns& patterns,
                const Matrix& edge_features, ParamStore& params, const ModelConfig& cfg,
                bool train_mode, std::uint64_t dropout_seed, bool build_grad);

    // Mean over masked hyperedges of class-weighted softmax cross-entropy.
    double loss(const std::vector<std::size_t>& labels, const std::vector<std::uint8_t>& mask,
                const std::vector<double>& class_weights);
    void backward(); // after loss()
    std::vector<Matrix> param_grads() const; // aligned with ParamStore order
    const Matrix& logits_grad() const;       // after backward()

    const Matrix& logits() const { return tape_.value(logits_); }
    ForwardTrace trace() const;

private:
    Tape tape_;
    const SequenceHypergraph& hg_;
    const IncidencePatterns& patterns_;
    std::vector<Var> param_vars_;
    Var node_reps_;
    Var edge_reps_;
    Var gamma_;
    Var delta_;
    Var logits_;
    Var loss_{-1};
};

std::vector<std::size_t> argmax_rows(const Matrix& logits);

// `node<TAB>edge<TAB>gamma<TAB>delta` per incidence nonzero.
void export_attention(const SequenceHypergraph& hg, const ForwardTrace& trace,
                      const std::string& path);

} // namespace seqhygan

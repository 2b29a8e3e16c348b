#include "seqhygan/model.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "seqhygan/errors.hpp"

namespace seqhygan {

Matrix one_hot_edge_features(const SequenceHypergraph& hg) {
    return Matrix::identity(hg.num_edges());
}

Matrix initial_node_features(const SequenceHypergraph& hg, const Matrix& edge_features,
                             NodeFeatureMode mode) {
    if (mode == NodeFeatureMode::one_hot) return Matrix::identity(hg.num_nodes());
    Matrix m0(hg.num_nodes(), edge_features.cols);
    for (std::size_t i = 0; i < hg.num_nodes(); ++i) {
        const auto& edges = hg.node_edges[i];
        const double inv = 1.0 / static_cast<double>(edges.size());
        double* row = m0.row_ptr(i);
        for (std::size_t j : edges) {
            const double* erow = edge_features.row_ptr(j);
            for (std::size_t c = 0; c < edge_features.cols; ++c) row[c] += erow[c];
        }
        for (std::size_t c = 0; c < edge_features.cols; ++c) row[c] *= inv;
    }
    return m0;
}

std::size_t node_feature_dim(const SequenceHypergraph& hg, const ModelConfig& cfg) {
    return cfg.node_features == NodeFeatureMode::one_hot ? hg.num_nodes() : cfg.input_dim;
}

IncidencePatterns incidence_patterns(const SequenceHypergraph& hg) {
    IncidencePatterns p;
    p.node_major = SparsityPattern::from_rows(hg.num_nodes(), hg.num_edges(), hg.node_edges);
    p.edge_major = SparsityPattern::from_rows(hg.num_edges(), hg.num_nodes(), hg.edge_nodes);
    return p;
}

ParamStore init_parameters(const SequenceHypergraph& hg, const ModelConfig& cfg, std::uint64_t seed) {
    if (cfg.input_dim < 1 || cfg.hidden_dim < 1 || cfg.num_classes < 1) {
        throw std::invalid_argument("init_parameters: dimensions must be >= 1");
    }
    if (cfg.layers < 1) throw std::invalid_argument("init_parameters: layers must be >= 1");
    std::mt19937_64 rng(seed);
    ParamStore ps;
    const std::size_t fp = cfg.hidden_dim;
    std::size_t edge_in = cfg.input_dim;
    std::size_t node_in = node_feature_dim(hg, cfg);
    for (std::size_t l = 0; l < cfg.layers; ++l) {
        const std::string prefix = "layer" + std::to_string(l) + ".";
        ps.add(prefix + "W1", glorot_uniform(edge_in, fp, rng));
        ps.add(prefix + "W2", glorot_uniform(edge_in, fp, rng));
        ps.add(prefix + "W3", glorot_uniform(node_in, fp, rng));
        ps.add(prefix + "W4", glorot_uniform(fp, fp, rng));
        ps.add(prefix + "W5", glorot_uniform(fp, fp, rng));
        ps.add(prefix + "W6", glorot_uniform(edge_in, fp, rng));
        edge_in = fp;
        node_in = fp;
    }
    ps.add("Wc", glorot_uniform(cfg.num_classes, fp, rng));
    return ps;
}

namespace {

// Row-normalized incidence: the constant aggregation weights used when
// attention is disabled.
Matrix mean_weights(const SparsityPattern& pattern) {
    Matrix w(pattern.rows, pattern.cols);
    for (std::size_t r = 0; r < pattern.rows; ++r) {
        const auto& cs = pattern.row_cols[r];
        if (cs.empty()) continue;
        const double inv = 1.0 / static_cast<double>(cs.size());
        for (std::size_t c : cs) w(r, c) = inv;
    }
    return w;
}

} // namespace

ForwardPass::ForwardPass(const SequenceHypergraph& hg, const IncidencePatterns& patterns,
                         const Matrix& edge_features, ParamStore& params, const ModelConfig& cfg,
                         bool train_mode, std::uint64_t dropout_seed, bool build_grad)
    : hg_(hg), patterns_(patterns) {
    if (edge_features.rows != hg.num_edges() || edge_features.cols != cfg.input_dim) {
        throw std::invalid_argument("forward: edge features must be " +
                                    std::to_string(hg.num_edges()) + "x" +
                                    std::to_string(cfg.input_dim) + ", got " +
                                    edge_features.shape_str());
    }
    param_vars_.reserve(params.count());
    for (std::size_t i = 0; i < params.count(); ++i) {
        param_vars_.push_back(tape_.input(params.entry(i).value, params.entry(i).name, build_grad));
    }
    auto param = [&](std::size_t layer, const char* name) {
        return param_vars_[layer * 6 + (name[1] - '1')];
    };

    std::mt19937_64 dropout_rng(dropout_seed);
    auto act = [&](Var v) {
        switch (cfg.activation) {
            case Activation::relu: return tape_.relu(v);
            case Activation::leaky_relu: return tape_.leaky_relu(v, cfg.leaky_slope);
            case Activation::identity: return v;
        }
        return v;
    };

    Var edges_prev = tape_.input(edge_features, "X0");
    Var nodes_prev = tape_.input(initial_node_features(hg, edge_features, cfg.node_features), "M0");
    const bool use_dropout = train_mode && cfg.dropout > 0.0;

    for (std::size_t l = 0; l < cfg.layers; ++l) {
        // Hyperedge-level attention: aggregate incident hyperedges per node.
        Var gamma;
        if (cfg.attention) {
            Var scores = tape_.leaky_relu(
                tape_.matmul(tape_.matmul(nodes_prev, param(l, "W3")),
                             tape_.transpose(tape_.matmul(edges_prev, param(l, "W2")))),
                cfg.leaky_slope);
            gamma = tape_.row_softmax_masked(scores, patterns_.node_major);
        } else {
            gamma = tape_.input(mean_weights(patterns_.node_major), "mean_node_weights");
        }
        Var node_reps = act(tape_.matmul(gamma, tape_.matmul(edges_prev, param(l, "W1"))));
        if (use_dropout) node_reps = tape_.dropout(node_reps, cfg.dropout, dropout_rng);

        // Node-level attention: aggregate member nodes per hyperedge.
        Var delta;
        if (cfg.attention) {
            Var scores = tape_.leaky_relu(
                tape_.matmul(tape_.matmul(edges_prev, param(l, "W6")),
                             tape_.transpose(tape_.matmul(node_reps, param(l, "W5")))),
                cfg.leaky_slope);
            delta = tape_.row_softmax_masked(scores, patterns_.edge_major);
        } else {
            delta = tape_.input(mean_weights(patterns_.edge_major), "mean_edge_weights");
        }
        Var edge_reps = act(tape_.matmul(delta, tape_.matmul(node_reps, param(l, "W4"))));
        if (use_dropout) edge_reps = tape_.dropout(edge_reps, cfg.dropout, dropout_rng);

        gamma_ = gamma;
        delta_ = delta;
        node_reps_ = node_reps;
        edge_reps_ = edge_reps;
        nodes_prev = node_reps;
        edges_prev = edge_reps;
    }

    logits_ = tape_.matmul(edges_prev, tape_.transpose(param_vars_.back()));
}

double ForwardPass::loss(const std::vector<std::size_t>& labels,
                         const std::vector<std::uint8_t>& mask,
                         const std::vector<double>& class_weights) {
    loss_ = tape_.masked_cross_entropy(logits_, labels, mask, class_weights);
    return tape_.value(loss_).data[0];
}

void ForwardPass::backward() {
    if (!loss_.valid()) throw std::logic_error("ForwardPass::backward called before loss()");
    tape_.backward(loss_);
}

std::vector<Matrix> ForwardPass::param_grads() const {
    std::vector<Matrix> grads;
    grads.reserve(param_vars_.size());
    for (Var v : param_vars_) {
        const Matrix& g = tape_.grad(v);
        if (g.size() == 0) {
            grads.emplace_back(tape_.value(v).rows, tape_.value(v).cols);
        } else {
            grads.push_back(g);
        }
    }
    return grads;
}

const Matrix& ForwardPass::logits_grad() const {
    return tape_.grad(logits_);
}

ForwardTrace ForwardPass::trace() const {
    ForwardTrace t;
    t.node_reps = tape_.value(node_reps_);
    t.edge_reps = tape_.value(edge_reps_);
    t.logits = tape_.value(logits_);
    const Matrix& g = tape_.value(gamma_);
    const Matrix& d = tape_.value(delta_);
    t.gamma.reserve(hg_.nnz);
    t.delta.reserve(hg_.nnz);
    for (std::size_t i = 0; i < hg_.num_nodes(); ++i) {
        for (std::size_t j : hg_.node_edges[i]) {
            t.gamma.push_back(g(i, j));
            t.delta.push_back(d(j, i));
        }
    }
    return t;
}

std::vector<std::size_t> argmax_rows(const Matrix& logits) {
    std::vector<std::size_t> out(logits.rows);
    for (std::size_t r = 0; r < logits.rows; ++r) {
        const double* row = logits.row_ptr(r);
        std::size_t best = 0;
        for (std::size_t c = 1; c < logits.cols; ++c) {
            if (row[c] > row[best]) best = c;
        }
        out[r] = best;
    }
    return out;
}

void export_attention(const SequenceHypergraph& hg, const ForwardTrace& trace,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write attention file: " + path);
    char buf[64];
    std::size_t k = 0;
    for (std::size_t i = 0; i < hg.num_nodes(); ++i) {
        for (std::size_t j : hg.node_edges[i]) {
            std::snprintf(buf, sizeof(buf), "%.17g\t%.17g", trace.gamma[k], trace.delta[k]);
            out << i << "\t" << j << "\t" << buf << "\n";
            ++k;
        }
    }
    if (!out) throw DataError("short write: " + path);
}

} // namespace seqhygan

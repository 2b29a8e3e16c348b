#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "seqhygan/matrix.hpp"

namespace seqhygan {

// Row->columns mask for softmax normalized over a set of positions per row.
// The hypergraph incidence structure is handed to the model in this form
// (node-major and edge-major).
struct SparsityPattern {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::vector<std::size_t>> row_cols;
    std::size_t nnz = 0;

    static SparsityPattern from_rows(std::size_t rows, std::size_t cols,
                                     std::vector<std::vector<std::size_t>> row_cols);
};

struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

// Define-by-run reverse-mode tape over Matrix values. Each op records a
// backward closure; backward() replays them in reverse creation order.
// Every forward result is checked for non-finite entries and fails fast
// with the op name. All kernels accumulate per output element in a fixed
// sequential order, so values and gradients are bit-identical for any
// worker count.
class Tape {
public:
    Var input(Matrix value, std::string name = "input", bool requires_grad = false);

    Var matmul(Var a, Var b);
    Var transpose(Var a);
    Var add(Var a, Var b);
    Var mul(Var a, Var b); // elementwise
    Var scale(Var a, double s);
    Var relu(Var a);
    Var leaky_relu(Var a, double slope);
    // Softmax per row over the mask's positions; entries off the mask are 0.
    // The pattern must outlive the tape.
    Var row_softmax_masked(Var scores, const SparsityPattern& mask);
    // Inverted-scaling dropout; the mask is drawn sequentially from rng.
    Var dropout(Var a, double rate, std::mt19937_64& rng);
    Var reduce_sum(Var a); // 1x1
    // Mean over masked rows of class_weights[label] * softmax cross-entropy.
    Var masked_cross_entropy(Var logits, const std::vector<std::size_t>& labels,
                             const std::vector<std::uint8_t>& row_mask,
                             const std::vector<double>& class_weights);

    void backward(Var root);

    const Matrix& value(Var v) const { return nodes_[v.id].value; }
    const Matrix& grad(Var v) const { return nodes_[v.id].grad; }
    std::size_t rows(Var v) const { return nodes_[v.id].value.rows; }
    std::size_t cols(Var v) const { return nodes_[v.id].value.cols; }

private:
    struct Node {
        Matrix value;
        Matrix grad;
        std::string op;
        bool requires_grad = false;
        std::function<void()> backward_fn;
    };

    Var emit(Matrix value, std::string op, bool requires_grad, std::function<void()> backward_fn);
    Var leaky_relu_impl(Var a, double slope, const char* op);
    void check_finite(const Matrix& m, const std::string& op) const;
    Matrix& grad_ref(int id);

    std::vector<Node> nodes_;
};

} // namespace seqhygan

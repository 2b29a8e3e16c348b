#include "seqhygan/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "seqhygan/errors.hpp"
#include "seqhygan/threading.hpp"

namespace seqhygan {

SparsityPattern SparsityPattern::from_rows(std::size_t rows, std::size_t cols,
                                           std::vector<std::vector<std::size_t>> row_cols) {
    SparsityPattern p;
    p.rows = rows;
    p.cols = cols;
    p.row_cols = std::move(row_cols);
    for (auto& cs : p.row_cols) p.nnz += cs.size();
    return p;
}

void Tape::check_finite(const Matrix& m, const std::string& op) const {
    if (!all_finite(m)) {
        throw NumericError(op + " produced a non-finite value");
    }
}

Matrix& Tape::grad_ref(int id) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0) n.grad = Matrix(n.value.rows, n.value.cols);
    return n.grad;
}

Var Tape::emit(Matrix value, std::string op, bool requires_grad, std::function<void()> backward_fn) {
    check_finite(value, op);
    Node n;
    n.value = std::move(value);
    n.op = std::move(op);
    n.requires_grad = requires_grad;
    n.backward_fn = std::move(backward_fn);
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::input(Matrix value, std::string name, bool requires_grad) {
    return emit(std::move(value), std::move(name), requires_grad, nullptr);
}

Var Tape::matmul(Var a, Var b) {
    const Matrix& av = value(a);
    const Matrix& bv = value(b);
    if (av.cols != bv.rows) {
        throw std::invalid_argument("matmul: shape mismatch " + av.shape_str() + " * " + bv.shape_str());
    }
    bool rg = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
    Var out{static_cast<int>(nodes_.size())};
    auto fn = [this, a, b, out] {
        const Matrix& g = nodes_[out.id].grad;
        if (nodes_[a.id].requires_grad) {
            add_in_place(grad_ref(a.id), seqhygan::matmul(g, seqhygan::transpose(value(b))));
        }
        if (nodes_[b.id].requires_grad) {
            add_in_place(grad_ref(b.id), seqhygan::matmul(seqhygan::transpose(value(a)), g));
        }
    };
    return emit(seqhygan::matmul(av, bv), "matmul", rg, rg ? std::function<void()>(fn) : nullptr);
}

Var Tape::transpose(Var a) {
    bool rg = nodes_[a.id].requires_grad;
    Var out{static_cast<int>(nodes_.size())};
    auto fn = [this, a, out] {
        add_in_place(grad_ref(a.id), seqhygan::transpose(nodes_[out.id].grad));
    };
    return emit(seqhygan::transpose(value(a)), "transpose", rg, rg ? std::function<void()>(fn) : nullptr);
}

Var Tape::add(Var a, Var b) {
    const Matrix& av = value(a);
    const Matrix& bv = value(b);
    if (!av.same_shape(bv)) {
        throw std::invalid_argument("add: shape mismatch " + av.shape_str() + " + " + bv.shape_str());
    }
    bool rg = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
    Matrix out_v = av;
    add_in_place(out_v, bv);
    Var out{static_cast<int>(nodes_.size())};
    auto fn = [this, a, b, out] {
        const Matrix& g = nodes_[out.id].grad;
        if (nodes_[a.id].requires_grad) add_in_place(grad_ref(a.id), g);
        if (nodes_[b.id].requires_grad) add_in_place(grad_ref(b.id), g);
    };
    return emit(std::move(out_v), "add", rg, rg ? std::function<void()>(fn) : nullptr);
}

Var Tape::mul(Var a, Var b) {
    const Matrix& av = value(a);
    const Matrix& bv = value(b);
    if (!av.same_shape(bv)) {
        throw std::invalid_argument("mul: shape mismatch " + av.shape_str() + " .* " + bv.shape_str());
    }
    bool rg = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
    Matrix out_v(av.rows, av.cols);
    parallel_for(out_v.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) out_v.data[i] = av.data[i] * bv.data[i];
    });
    Var out{static_cast<int>(nodes_.size())};
    auto fn = [this, a, b, out] {
        const Matrix& g = nodes_[out.id].grad;
        if (nodes_[a.id].requires_grad) {
            Matrix& ga = grad_ref(a.id);
            const Matrix& bv2 = value(b);
            parallel_for(g.size(), [&](std::size_t lo, std::size_t hi) {
                for (std::size_t i = lo; i < hi; ++i) ga.data[i] += g.data[i] * bv2.data[i];
            });
        }
        if (nodes_[b.id].requires_grad) {
            Matrix& gb = grad_ref(b.id);
            const Matrix& av2 = value(a);
            parallel_for(g.size(), [&](std::size_t lo, std::size_t hi) {
                for (std::size_t i = lo; i < hi; ++i) gb.data[i] += g.data[i] * av2.data[i];
            });
        }
    };
    return emit(std::move(out_v), "mul", rg, rg ? std::function<void()>(fn) : nullptr);
}

Var Tape::scale(Var a, double s) {
    const Matrix& av = value(a);
    bool rg = nodes_[a.id].requires_grad;
    Matrix out_v(av.rows, av.cols);
    parallel_for(out_v.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) out_v.data[i] = s * av.data[i];
    });
    Var out{static_cast<int>(nodes_.size())};
    auto fn = [this, a, out, s] {
        axpy_in_place(grad_ref(a.id), s, nodes_[out.id].grad);
    };
    return emit(std::move(out_v), "scale", rg, rg ? std::function<void()>(fn) : nullptr);
}

Var Tape::relu(Var a) {
    return leaky_relu_impl(a, 0.0, "relu");
}

Var Tape::leaky_relu(Var a, double slope) {
    return leaky_relu_impl(a, slope, "leaky_relu");
}

Var Tape::leaky_relu_impl(Var a, double slope, const char* op) {
    const Matrix& av = value(a);
    bool rg = nodes_[a.id].requires_grad;
    Matrix out_v(av.rows, av.cols);
    parallel_for(out_v.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            double x = av.data[i];
            out_v.data[i] = x > 0.0 ? x : slope * x;
        }
    });
    Var out{static_cast<int>(nodes_.size())};
    auto fn = [this, a, out, slope] {
        const Matrix& g = nodes_[out.id].grad;
        const Matrix& av2 = value(a);
        Matrix& ga = grad_ref(a.id);
        parallel_for(g.size(), [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                ga.data[i] += g.data[i] * (av2.data[i] > 0.0 ? 1.0 : slope);
            }
        });
    };
    return emit(std::move(out_v), op, rg, rg ? std::function<void()>(fn) : nullptr);
}

Var Tape::row_softmax_masked(Var scores, const SparsityPattern& mask) {
    const Matrix& sv = value(scores);
    if (sv.rows != mask.rows || sv.cols != mask.cols) {
        throw std::invalid_argument("row_softmax_masked: shape mismatch scores " + sv.shape_str() +
                                    " vs mask " + std::to_string(mask.rows) + "x" + std::to_string(mask.cols));
    }
    bool rg = nodes_[scores.id].requires_grad;
    Matrix out_v(sv.rows, sv.cols);
    const SparsityPattern* mp = &mask;
    parallel_for(sv.rows, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t r = lo; r < hi; ++r) {
            const auto& cs = mp->row_cols[r];
            if (cs.empty()) continue;
            double mx = sv(r, cs[0]);
            for (std::size_t c : cs) mx = std::max(mx, sv(r, c));
            double denom = 0.0;
            for (std::size_t c : cs) denom += std::exp(sv(r, c) - mx);
            for (std::size_t c : cs) out_v(r, c) = std::exp(sv(r, c) - mx) / denom;
        }
    });
    Var out{static_cast<int>(nodes_.size())};
    auto fn = [this, scores, out, mp] {
        const Matrix& g = nodes_[out.id].grad;
        const Matrix& y = nodes_[out.id].value;
        Matrix& gs = grad_ref(scores.id);
        parallel_for(y.rows, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t r = lo; r < hi; ++r) {
                const auto& cs = mp->row_cols[r];
                double dot = 0.0;
                for (std::size_t c : cs) dot += g(r, c) * y(r, c);
                for (std::size_t c : cs) gs(r, c) += y(r, c) * (g(r, c) - dot);
            }
        });
    };
    return emit(std::move(out_v), "row_softmax_masked", rg, rg ? std::function<void()>(fn) : nullptr);
}

Var Tape::dropout(Var a, double rate, std::mt19937_64& rng) {
    if (rate < 0.0 || rate >= 1.0) {
        throw std::invalid_argument("dropout: rate must be in [0,1), got " + std::to_string(rate));
    }
    const Matrix& av = value(a);
    bool rg = nodes_[a.id].requires_grad;
    // Mask drawn sequentially so the stream does not depend on threading.
    Matrix mask(av.rows, av.cols);
    const double keep_scale = 1.0 / (1.0 - rate);
    for (double& v : mask.data) v = uniform_unit(rng) >= rate ? keep_scale : 0.0;
    Matrix out_v(av.rows, av.cols);
    parallel_for(out_v.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) out_v.data[i] = av.data[i] * mask.data[i];
    });
    Var out{static_cast<int>(nodes_.size())};
    auto fn = [this, a, out, mask = std::move(mask)] {
        const Matrix& g = nodes_[out.id].grad;
        Matrix& ga = grad_ref(a.id);
        parallel_for(g.size(), [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) ga.data[i] += g.data[i] * mask.data[i];
        });
    };
    return emit(std::move(out_v), "dropout", rg, rg ? std::function<void()>(fn) : nullptr);
}

Var Tape::reduce_sum(Var a) {
    const Matrix& av = value(a);
    bool rg = nodes_[a.id].requires_grad;
    double total = 0.0;
    for (double v : av.data) total += v;
    Matrix out_v(1, 1);
    out_v.data[0] = total;
    Var out{static_cast<int>(nodes_.size())};
    auto fn = [this, a, out] {
        double g = nodes_[out.id].grad.data[0];
        Matrix& ga = grad_ref(a.id);
        parallel_for(ga.size(), [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) ga.data[i] += g;
        });
    };
    return emit(std::move(out_v), "reduce_sum", rg, rg ? std::function<void()>(fn) : nullptr);
}

Var Tape::masked_cross_entropy(Var logits, const std::vector<std::size_t>& labels,
                               const std::vector<std::uint8_t>& row_mask,
                               const std::vector<double>& class_weights) {
    const Matrix& z = value(logits);
    if (labels.size() != z.rows || row_mask.size() != z.rows) {
        throw std::invalid_argument("masked_cross_entropy: expected " + std::to_string(z.rows) +
                                    " labels/mask entries");
    }
    if (class_weights.size() != z.cols) {
        throw std::invalid_argument("masked_cross_entropy: expected " + std::to_string(z.cols) +
                                    " class weights");
    }
    std::size_t count = 0;
    for (std::uint8_t m : row_mask) count += m ? 1 : 0;
    if (count == 0) throw DataError("masked_cross_entropy: empty mask");

    bool rg = nodes_[logits.id].requires_grad;
    double total = 0.0;
    for (std::size_t r = 0; r < z.rows; ++r) {
        if (!row_mask[r]) continue;
        const double* row = z.row_ptr(r);
        double mx = row[0];
        for (std::size_t c = 1; c < z.cols; ++c) mx = std::max(mx, row[c]);
        double denom = 0.0;
        for (std::size_t c = 0; c < z.cols; ++c) denom += std::exp(row[c] - mx);
        total += class_weights[labels[r]] * (std::log(denom) + mx - row[labels[r]]);
    }
    Matrix out_v(1, 1);
    out_v.data[0] = total / static_cast<double>(count);

    Var out{static_cast<int>(nodes_.size())};
    auto fn = [this, logits, out, labels, row_mask, class_weights, count] {
        double g = nodes_[out.id].grad.data[0] / static_cast<double>(count);
        const Matrix& z2 = value(logits);
        Matrix& gz = grad_ref(logits.id);
        parallel_for(z2.rows, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t r = lo; r < hi; ++r) {
                if (!row_mask[r]) continue;
                const double* row = z2.row_ptr(r);
                double* grow = gz.row_ptr(r);
                double mx = row[0];
                for (std::size_t c = 1; c < z2.cols; ++c) mx = std::max(mx, row[c]);
                double denom = 0.0;
                for (std::size_t c = 0; c < z2.cols; ++c) denom += std::exp(row[c] - mx);
                const double w = g * class_weights[labels[r]];
                for (std::size_t c = 0; c < z2.cols; ++c) {
                    double p = std::exp(row[c] - mx) / denom;
                    grow[c] += w * (p - (c == labels[r] ? 1.0 : 0.0));
                }
            }
        });
    };
    return emit(std::move(out_v), "masked_cross_entropy", rg, rg ? std::function<void()>(fn) : nullptr);
}

void Tape::backward(Var root) {
    const Matrix& rv = value(root);
    if (rv.rows != 1 || rv.cols != 1) {
        throw std::invalid_argument("backward: root must be a 1x1 scalar, got " + rv.shape_str());
    }
    grad_ref(root.id).data[0] = 1.0;
    for (int i = root.id; i >= 0; --i) {
        Node& n = nodes_[i];
        if (n.backward_fn && n.grad.size() != 0) n.backward_fn();
    }
}

} // namespace seqhygan

#include "seqhygan/optimizer.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "seqhygan/errors.hpp"
#include "seqhygan/threading.hpp"

namespace seqhygan {

namespace {

// Checkpoints are raw little-endian fp64. x86-64 and every target we build
// on are little-endian; refuse to silently corrupt elsewhere.
void require_little_endian() {
    const std::uint16_t probe = 1;
    char b;
    std::memcpy(&b, &probe, 1);
    if (b != 1) throw std::runtime_error("checkpoint I/O requires a little-endian host");
}

} // namespace

void ParamStore::add(const std::string& name, Matrix init) {
    if (index_.count(name)) throw std::invalid_argument("duplicate parameter name: " + name);
    index_[name] = entries_.size();
    Entry e;
    e.name = name;
    e.m = Matrix(init.rows, init.cols);
    e.v = Matrix(init.rows, init.cols);
    e.value = std::move(init);
    entries_.push_back(std::move(e));
}

Matrix& ParamStore::value(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::invalid_argument("unknown parameter: " + name);
    return entries_[it->second].value;
}

const Matrix& ParamStore::value(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::invalid_argument("unknown parameter: " + name);
    return entries_[it->second].value;
}

void ParamStore::save(const std::string& path) const {
    require_little_endian();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint: " + path);
    out << "seqhygan-checkpoint 1\n" << entries_.size() << "\n";
    for (const Entry& e : entries_) {
        out << e.name << " " << e.value.rows << " " << e.value.cols << "\n";
    }
    for (const Entry& e : entries_) {
        out.write(reinterpret_cast<const char*>(e.value.data.data()),
                  static_cast<std::streamsize>(e.value.data.size() * sizeof(double)));
    }
    if (!out) throw DataError("short write while saving checkpoint: " + path);
}

ParamStore ParamStore::load(const std::string& path) {
    require_little_endian();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    std::string magic;
    int version = 0;
    std::size_t n = 0;
    in >> magic >> version >> n;
    if (magic != "seqhygan-checkpoint" || version != 1) {
        throw DataError("not a seqhygan checkpoint: " + path);
    }
    ParamStore ps;
    std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> shapes(n);
    for (std::size_t i = 0; i < n; ++i) {
        in >> shapes[i].first >> shapes[i].second.first >> shapes[i].second.second;
    }
    in.ignore(1); // trailing newline before payload
    if (!in) throw DataError("truncated checkpoint header: " + path);
    for (std::size_t i = 0; i < n; ++i) {
        Matrix m(shapes[i].second.first, shapes[i].second.second);
        in.read(reinterpret_cast<char*>(m.data.data()),
                static_cast<std::streamsize>(m.data.size() * sizeof(double)));
        if (!in) throw DataError("truncated checkpoint payload: " + path);
        ps.add(shapes[i].first, std::move(m));
    }
    return ps;
}

void adam_step(ParamStore& params, const std::vector<Matrix>& grads, double lr,
               double weight_decay, double beta1, double beta2, double eps) {
    if (lr <= 0.0) throw std::invalid_argument("adam_step: lr must be positive");
    if (grads.size() != params.count()) {
        throw std::invalid_argument("adam_step: expected " + std::to_string(params.count()) + " gradients");
    }
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (!grads[i].same_shape(params.entry(i).value)) {
            throw std::invalid_argument("adam_step: gradient shape mismatch for " + params.entry(i).name);
        }
        if (!all_finite(grads[i])) {
            throw NumericError("adam_step: non-finite gradient for " + params.entry(i).name);
        }
    }
    params.step_ += 1;
    const double t = static_cast<double>(params.step_);
    const double bc1 = 1.0 - std::pow(beta1, t);
    const double bc2 = 1.0 - std::pow(beta2, t);
    for (std::size_t i = 0; i < grads.size(); ++i) {
        ParamStore::Entry& e = params.entries_[i];
        const Matrix& g = grads[i];
        parallel_for(e.value.size(), [&](std::size_t lo, std::size_t hi) {
            for (std::size_t k = lo; k < hi; ++k) {
                double gk = g.data[k] + weight_decay * e.value.data[k];
                e.m.data[k] = beta1 * e.m.data[k] + (1.0 - beta1) * gk;
                e.v.data[k] = beta2 * e.v.data[k] + (1.0 - beta2) * gk * gk;
                double mhat = e.m.data[k] / bc1;
                double vhat = e.v.data[k] / bc2;
                e.value.data[k] -= lr * mhat / (std::sqrt(vhat) + eps);
            }
        });
    }
}

} // namespace seqhygan

#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "seqhygan/matrix.hpp"

namespace seqhygan {

// Named parameters with Adam moment buffers, kept in insertion order so
// checkpoints and gradient vectors line up deterministically.
class ParamStore {
public:
    struct Entry {
        std::string name;
        Matrix value;
        Matrix m; // first moment
        Matrix v; // second moment
    };

    void add(const std::string& name, Matrix init);

    std::size_t count() const { return entries_.size(); }
    Entry& entry(std::size_t i) { return entries_[i]; }
    const Entry& entry(std::size_t i) const { return entries_[i]; }
    Matrix& value(const std::string& name);
    const Matrix& value(const std::string& name) const;
    bool has(const std::string& name) const { return index_.count(name) != 0; }

    std::int64_t step() const { return step_; }
    void set_step(std::int64_t s) { step_ = s; }

    // Binary checkpoint: text header with names/shapes, then raw
    // little-endian fp64 payloads (parameter values only). Exact round trip.
    void save(const std::string& path) const;
    static ParamStore load(const std::string& path);

private:
    friend void adam_step(ParamStore&, const std::vector<Matrix>&, double, double, double, double, double);
    std::vector<Entry> entries_;
    std::unordered_map<std::string, std::size_t> index_;
    std::int64_t step_ = 0;
};

// Adam with bias correction. Weight decay enters as loss-coupled L2:
// g += weight_decay * p before the moment updates.
void adam_step(ParamStore& params, const std::vector<Matrix>& grads, double lr,
               double weight_decay, double beta1 = 0.9, double beta2 = 0.999,
               double eps = 1e-8);

} // namespace seqhygan

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "seqhygan/matrix.hpp"
#include "seqhygan/optimizer.hpp"

namespace seqhygan {

struct GradCheckEntry {
    std::string param;
    double max_rel_error = 0.0;
    std::size_t coords_checked = 0;
    bool pass = false;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    double worst = 0.0;
    bool all_pass = true;
};

// Central differences against the supplied analytic gradients, on a seeded
// random subsample of at most max_coords coordinates per parameter. loss_fn
// must be deterministic (dropout off); two forward passes that disagree fail
// fast. Relative error uses max(1, |analytic|, |numeric|) as denominator.
GradCheckReport grad_check(const std::function<double(const ParamStore&)>& loss_fn,
                           const std::function<std::vector<Matrix>(const ParamStore&)>& grad_fn,
                           ParamStore& params, double h = 1e-5, double tol = 1e-4,
                           std::size_t max_coords = 50, std::uint64_t seed = 0);

} // namespace seqhygan

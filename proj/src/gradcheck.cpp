#include "seqhygan/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "seqhygan/errors.hpp"

namespace seqhygan {

GradCheckReport grad_check(const std::function<double(const ParamStore&)>& loss_fn,
                           const std::function<std::vector<Matrix>(const ParamStore&)>& grad_fn,
                           ParamStore& params, double h, double tol,
                           std::size_t max_coords, std::uint64_t seed) {
    const double l0 = loss_fn(params);
    const double l1 = loss_fn(params);
    if (l0 != l1) {
        throw NumericError("grad_check: loss function is non-deterministic (" +
                           std::to_string(l0) + " vs " + std::to_string(l1) + ")");
    }

    const std::vector<Matrix> analytic = grad_fn(params);
    std::mt19937_64 rng(seed);

    GradCheckReport report;
    for (std::size_t p = 0; p < params.count(); ++p) {
        ParamStore::Entry& e = params.entry(p);
        const std::size_t total = e.value.size();
        std::vector<std::size_t> coords(total);
        for (std::size_t i = 0; i < total; ++i) coords[i] = i;
        if (total > max_coords) {
            // Partial Fisher-Yates: first max_coords entries are the sample.
            for (std::size_t i = 0; i < max_coords; ++i) {
                std::size_t j = i + static_cast<std::size_t>(uniform_index(rng, total - i));
                std::swap(coords[i], coords[j]);
            }
            coords.resize(max_coords);
        }

        GradCheckEntry entry;
        entry.param = e.name;
        entry.coords_checked = coords.size();
        for (std::size_t k : coords) {
            const double orig = e.value.data[k];
            e.value.data[k] = orig + h;
            const double lp = loss_fn(params);
            e.value.data[k] = orig - h;
            const double lm = loss_fn(params);
            e.value.data[k] = orig;
            const double numeric = (lp - lm) / (2.0 * h);
            const double ana = analytic[p].data[k];
            const double denom = std::max({1.0, std::abs(ana), std::abs(numeric)});
            entry.max_rel_error = std::max(entry.max_rel_error, std::abs(ana - numeric) / denom);
        }
        entry.pass = entry.max_rel_error < tol;
        report.worst = std::max(report.worst, entry.max_rel_error);
        report.all_pass = report.all_pass && entry.pass;
        report.entries.push_back(std::move(entry));
    }
    return report;
}

} // namespace seqhygan

#pragma once

#include <cstddef>
#include <vector>

namespace seqhygan {

struct ConfusionMatrix {
    std::size_t num_classes = 0;
    std::vector<std::size_t> counts; // row-major, rows = true, cols = predicted

    std::size_t& at(std::size_t truth, std::size_t pred) { return counts[truth * num_classes + pred]; }
    std::size_t at(std::size_t truth, std::size_t pred) const { return counts[truth * num_classes + pred]; }
    std::size_t total() const;
};

ConfusionMatrix confusion_matrix(const std::vector<std::size_t>& predictions,
                                 const std::vector<std::size_t>& truths);

enum class Averaging { macro, weighted };

struct Scores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Per-class precision/recall/F1 with 0/0 defined as 0, averaged over the
// classes present in truths or predictions. macro is the unweighted mean;
// weighted uses truth support. F1 is averaged from per-class F1 values.
Scores evaluate(const std::vector<std::size_t>& predictions,
                const std::vector<std::size_t>& truths, Averaging averaging);

} // namespace seqhygan

#include "seqhygan/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace seqhygan {

std::size_t ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

ConfusionMatrix confusion_matrix(const std::vector<std::size_t>& predictions,
                                 const std::vector<std::size_t>& truths) {
    if (predictions.size() != truths.size()) {
        throw std::invalid_argument("confusion_matrix: got " + std::to_string(predictions.size()) +
                                    " predictions for " + std::to_string(truths.size()) + " truths");
    }
    if (predictions.empty()) {
        throw std::invalid_argument("confusion_matrix: need at least one sample");
    }
    std::size_t c = 0;
    for (std::size_t v : predictions) c = std::max(c, v + 1);
    for (std::size_t v : truths) c = std::max(c, v + 1);
    ConfusionMatrix cm;
    cm.num_classes = c;
    cm.counts.assign(c * c, 0);
    for (std::size_t i = 0; i < truths.size(); ++i) ++cm.at(truths[i], predictions[i]);
    return cm;
}

Scores evaluate(const std::vector<std::size_t>& predictions,
                const std::vector<std::size_t>& truths, Averaging averaging) {
    const ConfusionMatrix cm = confusion_matrix(predictions, truths);
    const std::size_t c = cm.num_classes;

    Scores out;
    double weight_total = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
        std::size_t tp = cm.at(k, k);
        std::size_t support = 0, predicted = 0;
        for (std::size_t j = 0; j < c; ++j) {
            support += cm.at(k, j);
            predicted += cm.at(j, k);
        }
        if (support == 0 && predicted == 0) continue; // class absent from this evaluation
        double p = predicted == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(predicted);
        double r = support == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(support);
        double f1 = (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
        double w = averaging == Averaging::macro ? 1.0 : static_cast<double>(support);
        out.precision += w * p;
        out.recall += w * r;
        out.f1 += w * f1;
        weight_total += w;
    }
    if (weight_total > 0.0) {
        out.precision /= weight_total;
        out.recall /= weight_total;
        out.f1 /= weight_total;
    }
    return out;
}

} // namespace seqhygan

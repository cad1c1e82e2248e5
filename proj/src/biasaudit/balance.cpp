#include "eba/biasaudit.hpp"
#include "eba/error.hpp"

#include <cmath>

namespace eba::bias {

std::vector<std::size_t> cluster_counts(const Assignment& assignment, int k) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(std::max(k, 0)), 0);
    for (int label : assignment.labels) {
        if (label < 0 || label >= k) {
            throw Error(ErrorKind::InvalidParams, "label " + std::to_string(label) + " outside [0," + std::to_string(k) + ")");
        }
        ++counts[static_cast<std::size_t>(label)];
    }
    return counts;
}

double dataset_entropy(const Assignment& assignment, int k) {
    if (assignment.labels.empty()) throw Error(ErrorKind::EmptyAssignment, "entropy of an empty assignment");
    const auto counts = cluster_counts(assignment, k);
    const double n = static_cast<double>(assignment.labels.size());
    double h = 0.0;
    for (std::size_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / n;
        h -= p * std::log(p);
    }
    return h;
}

double normalized_entropy(const Assignment& assignment, int k) {
    const double h = dataset_entropy(assignment, k);
    std::size_t occupied = 0;
    for (std::size_t c : cluster_counts(assignment, k)) occupied += c > 0 ? 1 : 0;
    if (occupied <= 1) return 0.0;
    return std::clamp(h / std::log(static_cast<double>(occupied)), 0.0, 1.0);
}

Weights reweight(const Assignment& assignment) {
    if (assignment.labels.empty()) throw Error(ErrorKind::EmptyAssignment, "reweight of an empty assignment");
    int k = 0;
    for (int label : assignment.labels) {
        if (label < 0) throw Error(ErrorKind::InvalidParams, "negative cluster label");
        k = std::max(k, label + 1);
    }
    const auto counts = cluster_counts(assignment, k);
    std::size_t occupied = 0;
    for (std::size_t c : counts) occupied += c > 0 ? 1 : 0;

    const double n = static_cast<double>(assignment.labels.size());
    Weights w;
    w.w.reserve(assignment.labels.size());
    for (int label : assignment.labels) {
        w.w.push_back(n / (static_cast<double>(occupied) * static_cast<double>(counts[static_cast<std::size_t>(label)])));
    }
    return w;
}

double weighted_aggregate(std::span<const double> values, const Weights& weights) {
    if (values.size() != weights.w.size()) {
        throw Error(ErrorKind::LengthMismatch,
                    std::to_string(values.size()) + " values vs " + std::to_string(weights.w.size()) + " weights");
    }
    if (values.empty()) throw Error(ErrorKind::EmptyInput, "weighted aggregate of nothing");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        num += weights.w[i] * values[i];
        den += weights.w[i];
    }
    return num / den;
}

}  // namespace eba::bias

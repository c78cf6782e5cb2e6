#include "vcal/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vcal {

namespace {
constexpr double kSimTolerance = 1e-6;
}

Threshold::Threshold(double value) : value_(value) {
    if (!(value > -1.0 && value < 1.0)) {
        throw std::invalid_argument("threshold must lie strictly inside (-1, 1), got " +
                                    std::to_string(value));
    }
}

double clamp_similarity(double s) {
    if (!std::isfinite(s) || s < -1.0 - kSimTolerance || s > 1.0 + kSimTolerance) {
        throw RangeError("similarity out of range [-1, 1]: " + std::to_string(s));
    }
    return std::clamp(s, -1.0, 1.0);
}

PairRecord make_record(double similarity, int label) {
    if (label != -1 && label != 1) {
        throw RangeError("label must be -1 or +1, got " + std::to_string(label));
    }
    return PairRecord{clamp_similarity(similarity), label};
}

std::size_t Dataset::count_label(int label) const {
    return static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(),
                      [label](const PairRecord& r) { return r.label == label; }));
}

int predict(double s, Threshold tau) {
    return s >= tau.value() ? +1 : -1;
}

double phi(double s, Threshold tau) {
    const double t = tau.value();
    if (predict(s, tau) == +1) {
        return (s - t) / (1.0 - t);
    }
    return (t - s) / (1.0 + t);
}

double confidence(double s, Threshold tau) {
    return 0.5 * phi(s, tau) + 0.5;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw RangeError("embedding dimension mismatch: " + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()));
    }
    if (a.empty()) {
        throw RangeError("empty embedding vector");
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) {
        throw RangeError("zero-norm embedding vector");
    }
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

}  // namespace vcal

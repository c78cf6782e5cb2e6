#pragma once

#include <cstddef>
#include <vector>

#include "vcal/core.hpp"

namespace vcal {

enum class BinScheme { equal_width, equal_frequency };

struct BinReport {
    double lo;
    double hi;
    std::size_t count;
    double accuracy;
    double mean_confidence;
};

struct EceReport {
    double ece;
    BinScheme scheme;
    int m_bins;
    std::vector<BinReport> bins;
};

struct RocPoint {
    double threshold;
    double tar;
    double far;
};

struct FarThreshold {
    Threshold threshold;
    double tar;
    double far;
    // False when fewer than ceil(1/far_target) negatives were available.
    bool enough_negatives;
};

// Expected calibration error over confidences c(s, tau). Equal-width
// bins tile [0.5, 1] with width 1/(2M), last bin closed; equal-frequency
// bins split the confidence-sorted sample into M groups whose sizes
// differ by at most one.
EceReport ece(const Dataset& dataset, Threshold tau, int m_bins, BinScheme scheme);

// Fraction of records whose decision matches the label.
double accuracy(const Dataset& dataset, Threshold tau);

// Mean of c(s_i, tau) over the dataset.
double mean_confidence(const Dataset& dataset, Threshold tau);

// One point per candidate threshold: every distinct similarity, a -1
// accept-all sentinel, and a +1 reject-all sentinel.
std::vector<RocPoint> roc_curve(const Dataset& dataset);

// Smallest candidate threshold whose empirical FAR <= far_target.
FarThreshold threshold_at_far(const Dataset& dataset, double far_target);

// Threshold maximizing empirical accuracy; returns the midpoint of the
// optimal threshold interval.
Threshold best_accuracy_threshold(const Dataset& dataset);

// Trapezoidal area under the ROC; equals the Mann-Whitney statistic.
double auc(const Dataset& dataset);

}  // namespace vcal

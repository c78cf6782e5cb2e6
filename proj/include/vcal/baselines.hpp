#pragma once

#include <vector>

#include "vcal/core.hpp"

namespace vcal {

// Histogram binning over similarity: equal-width bins (a_m, a_{m+1}]
// covering (-1, 1], each assigned the mean label of its members.
struct HistogramModel {
    std::vector<double> boundaries;  // size M+1, endpoints exactly -1 and 1
    std::vector<double> scores;      // size M, each in [-1, 1]
    Threshold tau_raw;
    Threshold tau_calibrated;
};

// Isotonic regression: non-decreasing piecewise-constant map fitted by
// pool-adjacent-violators.
struct IsotonicModel {
    std::vector<double> breakpoints;  // sorted unique training similarities
    std::vector<double> levels;       // non-decreasing fitted values
    Threshold tau_raw;
    Threshold tau_calibrated;
};

// Empty bins get their score by linear interpolation between the
// nearest non-empty neighbors (constant extension at the ends). The
// threshold is remapped to its bin's score, nudged inward by 1e-6 when
// it sits exactly at +-1.
HistogramModel fit_histogram(const Dataset& dataset, Threshold tau, int m_bins);

// Score of the bin containing s; s = -1 falls in the first bin.
double apply_histogram(const HistogramModel& model, double s);

// Ties in s are pooled (weighted average) before PAVA.
IsotonicModel fit_isotonic(const Dataset& dataset, Threshold tau);

// Level of the rightmost breakpoint <= s; first level below all breakpoints.
double apply_isotonic(const IsotonicModel& model, double s);

}  // namespace vcal

#pragma once

#include <utility>

#include "vcal/core.hpp"

namespace vcal {

// Angular scaling calibration parameters: similarity is mapped to
// cos(clamp(arccos(s) * w + b, 0, pi)). w > 0 keeps the map
// order-preserving, so decisions against the remapped threshold agree
// with the raw ones.
struct AscParams {
    double w;
    double b;
    Threshold tau_raw;
    Threshold tau_calibrated;
};

struct FitConfig {
    int max_iterations = 1000;
    double learning_rate = 0.01;  // initial step scale before curvature info
    double tolerance = 1e-10;     // stop when loss improves by less than this
};

struct FitReport {
    double final_loss;
    int iterations;
    bool converged;
};

// arccos(s) in [0, pi].
double angle(double s);

// The angular affine map for a raw (w, b) pair.
double apply_angular(double w, double b, double s);

double apply(const AscParams& params, double s);

// Remap tau through the same angular map. Throws DegenerateThreshold
// when the result lands outside (-1, 1).
Threshold calibrated_threshold(double w, double b, Threshold tau_raw);
Threshold calibrated_threshold(const AscParams& params);

// Mean squared error between calibrated similarities and {-1,+1} labels.
double loss(const Dataset& dataset, double w, double b);

struct LossGradient {
    double value;
    double dw;
    double db;
};

// Analytic gradient of the loss. Records whose mapped angle clamps at
// 0 or pi contribute zero gradient.
LossGradient loss_and_gradient(const Dataset& dataset, double w, double b);

// Least-squares fit of (w, b) starting from the identity (1, 0).
// Throws SingleClassDataset unless both classes are present; propagates
// DegenerateThreshold from the final threshold remap.
std::pair<AscParams, FitReport> fit(const Dataset& dataset, Threshold tau,
                                    const FitConfig& config = {});

}  // namespace vcal

#include "vcal/asc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace vcal {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Precomputed angles and labels for one fit.
struct Problem {
    std::vector<double> theta;
    std::vector<double> y;
    double theta_tau;

    // The threshold angle must stay interior and its cosine must stay
    // away from the rounded-to +-1 poles, or the remapped threshold
    // degenerates.
    bool feasible(double w, double b) const {
        const double t = theta_tau * w + b;
        if (!(t > 0.0 && t < kPi)) return false;
        const double c = std::cos(t);
        return c > -1.0 && c < 1.0;
    }

    double loss(double w, double b) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double a = std::clamp(theta[i] * w + b, 0.0, kPi);
            const double r = std::cos(a) - y[i];
            acc += r * r;
        }
        return acc / static_cast<double>(theta.size());
    }

    LossGradient loss_and_gradient(double w, double b) const {
        double f = 0.0, dw = 0.0, db = 0.0;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double a = theta[i] * w + b;
            if (a <= 0.0) {
                const double r = 1.0 - y[i];
                f += r * r;
            } else if (a >= kPi) {
                const double r = -1.0 - y[i];
                f += r * r;
            } else {
                const double r = std::cos(a) - y[i];
                const double d = -2.0 * r * std::sin(a);
                f += r * r;
                dw += d * theta[i];
                db += d;
            }
        }
        const double n = static_cast<double>(theta.size());
        return LossGradient{f / n, dw / n, db / n};
    }
};

struct BfgsResult {
    double u;  // w = exp(u)
    double b;
    double loss;
    int iterations;
    bool converged;
};

// Two-variable BFGS on (u, b) with w = exp(u); the exp keeps w > 0
// without constraints. Points whose threshold angle leaves (0, pi)
// get infinite loss, so the line search backs away from them.
BfgsResult minimize(const Problem& prob, double u0, double b0, const FitConfig& cfg) {
    auto value = [&](double u, double b) {
        const double w = std::exp(u);
        if (!prob.feasible(w, b)) return kInf;
        return prob.loss(w, b);
    };
    auto value_grad = [&](double u, double b, double& gu, double& gb) {
        const double w = std::exp(u);
        if (!prob.feasible(w, b)) {
            gu = gb = 0.0;
            return kInf;
        }
        const LossGradient g = prob.loss_and_gradient(w, b);
        gu = g.dw * w;  // chain rule through w = exp(u)
        gb = g.db;
        return g.value;
    };

    double u = u0, b = b0;
    double gu, gb;
    double f = value_grad(u, b, gu, gb);
    BfgsResult res{u, b, f, 0, false};
    if (!std::isfinite(f)) return res;

    // Inverse Hessian approximation.
    double h11 = 1.0, h12 = 0.0, h22 = 1.0;

    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        double du = -(h11 * gu + h12 * gb);
        double dbb = -(h12 * gu + h22 * gb);
        double slope = du * gu + dbb * gb;
        if (slope >= 0.0) {  // not a descent direction, reset
            h11 = h22 = 1.0;
            h12 = 0.0;
            du = -gu;
            dbb = -gb;
            slope = -(gu * gu + gb * gb);
        }
        if (slope == 0.0) {
            res.converged = true;
            break;
        }

        double t = (iter == 0) ? cfg.learning_rate : 1.0;
        double fnew = kInf;
        for (int back = 0; back < 60; ++back) {
            fnew = value(u + t * du, b + t * dbb);
            if (fnew <= f + 1e-4 * t * slope) break;
            t *= 0.5;
        }
        if (!(fnew < f)) {
            res.converged = true;
            break;
        }

        const double su = t * du, sb = t * dbb;
        u += su;
        b += sb;
        double ngu, ngb;
        fnew = value_grad(u, b, ngu, ngb);
        const double yu = ngu - gu, yb = ngb - gb;
        const double sy = su * yu + sb * yb;
        if (sy > 1e-12) {
            const double rho = 1.0 / sy;
            // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
            const double a11 = 1.0 - rho * su * yu;
            const double a12 = -rho * su * yb;
            const double a21 = -rho * sb * yu;
            const double a22 = 1.0 - rho * sb * yb;
            const double t11 = a11 * h11 + a12 * h12;
            const double t12 = a11 * h12 + a12 * h22;
            const double t21 = a21 * h11 + a22 * h12;
            const double t22 = a21 * h12 + a22 * h22;
            h11 = t11 * a11 + t12 * a12 + rho * su * su;
            h12 = t11 * a21 + t12 * a22 + rho * su * sb;
            h22 = t21 * a21 + t22 * a22 + rho * sb * sb;
        }
        const double improvement = f - fnew;
        f = fnew;
        gu = ngu;
        gb = ngb;
        ++res.iterations;
        if (improvement < cfg.tolerance) {
            res.converged = true;
            break;
        }
    }
    res.u = u;
    res.b = b;
    res.loss = f;
    return res;
}

Problem build_problem(const Dataset& dataset, Threshold tau) {
    Problem prob;
    prob.theta.reserve(dataset.size());
    prob.y.reserve(dataset.size());
    for (const PairRecord& r : dataset.records) {
        prob.theta.push_back(angle(r.similarity));
        prob.y.push_back(static_cast<double>(r.label));
    }
    prob.theta_tau = angle(tau.value());
    return prob;
}

}  // namespace

double angle(double s) {
    return std::acos(std::clamp(s, -1.0, 1.0));
}

double apply_angular(double w, double b, double s) {
    return std::cos(std::clamp(angle(s) * w + b, 0.0, kPi));
}

double apply(const AscParams& params, double s) {
    return apply_angular(params.w, params.b, s);
}

Threshold calibrated_threshold(double w, double b, Threshold tau_raw) {
    const double t = apply_angular(w, b, tau_raw.value());
    if (!(t > -1.0 && t < 1.0)) {
        throw DegenerateThreshold("calibrated threshold lands at " + std::to_string(t));
    }
    return Threshold(t);
}

Threshold calibrated_threshold(const AscParams& params) {
    return calibrated_threshold(params.w, params.b, params.tau_raw);
}

double loss(const Dataset& dataset, double w, double b) {
    if (dataset.empty()) throw RangeError("loss on empty dataset");
    double acc = 0.0;
    for (const PairRecord& r : dataset.records) {
        const double d = apply_angular(w, b, r.similarity) - static_cast<double>(r.label);
        acc += d * d;
    }
    return acc / static_cast<double>(dataset.size());
}

LossGradient loss_and_gradient(const Dataset& dataset, double w, double b) {
    if (dataset.empty()) throw RangeError("loss on empty dataset");
    Problem prob;
    prob.theta_tau = kPi / 2.0;
    for (const PairRecord& r : dataset.records) {
        prob.theta.push_back(angle(r.similarity));
        prob.y.push_back(static_cast<double>(r.label));
    }
    return prob.loss_and_gradient(w, b);
}

std::pair<AscParams, FitReport> fit(const Dataset& dataset, Threshold tau,
                                    const FitConfig& config) {
    if (dataset.empty()) {
        throw RangeError("fit on empty dataset");
    }
    if (!dataset.has_both_classes()) {
        throw SingleClassDataset("recalibration set needs both positive and negative pairs");
    }

    const Problem prob = build_problem(dataset, tau);

    if (config.max_iterations <= 0) {
        AscParams params{1.0, 0.0, tau, calibrated_threshold(1.0, 0.0, tau)};
        return {params, FitReport{prob.loss(1.0, 0.0), 0, false}};
    }

    BfgsResult best = minimize(prob, 0.0, 0.0, config);
    int total_iterations = best.iterations;

    // The objective is periodic in the angle map and can trap a purely
    // local method; a coarse scan on a subsample picks a second start.
    Problem sub;
    sub.theta_tau = prob.theta_tau;
    {
        const std::size_t stride = std::max<std::size_t>(1, prob.theta.size() / 512);
        for (std::size_t i = 0; i < prob.theta.size(); i += stride) {
            sub.theta.push_back(prob.theta[i]);
            sub.y.push_back(prob.y[i]);
        }
        double best_coarse = kInf;
        double cw = 1.0, cb = 0.0;
        for (double w = 0.25; w <= 8.0 + 1e-9; w += 0.25) {
            for (double b = -3.25; b <= 3.25 + 1e-9; b += 0.25) {
                if (!sub.feasible(w, b)) continue;
                const double l = sub.loss(w, b);
                if (l < best_coarse) {
                    best_coarse = l;
                    cw = w;
                    cb = b;
                }
            }
        }
        if (std::isfinite(best_coarse)) {
            BfgsResult polished = minimize(prob, std::log(cw), cb, config);
            total_iterations += polished.iterations;
            if (polished.loss < best.loss) {
                best = polished;
            }
        }
    }

    // When the unconstrained minimum would clamp the threshold angle,
    // the feasible minimum sits on an edge of the admissible region.
    // Scan each edge in w with the threshold angle pinned just inside,
    // then refine the winner on the full data by golden section.
    const double inset = 1e-6;
    for (const double edge : {inset, kPi - inset}) {
        double coarse_w = -1.0, coarse_l = kInf;
        for (double w = 0.01; w <= 8.0 + 1e-9; w += 0.01) {
            const double b = edge - prob.theta_tau * w;
            if (!sub.feasible(w, b)) continue;
            const double l = sub.loss(w, b);
            if (l < coarse_l) {
                coarse_l = l;
                coarse_w = w;
            }
        }
        if (coarse_w < 0.0) continue;
        auto edge_loss = [&](double w) {
            const double b = edge - prob.theta_tau * w;
            return prob.feasible(w, b) ? prob.loss(w, b) : kInf;
        };
        double lo = std::max(1e-4, coarse_w - 0.01);
        double hi = std::min(8.0, coarse_w + 0.01);
        const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
        double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
        double f1 = edge_loss(x1), f2 = edge_loss(x2);
        while (hi - lo > 1e-7) {
            if (f1 < f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - gr * (hi - lo);
                f1 = edge_loss(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + gr * (hi - lo);
                f2 = edge_loss(x2);
            }
        }
        const double edge_w = f1 < f2 ? x1 : x2;
        const double edge_l = std::min(f1, f2);
        if (edge_l < best.loss) {
            best = BfgsResult{std::log(edge_w), edge - prob.theta_tau * edge_w, edge_l, 0, true};
        }
    }

    const double w = std::exp(best.u);
    AscParams params{w, best.b, tau, calibrated_threshold(w, best.b, tau)};
    return {params, FitReport{best.loss, total_iterations, best.converged}};
}

}  // namespace vcal

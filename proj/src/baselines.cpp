#include "vcal/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vcal {

namespace {

// Map a remapped score into a usable threshold: scores of exactly +-1
// are pushed inward so the confidence measure stays defined.
Threshold score_as_threshold(double eta) {
    if (eta >= 1.0) eta = 1.0 - 1e-6;
    if (eta <= -1.0) eta = -1.0 + 1e-6;
    if (!(eta > -1.0 && eta < 1.0)) {
        throw DegenerateThreshold("remapped threshold lands at " + std::to_string(eta));
    }
    return Threshold(eta);
}

// Bin index for s under (a_m, a_{m+1}] boundaries; s = -1 goes to bin 0.
std::size_t bin_index(const std::vector<double>& boundaries, double s) {
    auto it = std::lower_bound(boundaries.begin() + 1, boundaries.end(), s);
    if (it == boundaries.end()) --it;
    return static_cast<std::size_t>(it - boundaries.begin()) - 1;
}

}  // namespace

HistogramModel fit_histogram(const Dataset& dataset, Threshold tau, int m_bins) {
    if (dataset.empty()) throw RangeError("fit_histogram on empty dataset");
    if (m_bins < 1) throw RangeError("m_bins must be >= 1");

    const std::size_t m = static_cast<std::size_t>(m_bins);
    std::vector<double> boundaries(m + 1);
    for (std::size_t i = 0; i <= m; ++i) {
        boundaries[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(m);
    }
    boundaries.front() = -1.0;
    boundaries.back() = 1.0;

    std::vector<double> sum(m, 0.0);
    std::vector<std::size_t> count(m, 0);
    for (const PairRecord& r : dataset.records) {
        const std::size_t idx = bin_index(boundaries, r.similarity);
        sum[idx] += static_cast<double>(r.label);
        ++count[idx];
    }

    std::vector<double> scores(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        if (count[i] > 0) scores[i] = sum[i] / static_cast<double>(count[i]);
    }

    // Interpolate empty bins between their nearest non-empty neighbors.
    std::vector<std::size_t> nonempty;
    for (std::size_t i = 0; i < m; ++i) {
        if (count[i] > 0) nonempty.push_back(i);
    }
    for (std::size_t i = 0; i < m; ++i) {
        if (count[i] > 0) continue;
        auto right = std::lower_bound(nonempty.begin(), nonempty.end(), i);
        if (right == nonempty.begin()) {
            scores[i] = scores[nonempty.front()];
        } else if (right == nonempty.end()) {
            scores[i] = scores[nonempty.back()];
        } else {
            const std::size_t lo = *(right - 1), hi = *right;
            const double frac = static_cast<double>(i - lo) / static_cast<double>(hi - lo);
            scores[i] = scores[lo] + frac * (scores[hi] - scores[lo]);
        }
    }

    const double eta_t = scores[bin_index(boundaries, tau.value())];
    return HistogramModel{std::move(boundaries), std::move(scores), tau,
                          score_as_threshold(eta_t)};
}

double apply_histogram(const HistogramModel& model, double s) {
    return model.scores[bin_index(model.boundaries, s)];
}

IsotonicModel fit_isotonic(const Dataset& dataset, Threshold tau) {
    if (dataset.empty()) throw RangeError("fit_isotonic on empty dataset");

    std::vector<std::pair<double, double>> pts;  // (similarity, label)
    pts.reserve(dataset.size());
    for (const PairRecord& r : dataset.records) {
        pts.emplace_back(r.similarity, static_cast<double>(r.label));
    }
    std::sort(pts.begin(), pts.end());

    // Pool ties into weighted points.
    std::vector<double> x, v, w;
    for (std::size_t i = 0; i < pts.size();) {
        std::size_t j = i;
        double sum = 0.0;
        while (j < pts.size() && pts[j].first == pts[i].first) {
            sum += pts[j].second;
            ++j;
        }
        x.push_back(pts[i].first);
        v.push_back(sum / static_cast<double>(j - i));
        w.push_back(static_cast<double>(j - i));
        i = j;
    }

    // PAVA: merge adjacent blocks while the fit decreases.
    struct Block {
        double value;
        double weight;
        std::size_t size;
    };
    std::vector<Block> blocks;
    blocks.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        blocks.push_back(Block{v[i], w[i], 1});
        while (blocks.size() > 1 &&
               blocks[blocks.size() - 2].value >= blocks.back().value) {
            const Block top = blocks.back();
            blocks.pop_back();
            Block& prev = blocks.back();
            prev.value = (prev.value * prev.weight + top.value * top.weight) /
                         (prev.weight + top.weight);
            prev.weight += top.weight;
            prev.size += top.size;
        }
    }

    std::vector<double> levels;
    levels.reserve(x.size());
    for (const Block& blk : blocks) {
        levels.insert(levels.end(), blk.size, blk.value);
    }

    IsotonicModel model{std::move(x), std::move(levels), tau, tau};
    model.tau_calibrated = score_as_threshold(apply_isotonic(model, tau.value()));
    return model;
}

double apply_isotonic(const IsotonicModel& model, double s) {
    auto it = std::upper_bound(model.breakpoints.begin(), model.breakpoints.end(), s);
    if (it == model.breakpoints.begin()) return model.levels.front();
    return model.levels[static_cast<std::size_t>(it - model.breakpoints.begin()) - 1];
}

}  // namespace vcal

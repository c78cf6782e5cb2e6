#include "vcal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace vcal {

namespace {

void require_both_classes(const Dataset& dataset) {
    if (!dataset.has_both_classes()) {
        throw SingleClassDataset("operation needs both positive and negative pairs");
    }
}

BinReport summarize_bin(const Dataset& dataset, Threshold tau,
                        const std::vector<std::size_t>& members, double lo, double hi) {
    BinReport bin{lo, hi, members.size(), 0.0, 0.5 * (lo + hi)};
    if (members.empty()) return bin;
    double correct = 0.0, conf = 0.0;
    for (std::size_t idx : members) {
        const PairRecord& r = dataset.records[idx];
        if (predict(r.similarity, tau) == r.label) correct += 1.0;
        conf += confidence(r.similarity, tau);
    }
    bin.accuracy = correct / static_cast<double>(members.size());
    bin.mean_confidence = conf / static_cast<double>(members.size());
    return bin;
}

// Distinct similarity values ascending.
std::vector<double> distinct_sims(const Dataset& dataset) {
    std::vector<double> v;
    v.reserve(dataset.size());
    for (const PairRecord& r : dataset.records) v.push_back(r.similarity);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace

EceReport ece(const Dataset& dataset, Threshold tau, int m_bins, BinScheme scheme) {
    if (dataset.empty()) throw RangeError("ece on empty dataset");
    if (m_bins < 1) throw RangeError("m_bins must be >= 1");

    const std::size_t n = dataset.size();
    const std::size_t m = static_cast<std::size_t>(m_bins);
    std::vector<std::vector<std::size_t>> members(m);
    std::vector<std::pair<double, double>> bounds(m);

    if (scheme == BinScheme::equal_width) {
        const double width = 0.5 / static_cast<double>(m);
        for (std::size_t i = 0; i < m; ++i) {
            bounds[i] = {0.5 + width * static_cast<double>(i),
                         0.5 + width * static_cast<double>(i + 1)};
        }
        bounds.back().second = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = confidence(dataset.records[i].similarity, tau);
            auto idx = static_cast<std::size_t>((c - 0.5) / width);
            if (idx >= m) idx = m - 1;  // c == 1 lands in the closed last bin
            members[idx].push_back(i);
        }
    } else {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return confidence(dataset.records[a].similarity, tau) <
                   confidence(dataset.records[b].similarity, tau);
        });
        const std::size_t base = n / m, rem = n % m;
        std::size_t pos = 0;
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t sz = base + (i < rem ? 1 : 0);
            members[i].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                              order.begin() + static_cast<std::ptrdiff_t>(pos + sz));
            pos += sz;
            if (!members[i].empty()) {
                bounds[i] = {confidence(dataset.records[members[i].front()].similarity, tau),
                             confidence(dataset.records[members[i].back()].similarity, tau)};
            } else {
                const double edge = (i > 0) ? bounds[i - 1].second : 0.5;
                bounds[i] = {edge, edge};
            }
        }
    }

    EceReport report{0.0, scheme, m_bins, {}};
    report.bins.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        BinReport bin =
            summarize_bin(dataset, tau, members[i], bounds[i].first, bounds[i].second);
        if (bin.count > 0) {
            report.ece += (static_cast<double>(bin.count) / static_cast<double>(n)) *
                          std::abs(bin.accuracy - bin.mean_confidence);
        }
        report.bins.push_back(bin);
    }
    return report;
}

double accuracy(const Dataset& dataset, Threshold tau) {
    if (dataset.empty()) throw RangeError("accuracy on empty dataset");
    std::size_t correct = 0;
    for (const PairRecord& r : dataset.records) {
        if (predict(r.similarity, tau) == r.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

double mean_confidence(const Dataset& dataset, Threshold tau) {
    if (dataset.empty()) throw RangeError("mean_confidence on empty dataset");
    double acc = 0.0;
    for (const PairRecord& r : dataset.records) {
        acc += confidence(r.similarity, tau);
    }
    return acc / static_cast<double>(dataset.size());
}

std::vector<RocPoint> roc_curve(const Dataset& dataset) {
    require_both_classes(dataset);
    std::vector<double> pos, neg;
    for (const PairRecord& r : dataset.records) {
        (r.label == +1 ? pos : neg).push_back(r.similarity);
    }
    std::sort(pos.begin(), pos.end());
    std::sort(neg.begin(), neg.end());

    auto rate_at = [](const std::vector<double>& v, double t) {
        return static_cast<double>(v.end() - std::lower_bound(v.begin(), v.end(), t)) /
               static_cast<double>(v.size());
    };

    std::vector<RocPoint> points;
    points.push_back(RocPoint{-1.0, 1.0, 1.0});  // accept-all sentinel
    for (double t : distinct_sims(dataset)) {
        points.push_back(RocPoint{t, rate_at(pos, t), rate_at(neg, t)});
    }
    points.push_back(RocPoint{1.0, 0.0, 0.0});  // reject-all sentinel (exclusive)
    return points;
}

FarThreshold threshold_at_far(const Dataset& dataset, double far_target) {
    if (!(far_target > 0.0 && far_target < 1.0)) {
        throw RangeError("far_target must lie in (0, 1)");
    }
    require_both_classes(dataset);

    std::vector<double> pos, neg;
    for (const PairRecord& r : dataset.records) {
        (r.label == +1 ? pos : neg).push_back(r.similarity);
    }
    std::sort(pos.begin(), pos.end());
    std::sort(neg.begin(), neg.end());
    const bool enough =
        static_cast<double>(neg.size()) >= std::ceil(1.0 / far_target);

    auto rate_at = [](const std::vector<double>& v, double t) {
        return static_cast<double>(v.end() - std::lower_bound(v.begin(), v.end(), t)) /
               static_cast<double>(v.size());
    };

    std::vector<double> candidates = distinct_sims(dataset);
    // A value just above every score forces FAR = 0 when no score does.
    if (candidates.back() < 1.0) {
        candidates.push_back(0.5 * (candidates.back() + 1.0));
    }
    for (double t : candidates) {
        if (rate_at(neg, t) <= far_target) {
            double chosen = t;
            if (chosen >= 1.0) chosen = 1.0 - 1e-6;
            if (chosen <= -1.0) chosen = -1.0 + 1e-6;
            const double far = rate_at(neg, chosen);
            if (far > far_target) break;
            return FarThreshold{Threshold(chosen), rate_at(pos, chosen), far, enough};
        }
    }
    throw RangeError("no threshold in (-1, 1) attains the FAR target");
}

Threshold best_accuracy_threshold(const Dataset& dataset) {
    require_both_classes(dataset);
    const std::vector<double> values = distinct_sims(dataset);
    const std::size_t k = values.size();

    // pos_ge[j] = positives with s >= values[j]; neg_lt[j] = negatives below.
    std::vector<std::size_t> pos_ge(k + 1, 0), neg_lt(k + 1, 0);
    std::vector<std::size_t> pos_at(k, 0), neg_at(k, 0);
    for (const PairRecord& r : dataset.records) {
        const std::size_t j = static_cast<std::size_t>(
            std::lower_bound(values.begin(), values.end(), r.similarity) -
            values.begin());
        (r.label == +1 ? pos_at : neg_at)[j]++;
    }
    for (std::size_t j = k; j-- > 0;) {
        pos_ge[j] = pos_ge[j + 1] + pos_at[j];
    }
    std::size_t below = 0;
    for (std::size_t j = 0; j < k; ++j) {
        neg_lt[j] = below;
        below += neg_at[j];
    }
    neg_lt[k] = below;

    // Interval j in [0, k): tau in (values[j-1], values[j]] puts the decision
    // boundary at values[j]; interval k rejects everything.
    double best_acc = -1.0;
    double best_mid = 0.0;
    for (std::size_t j = 0; j <= k; ++j) {
        const double lo = (j == 0) ? -1.0 : values[j - 1];
        const double hi = (j == k) ? 1.0 : values[j];
        if (!(hi > lo) || hi <= -1.0 || lo >= 1.0) continue;  // unrealizable
        const double acc = static_cast<double>(pos_ge[j] + neg_lt[j]) /
                           static_cast<double>(dataset.size());
        if (acc > best_acc) {
            best_acc = acc;
            best_mid = std::clamp(0.5 * (lo + hi), std::nextafter(-1.0, 1.0),
                                  std::nextafter(1.0, -1.0));
        }
    }
    return Threshold(best_mid);
}

double auc(const Dataset& dataset) {
    std::vector<RocPoint> points = roc_curve(dataset);
    std::sort(points.begin(), points.end(), [](const RocPoint& a, const RocPoint& b) {
        if (a.far != b.far) return a.far < b.far;
        return a.tar < b.tar;
    });
    double area = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        area += (points[i].far - points[i - 1].far) * 0.5 *
                (points[i].tar + points[i - 1].tar);
    }
    return area;
}

}  // namespace vcal

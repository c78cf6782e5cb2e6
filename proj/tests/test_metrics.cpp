#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "vcal/core.hpp"
#include "vcal/metrics.hpp"
#include "vcal/rng.hpp"

using namespace vcal;

namespace {

Dataset make(std::initializer_list<std::pair<double, int>> rows) {
    Dataset d;
    for (const auto& [s, y] : rows) d.records.push_back(PairRecord{s, y});
    return d;
}

Dataset random_mixed(std::size_t n, std::uint64_t seed) {
    SplitMix64 rng(seed);
    Dataset d;
    for (std::size_t i = 0; i < n; ++i) {
        const int y = rng.below(2) == 0 ? -1 : +1;
        double s = 0.15 * y + 0.4 * rng.gaussian();
        if (rng.below(8) == 0) s = 0.25;  // inject ties
        d.records.push_back(PairRecord{std::clamp(s, -1.0, 1.0), y});
    }
    if (!d.has_both_classes()) d.records[0].label = -d.records[0].label;
    return d;
}

}  // namespace

TEST_CASE("perfectly confident and correct predictions give zero ECE") {
    // tau = 0: s = +-1 gives confidence exactly 1
    Dataset d = make({{1.0, +1}, {1.0, +1}, {-1.0, -1}, {-1.0, -1}});
    for (BinScheme scheme : {BinScheme::equal_width, BinScheme::equal_frequency}) {
        const EceReport r = ece(d, Threshold(0.0), 10, scheme);
        CHECK(r.ece == doctest::Approx(0.0).epsilon(1e-15));
    }
}

TEST_CASE("single-bin hand fixture: half right at confidence 0.9") {
    // tau = 0, s = 0.8 -> phi = 0.8, confidence 0.9; two of four labels wrong
    Dataset d = make({{0.8, +1}, {0.8, +1}, {0.8, -1}, {0.8, -1}});
    for (BinScheme scheme : {BinScheme::equal_width, BinScheme::equal_frequency}) {
        const EceReport r = ece(d, Threshold(0.0), 1, scheme);
        CHECK(r.ece == doctest::Approx(0.4).epsilon(1e-15));
        CHECK(r.bins[0].count == 4);
        CHECK(r.bins[0].accuracy == 0.5);
        CHECK(r.bins[0].mean_confidence == doctest::Approx(0.9).epsilon(1e-15));
    }
}

TEST_CASE("two equal-frequency bins hand fixture") {
    // All confidences 0.6 (tau = 0, s = 0.2); the stable split puts the
    // first five records in bin 1 (4 correct) and the rest in bin 2 (3).
    Dataset d = make({{0.2, +1}, {0.2, +1}, {0.2, +1}, {0.2, +1}, {0.2, -1},
                      {0.2, +1}, {0.2, +1}, {0.2, +1}, {0.2, -1}, {0.2, -1}});
    const EceReport r = ece(d, Threshold(0.0), 2, BinScheme::equal_frequency);
    CHECK(r.bins[0].accuracy == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(r.bins[1].accuracy == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(r.ece == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("ece recomputes from its own bins") {
    const Dataset d = random_mixed(500, 77);
    for (BinScheme scheme : {BinScheme::equal_width, BinScheme::equal_frequency}) {
        const EceReport r = ece(d, Threshold(0.1), 12, scheme);
        double recomputed = 0.0;
        std::size_t total = 0;
        for (const BinReport& b : r.bins) {
            recomputed += (static_cast<double>(b.count) / d.size()) *
                          std::abs(b.accuracy - b.mean_confidence);
            total += b.count;
        }
        CHECK(total == d.size());
        CHECK(r.ece == doctest::Approx(recomputed).epsilon(1e-12));
        CHECK(r.ece <= 0.5);
    }
}

TEST_CASE("equal-width bins tile [0.5, 1] and equal-frequency sizes differ by one") {
    const Dataset d = random_mixed(103, 79);
    const EceReport ew = ece(d, Threshold(0.0), 7, BinScheme::equal_width);
    for (int i = 0; i < 7; ++i) {
        CHECK(ew.bins[i].lo == doctest::Approx(0.5 + 0.5 * i / 7.0).epsilon(1e-12));
    }
    CHECK(ew.bins.back().hi == 1.0);

    const EceReport ef = ece(d, Threshold(0.0), 7, BinScheme::equal_frequency);
    std::size_t lo = d.size(), hi = 0;
    for (const BinReport& b : ef.bins) {
        lo = std::min(lo, b.count);
        hi = std::max(hi, b.count);
    }
    CHECK(hi - lo <= 1);
}

TEST_CASE("accuracy hand cases") {
    Dataset all_pos = make({{0.2, +1}, {-0.5, +1}, {0.9, +1}});
    CHECK(accuracy(all_pos, Threshold(-0.999)) == 1.0);
    Dataset flipped = make({{0.2, -1}, {-0.5, -1}, {0.9, -1}});
    CHECK(accuracy(flipped, Threshold(-0.999)) == 0.0);
    Dataset six = make({{0.6, +1}, {0.4, +1}, {0.1, -1}, {0.3, +1},
                        {0.45, -1}, {-0.2, -1}});
    CHECK(accuracy(six, Threshold(0.35)) == doctest::Approx(4.0 / 6.0).epsilon(1e-15));
}

TEST_CASE("roc endpoints") {
    Dataset d = make({{0.7, +1}, {0.8, +1}, {-0.3, -1}, {-0.1, -1}});
    const auto points = roc_curve(d);
    CHECK(points.front().threshold == -1.0);
    CHECK(points.front().tar == 1.0);
    CHECK(points.front().far == 1.0);
    CHECK(points.back().tar == 0.0);
    CHECK(points.back().far == 0.0);
    // separable: some point with TAR 1, FAR 0
    bool perfect = false;
    for (const RocPoint& p : points) {
        if (p.tar == 1.0 && p.far == 0.0) perfect = true;
        CHECK(p.tar >= points.back().tar);
    }
    CHECK(perfect);
}

TEST_CASE("roc rates are non-increasing in the threshold") {
    const Dataset d = random_mixed(200, 83);
    const auto points = roc_curve(d);
    for (std::size_t i = 1; i < points.size(); ++i) {
        CHECK(points[i].tar <= points[i - 1].tar + 1e-15);
        CHECK(points[i].far <= points[i - 1].far + 1e-15);
    }
}

TEST_CASE("threshold_at_far picks the smallest admissible similarity") {
    Dataset d = make({{0.0, -1}, {0.4, -1}, {0.5, +1}, {0.9, +1}});
    const FarThreshold ft = threshold_at_far(d, 0.5);
    CHECK(ft.threshold.value() == 0.4);  // admits exactly one negative
    CHECK(ft.far == 0.5);
    CHECK(ft.tar == 1.0);

    // permissive target admits everything
    const FarThreshold all = threshold_at_far(d, 0.999);
    CHECK(all.far <= 0.999);
    CHECK(all.tar == 1.0);

    // target below 1/#negatives forces FAR = 0
    const FarThreshold strict = threshold_at_far(d, 0.25);
    CHECK(strict.far == 0.0);
    CHECK(strict.threshold.value() > 0.4);
    CHECK_FALSE(strict.enough_negatives);
}

TEST_CASE("best_accuracy_threshold matches the brute-force scan") {
    Dataset six = make({{0.6, +1}, {0.4, +1}, {0.1, -1}, {0.3, +1},
                        {0.45, -1}, {-0.2, -1}});
    const Threshold t = best_accuracy_threshold(six);
    CHECK(accuracy(six, t) == doctest::Approx(oracles::brute_best_accuracy(six)));

    for (int trial = 0; trial < 100; ++trial) {
        const Dataset d = random_mixed(40, 1000 + trial);
        const Threshold best = best_accuracy_threshold(d);
        CHECK(accuracy(d, best) ==
              doctest::Approx(oracles::brute_best_accuracy(d)).epsilon(1e-12));
    }
}

TEST_CASE("best_accuracy_threshold returns the gap midpoint on separable data") {
    Dataset d = make({{0.6, +1}, {0.8, +1}, {-0.1, -1}, {0.2, -1}});
    CHECK(best_accuracy_threshold(d).value() == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("identical similarities: the majority class decides") {
    Dataset d = make({{0.3, +1}, {0.3, +1}, {0.3, -1}});
    const Threshold t = best_accuracy_threshold(d);
    CHECK(accuracy(d, t) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(predict(0.3, t) == +1);  // accept the majority
}

TEST_CASE("auc agrees with the pairwise oracle") {
    Dataset separable = make({{0.7, +1}, {0.8, +1}, {-0.3, -1}, {-0.1, -1}});
    CHECK(auc(separable) == doctest::Approx(1.0).epsilon(1e-15));

    Dataset constant = make({{0.2, +1}, {0.2, -1}, {0.2, +1}, {0.2, -1}});
    CHECK(auc(constant) == doctest::Approx(0.5).epsilon(1e-12));

    for (int trial = 0; trial < 30; ++trial) {
        const Dataset d = random_mixed(20, 2000 + trial);
        CHECK(auc(d) == doctest::Approx(oracles::mann_whitney_auc(d)).epsilon(1e-12));
    }
}

TEST_CASE("single-class inputs are rejected") {
    Dataset d = make({{0.1, +1}, {0.5, +1}});
    CHECK_THROWS_AS(roc_curve(d), SingleClassDataset);
    CHECK_THROWS_AS(auc(d), SingleClassDataset);
    CHECK_THROWS_AS(best_accuracy_threshold(d), SingleClassDataset);
    CHECK_THROWS_AS(threshold_at_far(d, 0.1), SingleClassDataset);
}

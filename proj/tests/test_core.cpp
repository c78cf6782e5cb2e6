#include <doctest.h>

#include <array>
#include <cmath>

#include "vcal/core.hpp"
#include "vcal/rng.hpp"

using namespace vcal;

TEST_CASE("predict follows the >= decision rule") {
    CHECK(predict(0.5, Threshold(0.5)) == +1);  // tie accepts
    CHECK(predict(-0.2, Threshold(0.1)) == -1);
    CHECK(predict(1.0, Threshold(0.99)) == +1);
}

TEST_CASE("phi hand values") {
    CHECK(phi(0.2, Threshold(0.2)) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(phi(1.0, Threshold(0.5)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(phi(0.6, Threshold(0.2)) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("confidence hand values") {
    CHECK(confidence(0.2, Threshold(0.2)) == 0.5);
    CHECK(confidence(-1.0, Threshold(0.0)) == 1.0);
    CHECK(confidence(0.6, Threshold(0.2)) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("confidence law over random (s, tau)") {
    SplitMix64 rng(7);
    for (int i = 0; i < 20000; ++i) {
        const double s = -1.0 + 2.0 * rng.uniform01();
        const double t = -0.999 + 1.998 * rng.uniform01();
        const Threshold tau(t);
        const double c = confidence(s, tau);
        CHECK(c >= 0.5);
        CHECK(c <= 1.0);
        // phi's branch agrees with the decision rule
        if (predict(s, tau) == +1) {
            CHECK(phi(s, tau) == doctest::Approx((s - t) / (1 - t)).epsilon(1e-14));
        } else {
            CHECK(phi(s, tau) == doctest::Approx((t - s) / (1 + t)).epsilon(1e-14));
        }
    }
}

TEST_CASE("confidence extremes and monotonicity") {
    SplitMix64 rng(11);
    for (int i = 0; i < 500; ++i) {
        const Threshold tau(-0.99 + 1.98 * rng.uniform01());
        CHECK(confidence(tau.value(), tau) == 0.5);
        CHECK(confidence(1.0, tau) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(confidence(-1.0, tau) == doctest::Approx(1.0).epsilon(1e-12));
        // strictly increasing above tau, strictly decreasing below
        const double t = tau.value();
        double prev = confidence(t, tau);
        for (int j = 1; j <= 8; ++j) {
            const double s = t + (1.0 - t) * j / 8.0;
            const double c = confidence(s, tau);
            CHECK(c > prev);
            prev = c;
        }
        prev = confidence(-1.0, tau);
        for (int j = 1; j <= 8; ++j) {
            const double s = -1.0 + (t + 1.0) * (j / 8.5);
            const double c = confidence(s, tau);
            CHECK(c < prev);
            prev = c;
        }
    }
}

TEST_CASE("threshold rejects the closed endpoints") {
    CHECK_THROWS_AS(Threshold(1.0), std::invalid_argument);
    CHECK_THROWS_AS(Threshold(-1.0), std::invalid_argument);
    CHECK_NOTHROW(Threshold(0.999999));
}

TEST_CASE("record construction clamps float noise only") {
    CHECK(make_record(1.0000003, 1).similarity == 1.0);
    CHECK(make_record(-1.0000009, -1).similarity == -1.0);
    CHECK_THROWS_AS(make_record(1.1, 1), RangeError);
    CHECK_THROWS_AS(make_record(0.5, 0), RangeError);
}

TEST_CASE("cosine similarity basics") {
    const std::array<double, 2> e1{1.0, 0.0}, e2{0.0, 1.0}, neg{-2.0, 0.0};
    CHECK(cosine_similarity(e1, e1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(cosine_similarity(e1, e2) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(cosine_similarity(e1, neg) == doctest::Approx(-1.0).epsilon(1e-15));

    const std::array<double, 3> a{1.0, 2.0, 3.0};
    CHECK_THROWS_AS(cosine_similarity(a, e1), RangeError);
    const std::array<double, 2> zero{0.0, 0.0};
    CHECK_THROWS_AS(cosine_similarity(e1, zero), RangeError);
}

TEST_CASE("cosine similarity is scale invariant") {
    SplitMix64 rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        std::array<double, 5> a{}, b{}, a2{}, b2{};
        const double lam = 0.01 + 10.0 * rng.uniform01();
        const double mu = 0.01 + 10.0 * rng.uniform01();
        for (int i = 0; i < 5; ++i) {
            a[i] = rng.gaussian();
            b[i] = rng.gaussian();
            a2[i] = lam * a[i];
            b2[i] = mu * b[i];
        }
        CHECK(cosine_similarity(a, b) ==
              doctest::Approx(cosine_similarity(a2, b2)).epsilon(1e-12));
    }
}

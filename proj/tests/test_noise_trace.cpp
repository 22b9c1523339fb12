#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "scorelab/errors.hpp"
#include "scorelab/noise_trace.hpp"
#include "scorelab/schedule.hpp"

using namespace scorelab;

TEST_CASE("langevin trace reproduces an independent recurrence loop") {
    const NoiseSchedule s = geometric_schedule(4.0, 0.05, 9);
    const double eta = 0.07, v0 = 4.0 / s.gamma;
    const int n_sigma = 3;
    const VarianceTrace trace = als_trace(s, eta, n_sigma, v0);
    REQUIRE(trace.rows.size() == 27);

    double v2 = v0 * v0;
    std::size_t r = 0;
    for (int i = 0; i < s.levels(); ++i)
        for (int k = 0; k < n_sigma; ++k, ++r) {
            const double sig = s.sigmas[static_cast<std::size_t>(i)];
            v2 = v2 * (1.0 - eta) * (1.0 - eta) + 2.0 * eta * sig * sig;
            CHECK(trace.rows[r].step == static_cast<int>(r) + 1);
            CHECK(trace.rows[r].level == i);
            CHECK(trace.rows[r].sigma_t == sig);
            CHECK(trace.rows[r].v ==
                  doctest::Approx(std::sqrt(v2)).epsilon(1e-15));
            CHECK(trace.rows[r].diff ==
                  doctest::Approx(trace.rows[r].v - sig).epsilon(1e-15));
        }
}

TEST_CASE("langevin trace agrees with the within-level closed form") {
    // a single-level schedule isolates the fixed-sigma recurrence
    const NoiseSchedule one = geometric_schedule(0.7, 0.7, 1);
    const double eta = 0.23, v0 = 1.9;
    const VarianceTrace trace = als_trace(one, eta, 40, v0);
    for (int n = 1; n <= 40; ++n)
        CHECK(trace.rows[static_cast<std::size_t>(n - 1)].v ==
              doctest::Approx(als_within_level_closed_form(v0, 0.7, eta, n))
                  .epsilon(1e-13));
    // and converges to the documented limit from either side
    CHECK(trace.rows.back().v ==
          doctest::Approx(als_limit(0.7, eta)).epsilon(1e-9));
    CHECK(als_limit(0.7, eta) == 0.7 * std::sqrt(2.0 / (2.0 - eta)));
    CHECK(als_within_level_closed_form(0.7, 0.7, eta, 0) == 0.7);
}

TEST_CASE("langevin residual never settles below the prescribed level") {
    // the fixed point sigma*sqrt(2/(2-eta)) exceeds sigma for every eta
    for (double eta : {0.01, 0.1, 0.5, 0.9}) {
        const NoiseSchedule s = geometric_schedule(10.0, 0.01, 40);
        const VarianceTrace t = als_trace(s, eta, 5, 10.0 / s.gamma);
        for (const TraceRow& row : t.rows) CHECK(row.v > row.sigma_t);
    }
}

TEST_CASE("one-step monotonicity threshold") {
    // starting exactly at the target level, no eta shrinks the residual
    CHECK(als_monotonicity_condition(1.0, 1.0) == doctest::Approx(0.0));
    // starting at twice the target, the threshold is 1.5
    CHECK(als_monotonicity_condition(1.0, 2.0) == doctest::Approx(1.5));
    // far above the target every eta in (0,1) helps
    CHECK(als_monotonicity_condition(0.1, 10.0) > 1.0);
    CHECK_THROWS_AS(als_monotonicity_condition(1.0, 0.0),
                    std::invalid_argument);

    // verify against the recurrence: one update from v0 with eta below the
    // threshold shrinks v, above it grows v
    const double sigma = 1.0, v0 = 1.2;
    const double thr = als_monotonicity_condition(sigma, v0);
    REQUIRE(thr > 0.0);
    REQUIRE(thr < 1.0);
    auto one_update = [&](double eta) {
        return std::sqrt(v0 * v0 * (1.0 - eta) * (1.0 - eta) +
                         2.0 * eta * sigma * sigma);
    };
    CHECK(one_update(thr * 0.9) < v0);
    CHECK(one_update(thr) == doctest::Approx(v0).epsilon(1e-12));
    CHECK(one_update(std::min(1.0, thr * 1.1) - 1e-9) > v0);
}

TEST_CASE("consistent trace sits on the schedule exactly") {
    const NoiseSchedule s = geometric_schedule(6.0, 0.02, 30);
    for (double eta : {0.2, 0.6, 1.0}) {
        const VarianceTrace t = cas_trace(s, eta);
        REQUIRE(t.rows.size() == 30);
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            CHECK(std::abs(t.rows[i].v - s.sigmas[i]) < 1e-12 * s.sigma1());
            CHECK(t.rows[i].diff == t.rows[i].v - t.rows[i].sigma_t);
        }
    }
}

TEST_CASE("trace validation mirrors the sampler constraints") {
    const NoiseSchedule s = geometric_schedule(6.0, 0.02, 30);
    CHECK_THROWS_AS(als_trace(s, 0.0, 1, 1.0), ConfigError);
    CHECK_THROWS_AS(als_trace(s, 1.0, 1, 1.0), ConfigError);
    CHECK_THROWS_AS(als_trace(s, 0.1, 0, 1.0), ConfigError);
    CHECK_THROWS_AS(als_trace(s, 0.1, 1, 0.0), ConfigError);
    CHECK_THROWS_AS(cas_trace(s, 0.0), ConfigError);
    CHECK_THROWS_AS(cas_trace(s, 1.0 + 1e-9), ConfigError);

    // steep schedule: gamma = 0.25 needs eta >= 0.75
    const NoiseSchedule steep = geometric_schedule(4.0, 0.25, 3);
    CHECK_THROWS_AS(cas_trace(steep, 0.5), ConfigError);
    CHECK(cas_trace(steep, 0.8).rows.size() == 3);
}

TEST_CASE("combined trace pairs the columns on the dilated grid") {
    const NoiseSchedule s = geometric_schedule(3.0, 0.06, 7);
    const double eta = 0.3;
    const int n_sigma = 4;
    const std::vector<CombinedTraceRow> rows = combined_trace(s, eta, n_sigma);
    REQUIRE(rows.size() == (7 - 1) * 4 + 1);

    const NoiseSchedule fine = dilate(s, n_sigma);
    const VarianceTrace als = als_trace(s, eta, n_sigma, 3.0 / fine.gamma);
    const VarianceTrace cas = cas_trace(fine, eta);
    for (std::size_t t = 0; t < rows.size(); ++t) {
        CHECK(rows[t].step == static_cast<int>(t) + 1);
        CHECK(rows[t].sigma_t == fine.sigmas[t]);
        CHECK(rows[t].v_cas == cas.rows[t].v);
        const std::size_t als_index =
            (t + 1 < rows.size()) ? t : als.rows.size() - 1;
        CHECK(rows[t].v_als == als.rows[als_index].v);
        CHECK(rows[t].diff == rows[t].v_als - rows[t].v_cas);
        // the consistent column never exceeds the annealed column
        CHECK(rows[t].diff >= 0.0);
    }
    // terminal row carries the full inner loop of the last level
    CHECK(rows.back().v_als == als.rows.back().v);
    CHECK(rows.back().sigma_t == s.sigmaL());
}

TEST_CASE("combined trace with a single inner update matches the plain trace") {
    // gamma is 0.52 here, so the consistent column needs eta >= 0.48
    const NoiseSchedule s = geometric_schedule(3.0, 0.06, 7);
    const std::vector<CombinedTraceRow> rows = combined_trace(s, 0.5, 1);
    const VarianceTrace als = als_trace(s, 0.5, 1, 3.0 / s.gamma);
    REQUIRE(rows.size() == 7);
    for (std::size_t t = 0; t < rows.size(); ++t)
        CHECK(rows[t].v_als == als.rows[t].v);
    CHECK_THROWS_AS(combined_trace(s, 0.5, 0), ConfigError);
}

TEST_CASE("annealed-consistent gap shrinks as the grid refines") {
    // the terminal diff is the acceptance-facing summary; check the full
    // pattern here on a small schedule for several etas
    // gamma here is 0.76, so the coarse consistent column needs eta >= 0.24
    const NoiseSchedule s = geometric_schedule(2.0, 0.1, 12);
    for (double eta : {0.25, 0.4}) {
        double prev = 1e300;
        for (int n : {1, 2, 5, 10}) {
            const std::vector<CombinedTraceRow> rows =
                combined_trace(s, eta, n);
            const double gap = rows.back().diff;
            CHECK(gap > 0.0);
            CHECK(gap < prev);
            prev = gap;
        }
    }
}

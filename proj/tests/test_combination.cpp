#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "baseline_screen/combination.hpp"
#include "baseline_screen/null_simulation.hpp"
#include "baseline_screen/numerics.hpp"

using namespace bscreen;

TEST_CASE("stouffer_combine") {
    CHECK(stouffer_combine(std::vector{0.5, 0.5}) == doctest::Approx(0.5).epsilon(1e-12));
    // A p of exactly 1 forces the combination to exactly 1.
    CHECK(stouffer_combine(std::vector{0.3, 1.0}) == 1.0);
    CHECK(stouffer_combine(std::vector{0.0, 1.0}) == 1.0);
    CHECK(stouffer_combine(std::vector{0.0, 0.5}) == 0.0);
    for (double p : {0.1, 0.9})
        CHECK(stouffer_combine(std::vector{p}) == doctest::Approx(p).epsilon(1e-12));
    CHECK_THROWS_AS(stouffer_combine(std::vector<double>{}), std::invalid_argument);
    CHECK_THROWS_AS(stouffer_combine(std::vector{1.2}), std::invalid_argument);
}

TEST_CASE("fisher_combine") {
    for (double p : {0.05, 0.3, 0.99})
        CHECK(fisher_combine(std::vector{p}) == doctest::Approx(p).epsilon(1e-10));
    CHECK(fisher_combine(std::vector{1.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-12));
    // df = 4 closed form e^{-x/2}(1 + x/2) at x = -2(ln .5 + ln .5).
    const double x = -2.0 * 2.0 * std::log(0.5);
    CHECK(fisher_combine(std::vector{0.5, 0.5}) ==
          doctest::Approx(std::exp(-0.5 * x) * (1.0 + 0.5 * x)).epsilon(1e-12));
    CHECK(fisher_combine(std::vector{0.0, 0.9}) == 0.0);
    CHECK_THROWS_AS(fisher_combine(std::vector<double>{}), std::invalid_argument);

    SUBCASE("closed form for repeated inputs, n <= 3") {
        // P(chi2(2n) >= x) = e^{-x/2} sum_{k<n} (x/2)^k / k!
        for (int n : {1, 2, 3}) {
            for (double p : {0.08, 0.4, 0.77}) {
                const std::vector<double> ps(static_cast<std::size_t>(n), p);
                const double xs = -2.0 * n * std::log(p);
                double closed = 0.0, term = 1.0;
                for (int k = 0; k < n; ++k) {
                    closed += term;
                    term *= 0.5 * xs / (k + 1);
                }
                closed *= std::exp(-0.5 * xs);
                CHECK(fisher_combine(ps) == doctest::Approx(closed).epsilon(1e-11));
            }
        }
    }
}

TEST_CASE("brown_adjust") {
    CHECK(brown_adjust(std::vector{1.0, 0.5}) == std::vector{0.98, 0.5});
    CHECK(brown_adjust(std::vector{0.98}) == std::vector{0.98});
    CHECK(brown_adjust(std::vector{0.1, 0.2}) == std::vector{0.1, 0.2});
    CHECK(brown_adjust(std::vector{0.95, 0.99}, 0.9) == std::vector{0.9, 0.9});
    CHECK_THROWS_AS(brown_adjust(std::vector{0.5}, 1.0), std::invalid_argument);
}

TEST_CASE("log_sum_statistic") {
    CHECK(log_sum_statistic(std::vector{1.0, 1.0, 1.0}) == 0.0);
    CHECK(log_sum_statistic(std::vector{std::exp(-1.0), std::exp(-2.0)}) ==
          doctest::Approx(-3.0).epsilon(1e-12));
    CHECK(log_sum_statistic(std::vector{0.5, 0.0}) ==
          -std::numeric_limits<double>::infinity());
}

TEST_CASE("stouffer_statistic") {
    CHECK(stouffer_statistic(std::vector{0.5, 0.5}) == 0.0);
    CHECK(stouffer_statistic(std::vector{1.0, 0.5}) ==
          std::numeric_limits<double>::infinity());
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> unif(0.01, 0.99);
    for (int it = 0; it < 40; ++it) {
        std::vector<double> ps;
        for (int i = 0; i < 6; ++i) ps.push_back(unif(rng));
        CHECK(std_normal_cdf(stouffer_statistic(ps) / std::sqrt(6.0)) ==
              doctest::Approx(stouffer_combine(ps)).epsilon(1e-12));
    }
}

TEST_CASE("combinations are monotone in each argument") {
    std::mt19937 rng(43);
    std::uniform_real_distribution<double> unif(0.001, 0.999);
    for (int it = 0; it < 200; ++it) {
        const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
        std::vector<double> ps;
        for (std::size_t i = 0; i < n; ++i) ps.push_back(unif(rng));
        const double s0 = stouffer_combine(ps);
        const double f0 = fisher_combine(ps);
        const std::size_t j = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
        ps[j] = std::min(0.999, ps[j] + unif(rng) * (1.0 - ps[j]));
        CHECK(stouffer_combine(ps) >= s0 - 1e-12);
        CHECK(fisher_combine(ps) >= f0 - 1e-12);
    }
}

TEST_CASE("combining exact uniforms stays uniform") {
    // Kolmogorov distance of the empirical CDF of 1e5 combined values from
    // the diagonal stays under 0.01 for both formulas.
    constexpr int kSims = 100'000;
    constexpr int kInputs = 5;
    std::vector<double> st(kSims), fi(kSims);
    for (int i = 0; i < kSims; ++i) {
        StreamRng rng({991ull}, static_cast<std::uint64_t>(i), 0);
        std::vector<double> ps(kInputs);
        for (auto& p : ps) p = rng.next_unit();
        st[i] = stouffer_combine(ps);
        fi[i] = fisher_combine(ps);
    }
    auto ks_distance = [](std::vector<double>& xs) {
        std::sort(xs.begin(), xs.end());
        double d = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double ecdf_hi = static_cast<double>(i + 1) / xs.size();
            const double ecdf_lo = static_cast<double>(i) / xs.size();
            d = std::max(d, std::max(std::abs(ecdf_hi - xs[i]), std::abs(xs[i] - ecdf_lo)));
        }
        return d;
    };
    CHECK(ks_distance(st) < 0.01);
    CHECK(ks_distance(fi) < 0.01);
}

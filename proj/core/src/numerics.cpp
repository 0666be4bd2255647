#include "baseline_screen/numerics.hpp"

#include <array>
#include <cmath>
#include <vector>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace bscreen {

double LogProb::prob() const { return std::exp(value); }

namespace {

constexpr std::size_t kFactorialTableSize = 4096;

const std::vector<double>& factorial_table() {
    static const std::vector<double> table = [] {
        std::vector<double> t(kFactorialTableSize);
        long double acc = 0.0L;
        t[0] = 0.0;
        for (std::size_t i = 1; i < kFactorialTableSize; ++i) {
            acc += std::log(static_cast<long double>(i));
            t[i] = static_cast<double>(acc);
        }
        return t;
    }();
    return table;
}

// Stirling series for ln n!, truncation error < 1/(1188 n^9).
double log_factorial_series(double n) {
    constexpr double half_log_two_pi = 0.91893853320467274178;
    const double inv = 1.0 / n;
    const double inv2 = inv * inv;
    double series = inv * (1.0 / 12.0);
    series -= inv * inv2 * (1.0 / 360.0);
    series += inv * inv2 * inv2 * (1.0 / 1260.0);
    series -= inv * inv2 * inv2 * inv2 * (1.0 / 1680.0);
    return (n + 0.5) * std::log(n) - n + half_log_two_pi + series;
}

} // namespace

double log_factorial(long long n) {
    if (n < 0) throw std::domain_error("log_factorial: negative argument");
    if (static_cast<std::size_t>(n) < kFactorialTableSize)
        return factorial_table()[static_cast<std::size_t>(n)];
    return log_factorial_series(static_cast<double>(n));
}

double log_choose(long long n, long long k) {
    if (k < 0 || k > n) throw std::domain_error("log_choose: k outside [0, n]");
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

double std_normal_cdf(double x) {
    return 0.5 * std::erfc(-x * 0.70710678118654752440);
}

namespace {

// Acklam's rational approximation to the standard normal quantile.
double normal_quantile_estimate(double p) {
    static constexpr std::array<double, 6> a = {
        -3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
        1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr std::array<double, 5> b = {
        -5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
        6.680131188771972e+01, -1.328068155288572e+01};
    static constexpr std::array<double, 6> c = {
        -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
        -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00};
    static constexpr std::array<double, 4> d = {
        7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
        3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

} // namespace

double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("std_normal_quantile: p must lie strictly inside (0,1)");
    double x = normal_quantile_estimate(p);
    // One Halley step against the erfc-based CDF.
    constexpr double sqrt_two_pi = 2.50662827463100050242;
    const double err = std_normal_cdf(x) - p;
    const double u = err * sqrt_two_pi * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

double chi_square_sf(double x, int df) {
    if (x < 0.0) throw std::domain_error("chi_square_sf: x must be non-negative");
    if (df < 1) throw std::domain_error("chi_square_sf: df must be positive");
    if (x == 0.0) return 1.0;
    return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

double student_t_sf(double t, double df) {
    if (!(df > 0.0)) throw std::domain_error("student_t_sf: df must be positive");
    if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
    const double x = df / (df + t * t);
    const double half_tail = 0.5 * boost::math::ibeta(0.5 * df, 0.5, x);
    return t >= 0.0 ? half_tail : 1.0 - half_tail;
}

} // namespace bscreen

#pragma once

#include <stdexcept>

namespace bscreen {

/// Natural-log probability. `value <= 0`, with -inf encoding probability zero.
struct LogProb {
    double value;

    double prob() const;
};

/// ln(n!), exact-prefix table below an internal bound, Stirling series beyond.
/// Accurate to within a few ulp of the true value for all n.
double log_factorial(long long n);

/// ln C(n, k). Requires 0 <= k <= n.
double log_choose(long long n, long long k);

/// Standard normal CDF, |error| < 1e-12.
double std_normal_cdf(double x);

/// Standard normal quantile for p strictly inside (0,1).
///
/// Rational approximation (Acklam) refined by one Halley step against the
/// erfc-based CDF; |cdf(quantile(p)) - p| < 1e-10 over the full open interval.
/// Throws std::domain_error at p = 0 or p = 1; callers handle the p = 1
/// degeneracy explicitly.
double std_normal_quantile(double p);

/// P(chi^2(df) >= x) via the regularized upper incomplete gamma.
/// Relative error < 1e-10 for x in [0, 1000], df <= 400.
double chi_square_sf(double x, int df);

/// One-sided survival P(T > t) of Student's t with df > 0 degrees of
/// freedom, via the regularized incomplete beta. The two-sided p-value is
/// 2 * student_t_sf(|t|, df).
double student_t_sf(double t, double df);

} // namespace bscreen

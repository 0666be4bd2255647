#pragma once

#include <span>
#include <vector>

namespace bscreen {

/// How per-variable p-values are folded into one number.
///
/// The *_formula members are closed-form combined p-values that assume the
/// inputs are uniform; the *_statistic members are raw test statistics whose
/// null distribution is taken from the exact per-variable laws instead
/// (see null_simulation).
struct CombinationMethod {
    enum class Kind {
        stouffer_formula,
        fisher_formula,
        brown_adjusted_stouffer,
        log_sum_statistic,
        stouffer_statistic,
    };

    Kind kind = Kind::log_sum_statistic;
    double brown_cap = 0.98;
};

/// Stouffer's combined p-value Phi(sum Phi^-1(p_i) / sqrt(n)).
/// Exactly 1 when any input is exactly 1 (continuous extension of Phi);
/// otherwise 0 when any input is 0. Throws std::invalid_argument on an
/// empty list.
double stouffer_combine(std::span<const double> ps);

/// Fisher's combined p-value P(chi^2(2n) >= -2 sum ln p_i).
double fisher_combine(std::span<const double> ps);

/// Replaces every p above the cap with the cap (0.98 by default).
std::vector<double> brown_adjust(std::span<const double> ps, double cap = 0.98);

/// sum ln p_i on the extended reals: -inf iff some p is 0, 0 iff all are 1.
double log_sum_statistic(std::span<const double> ps);

/// sum Phi^-1(p_i) on the extended reals: +inf when some p is 1.
double stouffer_statistic(std::span<const double> ps);

} // namespace bscreen

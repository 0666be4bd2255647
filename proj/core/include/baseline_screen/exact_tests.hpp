#pragma once

#include <optional>
#include <stdexcept>
#include <utility>

#include "baseline_screen/numerics.hpp"
#include "baseline_screen/tables.hpp"

namespace bscreen {

/// What a small p-value is evidence of.
///
/// Imbalance is the standard tail P0(T <= t): groups differ more than chance.
/// Overbalance is the reverse tail P0(T >= t), which includes the observed
/// outcome and therefore stays a valid (super-uniform) p-value for discrete
/// tests; small values mean the groups agree more closely than chance.
enum class Direction { imbalance, overbalance };

struct PValue {
    double value = 1.0;
    Direction direction = Direction::imbalance;
    /// Set when the inputs made the test statistic ill-defined (e.g. a t
    /// statistic with zero pooled spread) and the value is a convention.
    bool degenerate = false;
};

/// Relative tolerance for deciding when two table probabilities tie.
/// Matches the comparison convention of established exact-test
/// implementations; analytically tied tables must classify as ties even
/// though their floating-point probabilities may differ in the last ulp.
struct TieTolerance {
    double rel_eps = 1e-7;
};

/// Per-group summary of a continuous baseline variable as reported in a
/// trial table: sample size, mean, standard deviation, and (optionally) the
/// number of decimal places the values were rounded to.
struct ContinuousSummary {
    long long n1 = 0;
    long long n2 = 0;
    double mean1 = 0.0;
    double mean2 = 0.0;
    double sd1 = 0.0;
    double sd2 = 0.0;
    std::optional<int> decimals;
};

void validate(const ContinuousSummary& s);

class DegenerateTableError : public std::runtime_error {
public:
    explicit DegenerateTableError(const std::string& what) : std::runtime_error(what) {}
};

/// ln P(K1 = k1 | marginals m) under the conditional (hypergeometric) null.
/// Throws std::domain_error when k1 lies outside support_2x2(m).
LogProb hypergeom_pmf(long long k1, const Marginals& m);

/// Fisher's exact p-value: conditional probability of all tables whose
/// hypergeometric probability is <= the observed one (ties included via
/// tol). Small values flag imbalance between groups.
PValue fisher_exact_p(const Table2x2& t, TieTolerance tol = {});

/// Reverse Fisher exact p-value: conditional probability of all tables at
/// least as probable as the observed one. Includes the observed table, so
/// P0(p <= a) <= a holds for every a; small values flag overbalance.
PValue reverse_fisher_exact_p(const Table2x2& t, TieTolerance tol = {});

/// Fisher exact p-value for an R x C table via full enumeration of tables
/// with the observed marginals, weighted by the multivariate hypergeometric
/// probability. Agrees with the 2x2 routines on 2x2 input.
PValue fisher_exact_p_rxc(const TableRxC& t, TieTolerance tol = {},
                          Direction direction = Direction::imbalance,
                          std::uint64_t cap = kDefaultEnumerationCap);

/// Pearson chi-square statistic of a 2x2 table, optionally with the Yates
/// continuity correction (|O-E| reduced by 1/2, clamped at zero).
/// Throws DegenerateTableError when a row or column total is zero.
double chi_square_statistic(const Table2x2& t, bool yates);

/// Chi-square test p-value from the df=1 survival function.
PValue chi_square_p(const Table2x2& t, bool yates);

/// Two-sided unpaired t-test from group summaries. Pooled variance with
/// df = n1+n2-2 when equal_variance, Welch-Satterthwaite otherwise.
/// Both sds zero: returns a degenerate PValue (1 when means agree, 0
/// otherwise) instead of failing.
PValue t_test_p(const ContinuousSummary& s, bool equal_variance = true);

/// Extremes of the t-test p-value over the rounding intervals
/// value +- 0.5*10^-decimals for both means and both sds (sds clamped at 0).
/// Requires decimals to be present.
std::pair<PValue, PValue> t_test_p_bounds(const ContinuousSummary& s,
                                          bool equal_variance = true);

} // namespace bscreen

#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "baseline_screen/exact_tests.hpp"
#include "baseline_screen/tables.hpp"

namespace bscreen {

/// Per-variable test used to turn a table into a p-value.
enum class TestKind { fisher, chisq, chisq_yates };

std::string to_string(TestKind t);

/// Which p-value the distribution is of.
///
/// standard      P0(T <= t), small = imbalance
/// reverse       P0(T >= t), small = overbalance (valid)
/// naive_reverse 1 - standard, small = overbalance (anti-conservative)
enum class Tail { standard, reverse, naive_reverse };

std::string to_string(Tail t);

/// Tables sampled as two independent binomials with common success
/// probability p_yes (margins free).
struct UnconditionalNull {
    long long n1;
    long long n2;
    double p_yes;
};

/// Tables drawn from the conditional law given fixed marginals.
using NullModel = std::variant<UnconditionalNull, Marginals>;

struct PAtom {
    double p;
    double prob;
};

/// Finite support of a discrete p-value under a stated null model:
/// (p, probability) atoms with strictly increasing p summing to one.
struct PValueDistribution {
    std::vector<PAtom> atoms;
    NullModel model;
    TestKind test = TestKind::fisher;
    Tail tail = Tail::standard;
};

/// Conditional law of a test's p-values over a 2x2 support: per support
/// point, the hypergeometric mass and the p-value in each direction. The
/// p-values are computed through the same summation as the exact-test
/// routines, so lookups match fisher_exact_p / reverse_fisher_exact_p
/// bit for bit.
struct ConditionalLaw {
    Support2x2 support;
    std::vector<double> log_pmf;
    std::vector<double> mass;      // exp(log_pmf), sums to 1
    std::vector<double> cum_mass;  // inclusive prefix sums, for sampling
    std::vector<double> p_standard;
    std::vector<double> p_reverse;

    std::size_t size() const { return mass.size(); }
    std::size_t index_of(long long k1) const { return static_cast<std::size_t>(k1 - support.lo); }
    const std::vector<double>& p(Tail t) const;  // naive_reverse not stored; use p_at
    double p_at(long long k1, Tail t) const;
};

ConditionalLaw conditional_law_2x2(const Marginals& m, TestKind test, TieTolerance tol = {});

/// Conditional law over all R x C tables with marginals m, indexed by the
/// enumeration order of TableEnumerator. Only Fisher orderings are defined
/// for R x C tables.
struct RxcConditionalLaw {
    std::uint64_t n_tables = 0;
    std::vector<double> mass;
    std::vector<double> cum_mass;
    std::vector<double> p_standard;
    std::vector<double> p_reverse;

    double p_at(std::uint64_t index, Tail t) const;
};

RxcConditionalLaw conditional_law_rxc(const Marginals& m, TieTolerance tol = {},
                                      std::uint64_t cap = kDefaultEnumerationCap);

/// Exact distribution of the test's p-value conditional on fixed marginals.
PValueDistribution conditional_distribution(const Marginals& m, TestKind test, Tail tail,
                                            TieTolerance tol = {},
                                            std::uint64_t cap = kDefaultEnumerationCap);

/// Exact distribution of the test's p-value when both "yes" counts are
/// independent Binom(n_g, p_yes) draws: all (n1+1)(n2+1) tables enumerated
/// and weighted by the product of binomial masses. Tables with an empty
/// margin contribute p = 1 for the chi-square tests (their statistic is
/// ill-defined; observed equals expected).
PValueDistribution unconditional_distribution(long long n1, long long n2, double p_yes,
                                              TestKind test, Tail tail, TieTolerance tol = {},
                                              std::uint64_t cap = kDefaultEnumerationCap);

/// P(p <= alpha) of the atom distribution.
double cdf(const PValueDistribution& d, double alpha);

/// Mean of the atom distribution.
double expectation(const PValueDistribution& d);

struct CurvePoint {
    double alpha;
    double cdf;
};

/// Step-CDF reconstruction points: the origin, one point per atom at its
/// post-jump height, and (1,1) when the last atom sits below 1. cdf(a) is
/// the height of the last point with alpha <= a.
std::vector<CurvePoint> curve_points(const PValueDistribution& d);

/// Writes `alpha,cdf,reference` rows, reference being the uniform diagonal.
void write_curve_csv(const PValueDistribution& d, std::ostream& os);

} // namespace bscreen

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "baseline_screen/combination.hpp"
#include "baseline_screen/pvalue_distribution.hpp"

namespace bscreen {

/// Root seed for the simulation streams. Every random draw is derived from
/// (seed, simulation index, variable index), so results are bit-identical
/// for a given seed regardless of how simulations are split across workers.
struct RngSeed {
    std::uint64_t value = 1;

    static constexpr std::string_view scheme() { return "splitmix64-ctr/v1"; }
};

/// Independent random stream for one (seed, sim, variable) triple.
class StreamRng {
public:
    StreamRng(RngSeed seed, std::uint64_t sim_index, std::uint64_t var_index);

    std::uint64_t next_u64();

    /// Uniform draw strictly inside (0,1).
    double next_unit();

private:
    std::uint64_t state_;
};

/// Monte Carlo estimate of a combined p-value. The estimate is the add-one
/// form (exceed_count + 1) / (n_sims + 1), which is itself a valid p-value;
/// ci95 is the Clopper-Pearson interval on the exceedance proportion.
struct MonteCarloResult {
    double estimate = 1.0;
    std::uint64_t exceed_count = 0;
    std::uint64_t n_sims = 0;
    double ci95_lo = 0.0;
    double ci95_hi = 1.0;
    double observed_statistic = 0.0;
    RngSeed seed;
};

std::pair<double, std::pair<double, double>> mc_p_estimate(std::uint64_t exceed_count,
                                                           std::uint64_t n_sims);

/// Exact two-sided Clopper-Pearson interval for r successes in n trials.
std::pair<double, double> clopper_pearson(std::uint64_t r, std::uint64_t n,
                                          double confidence = 0.95);

/// Draws a table from the conditional law given the marginals: the 2x2 cell
/// from its hypergeometric, larger tables by sequential cell-wise
/// multivariate hypergeometric fills. The sample's marginals equal m.
TableRxC sample_conditional_table(const Marginals& m, StreamRng& rng);

/// Null model of one baseline variable inside a combined simulation:
/// a contingency table conditioned on its marginals, or an exactly uniform
/// p-value for a continuous variable.
struct VariableNullSpec {
    std::string name;
    std::optional<Marginals> marginals;  // nullopt: uniform continuous
    TestKind test = TestKind::fisher;
};

struct SimulationOptions {
    CombinationMethod statistic;                // log_sum_statistic or stouffer_statistic
    Direction direction = Direction::overbalance;
    std::uint64_t n_sims = 1'000'000;
    RngSeed seed;
    int workers = 1;
    TieTolerance tol;
    /// The Stouffer statistic is +inf whenever some per-variable p-value is
    /// exactly 1, which has positive probability for every conditional
    /// table law; callers must opt in to that degeneracy.
    bool allow_degenerate_statistic = false;
    std::uint64_t enumeration_cap = kDefaultEnumerationCap;
};

/// Estimates P0(statistic <= observed) for the combined statistic over
/// independent per-variable draws from their null laws. Overbalance feeds
/// reverse p-values to the statistic, imbalance standard ones. Simulated
/// statistics tying the observed value count as exceedances.
MonteCarloResult simulate_combined_null(std::span<const VariableNullSpec> variables,
                                        double observed_statistic,
                                        const SimulationOptions& opts);

/// Exact P0(statistic <= observed) by full enumeration of the Cartesian
/// product of the per-variable supports, weighted by their conditional
/// masses. All variables must be tabular; the product of support sizes must
/// not exceed the cap (default 10^6).
double exhaustive_combined_p(std::span<const VariableNullSpec> variables,
                             const CombinationMethod& statistic, Direction direction,
                             double observed_statistic, TieTolerance tol = {},
                             std::uint64_t cap = 1'000'000);

/// Null behaviour of the naive "combine, then subtract from 1" screening of
/// dichotomous variables: each simulation draws n_tables fresh tables with
/// both "yes" counts Binom(n_g, p_yes), computes standard Fisher exact
/// p-values, and folds them with the closed-form combination methods.
struct NaiveCombinationOptions {
    int n_tables = 20;
    long long n1 = 100;
    long long n2 = 100;
    double p_yes = 0.5;
    std::uint64_t n_sims = 100'000;
    RngSeed seed;
    int workers = 1;
    TieTolerance tol;
    double brown_cap = 0.98;
};

struct NaiveCombinationCurve {
    CombinationMethod::Kind method;
    double mean_combined = 0.0;
    /// Sorted sample of 1 - combined, the quantity the naive screening
    /// treats as a p-value; its empirical CDF against the diagonal shows how
    /// anti-conservative that is.
    std::vector<double> one_minus_combined;
};

struct NaiveCombinationResult {
    std::vector<NaiveCombinationCurve> curves;
    std::uint64_t n_sims = 0;
    RngSeed seed;
};

NaiveCombinationResult simulate_naive_combination(
    const NaiveCombinationOptions& opts,
    std::span<const CombinationMethod::Kind> methods);

} // namespace bscreen

#include "baseline_screen/null_simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include <boost/math/special_functions/beta.hpp>

#include "baseline_screen/numerics.hpp"
#include "detail.hpp"

namespace bscreen {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline std::uint64_t mix64(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

} // namespace

StreamRng::StreamRng(RngSeed seed, std::uint64_t sim_index, std::uint64_t var_index) {
    std::uint64_t h = mix64(seed.value ^ 0x8f1bbcdcbfa53e0bull);
    h = mix64(h ^ sim_index);
    h = mix64(h ^ var_index);
    state_ = h;
}

std::uint64_t StreamRng::next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix64(state_);
}

double StreamRng::next_unit() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::pair<double, std::pair<double, double>> mc_p_estimate(std::uint64_t exceed_count,
                                                           std::uint64_t n_sims) {
    if (n_sims < 1) throw std::invalid_argument("mc_p_estimate: n_sims must be >= 1");
    if (exceed_count > n_sims)
        throw std::invalid_argument("mc_p_estimate: exceed_count above n_sims");
    const double estimate = static_cast<double>(exceed_count + 1) /
                            static_cast<double>(n_sims + 1);
    return {estimate, clopper_pearson(exceed_count, n_sims)};
}

std::pair<double, double> clopper_pearson(std::uint64_t r, std::uint64_t n,
                                          double confidence) {
    if (n < 1) throw std::invalid_argument("clopper_pearson: n must be >= 1");
    if (r > n) throw std::invalid_argument("clopper_pearson: r above n");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw std::invalid_argument("clopper_pearson: confidence outside (0,1)");
    const double half_alpha = 0.5 * (1.0 - confidence);
    const double rd = static_cast<double>(r);
    const double nd = static_cast<double>(n);
    const double lo = r == 0 ? 0.0 : boost::math::ibeta_inv(rd, nd - rd + 1.0, half_alpha);
    const double hi =
        r == n ? 1.0 : boost::math::ibeta_inv(rd + 1.0, nd - rd, 1.0 - half_alpha);
    return {lo, hi};
}

namespace {

// Count of marked items among `draws` taken from a pool of `pop` with
// `marked` marked, by inverse-CDF walk over the pmf.
long long sample_hypergeometric(long long pop, long long marked, long long draws,
                                StreamRng& rng) {
    const long long lo = std::max(0LL, draws - (pop - marked));
    const long long hi = std::min(draws, marked);
    if (lo == hi) return lo;
    const double u = rng.next_unit();
    double pmf = std::exp(log_choose(marked, lo) + log_choose(pop - marked, draws - lo) -
                          log_choose(pop, draws));
    double cum = pmf;
    long long k = lo;
    while (k < hi && cum < u) {
        // P(k+1)/P(k) for the hypergeometric.
        const double ratio = static_cast<double>(marked - k) *
                             static_cast<double>(draws - k) /
                             (static_cast<double>(k + 1) *
                              static_cast<double>(pop - marked - draws + k + 1));
        pmf *= ratio;
        cum += pmf;
        ++k;
    }
    return k;
}

} // namespace

TableRxC sample_conditional_table(const Marginals& m, StreamRng& rng) {
    validate(m);
    const std::size_t n_rows = m.row_totals.size();
    const std::size_t n_cols = m.col_totals.size();
    TableRxC t;
    t.counts.assign(n_rows, std::vector<long long>(n_cols, 0));
    std::vector<long long> col_left = m.col_totals;
    for (std::size_t i = 0; i + 1 < n_rows; ++i) {
        long long row_left = m.row_totals[i];
        long long pool = std::accumulate(col_left.begin(), col_left.end(), 0LL);
        for (std::size_t j = 0; j + 1 < n_cols; ++j) {
            const long long v = sample_hypergeometric(pool, col_left[j], row_left, rng);
            t.counts[i][j] = v;
            row_left -= v;
            pool -= col_left[j];
            col_left[j] -= v;
        }
        t.counts[i][n_cols - 1] = row_left;
        col_left[n_cols - 1] -= row_left;
    }
    for (std::size_t j = 0; j < n_cols; ++j) t.counts[n_rows - 1][j] = col_left[j];
    return t;
}

namespace {

// Everything a simulation worker needs from one variable: the sampling
// cumulative masses and the statistic contribution per support point.
// Continuous variables have no table; they draw a fresh uniform p instead.
struct VariableLaw {
    bool tabular = false;
    std::vector<double> mass;
    std::vector<double> cum_mass;
    std::vector<double> contrib;
    bool has_exact_one = false;  // p == 1 with positive probability
};

double transform_p(double p, CombinationMethod::Kind kind) {
    if (kind == CombinationMethod::Kind::log_sum_statistic) return std::log(p);
    return p == 1.0 ? kInf : std_normal_quantile(p);
}

VariableLaw build_variable_law(const VariableNullSpec& spec, Direction direction,
                               CombinationMethod::Kind kind, TieTolerance tol,
                               std::uint64_t cap) {
    VariableLaw out;
    if (!spec.marginals) return out;
    out.tabular = true;
    const Tail tail =
        direction == Direction::overbalance ? Tail::reverse : Tail::standard;
    const Marginals& m = *spec.marginals;
    std::vector<double> ps;
    if (m.is_2x2()) {
        const ConditionalLaw law = conditional_law_2x2(m, spec.test, tol);
        out.mass = law.mass;
        out.cum_mass = law.cum_mass;
        ps = law.p(tail);
    } else {
        const RxcConditionalLaw law = conditional_law_rxc(m, tol, cap);
        out.mass = law.mass;
        out.cum_mass = law.cum_mass;
        ps = tail == Tail::reverse ? law.p_reverse : law.p_standard;
    }
    out.contrib.reserve(ps.size());
    for (double p : ps) {
        out.has_exact_one |= p == 1.0;
        out.contrib.push_back(transform_p(p, kind));
    }
    return out;
}

std::vector<VariableLaw> build_laws(std::span<const VariableNullSpec> variables,
                                    Direction direction, const CombinationMethod& statistic,
                                    TieTolerance tol, std::uint64_t cap,
                                    bool allow_degenerate) {
    if (variables.empty())
        throw std::invalid_argument("combined simulation: no variables");
    if (statistic.kind != CombinationMethod::Kind::log_sum_statistic &&
        statistic.kind != CombinationMethod::Kind::stouffer_statistic)
        throw std::invalid_argument(
            "combined simulation: statistic must be log_sum_statistic or stouffer_statistic");
    std::vector<VariableLaw> laws;
    laws.reserve(variables.size());
    for (const auto& spec : variables)
        laws.push_back(build_variable_law(spec, direction, statistic.kind, tol, cap));
    if (statistic.kind == CombinationMethod::Kind::stouffer_statistic && !allow_degenerate) {
        for (std::size_t v = 0; v < laws.size(); ++v) {
            if (laws[v].has_exact_one)
                throw std::invalid_argument(
                    "combined simulation: the Stouffer statistic degenerates to +inf because "
                    "variable '" + std::string(variables[v].name) +
                    "' reaches p = 1 with positive probability; rerun with the log-sum "
                    "statistic or opt in to the degeneracy");
        }
    }
    return laws;
}

inline std::size_t draw_index(const std::vector<double>& cum_mass, double u) {
    const auto it = std::lower_bound(cum_mass.begin(), cum_mass.end(), u);
    const std::size_t i = static_cast<std::size_t>(it - cum_mass.begin());
    return std::min(i, cum_mass.size() - 1);
}

double simulate_one(const std::vector<VariableLaw>& laws, CombinationMethod::Kind kind,
                    RngSeed seed, std::uint64_t sim) {
    double stat = 0.0;
    for (std::size_t v = 0; v < laws.size(); ++v) {
        StreamRng rng(seed, sim, v);
        const VariableLaw& law = laws[v];
        if (law.tabular) {
            stat += law.contrib[draw_index(law.cum_mass, rng.next_unit())];
        } else {
            const double u = rng.next_unit();
            stat += kind == CombinationMethod::Kind::log_sum_statistic
                        ? std::log(u)
                        : std_normal_quantile(u);
        }
    }
    return stat;
}

int clamp_workers(int workers, std::uint64_t n_sims) {
    if (workers < 1) workers = 1;
    const std::uint64_t cap = std::min<std::uint64_t>(n_sims, 256);
    return static_cast<int>(std::min<std::uint64_t>(workers, cap));
}

// Runs fn(first, last) on contiguous sim ranges across the workers.
template <typename Fn>
void parallel_ranges(std::uint64_t n_sims, int workers, Fn&& fn) {
    if (workers <= 1) {
        fn(std::uint64_t{0}, n_sims);
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(workers);
    const std::uint64_t chunk = (n_sims + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const std::uint64_t first = chunk * w;
        const std::uint64_t last = std::min(n_sims, first + chunk);
        if (first >= last) break;
        threads.emplace_back([&fn, first, last] { fn(first, last); });
    }
    for (auto& t : threads) t.join();
}

} // namespace

MonteCarloResult simulate_combined_null(std::span<const VariableNullSpec> variables,
                                        double observed_statistic,
                                        const SimulationOptions& opts) {
    if (opts.n_sims < 1)
        throw std::invalid_argument("simulate_combined_null: n_sims must be >= 1");
    const std::vector<VariableLaw> laws =
        build_laws(variables, opts.direction, opts.statistic, opts.tol,
                   opts.enumeration_cap, opts.allow_degenerate_statistic);

    const int workers = clamp_workers(opts.workers, opts.n_sims);
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(workers), 0);
    std::atomic<int> next_worker{0};
    parallel_ranges(opts.n_sims, workers, [&](std::uint64_t first, std::uint64_t last) {
        const int slot = next_worker.fetch_add(1);
        std::uint64_t local = 0;
        for (std::uint64_t sim = first; sim < last; ++sim) {
            const double stat = simulate_one(laws, opts.statistic.kind, opts.seed, sim);
            // A tie with the observed statistic counts as an exceedance.
            if (stat <= observed_statistic) ++local;
        }
        counts[static_cast<std::size_t>(slot)] = local;
    });
    const std::uint64_t exceed = std::accumulate(counts.begin(), counts.end(), 0ULL);

    MonteCarloResult r;
    r.exceed_count = exceed;
    r.n_sims = opts.n_sims;
    const auto [estimate, ci] = mc_p_estimate(exceed, opts.n_sims);
    r.estimate = estimate;
    r.ci95_lo = ci.first;
    r.ci95_hi = ci.second;
    r.observed_statistic = observed_statistic;
    r.seed = opts.seed;
    return r;
}

double exhaustive_combined_p(std::span<const VariableNullSpec> variables,
                             const CombinationMethod& statistic, Direction direction,
                             double observed_statistic, TieTolerance tol,
                             std::uint64_t cap) {
    for (const auto& spec : variables)
        if (!spec.marginals)
            throw std::invalid_argument(
                "exhaustive_combined_p: continuous variables cannot be enumerated");
    const std::vector<VariableLaw> laws =
        build_laws(variables, direction, statistic, tol, cap,
                   /*allow_degenerate=*/true);

    std::uint64_t product = 1;
    for (const auto& law : laws) {
        const std::uint64_t size = law.cum_mass.size();
        if (size > 0 && product > cap / size) {
            const std::uint64_t estimate =
                product > (std::uint64_t(1) << 62) / size ? (std::uint64_t(1) << 63)
                                                          : product * size;
            throw EnumerationCapExceeded(estimate, cap);
        }
        product *= size;
    }

    double total = 0.0;
    // Depth-first product walk; statistic contributions add left to right,
    // matching the association order of the Monte Carlo path.
    auto walk = [&](auto&& self, std::size_t v, double stat, double weight) -> void {
        if (v == laws.size()) {
            if (stat <= observed_statistic) total += weight;
            return;
        }
        const auto& law = laws[v];
        for (std::size_t i = 0; i < law.contrib.size(); ++i)
            self(self, v + 1, stat + law.contrib[i], weight * law.mass[i]);
    };
    walk(walk, 0, 0.0, 1.0);
    return std::min(total, 1.0);
}

NaiveCombinationResult simulate_naive_combination(
    const NaiveCombinationOptions& opts,
    std::span<const CombinationMethod::Kind> methods) {
    if (opts.n_tables < 1)
        throw std::invalid_argument("simulate_naive_combination: n_tables must be >= 1");
    if (opts.n_sims < 1)
        throw std::invalid_argument("simulate_naive_combination: n_sims must be >= 1");
    if (!(opts.p_yes > 0.0 && opts.p_yes < 1.0))
        throw std::invalid_argument("simulate_naive_combination: p_yes must lie in (0,1)");
    if (methods.empty())
        throw std::invalid_argument("simulate_naive_combination: no combination methods");
    for (const auto kind : methods)
        if (kind != CombinationMethod::Kind::stouffer_formula &&
            kind != CombinationMethod::Kind::fisher_formula &&
            kind != CombinationMethod::Kind::brown_adjusted_stouffer)
            throw std::invalid_argument(
                "simulate_naive_combination: only the closed-form combinations apply");

    const long long n1 = opts.n1, n2 = opts.n2;
    // Standard Fisher exact p-values per yes-total, pre-mapped to the three
    // combination scales.
    const std::size_t n_s = static_cast<std::size_t>(n1 + n2 + 1);
    std::vector<long long> lo_of_s(n_s);
    std::vector<std::vector<double>> lnp(n_s), z(n_s), z_brown(n_s);
    for (long long s = 0; s <= n1 + n2; ++s) {
        const ConditionalLaw law = conditional_law_2x2(
            Marginals{{s, n1 + n2 - s}, {n1, n2}}, TestKind::fisher, opts.tol);
        const std::size_t i = static_cast<std::size_t>(s);
        lo_of_s[i] = law.support.lo;
        lnp[i].reserve(law.size());
        z[i].reserve(law.size());
        z_brown[i].reserve(law.size());
        for (double p : law.p_standard) {
            lnp[i].push_back(std::log(p));
            z[i].push_back(p == 1.0 ? kInf : std_normal_quantile(p));
            z_brown[i].push_back(std_normal_quantile(std::min(p, opts.brown_cap)));
        }
    }

    auto binom_cum = [](long long n, double p) {
        std::vector<double> cum(static_cast<std::size_t>(n + 1));
        const double lp = std::log(p), lq = std::log1p(-p);
        double acc = 0.0;
        for (long long k = 0; k <= n; ++k) {
            acc += std::exp(log_choose(n, k) + k * lp + (n - k) * lq);
            cum[static_cast<std::size_t>(k)] = acc;
        }
        return cum;
    };
    const std::vector<double> cum1 = binom_cum(n1, opts.p_yes);
    const std::vector<double> cum2 = binom_cum(n2, opts.p_yes);

    const bool want_stouffer =
        std::find(methods.begin(), methods.end(),
                  CombinationMethod::Kind::stouffer_formula) != methods.end();
    const bool want_fisher =
        std::find(methods.begin(), methods.end(),
                  CombinationMethod::Kind::fisher_formula) != methods.end();
    const bool want_brown =
        std::find(methods.begin(), methods.end(),
                  CombinationMethod::Kind::brown_adjusted_stouffer) != methods.end();

    std::vector<double> one_minus_st(want_stouffer ? opts.n_sims : 0);
    std::vector<double> one_minus_fi(want_fisher ? opts.n_sims : 0);
    std::vector<double> one_minus_br(want_brown ? opts.n_sims : 0);

    const double sqrt_t = std::sqrt(static_cast<double>(opts.n_tables));
    const int workers = clamp_workers(opts.workers, opts.n_sims);
    parallel_ranges(opts.n_sims, workers, [&](std::uint64_t first, std::uint64_t last) {
        for (std::uint64_t sim = first; sim < last; ++sim) {
            double z_sum = 0.0, zb_sum = 0.0, lnp_sum = 0.0;
            bool any_one = false;
            for (int j = 0; j < opts.n_tables; ++j) {
                StreamRng rng(opts.seed, sim, static_cast<std::uint64_t>(j));
                const std::size_t k1 = draw_index(cum1, rng.next_unit());
                const std::size_t k2 = draw_index(cum2, rng.next_unit());
                const std::size_t s = k1 + k2;
                const std::size_t idx = k1 - static_cast<std::size_t>(lo_of_s[s]);
                const double zv = z[s][idx];
                if (zv == kInf)
                    any_one = true;
                else
                    z_sum += zv;
                zb_sum += z_brown[s][idx];
                lnp_sum += lnp[s][idx];
            }
            if (want_stouffer)
                one_minus_st[sim] =
                    any_one ? 0.0 : 1.0 - std_normal_cdf(z_sum / sqrt_t);
            if (want_brown) one_minus_br[sim] = 1.0 - std_normal_cdf(zb_sum / sqrt_t);
            if (want_fisher)
                one_minus_fi[sim] =
                    1.0 - chi_square_sf(-2.0 * lnp_sum, 2 * opts.n_tables);
        }
    });

    NaiveCombinationResult result;
    result.n_sims = opts.n_sims;
    result.seed = opts.seed;
    auto push_curve = [&](CombinationMethod::Kind kind, std::vector<double>&& vals) {
        NaiveCombinationCurve c;
        c.method = kind;
        double acc = 0.0;
        for (double v : vals) acc += v;
        c.mean_combined = 1.0 - acc / static_cast<double>(vals.size());
        std::sort(vals.begin(), vals.end());
        c.one_minus_combined = std::move(vals);
        result.curves.push_back(std::move(c));
    };
    for (const auto kind : methods) {
        if (kind == CombinationMethod::Kind::stouffer_formula)
            push_curve(kind, std::move(one_minus_st));
        else if (kind == CombinationMethod::Kind::fisher_formula)
            push_curve(kind, std::move(one_minus_fi));
        else
            push_curve(kind, std::move(one_minus_br));
    }
    return result;
}

} // namespace bscreen

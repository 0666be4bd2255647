#include "baseline_screen/pvalue_distribution.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <ostream>

#include "detail.hpp"

namespace bscreen {

namespace detail {

void sorted_tail_pvalues(const std::vector<double>& log_pmf, const std::vector<double>& mass,
                         double rel_eps, std::vector<double>& p_std,
                         std::vector<double>& p_rev) {
    const std::size_t n = log_pmf.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return log_pmf[a] != log_pmf[b] ? log_pmf[a] < log_pmf[b] : a < b;
    });
    std::vector<double> sorted_lp(n), prefix(n), suffix(n);
    for (std::size_t j = 0; j < n; ++j) sorted_lp[j] = log_pmf[order[j]];
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) prefix[j] = (acc += mass[order[j]]);
    acc = 0.0;
    for (std::size_t j = n; j-- > 0;) suffix[j] = (acc += mass[order[j]]);

    const double slack = std::log1p(rel_eps);
    p_std.resize(n);
    p_rev.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto le_end =
            std::upper_bound(sorted_lp.begin(), sorted_lp.end(), log_pmf[i] + slack);
        const std::size_t covered = static_cast<std::size_t>(le_end - sorted_lp.begin());
        p_std[i] = covered == n ? 1.0 : std::min(prefix[covered - 1], 1.0);
        const auto ge_begin =
            std::lower_bound(sorted_lp.begin(), sorted_lp.end(), log_pmf[i] - slack);
        const std::size_t first = static_cast<std::size_t>(ge_begin - sorted_lp.begin());
        p_rev[i] = first == 0 ? 1.0 : std::min(suffix[first], 1.0);
    }
}

} // namespace detail

std::string to_string(TestKind t) {
    switch (t) {
        case TestKind::fisher: return "fisher";
        case TestKind::chisq: return "chisq";
        case TestKind::chisq_yates: return "chisq_yates";
    }
    return "?";
}

std::string to_string(Tail t) {
    switch (t) {
        case Tail::standard: return "standard";
        case Tail::reverse: return "reverse";
        case Tail::naive_reverse: return "naive-reverse";
    }
    return "?";
}

const std::vector<double>& ConditionalLaw::p(Tail t) const {
    switch (t) {
        case Tail::standard: return p_standard;
        case Tail::reverse: return p_reverse;
        default: throw std::invalid_argument("ConditionalLaw::p: tail has no stored vector");
    }
}

double ConditionalLaw::p_at(long long k1, Tail t) const {
    const std::size_t i = index_of(k1);
    switch (t) {
        case Tail::standard: return p_standard.at(i);
        case Tail::reverse: return p_reverse.at(i);
        case Tail::naive_reverse: return 1.0 - p_standard.at(i);
    }
    throw std::invalid_argument("ConditionalLaw::p_at: bad tail");
}

ConditionalLaw conditional_law_2x2(const Marginals& m, TestKind test, TieTolerance tol) {
    ConditionalLaw law;
    law.support = support_2x2(m);
    detail::support_log_pmf(m, law.log_pmf, law.mass);
    const std::size_t n = law.mass.size();
    law.cum_mass.resize(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) law.cum_mass[i] = (acc += law.mass[i]);

    // The reverse tail is always ordered by the hypergeometric probability:
    // that is the reverse Fisher exact p-value, the only table reverse that
    // keeps P0(p <= a) <= a.
    const double slack = std::log1p(tol.rel_eps);
    law.p_reverse.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        law.p_reverse[i] = detail::tail_mass_ge(law.log_pmf, law.mass, law.log_pmf[i] - slack);

    law.p_standard.resize(n);
    if (test == TestKind::fisher) {
        for (std::size_t i = 0; i < n; ++i)
            law.p_standard[i] =
                detail::tail_mass_le(law.log_pmf, law.mass, law.log_pmf[i] + slack);
    } else {
        const bool yates = test == TestKind::chisq_yates;
        const long long s = m.row_totals[0];
        if (s == 0 || s == m.total()) {
            // Single forced table; the chi-square statistic is 0/0 there and
            // observed equals expected, so the p-value is taken as 1.
            std::fill(law.p_standard.begin(), law.p_standard.end(), 1.0);
        } else {
            for (long long k = law.support.lo; k <= law.support.hi; ++k) {
                const Table2x2 t = table_from_marginals(m, k);
                law.p_standard[law.index_of(k)] = chi_square_p(t, yates).value;
            }
        }
    }
    return law;
}

double RxcConditionalLaw::p_at(std::uint64_t index, Tail t) const {
    switch (t) {
        case Tail::standard: return p_standard.at(index);
        case Tail::reverse: return p_reverse.at(index);
        case Tail::naive_reverse: return 1.0 - p_standard.at(index);
    }
    throw std::invalid_argument("RxcConditionalLaw::p_at: bad tail");
}

RxcConditionalLaw conditional_law_rxc(const Marginals& m, TieTolerance tol,
                                      std::uint64_t cap) {
    RxcConditionalLaw law;
    std::vector<double> log_pmf;
    TableEnumerator en(m, cap);
    while (auto table = en.next()) {
        const double lp = detail::rxc_log_prob(*table, m);
        log_pmf.push_back(lp);
        law.mass.push_back(std::exp(lp));
    }
    law.n_tables = en.produced();
    law.cum_mass.resize(law.mass.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < law.mass.size(); ++i) law.cum_mass[i] = (acc += law.mass[i]);
    detail::sorted_tail_pvalues(log_pmf, law.mass, tol.rel_eps, law.p_standard, law.p_reverse);
    return law;
}

namespace {

std::vector<PAtom> merge_atoms(std::vector<PAtom> raw) {
    std::sort(raw.begin(), raw.end(), [](const PAtom& a, const PAtom& b) { return a.p < b.p; });
    // Distinct support points can carry analytically equal p-values that
    // differ in the last ulp; merge within an absolute 1e-12.
    constexpr double kMergeTol = 1e-12;
    std::vector<PAtom> atoms;
    for (const PAtom& a : raw) {
        if (a.prob == 0.0) continue;
        if (!atoms.empty() && a.p - atoms.back().p <= kMergeTol)
            atoms.back().prob += a.prob;
        else
            atoms.push_back(a);
    }
    return atoms;
}

} // namespace

PValueDistribution conditional_distribution(const Marginals& m, TestKind test, Tail tail,
                                            TieTolerance tol, std::uint64_t cap) {
    validate(m);
    PValueDistribution d;
    d.model = m;
    d.test = test;
    d.tail = tail;
    std::vector<PAtom> raw;
    if (m.is_2x2()) {
        const ConditionalLaw law = conditional_law_2x2(m, test, tol);
        raw.reserve(law.size());
        for (long long k = law.support.lo; k <= law.support.hi; ++k)
            raw.push_back(PAtom{law.p_at(k, tail), law.mass[law.index_of(k)]});
    } else {
        if (test != TestKind::fisher)
            throw std::invalid_argument(
                "conditional_distribution: only the Fisher exact test applies beyond 2x2");
        const RxcConditionalLaw law = conditional_law_rxc(m, tol, cap);
        raw.reserve(law.mass.size());
        for (std::uint64_t i = 0; i < law.n_tables; ++i)
            raw.push_back(PAtom{law.p_at(i, tail), law.mass[i]});
    }
    d.atoms = merge_atoms(std::move(raw));
    return d;
}

PValueDistribution unconditional_distribution(long long n1, long long n2, double p_yes,
                                              TestKind test, Tail tail, TieTolerance tol,
                                              std::uint64_t cap) {
    if (n1 < 1 || n2 < 1)
        throw std::invalid_argument("unconditional_distribution: group sizes must be >= 1");
    if (!(p_yes > 0.0 && p_yes < 1.0))
        throw std::invalid_argument("unconditional_distribution: p_yes must lie in (0,1)");
    const std::uint64_t n_tables =
        static_cast<std::uint64_t>(n1 + 1) * static_cast<std::uint64_t>(n2 + 1);
    if (n_tables > cap) throw EnumerationCapExceeded(n_tables, cap);

    const double lp = std::log(p_yes);
    const double lq = std::log1p(-p_yes);
    auto binom_log_pmf = [&](long long n, long long k) {
        return log_choose(n, k) + k * lp + (n - k) * lq;
    };

    // One conditional law per yes-total s; every (k1,k2) pair reuses them.
    std::vector<ConditionalLaw> by_s;
    by_s.reserve(static_cast<std::size_t>(n1 + n2 + 1));
    for (long long s = 0; s <= n1 + n2; ++s)
        by_s.push_back(
            conditional_law_2x2(Marginals{{s, n1 + n2 - s}, {n1, n2}}, test, tol));

    std::vector<PAtom> raw;
    raw.reserve(n_tables);
    for (long long k1 = 0; k1 <= n1; ++k1) {
        const double w1 = binom_log_pmf(n1, k1);
        for (long long k2 = 0; k2 <= n2; ++k2) {
            const double w = std::exp(w1 + binom_log_pmf(n2, k2));
            raw.push_back(PAtom{by_s[static_cast<std::size_t>(k1 + k2)].p_at(k1, tail), w});
        }
    }

    PValueDistribution d;
    d.model = UnconditionalNull{n1, n2, p_yes};
    d.test = test;
    d.tail = tail;
    d.atoms = merge_atoms(std::move(raw));
    return d;
}

double cdf(const PValueDistribution& d, double alpha) {
    if (alpha < 0.0 || alpha > 1.0)
        throw std::invalid_argument("cdf: alpha must lie in [0,1]");
    double sum = 0.0;
    for (const PAtom& a : d.atoms) {
        if (a.p <= alpha + 1e-12)
            sum += a.prob;
        else
            break;
    }
    return std::min(sum, 1.0);
}

double expectation(const PValueDistribution& d) {
    double e = 0.0;
    for (const PAtom& a : d.atoms) e += a.p * a.prob;
    return e;
}

std::vector<CurvePoint> curve_points(const PValueDistribution& d) {
    std::vector<CurvePoint> pts;
    pts.reserve(d.atoms.size() + 2);
    pts.push_back(CurvePoint{0.0, 0.0});
    double acc = 0.0;
    for (const PAtom& a : d.atoms) {
        acc += a.prob;
        pts.push_back(CurvePoint{a.p, std::min(acc, 1.0)});
    }
    if (d.atoms.empty() || d.atoms.back().p < 1.0 - 1e-12) pts.push_back(CurvePoint{1.0, 1.0});
    return pts;
}

namespace {

void append_double(std::string& out, double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, end);
}

} // namespace

void write_curve_csv(const PValueDistribution& d, std::ostream& os) {
    std::string out = "alpha,cdf,reference\n";
    for (const CurvePoint& pt : curve_points(d)) {
        append_double(out, pt.alpha);
        out.push_back(',');
        append_double(out, pt.cdf);
        out.push_back(',');
        append_double(out, pt.alpha);
        out.push_back('\n');
    }
    os << out;
}

} // namespace bscreen

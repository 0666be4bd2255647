#include "baseline_screen/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "baseline_screen/combination.hpp"

namespace bscreen {

using ordered_json = nlohmann::ordered_json;

UniformReference uniform_reference(std::size_t n_variables) {
    UniformReference r;
    r.mean = 0.5;
    r.sd_of_mean =
        n_variables == 0 ? 0.0 : 1.0 / std::sqrt(12.0 * static_cast<double>(n_variables));
    return r;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ObservedPValues {
    std::vector<double> standard;
    std::vector<double> reverse;
};

VariableResult evaluate_variable(const VariableSpec& v, const AnalyzeOptions& opts) {
    VariableResult r;
    r.name = v.name;
    r.kind = v.kind();
    r.test = v.test;
    r.tie_adjusted = v.tie_adjusted;
    switch (r.kind) {
        case VariableKind::dichotomous: {
            const auto& t = std::get<Table2x2>(v.data);
            if (v.test == TestKind::fisher) {
                r.p_standard = fisher_exact_p(t, opts.tol).value;
            } else {
                try {
                    r.p_standard = chi_square_p(t, v.test == TestKind::chisq_yates).value;
                } catch (const DegenerateTableError&) {
                    // Single-table support; observed equals expected.
                    r.p_standard = 1.0;
                    r.degenerate = true;
                }
            }
            r.p_reverse = reverse_fisher_exact_p(t, opts.tol).value;
            break;
        }
        case VariableKind::categorical: {
            const auto& t = std::get<TableRxC>(v.data);
            r.p_standard =
                fisher_exact_p_rxc(t, opts.tol, Direction::imbalance, opts.enumeration_cap)
                    .value;
            r.p_reverse =
                fisher_exact_p_rxc(t, opts.tol, Direction::overbalance, opts.enumeration_cap)
                    .value;
            break;
        }
        case VariableKind::continuous: {
            const auto& s = std::get<ContinuousSummary>(v.data);
            const PValue p = t_test_p(s, /*equal_variance=*/true);
            r.p_standard = p.value;
            r.degenerate = p.degenerate;
            r.p_reverse = 1.0 - p.value;
            break;
        }
    }
    return r;
}

double observed_statistic(const std::vector<double>& ps, CombinationMethod::Kind kind) {
    return kind == CombinationMethod::Kind::log_sum_statistic ? log_sum_statistic(ps)
                                                              : stouffer_statistic(ps);
}

std::vector<std::string> build_warnings(const TrialDataset& ds, const AnalysisReport& report,
                                        const AnalyzeOptions& opts) {
    std::vector<std::string> w;
    w.push_back(
        "The combined p-value treats baseline variables as independent; correlated "
        "variables (shared diagnoses, derived measurements) make it unreliable in either "
        "direction.");
    w.push_back(
        "Stratified, blocked or minimised randomisation produces groups more alike than "
        "simple randomisation; p-values near 1 are expected under such designs and are not "
        "evidence of data problems.");
    w.push_back(
        "This is a screening statistic, not a diagnostic: extreme values routinely come "
        "from typos, rounding, per-variable denominators or design features. Follow up on "
        "the data, not on the p-value.");
    w.push_back(
        "Screening many variables or many studies yields some extreme p-values by chance; "
        "compare against the configured threshold (" +
        std::to_string(opts.threshold) + "), not conventional significance levels.");

    bool any_continuous = false, any_adjusted = false;
    for (const auto& v : report.variables) {
        if (v.kind == VariableKind::continuous) any_continuous = true;
        if (v.tie_adjusted) any_adjusted = true;
    }
    if (any_continuous)
        w.push_back(
            "Means and standard deviations of continuous variables are treated as exact, "
            "but published tables round them; p-values near 0 or 1 can be artefacts of "
            "rounding.");
    for (const auto& v : report.variables) {
        if (v.kind == VariableKind::continuous && v.p_reverse == 0.0 && !v.tie_adjusted)
            w.push_back("Variable '" + v.name +
                        "' has exactly equal reported means, so its reverse p-value is 0 and "
                        "the log-sum statistic degenerates to -inf; consider --tie-adjust "
                        "with the reporting precision set.");
        if (v.degenerate)
            w.push_back("Variable '" + v.name +
                        "' produced a degenerate test (no spread or an empty margin); its "
                        "p-value is a convention.");
    }
    if (any_adjusted) {
        std::string names;
        for (const auto& v : report.variables)
            if (v.tie_adjusted) names += (names.empty() ? "" : ", ") + v.name;
        w.push_back("Tie adjustment applied to: " + names +
                    " (equal reported means separated by one reporting unit).");
    }
    (void)ds;
    return w;
}

} // namespace

AnalysisReport analyze_dataset(const TrialDataset& input, const AnalyzeOptions& opts) {
    if (!opts.run_standard && !opts.run_reverse)
        throw std::invalid_argument("analyze_dataset: at least one direction is required");
    if (input.variables.empty())
        throw std::invalid_argument("analyze_dataset: dataset has no variables");

    TrialDataset ds = input;
    if (opts.tie_adjust) {
        for (auto& v : ds.variables) {
            if (v.kind() != VariableKind::continuous) continue;
            const auto& s = std::get<ContinuousSummary>(v.data);
            if (s.mean1 == s.mean2) {
                v.data = apply_tie_adjustment(s);
                v.tie_adjusted = true;
            }
        }
    }

    AnalysisReport report;
    report.groups = ds.groups;
    report.metadata = ds.metadata;
    report.n_sims = opts.n_sims;
    report.seed = opts.seed.value;
    report.seed_scheme = std::string(RngSeed::scheme());
    report.statistic = opts.statistic.kind == CombinationMethod::Kind::stouffer_statistic
                           ? "stouffer"
                           : "logsum";
    report.pmf_tie_eps = opts.tol.rel_eps;
    report.threshold = opts.threshold;
    report.tie_adjust = opts.tie_adjust;
    report.workers = opts.workers;

    ObservedPValues observed;
    std::vector<VariableNullSpec> null_specs;
    for (const auto& v : ds.variables) {
        report.variables.push_back(evaluate_variable(v, opts));
        observed.standard.push_back(report.variables.back().p_standard);
        observed.reverse.push_back(report.variables.back().p_reverse);

        VariableNullSpec spec;
        spec.name = v.name;
        spec.test = v.test;
        if (v.kind() == VariableKind::dichotomous)
            spec.marginals = marginals(std::get<Table2x2>(v.data));
        else if (v.kind() == VariableKind::categorical)
            spec.marginals = marginals(std::get<TableRxC>(v.data));
        null_specs.push_back(std::move(spec));
    }

    SimulationOptions sim_opts;
    sim_opts.statistic = opts.statistic;
    sim_opts.n_sims = opts.n_sims;
    sim_opts.seed = opts.seed;
    sim_opts.workers = opts.workers;
    sim_opts.tol = opts.tol;
    sim_opts.allow_degenerate_statistic = opts.allow_degenerate_statistic;
    sim_opts.enumeration_cap = opts.enumeration_cap;

    if (opts.run_reverse) {
        sim_opts.direction = Direction::overbalance;
        const double stat = observed_statistic(observed.reverse, opts.statistic.kind);
        CombinedResult c;
        c.direction = Direction::overbalance;
        c.mc = simulate_combined_null(null_specs, stat, sim_opts);
        c.flagged = c.mc.estimate <= opts.threshold;
        report.combined.push_back(c);
    }
    if (opts.run_standard) {
        sim_opts.direction = Direction::imbalance;
        const double stat = observed_statistic(observed.standard, opts.statistic.kind);
        CombinedResult c;
        c.direction = Direction::imbalance;
        c.mc = simulate_combined_null(null_specs, stat, sim_opts);
        c.flagged = c.mc.estimate <= opts.threshold;
        report.combined.push_back(c);
    }

    const std::size_t k = report.variables.size();
    auto mean_of = [k](const std::vector<double>& xs) {
        double m = 0.0;
        for (double x : xs) m += x;
        return m / static_cast<double>(k);
    };
    auto variance_of = [k](const std::vector<double>& xs, double mean) {
        if (k < 2) return 0.0;
        double ss = 0.0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        return ss / static_cast<double>(k - 1);
    };
    report.pvalues.mean_standard = mean_of(observed.standard);
    report.pvalues.mean_reverse = mean_of(observed.reverse);
    report.pvalues.variance_standard =
        variance_of(observed.standard, report.pvalues.mean_standard);
    report.pvalues.variance_reverse =
        variance_of(observed.reverse, report.pvalues.mean_reverse);
    report.pvalues.reference = uniform_reference(k);

    report.warnings = build_warnings(ds, report, opts);
    return report;
}

namespace {

// The observed log-sum statistic can be -inf (a reverse p of exactly 0);
// JSON has no infinities, so non-finite values travel as strings.
ordered_json extended_real(double v) {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : "-inf";
}

double parse_extended_real(const nlohmann::json& j) {
    if (j.is_number()) return j.get<double>();
    const std::string s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    throw std::invalid_argument("report: bad extended real '" + s + "'");
}

std::string test_label(const VariableResult& v) {
    if (v.kind == VariableKind::continuous) return "t_equal_var";
    return to_string(v.test);
}

} // namespace

std::string report_to_json(const AnalysisReport& r) {
    ordered_json doc;
    doc["schema_version"] = r.schema_version;
    doc["groups"] = ordered_json::array();
    for (const auto& g : r.groups) doc["groups"].push_back({{"label", g.label}, {"n", g.n}});
    if (!r.metadata.empty()) doc["metadata"] = r.metadata;

    ordered_json config;
    config["sims"] = r.n_sims;
    config["seed"] = r.seed;
    config["seed_scheme"] = r.seed_scheme;
    config["statistic"] = r.statistic;
    config["pmf_tie_eps"] = r.pmf_tie_eps;
    config["threshold"] = r.threshold;
    config["tie_adjust"] = r.tie_adjust;
    config["workers"] = r.workers;
    doc["config"] = std::move(config);

    doc["variables"] = ordered_json::array();
    for (const auto& v : r.variables) {
        ordered_json vj;
        vj["name"] = v.name;
        vj["kind"] = to_string(v.kind);
        vj["test"] = test_label(v);
        vj["p_standard"] = v.p_standard;
        vj["p_reverse"] = v.p_reverse;
        if (v.degenerate) vj["degenerate"] = true;
        if (v.tie_adjusted) vj["tie_adjusted"] = true;
        doc["variables"].push_back(std::move(vj));
    }

    doc["combined"] = ordered_json::array();
    for (const auto& c : r.combined) {
        ordered_json cj;
        cj["direction"] =
            c.direction == Direction::overbalance ? "reverse" : "standard";
        cj["estimate"] = c.mc.estimate;
        cj["exceed_count"] = c.mc.exceed_count;
        cj["n_sims"] = c.mc.n_sims;
        cj["ci95"] = {c.mc.ci95_lo, c.mc.ci95_hi};
        cj["observed_statistic"] = extended_real(c.mc.observed_statistic);
        cj["flagged"] = c.flagged;
        doc["combined"].push_back(std::move(cj));
    }

    ordered_json ps;
    ps["mean_standard"] = r.pvalues.mean_standard;
    ps["mean_reverse"] = r.pvalues.mean_reverse;
    ps["variance_standard"] = r.pvalues.variance_standard;
    ps["variance_reverse"] = r.pvalues.variance_reverse;
    ps["uniform_mean"] = r.pvalues.reference.mean;
    ps["uniform_sd_of_mean"] = r.pvalues.reference.sd_of_mean;
    doc["pvalue_summary"] = std::move(ps);

    doc["warnings"] = r.warnings;
    return doc.dump(2);
}

AnalysisReport report_from_json(const std::string& text) {
    const auto doc = nlohmann::json::parse(text);
    AnalysisReport r;
    r.schema_version = doc.at("schema_version").get<int>();
    for (std::size_t g = 0; g < 2; ++g) {
        r.groups[g].label = doc.at("groups").at(g).at("label").get<std::string>();
        r.groups[g].n = doc.at("groups").at(g).at("n").get<long long>();
    }
    if (doc.contains("metadata")) r.metadata = doc.at("metadata").get<std::string>();
    const auto& config = doc.at("config");
    r.n_sims = config.at("sims").get<std::uint64_t>();
    r.seed = config.at("seed").get<std::uint64_t>();
    r.seed_scheme = config.at("seed_scheme").get<std::string>();
    r.statistic = config.at("statistic").get<std::string>();
    r.pmf_tie_eps = config.at("pmf_tie_eps").get<double>();
    r.threshold = config.at("threshold").get<double>();
    r.tie_adjust = config.at("tie_adjust").get<bool>();
    r.workers = config.at("workers").get<int>();

    for (const auto& vj : doc.at("variables")) {
        VariableResult v;
        v.name = vj.at("name").get<std::string>();
        const std::string kind = vj.at("kind").get<std::string>();
        v.kind = kind == "dichotomous"  ? VariableKind::dichotomous
                 : kind == "categorical" ? VariableKind::categorical
                                         : VariableKind::continuous;
        const std::string test = vj.at("test").get<std::string>();
        v.test = test == "chisq"         ? TestKind::chisq
                 : test == "chisq_yates" ? TestKind::chisq_yates
                                         : TestKind::fisher;
        v.p_standard = vj.at("p_standard").get<double>();
        v.p_reverse = vj.at("p_reverse").get<double>();
        v.degenerate = vj.value("degenerate", false);
        v.tie_adjusted = vj.value("tie_adjusted", false);
        r.variables.push_back(std::move(v));
    }

    for (const auto& cj : doc.at("combined")) {
        CombinedResult c;
        c.direction = cj.at("direction").get<std::string>() == "reverse"
                          ? Direction::overbalance
                          : Direction::imbalance;
        c.mc.estimate = cj.at("estimate").get<double>();
        c.mc.exceed_count = cj.at("exceed_count").get<std::uint64_t>();
        c.mc.n_sims = cj.at("n_sims").get<std::uint64_t>();
        c.mc.ci95_lo = cj.at("ci95").at(0).get<double>();
        c.mc.ci95_hi = cj.at("ci95").at(1).get<double>();
        c.mc.observed_statistic = parse_extended_real(cj.at("observed_statistic"));
        c.mc.seed.value = r.seed;
        c.flagged = cj.at("flagged").get<bool>();
        r.combined.push_back(c);
    }

    const auto& ps = doc.at("pvalue_summary");
    r.pvalues.mean_standard = ps.at("mean_standard").get<double>();
    r.pvalues.mean_reverse = ps.at("mean_reverse").get<double>();
    r.pvalues.variance_standard = ps.at("variance_standard").get<double>();
    r.pvalues.variance_reverse = ps.at("variance_reverse").get<double>();
    r.pvalues.reference.mean = ps.at("uniform_mean").get<double>();
    r.pvalues.reference.sd_of_mean = ps.at("uniform_sd_of_mean").get<double>();

    r.warnings = doc.at("warnings").get<std::vector<std::string>>();
    return r;
}

void write_report_text(const AnalysisReport& r, std::ostream& os) {
    os << "baseline screening analysis\n";
    os << "groups: " << r.groups[0].label << " (n=" << r.groups[0].n << ") vs "
       << r.groups[1].label << " (n=" << r.groups[1].n << ")\n";
    if (!r.metadata.empty()) os << "metadata: " << r.metadata << "\n";
    os << "config: sims=" << r.n_sims << " seed=" << r.seed << " statistic=" << r.statistic
       << " threshold=" << r.threshold << "\n\n";

    os << std::left << std::setw(24) << "variable" << std::setw(13) << "kind"
       << std::setw(13) << "test" << std::right << std::setw(12) << "p(std)" << std::setw(12)
       << "p(rev)"
       << "\n";
    for (const auto& v : r.variables) {
        os << std::left << std::setw(24) << v.name << std::setw(13) << to_string(v.kind)
           << std::setw(13) << test_label(v) << std::right << std::fixed
           << std::setprecision(6) << std::setw(12) << v.p_standard << std::setw(12)
           << v.p_reverse;
        if (v.degenerate) os << "  [degenerate]";
        if (v.tie_adjusted) os << "  [tie-adjusted]";
        os << "\n";
        os.unsetf(std::ios::fixed);
        os << std::setprecision(6);
    }
    os << "\n";
    for (const auto& c : r.combined) {
        os << "combined (" << (c.direction == Direction::overbalance ? "reverse" : "standard")
           << ", " << r.statistic << "): p = " << std::setprecision(6) << c.mc.estimate
           << "  [" << c.mc.exceed_count << "/" << c.mc.n_sims << " at or below observed, "
           << "95% CI " << c.mc.ci95_lo << ".." << c.mc.ci95_hi
           << ", observed statistic = " << c.mc.observed_statistic << "]\n";
        os << "  threshold " << r.threshold << ": "
           << (c.flagged ? "at or below threshold" : "above threshold") << "\n";
    }
    os << "\np-value summary: mean(std) = " << r.pvalues.mean_standard
       << ", mean(rev) = " << r.pvalues.mean_reverse
       << ", variance(std) = " << r.pvalues.variance_standard
       << "\n  uniform reference: mean = " << r.pvalues.reference.mean
       << ", sd of mean = " << r.pvalues.reference.sd_of_mean << "\n";
    os << "\nwarnings:\n";
    for (const auto& w : r.warnings) os << "  - " << w << "\n";
}

} // namespace bscreen

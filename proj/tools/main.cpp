// baseline-screen: screening analysis of reported trial baseline data.
//
// Subcommands:
//   analyze       full screening analysis of a dataset (JSON report)
//   distribution  exact p-value distribution of a single table test
//   simulate      null behaviour of the naive combine-then-reverse screening
//   validate      parse and validate a dataset, nothing else

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "baseline_screen/dataset.hpp"
#include "baseline_screen/pvalue_distribution.hpp"
#include "baseline_screen/report.hpp"

namespace {

using namespace bscreen;

std::string read_file(const std::string& path) {
    if (path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("BASELINE_SCREEN_SEED")) {
        try {
            std::size_t pos = 0;
            const std::string s(env);
            const std::uint64_t v = std::stoull(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (...) {
            throw std::runtime_error(
                "BASELINE_SCREEN_SEED must be an unsigned 64-bit integer");
        }
    }
    return 1;
}

TestKind parse_test_name(const std::string& name) {
    if (name == "fisher") return TestKind::fisher;
    if (name == "chisq") return TestKind::chisq;
    if (name == "chisq_yates") return TestKind::chisq_yates;
    throw CLI::ValidationError("--test", "unknown test '" + name + "'");
}

Tail parse_tail_name(const std::string& name) {
    if (name == "standard") return Tail::standard;
    if (name == "reverse") return Tail::reverse;
    if (name == "naive-reverse") return Tail::naive_reverse;
    throw CLI::ValidationError("--direction", "unknown direction '" + name + "'");
}

struct GroupingFlag {
    std::vector<std::string> names;
    std::string new_name;
};

GroupingFlag parse_grouping(const std::string& arg) {
    const auto eq = arg.rfind('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size())
        throw CLI::ValidationError("--group", "expected '<name,name,...>=<newname>'");
    GroupingFlag g;
    g.new_name = arg.substr(eq + 1);
    std::istringstream list(arg.substr(0, eq));
    std::string item;
    while (std::getline(list, item, ','))
        if (!item.empty()) g.names.push_back(item);
    if (g.names.size() < 2)
        throw CLI::ValidationError("--group", "needs at least 2 variable names");
    return g;
}

int run_analyze(const std::string& path, bool csv, AnalyzeOptions opts,
                const std::vector<std::string>& groupings, const std::string& format,
                const std::string& output) {
    TrialDataset ds = csv ? parse_dataset_csv(read_file(path)) : parse_dataset(read_file(path));
    for (const auto& arg : groupings) {
        const GroupingFlag g = parse_grouping(arg);
        ds = group_categorical(ds, g.names, g.new_name);
    }
    const AnalysisReport report = analyze_dataset(ds, opts);
    if (format == "text") {
        std::ostringstream ss;
        write_report_text(report, ss);
        write_output(output, ss.str());
    } else {
        write_output(output, report_to_json(report) + "\n");
    }
    return 0;
}

int run_distribution(long long n1, long long n2, double p_yes, const std::string& test,
                     const std::string& direction, const std::string& output) {
    const PValueDistribution d = unconditional_distribution(
        n1, n2, p_yes, parse_test_name(test), parse_tail_name(direction));
    std::ostringstream csv;
    write_curve_csv(d, csv);
    const std::string summary =
        "expectation=" + std::to_string(expectation(d)) +
        " atoms=" + std::to_string(d.atoms.size()) + "\n";
    if (output.empty() || output == "-") {
        std::cout << csv.str();
        std::cerr << summary;
    } else {
        write_output(output, csv.str());
        std::cout << summary;
    }
    return 0;
}

int run_simulate(const NaiveCombinationOptions& opts, const std::string& methods_arg,
                 const std::string& output) {
    std::vector<CombinationMethod::Kind> methods;
    std::istringstream list(methods_arg);
    std::string item;
    while (std::getline(list, item, ',')) {
        if (item == "stouffer")
            methods.push_back(CombinationMethod::Kind::stouffer_formula);
        else if (item == "fisher")
            methods.push_back(CombinationMethod::Kind::fisher_formula);
        else if (item == "brown")
            methods.push_back(CombinationMethod::Kind::brown_adjusted_stouffer);
        else
            throw CLI::ValidationError("--methods", "unknown method '" + item + "'");
    }
    const NaiveCombinationResult result = simulate_naive_combination(opts, methods);

    auto method_name = [](CombinationMethod::Kind k) {
        switch (k) {
            case CombinationMethod::Kind::stouffer_formula: return "stouffer";
            case CombinationMethod::Kind::fisher_formula: return "fisher";
            default: return "brown";
        }
    };
    // Empirical CDF of 1 - combined, decimated to at most ~2000 points per
    // method so the file stays plottable.
    std::string csv = "method,alpha,cdf,reference\n";
    for (const auto& curve : result.curves) {
        const std::size_t n = curve.one_minus_combined.size();
        const std::size_t stride = std::max<std::size_t>(1, n / 2000);
        for (std::size_t i = 0; i < n; i += stride) {
            const double alpha = curve.one_minus_combined[i];
            const double cdf = static_cast<double>(i + 1) / static_cast<double>(n);
            std::ostringstream row;
            row << method_name(curve.method) << ',' << alpha << ',' << cdf << ',' << alpha
                << '\n';
            csv += row.str();
        }
    }
    std::ostringstream summary;
    for (const auto& curve : result.curves)
        summary << method_name(curve.method) << " mean_combined=" << curve.mean_combined
                << " mean_one_minus=" << 1.0 - curve.mean_combined << "\n";
    if (output.empty() || output == "-") {
        std::cout << csv;
        std::cerr << summary.str();
    } else {
        write_output(output, csv);
        std::cout << summary.str();
    }
    return 0;
}

int run_validate(const std::string& path, bool csv) {
    const TrialDataset ds =
        csv ? parse_dataset_csv(read_file(path)) : parse_dataset(read_file(path));
    std::size_t n_dich = 0, n_cat = 0, n_cont = 0;
    for (const auto& v : ds.variables) {
        switch (v.kind()) {
            case VariableKind::dichotomous: ++n_dich; break;
            case VariableKind::categorical: ++n_cat; break;
            case VariableKind::continuous: ++n_cont; break;
        }
    }
    std::cout << "dataset OK: groups " << ds.groups[0].label << " (n=" << ds.groups[0].n
              << ") vs " << ds.groups[1].label << " (n=" << ds.groups[1].n << "); "
              << ds.variables.size() << " variables (" << n_dich << " dichotomous, " << n_cat
              << " categorical, " << n_cont << " continuous)\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Screening of reported randomized-trial baseline data: exact per-variable "
                 "tests, reverse p-values and Monte Carlo combined p-values"};
    app.require_subcommand(1);

    // analyze
    auto* analyze = app.add_subcommand("analyze", "Run the full screening analysis");
    std::string dataset_path;
    analyze->add_option("dataset", dataset_path, "Dataset file (JSON schema, or '-' for stdin)")
        ->required();
    bool as_csv = false;
    analyze->add_flag("--csv", as_csv, "Treat the input as the CSV convenience format");
    std::uint64_t sims = 1'000'000;
    analyze->add_option("--sims", sims, "Monte Carlo simulations per direction")
        ->check(CLI::PositiveNumber);
    std::optional<std::uint64_t> seed_flag;
    analyze->add_option("--seed", seed_flag,
                        "RNG seed (default: BASELINE_SCREEN_SEED env var, else 1)");
    std::string direction = "both";
    analyze->add_option("--direction", direction, "reverse, standard or both")
        ->check(CLI::IsMember({"reverse", "standard", "both"}));
    std::string statistic = "logsum";
    analyze->add_option("--statistic", statistic, "Combined statistic: logsum or stouffer")
        ->check(CLI::IsMember({"logsum", "stouffer"}));
    bool allow_degenerate = false;
    analyze->add_flag("--allow-degenerate", allow_degenerate,
                      "Accept the +inf degeneracy of the Stouffer statistic");
    bool tie_adjust = false;
    analyze->add_flag("--tie-adjust", tie_adjust,
                      "Separate exactly equal reported means by one reporting unit");
    std::vector<std::string> groupings;
    analyze->add_option("--group", groupings,
                        "Replace dichotomous variables by one categorical: 'a,b,c=newname'");
    double threshold = 1e-4;
    analyze->add_option("--threshold", threshold, "Flagging threshold (default 1 in 10,000)");
    double tie_eps = 1e-7;
    analyze->add_option("--pmf-tie-eps", tie_eps,
                        "Relative tolerance for table-probability ties");
    int workers = 1;
    analyze->add_option("--workers", workers, "Simulation worker threads (result-invariant)")
        ->check(CLI::PositiveNumber);
    std::string format = "json";
    analyze->add_option("--format", format, "json or text")
        ->check(CLI::IsMember({"json", "text"}));
    std::string output = "-";
    analyze->add_option("--output,-o", output, "Output path ('-' for stdout)");

    // distribution
    auto* distribution =
        app.add_subcommand("distribution", "Exact p-value distribution of one table test");
    long long d_n1 = 100, d_n2 = 100;
    double d_p = 0.05;
    std::string d_test = "fisher", d_direction = "standard", d_output;
    distribution->add_option("--n1", d_n1, "Group 1 size")->check(CLI::PositiveNumber);
    distribution->add_option("--n2", d_n2, "Group 2 size")->check(CLI::PositiveNumber);
    distribution->add_option("--p", d_p, "Probability of 'yes'");
    distribution->add_option("--test", d_test, "fisher, chisq or chisq_yates")
        ->check(CLI::IsMember({"fisher", "chisq", "chisq_yates"}));
    distribution
        ->add_option("--direction", d_direction, "standard, reverse or naive-reverse")
        ->check(CLI::IsMember({"standard", "reverse", "naive-reverse"}));
    distribution->add_option("--output,-o", d_output,
                             "CSV path (default stdout; summary then goes to stderr)");

    // simulate
    auto* simulate = app.add_subcommand(
        "simulate", "Null behaviour of the naive combine-then-reverse screening");
    NaiveCombinationOptions sim_opts;
    std::optional<std::uint64_t> sim_seed_flag;
    std::string methods = "stouffer,fisher,brown", s_output;
    simulate->add_option("--tables", sim_opts.n_tables, "Tables per simulation")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--n1", sim_opts.n1, "Group 1 size")->check(CLI::PositiveNumber);
    simulate->add_option("--n2", sim_opts.n2, "Group 2 size")->check(CLI::PositiveNumber);
    simulate->add_option("--p", sim_opts.p_yes, "Probability of 'yes'");
    simulate->add_option("--sims", sim_opts.n_sims, "Simulations")->check(CLI::PositiveNumber);
    simulate->add_option("--seed", sim_seed_flag, "RNG seed");
    simulate->add_option("--methods", methods, "Comma list of stouffer,fisher,brown");
    simulate->add_option("--brown-cap", sim_opts.brown_cap, "Cap for the Brown adjustment");
    simulate->add_option("--workers", sim_opts.workers, "Worker threads (result-invariant)")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--output,-o", s_output,
                         "CSV path (default stdout; summary then goes to stderr)");

    // validate
    auto* validate_cmd = app.add_subcommand("validate", "Parse and validate a dataset");
    std::string v_path;
    bool v_csv = false;
    validate_cmd->add_option("dataset", v_path, "Dataset file")->required();
    validate_cmd->add_flag("--csv", v_csv, "Treat the input as the CSV convenience format");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*analyze) {
            AnalyzeOptions opts;
            opts.n_sims = sims;
            opts.seed.value = resolve_seed(seed_flag);
            opts.run_reverse = direction != "standard";
            opts.run_standard = direction != "reverse";
            opts.statistic.kind = statistic == "stouffer"
                                      ? CombinationMethod::Kind::stouffer_statistic
                                      : CombinationMethod::Kind::log_sum_statistic;
            opts.allow_degenerate_statistic = allow_degenerate;
            opts.tie_adjust = tie_adjust;
            opts.threshold = threshold;
            opts.tol.rel_eps = tie_eps;
            opts.workers = workers;
            return run_analyze(dataset_path, as_csv, opts, groupings, format, output);
        }
        if (*distribution)
            return run_distribution(d_n1, d_n2, d_p, d_test, d_direction, d_output);
        if (*simulate) {
            sim_opts.seed.value = resolve_seed(sim_seed_flag);
            return run_simulate(sim_opts, methods, s_output);
        }
        if (*validate_cmd) return run_validate(v_path, v_csv);
    } catch (const DatasetError& e) {
        std::cerr << "error: invalid dataset\n";
        for (const auto& msg : e.errors) std::cerr << "  " << msg << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

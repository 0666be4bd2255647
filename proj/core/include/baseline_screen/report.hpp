#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "baseline_screen/dataset.hpp"
#include "baseline_screen/null_simulation.hpp"

namespace bscreen {

struct AnalyzeOptions {
    std::uint64_t n_sims = 1'000'000;
    RngSeed seed;
    bool run_standard = true;
    bool run_reverse = true;
    CombinationMethod statistic;  // log_sum_statistic (default) or stouffer_statistic
    bool allow_degenerate_statistic = false;
    bool tie_adjust = false;
    double threshold = 1e-4;  // flagging threshold, 1 in 10,000
    TieTolerance tol;
    int workers = 1;
    std::uint64_t enumeration_cap = kDefaultEnumerationCap;
};

struct VariableResult {
    std::string name;
    VariableKind kind = VariableKind::dichotomous;
    TestKind test = TestKind::fisher;
    double p_standard = 1.0;
    double p_reverse = 1.0;
    bool degenerate = false;
    bool tie_adjusted = false;
};

/// Mean and spread of the average of k independent uniform p-values; the
/// reference against which an observed mean of p-values is judged.
struct UniformReference {
    double mean = 0.5;
    double sd_of_mean = 0.0;  // 1 / sqrt(12 k)
};

UniformReference uniform_reference(std::size_t n_variables);

struct PValueSummary {
    double mean_standard = 0.0;
    double mean_reverse = 0.0;
    double variance_standard = 0.0;
    double variance_reverse = 0.0;
    UniformReference reference;
};

struct CombinedResult {
    Direction direction = Direction::overbalance;
    MonteCarloResult mc;
    bool flagged = false;  // estimate <= threshold
};

struct AnalysisReport {
    int schema_version = 1;
    std::array<GroupInfo, 2> groups;
    std::string metadata;
    // configuration echo
    std::uint64_t n_sims = 0;
    std::uint64_t seed = 0;
    std::string seed_scheme;
    std::string statistic;
    double pmf_tie_eps = 0.0;
    double threshold = 0.0;
    bool tie_adjust = false;
    int workers = 1;

    std::vector<VariableResult> variables;
    std::vector<CombinedResult> combined;
    PValueSummary pvalues;
    std::vector<std::string> warnings;
};

/// Runs the full screening pipeline on a validated dataset.
AnalysisReport analyze_dataset(const TrialDataset& ds, const AnalyzeOptions& opts);

std::string report_to_json(const AnalysisReport& r);
AnalysisReport report_from_json(const std::string& text);

void write_report_text(const AnalysisReport& r, std::ostream& os);

} // namespace bscreen

#pragma once

#include <array>
#include <string>
#include <variant>
#include <vector>

#include "baseline_screen/exact_tests.hpp"
#include "baseline_screen/pvalue_distribution.hpp"
#include "baseline_screen/tables.hpp"

namespace bscreen {

/// All validation problems of one document, each tagged with the JSON path
/// (or CSV line) it was found at.
class DatasetError : public std::runtime_error {
public:
    explicit DatasetError(std::vector<std::string> errors);

    std::vector<std::string> errors;
};

struct GroupInfo {
    std::string label;
    long long n = 0;
};

using VariableData = std::variant<Table2x2, TableRxC, ContinuousSummary>;

enum class VariableKind { dichotomous, categorical, continuous };

std::string to_string(VariableKind k);

struct VariableSpec {
    std::string name;
    VariableData data;
    /// Standard-direction test for tabular variables (reverse screening
    /// always uses the reverse Fisher exact p-value).
    TestKind test = TestKind::fisher;
    /// Set when the rounded-mean tie adjustment was applied to this variable.
    bool tie_adjusted = false;

    VariableKind kind() const;
};

/// One screening analysis: an ordered collection of baseline variables
/// compared across two groups.
struct TrialDataset {
    std::array<GroupInfo, 2> groups;
    std::vector<VariableSpec> variables;
    std::string metadata;
};

/// Parses and fully validates the versioned JSON dataset document.
/// Throws DatasetError listing every problem found.
TrialDataset parse_dataset(const std::string& text);

/// Convenience import: `name,k1,n1,k2,n2` header plus one dichotomous
/// variable per line. Group sizes come from the first data line; lines with
/// different denominators keep them as per-variable sizes.
TrialDataset parse_dataset_csv(const std::string& text);

/// Serializes back to the schema_version 1 JSON document.
std::string serialize_dataset(const TrialDataset& ds);

/// Replaces the named dichotomous variables by a single categorical variable
/// whose rows are their "yes" counts. Requires the per-group counts to sum
/// to the group sizes (each patient in exactly one category).
TrialDataset group_categorical(const TrialDataset& ds, const std::vector<std::string>& names,
                               const std::string& new_name);

/// Splits exactly equal reported means apart by one reporting unit
/// (one half of 10^-decimals on each side), so that the reverse p-value of
/// the variable is no longer exactly zero. Summaries with unequal means are
/// returned unchanged. Throws std::invalid_argument when means are equal but
/// decimals is unknown.
ContinuousSummary apply_tie_adjustment(const ContinuousSummary& s);

} // namespace bscreen

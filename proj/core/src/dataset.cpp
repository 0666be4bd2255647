#include "baseline_screen/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

namespace bscreen {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

DatasetError::DatasetError(std::vector<std::string> errs)
    : std::runtime_error(errs.empty() ? "invalid dataset"
                                      : "invalid dataset: " + errs.front() +
                                            (errs.size() > 1
                                                 ? " (+" + std::to_string(errs.size() - 1) +
                                                       " more)"
                                                 : "")),
      errors(std::move(errs)) {}

std::string to_string(VariableKind k) {
    switch (k) {
        case VariableKind::dichotomous: return "dichotomous";
        case VariableKind::categorical: return "categorical";
        case VariableKind::continuous: return "continuous";
    }
    return "?";
}

VariableKind VariableSpec::kind() const {
    if (std::holds_alternative<Table2x2>(data)) return VariableKind::dichotomous;
    if (std::holds_alternative<TableRxC>(data)) return VariableKind::categorical;
    return VariableKind::continuous;
}

namespace {

class ErrorCollector {
public:
    template <typename... Ts>
    void add(const std::string& where, Ts&&... parts) {
        std::ostringstream os;
        os << where << ": ";
        (os << ... << parts);
        errors_.push_back(os.str());
    }

    void raise_if_any() const {
        if (!errors_.empty()) throw DatasetError(errors_);
    }

    bool any() const { return !errors_.empty(); }

private:
    std::vector<std::string> errors_;
};

std::optional<long long> get_count(const json& j, const std::string& where,
                                   ErrorCollector& errs) {
    if (!j.is_number_integer() || j.get<long long>() < 0) {
        errs.add(where, "expected a non-negative integer");
        return std::nullopt;
    }
    return j.get<long long>();
}

std::optional<TestKind> parse_test(const std::string& name) {
    if (name == "fisher") return TestKind::fisher;
    if (name == "chisq") return TestKind::chisq;
    if (name == "chisq_yates") return TestKind::chisq_yates;
    return std::nullopt;
}

void parse_variable(const json& v, std::size_t index, const std::array<GroupInfo, 2>& groups,
                    std::vector<VariableSpec>& out, ErrorCollector& errs) {
    const std::string where = "variables[" + std::to_string(index) + "]";
    if (!v.is_object()) {
        errs.add(where, "expected an object");
        return;
    }
    VariableSpec spec;
    if (!v.contains("name") || !v.at("name").is_string() ||
        v.at("name").get<std::string>().empty()) {
        errs.add(where + ".name", "required non-empty string");
        return;
    }
    spec.name = v.at("name").get<std::string>();
    if (!v.contains("type") || !v.at("type").is_string()) {
        errs.add(where + ".type", "required string");
        return;
    }
    const std::string type = v.at("type").get<std::string>();

    // Per-variable group sizes override the dataset ones (missing data).
    std::array<long long, 2> sizes = {groups[0].n, groups[1].n};
    bool sizes_overridden = false;
    if (v.contains("n")) {
        const json& n = v.at("n");
        if (!n.is_array() || n.size() != 2) {
            errs.add(where + ".n", "expected an array of 2 sizes");
            return;
        }
        auto a = get_count(n[0], where + ".n[0]", errs);
        auto b = get_count(n[1], where + ".n[1]", errs);
        if (!a || !b) return;
        sizes = {*a, *b};
        sizes_overridden = true;
    }

    if (v.contains("test")) {
        if (type != "dichotomous") {
            errs.add(where + ".test", "a test choice applies only to dichotomous variables");
            return;
        }
        if (!v.at("test").is_string()) {
            errs.add(where + ".test", "expected a string");
            return;
        }
        const auto test = parse_test(v.at("test").get<std::string>());
        if (!test) {
            errs.add(where + ".test", "unknown test '", v.at("test").get<std::string>(),
                     "' (fisher, chisq, chisq_yates)");
            return;
        }
        spec.test = *test;
    }

    if (type == "dichotomous") {
        if (!v.contains("yes") || !v.at("yes").is_array() || v.at("yes").size() != 2) {
            errs.add(where + ".yes", "expected an array of 2 counts");
            return;
        }
        auto k1 = get_count(v.at("yes")[0], where + ".yes[0]", errs);
        auto k2 = get_count(v.at("yes")[1], where + ".yes[1]", errs);
        if (!k1 || !k2) return;
        if (sizes[0] < 1 || sizes[1] < 1) {
            errs.add(where, "group sizes must be at least 1");
            return;
        }
        if (*k1 > sizes[0] || *k2 > sizes[1]) {
            errs.add(where, "'", spec.name, "': yes-count above the group size (", *k1, "/",
                     sizes[0], ", ", *k2, "/", sizes[1], ")");
            return;
        }
        spec.data = Table2x2{*k1, *k2, sizes[0], sizes[1]};
    } else if (type == "categorical") {
        if (!v.contains("counts") || !v.at("counts").is_array() || v.at("counts").size() < 2) {
            errs.add(where + ".counts", "expected a row-major matrix with at least 2 rows");
            return;
        }
        TableRxC t;
        for (std::size_t r = 0; r < v.at("counts").size(); ++r) {
            const json& row = v.at("counts")[r];
            if (!row.is_array() || row.size() != 2) {
                errs.add(where + ".counts[" + std::to_string(r) + "]",
                         "expected an array of 2 counts (one per group)");
                return;
            }
            std::vector<long long> cells;
            for (std::size_t c = 0; c < 2; ++c) {
                auto val = get_count(row[c],
                                     where + ".counts[" + std::to_string(r) + "][" +
                                         std::to_string(c) + "]",
                                     errs);
                if (!val) return;
                cells.push_back(*val);
            }
            t.counts.push_back(std::move(cells));
        }
        long long col0 = 0, col1 = 0;
        for (const auto& row : t.counts) {
            col0 += row[0];
            col1 += row[1];
        }
        if (col0 != sizes[0] || col1 != sizes[1]) {
            errs.add(where, "'", spec.name, "': column totals (", col0, ", ", col1,
                     ") must equal the ", sizes_overridden ? "declared" : "group", " sizes (",
                     sizes[0], ", ", sizes[1], ")");
            return;
        }
        spec.data = std::move(t);
    } else if (type == "continuous") {
        ContinuousSummary s;
        s.n1 = sizes[0];
        s.n2 = sizes[1];
        auto read_pair = [&](const char* key, double& first, double& second) {
            if (!v.contains(key) || !v.at(key).is_array() || v.at(key).size() != 2 ||
                !v.at(key)[0].is_number() || !v.at(key)[1].is_number()) {
                errs.add(where + "." + key, "expected an array of 2 numbers");
                return false;
            }
            first = v.at(key)[0].get<double>();
            second = v.at(key)[1].get<double>();
            return true;
        };
        if (!read_pair("mean", s.mean1, s.mean2)) return;
        if (!read_pair("sd", s.sd1, s.sd2)) return;
        if (v.contains("decimals")) {
            if (!v.at("decimals").is_number_integer() || v.at("decimals").get<int>() < 0) {
                errs.add(where + ".decimals", "expected a non-negative integer");
                return;
            }
            s.decimals = v.at("decimals").get<int>();
        }
        if (s.n1 < 2 || s.n2 < 2) {
            errs.add(where, "'", spec.name, "': continuous variables need n >= 2 per group");
            return;
        }
        if (s.sd1 < 0.0 || s.sd2 < 0.0) {
            errs.add(where, "'", spec.name, "': negative standard deviation");
            return;
        }
        spec.data = s;
    } else {
        errs.add(where + ".type", "unknown type '", type,
                 "' (dichotomous, categorical, continuous)");
        return;
    }
    out.push_back(std::move(spec));
}

} // namespace

TrialDataset parse_dataset(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DatasetError({std::string("syntax: ") + e.what()});
    }
    ErrorCollector errs;
    if (!doc.is_object()) {
        errs.add("document", "expected a JSON object");
        errs.raise_if_any();
    }
    if (!doc.contains("schema_version") || !doc.at("schema_version").is_number_integer() ||
        doc.at("schema_version").get<int>() != 1)
        errs.add("schema_version", "required and must be 1");

    TrialDataset ds;
    if (!doc.contains("groups") || !doc.at("groups").is_array() ||
        doc.at("groups").size() != 2) {
        errs.add("groups", "expected an array of exactly 2 groups");
        errs.raise_if_any();
    }
    for (std::size_t g = 0; g < 2; ++g) {
        const json& gj = doc.at("groups")[g];
        const std::string where = "groups[" + std::to_string(g) + "]";
        if (!gj.is_object() || !gj.contains("label") || !gj.at("label").is_string() ||
            !gj.contains("n")) {
            errs.add(where, "expected an object with 'label' and 'n'");
            continue;
        }
        ds.groups[g].label = gj.at("label").get<std::string>();
        if (auto n = get_count(gj.at("n"), where + ".n", errs)) {
            if (*n < 1)
                errs.add(where + ".n", "group size must be at least 1");
            else
                ds.groups[g].n = *n;
        }
    }
    errs.raise_if_any();

    if (doc.contains("metadata")) {
        if (!doc.at("metadata").is_string())
            errs.add("metadata", "expected a string");
        else
            ds.metadata = doc.at("metadata").get<std::string>();
    }

    if (!doc.contains("variables") || !doc.at("variables").is_array() ||
        doc.at("variables").empty()) {
        errs.add("variables", "expected a non-empty array");
        errs.raise_if_any();
    }
    for (std::size_t i = 0; i < doc.at("variables").size(); ++i)
        parse_variable(doc.at("variables")[i], i, ds.groups, ds.variables, errs);

    std::set<std::string> seen;
    for (const auto& v : ds.variables)
        if (!seen.insert(v.name).second)
            errs.add("variables", "duplicate variable name '", v.name, "'");

    errs.raise_if_any();
    return ds;
}

TrialDataset parse_dataset_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    ErrorCollector errs;
    if (!std::getline(in, line)) throw DatasetError({"csv: empty input"});
    auto strip = [](std::string s) {
        while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
        std::size_t b = 0;
        while (b < s.size() && s[b] == ' ') ++b;
        return s.substr(b);
    };
    if (strip(line) != "name,k1,n1,k2,n2")
        throw DatasetError({"csv line 1: header must be 'name,k1,n1,k2,n2'"});

    TrialDataset ds;
    ds.groups = {GroupInfo{"group1", 0}, GroupInfo{"group2", 0}};
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = strip(line);
        if (stripped.empty()) continue;
        const std::string where = "csv line " + std::to_string(line_no);
        std::vector<std::string> fields;
        std::istringstream fs(stripped);
        std::string field;
        while (std::getline(fs, field, ',')) fields.push_back(strip(field));
        if (fields.size() != 5) {
            errs.add(where, "expected 5 fields, got ", fields.size());
            continue;
        }
        long long nums[4];
        bool ok = true;
        for (int i = 0; i < 4; ++i) {
            try {
                std::size_t pos = 0;
                nums[i] = std::stoll(fields[i + 1], &pos);
                if (pos != fields[i + 1].size() || nums[i] < 0) ok = false;
            } catch (...) {
                ok = false;
            }
            if (!ok) {
                errs.add(where, "field ", i + 2, " is not a non-negative integer");
                break;
            }
        }
        if (!ok) continue;
        const Table2x2 t{nums[0], nums[2], nums[1], nums[3]};
        if (t.n1 < 1 || t.n2 < 1) {
            errs.add(where, "group sizes must be at least 1");
            continue;
        }
        if (t.k1 > t.n1 || t.k2 > t.n2) {
            errs.add(where, "'", fields[0], "': yes-count above the group size");
            continue;
        }
        // The first data line fixes the dataset group sizes; later lines may
        // carry their own denominators.
        if (ds.groups[0].n == 0) {
            ds.groups[0].n = t.n1;
            ds.groups[1].n = t.n2;
        }
        VariableSpec spec;
        spec.name = fields[0];
        spec.data = t;
        ds.variables.push_back(std::move(spec));
    }
    if (ds.variables.empty() && !errs.any()) errs.add("csv", "no variables found");
    std::set<std::string> seen;
    for (const auto& v : ds.variables)
        if (!seen.insert(v.name).second) errs.add("csv", "duplicate variable name '", v.name, "'");
    errs.raise_if_any();
    return ds;
}

std::string serialize_dataset(const TrialDataset& ds) {
    ordered_json doc;
    doc["schema_version"] = 1;
    doc["groups"] = ordered_json::array();
    for (const auto& g : ds.groups) doc["groups"].push_back({{"label", g.label}, {"n", g.n}});
    if (!ds.metadata.empty()) doc["metadata"] = ds.metadata;
    doc["variables"] = ordered_json::array();
    for (const auto& v : ds.variables) {
        ordered_json vj;
        vj["name"] = v.name;
        switch (v.kind()) {
            case VariableKind::dichotomous: {
                const auto& t = std::get<Table2x2>(v.data);
                vj["type"] = "dichotomous";
                vj["yes"] = {t.k1, t.k2};
                if (t.n1 != ds.groups[0].n || t.n2 != ds.groups[1].n)
                    vj["n"] = {t.n1, t.n2};
                if (v.test != TestKind::fisher) vj["test"] = to_string(v.test);
                break;
            }
            case VariableKind::categorical: {
                const auto& t = std::get<TableRxC>(v.data);
                vj["type"] = "categorical";
                vj["counts"] = t.counts;
                const Marginals m = marginals(t);
                if (m.col_totals[0] != ds.groups[0].n || m.col_totals[1] != ds.groups[1].n)
                    vj["n"] = {m.col_totals[0], m.col_totals[1]};
                break;
            }
            case VariableKind::continuous: {
                const auto& s = std::get<ContinuousSummary>(v.data);
                vj["type"] = "continuous";
                vj["mean"] = {s.mean1, s.mean2};
                vj["sd"] = {s.sd1, s.sd2};
                if (s.n1 != ds.groups[0].n || s.n2 != ds.groups[1].n) vj["n"] = {s.n1, s.n2};
                if (s.decimals) vj["decimals"] = *s.decimals;
                break;
            }
        }
        doc["variables"].push_back(std::move(vj));
    }
    return doc.dump(2);
}

TrialDataset group_categorical(const TrialDataset& ds, const std::vector<std::string>& names,
                               const std::string& new_name) {
    if (names.size() < 2)
        throw std::invalid_argument("group_categorical: needs at least 2 variable names");
    std::vector<std::size_t> indices;
    for (const auto& name : names) {
        const auto it = std::find_if(ds.variables.begin(), ds.variables.end(),
                                     [&](const VariableSpec& v) { return v.name == name; });
        if (it == ds.variables.end())
            throw std::invalid_argument("group_categorical: no variable named '" + name + "'");
        if (it->kind() != VariableKind::dichotomous)
            throw std::invalid_argument("group_categorical: '" + name + "' is not dichotomous");
        indices.push_back(static_cast<std::size_t>(it - ds.variables.begin()));
    }

    TableRxC grouped;
    const Table2x2& first = std::get<Table2x2>(ds.variables[indices.front()].data);
    long long sum1 = 0, sum2 = 0;
    for (std::size_t idx : indices) {
        const Table2x2& t = std::get<Table2x2>(ds.variables[idx].data);
        if (t.n1 != first.n1 || t.n2 != first.n2)
            throw std::invalid_argument(
                "group_categorical: the named variables report different group sizes");
        grouped.counts.push_back({t.k1, t.k2});
        sum1 += t.k1;
        sum2 += t.k2;
    }
    if (sum1 != first.n1 || sum2 != first.n2)
        throw std::invalid_argument(
            "group_categorical: categories must cover each patient exactly once; per-group "
            "yes-counts sum to (" +
            std::to_string(sum1) + ", " + std::to_string(sum2) + ") against group sizes (" +
            std::to_string(first.n1) + ", " + std::to_string(first.n2) + ")");

    TrialDataset out;
    out.groups = ds.groups;
    out.metadata = ds.metadata;
    const std::size_t insert_at = *std::min_element(indices.begin(), indices.end());
    for (std::size_t i = 0; i < ds.variables.size(); ++i) {
        if (i == insert_at) {
            VariableSpec spec;
            spec.name = new_name;
            spec.data = grouped;
            out.variables.push_back(std::move(spec));
        }
        if (std::find(indices.begin(), indices.end(), i) == indices.end())
            out.variables.push_back(ds.variables[i]);
    }
    std::set<std::string> seen;
    for (const auto& v : out.variables)
        if (!seen.insert(v.name).second)
            throw std::invalid_argument("group_categorical: name '" + v.name +
                                        "' already exists in the dataset");
    return out;
}

ContinuousSummary apply_tie_adjustment(const ContinuousSummary& s) {
    validate(s);
    if (s.mean1 != s.mean2) return s;
    if (!s.decimals)
        throw std::invalid_argument(
            "tie adjustment: the reported means are equal; supply the reporting precision "
            "('decimals') so the means can be separated by one reporting unit");
    const double half_unit = 0.5 * std::pow(10.0, -*s.decimals);
    ContinuousSummary out = s;
    out.mean1 = s.mean1 - half_unit;
    out.mean2 = s.mean2 + half_unit;
    return out;
}

} // namespace bscreen

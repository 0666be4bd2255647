#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace bscreen {

/// A 2x2 contingency table with fixed group sizes: k1/k2 "yes" counts out of
/// n1/n2 patients per group.
struct Table2x2 {
    long long k1 = 0;
    long long k2 = 0;
    long long n1 = 0;
    long long n2 = 0;

    long long yes_total() const { return k1 + k2; }
    long long total() const { return n1 + n2; }
};

/// R x C table of non-negative counts; rows are categories, columns groups.
struct TableRxC {
    std::vector<std::vector<long long>> counts;

    std::size_t rows() const { return counts.size(); }
    std::size_t cols() const { return counts.empty() ? 0 : counts.front().size(); }
};

/// Row and column totals of a contingency table.
struct Marginals {
    std::vector<long long> row_totals;
    std::vector<long long> col_totals;

    long long total() const;
    bool is_2x2() const { return row_totals.size() == 2 && col_totals.size() == 2; }
};

void validate(const Table2x2& t);
void validate(const TableRxC& t);
void validate(const Marginals& m);

Marginals marginals(const Table2x2& t);
Marginals marginals(const TableRxC& t);

/// Inclusive range of k1 (count of "yes" in group 1) over all 2x2 tables
/// with the given marginals.
struct Support2x2 {
    long long lo = 0;
    long long hi = 0;

    long long size() const { return hi - lo + 1; }
};

Support2x2 support_2x2(const Marginals& m);

/// Rebuild the full 2x2 table with marginals m and first cell k1.
Table2x2 table_from_marginals(const Marginals& m, long long k1);

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

class EnumerationCapExceeded : public std::runtime_error {
public:
    EnumerationCapExceeded(std::uint64_t estimate, std::uint64_t cap);

    std::uint64_t estimate;
    std::uint64_t cap;
};

/// Upper bound on the number of tables with marginals m: the product of the
/// per-cell feasible ranges over the free cells (all but the last row and
/// last column). Saturates at 2^63.
std::uint64_t estimate_table_count(const Marginals& m);

/// Streaming enumeration of every R x C table with the given marginals,
/// exactly once, in lexicographic row-major cell order. Constant memory;
/// single consumer. Throws EnumerationCapExceeded on construction when the
/// estimated count exceeds the cap.
class TableEnumerator {
public:
    explicit TableEnumerator(Marginals m, std::uint64_t cap = kDefaultEnumerationCap);

    /// Next table, or nullopt when exhausted.
    std::optional<TableRxC> next();

    /// Tables produced so far.
    std::uint64_t produced() const { return produced_; }

private:
    void fill_from(std::size_t cell);
    bool advance();
    TableRxC snapshot() const;

    struct Cell {
        std::size_t row;
        std::size_t col;
        long long value = 0;
        long long hi = 0;
    };

    Marginals m_;
    std::size_t n_rows_;
    std::size_t n_cols_;
    std::vector<Cell> cells_;          // all cells of rows 0..R-2, row-major
    std::vector<long long> col_left_;  // column totals minus placed values
    std::vector<long long> row_left_;  // per-row remainder while filling
    std::uint64_t produced_ = 0;
    bool started_ = false;
    bool done_ = false;
};

/// Drains a TableEnumerator and returns the exact table count.
std::uint64_t count_tables(const Marginals& m, std::uint64_t cap = kDefaultEnumerationCap);

} // namespace bscreen

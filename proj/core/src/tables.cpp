#include "baseline_screen/tables.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

namespace bscreen {

long long Marginals::total() const {
    return std::accumulate(row_totals.begin(), row_totals.end(), 0LL);
}

void validate(const Table2x2& t) {
    if (t.n1 < 1 || t.n2 < 1)
        throw std::invalid_argument("Table2x2: group sizes must be at least 1");
    if (t.k1 < 0 || t.k1 > t.n1 || t.k2 < 0 || t.k2 > t.n2)
        throw std::invalid_argument("Table2x2: counts must satisfy 0 <= k <= n");
}

void validate(const TableRxC& t) {
    if (t.rows() < 2) throw std::invalid_argument("TableRxC: needs at least 2 rows");
    const std::size_t c = t.cols();
    if (c < 2) throw std::invalid_argument("TableRxC: needs at least 2 columns");
    for (const auto& row : t.counts) {
        if (row.size() != c) throw std::invalid_argument("TableRxC: ragged rows");
        for (long long v : row)
            if (v < 0) throw std::invalid_argument("TableRxC: negative count");
    }
    for (std::size_t j = 0; j < c; ++j) {
        long long col = 0;
        for (const auto& row : t.counts) col += row[j];
        if (col < 1) throw std::invalid_argument("TableRxC: empty column " + std::to_string(j));
    }
}

void validate(const Marginals& m) {
    if (m.row_totals.empty() || m.col_totals.empty())
        throw std::invalid_argument("Marginals: empty totals");
    long long rows = 0, cols = 0;
    for (long long v : m.row_totals) {
        if (v < 0) throw std::invalid_argument("Marginals: negative row total");
        rows += v;
    }
    for (long long v : m.col_totals) {
        if (v < 0) throw std::invalid_argument("Marginals: negative column total");
        cols += v;
    }
    if (rows != cols) throw std::invalid_argument("Marginals: row and column totals disagree");
}

Marginals marginals(const Table2x2& t) {
    validate(t);
    return Marginals{{t.k1 + t.k2, (t.n1 - t.k1) + (t.n2 - t.k2)}, {t.n1, t.n2}};
}

Marginals marginals(const TableRxC& t) {
    validate(t);
    Marginals m;
    m.row_totals.reserve(t.rows());
    for (const auto& row : t.counts)
        m.row_totals.push_back(std::accumulate(row.begin(), row.end(), 0LL));
    m.col_totals.assign(t.cols(), 0);
    for (const auto& row : t.counts)
        for (std::size_t j = 0; j < row.size(); ++j) m.col_totals[j] += row[j];
    return m;
}

Support2x2 support_2x2(const Marginals& m) {
    validate(m);
    if (!m.is_2x2()) throw std::invalid_argument("support_2x2: marginals are not 2x2");
    const long long s = m.row_totals[0];
    const long long n1 = m.col_totals[0];
    const long long n2 = m.col_totals[1];
    return Support2x2{std::max(0LL, s - n2), std::min(s, n1)};
}

Table2x2 table_from_marginals(const Marginals& m, long long k1) {
    const auto sup = support_2x2(m);
    if (k1 < sup.lo || k1 > sup.hi)
        throw std::domain_error("table_from_marginals: k1 outside the support");
    return Table2x2{k1, m.row_totals[0] - k1, m.col_totals[0], m.col_totals[1]};
}

EnumerationCapExceeded::EnumerationCapExceeded(std::uint64_t estimate_, std::uint64_t cap_)
    : std::runtime_error("table enumeration would produce an estimated " +
                         std::to_string(estimate_) + " tables, above the cap of " +
                         std::to_string(cap_)),
      estimate(estimate_),
      cap(cap_) {}

std::uint64_t estimate_table_count(const Marginals& m) {
    validate(m);
    const long long total = m.total();
    constexpr std::uint64_t kSaturated = std::uint64_t(1) << 63;
    std::uint64_t product = 1;
    for (std::size_t i = 0; i + 1 < m.row_totals.size(); ++i) {
        for (std::size_t j = 0; j + 1 < m.col_totals.size(); ++j) {
            const long long lo = std::max(0LL, m.row_totals[i] + m.col_totals[j] - total);
            const long long hi = std::min(m.row_totals[i], m.col_totals[j]);
            const std::uint64_t range = static_cast<std::uint64_t>(hi - lo + 1);
            if (product > kSaturated / range) return kSaturated;
            product *= range;
        }
    }
    return product;
}

TableEnumerator::TableEnumerator(Marginals m, std::uint64_t cap) : m_(std::move(m)) {
    validate(m_);
    const std::uint64_t estimate = estimate_table_count(m_);
    if (estimate > cap) throw EnumerationCapExceeded(estimate, cap);
    n_rows_ = m_.row_totals.size();
    n_cols_ = m_.col_totals.size();
    cells_.reserve((n_rows_ - 1) * n_cols_);
    for (std::size_t i = 0; i + 1 < n_rows_; ++i)
        for (std::size_t j = 0; j < n_cols_; ++j) cells_.push_back(Cell{i, j});
    col_left_ = m_.col_totals;
    row_left_ = m_.row_totals;
}

// Assigns minimal feasible values to cells from `cell` on. Every partial
// assignment extends to at least one table, so this cannot dead-end.
void TableEnumerator::fill_from(std::size_t cell) {
    for (std::size_t c = cell; c < cells_.size(); ++c) {
        Cell& cur = cells_[c];
        const long long remaining = row_left_[cur.row];
        long long tail_capacity = 0;  // what later columns of this row can absorb
        for (std::size_t j = cur.col + 1; j < n_cols_; ++j) tail_capacity += col_left_[j];
        const long long lo = std::max(0LL, remaining - tail_capacity);
        cur.hi = std::min(remaining, col_left_[cur.col]);
        cur.value = lo;
        row_left_[cur.row] -= lo;
        col_left_[cur.col] -= lo;
    }
}

// Odometer step: withdraw values from the back until a cell can grow, grow
// it by one, refill the suffix minimally.
bool TableEnumerator::advance() {
    for (std::size_t c = cells_.size(); c-- > 0;) {
        Cell& cur = cells_[c];
        row_left_[cur.row] += cur.value;
        col_left_[cur.col] += cur.value;
        const bool last_col = cur.col + 1 == n_cols_;
        if (!last_col && cur.value < cur.hi) {
            cur.value += 1;
            row_left_[cur.row] -= cur.value;
            col_left_[cur.col] -= cur.value;
            fill_from(c + 1);
            return true;
        }
    }
    return false;
}

TableRxC TableEnumerator::snapshot() const {
    TableRxC t;
    t.counts.assign(n_rows_, std::vector<long long>(n_cols_, 0));
    for (const Cell& c : cells_) t.counts[c.row][c.col] = c.value;
    // The last row is forced by the column residuals.
    for (std::size_t j = 0; j < n_cols_; ++j) t.counts[n_rows_ - 1][j] = col_left_[j];
    return t;
}

std::optional<TableRxC> TableEnumerator::next() {
    if (done_) return std::nullopt;
    if (!started_) {
        started_ = true;
        fill_from(0);
    } else if (!advance()) {
        done_ = true;
        return std::nullopt;
    }
    ++produced_;
    return snapshot();
}

std::uint64_t count_tables(const Marginals& m, std::uint64_t cap) {
    TableEnumerator e(m, cap);
    while (e.next()) {
    }
    return e.produced();
}

} // namespace bscreen

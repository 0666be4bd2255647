#pragma once

#include <vector>

#include "baseline_screen/tables.hpp"

namespace bscreen::detail {

// Tail mass over a conditional support, summed in support order. Exact tests,
// law tables and simulation all share these sums so the same table always
// yields the same p-value bit for bit. Returns exactly 1.0 when every point
// passes the cutoff.
double tail_mass_le(const std::vector<double>& log_pmf, const std::vector<double>& mass,
                    double cutoff);
double tail_mass_ge(const std::vector<double>& log_pmf, const std::vector<double>& mass,
                    double cutoff);

// Hypergeometric log-pmf and pmf over the full 2x2 support of m.
void support_log_pmf(const Marginals& m, std::vector<double>& log_pmf,
                     std::vector<double>& mass);

// Multivariate hypergeometric log probability of a table given its marginals.
double rxc_log_prob(const TableRxC& t, const Marginals& m);

// Per-point tie-tolerant tail p-values over a support, via one sort and
// prefix/suffix sums; for supports too large for the quadratic per-point
// summation. Exactly 1.0 when a point's cutoff covers the whole support.
void sorted_tail_pvalues(const std::vector<double>& log_pmf, const std::vector<double>& mass,
                         double rel_eps, std::vector<double>& p_std,
                         std::vector<double>& p_rev);

} // namespace bscreen::detail

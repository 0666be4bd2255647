#include "baseline_screen/combination.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "baseline_screen/numerics.hpp"

namespace bscreen {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_probabilities(std::span<const double> ps, const char* who) {
    if (ps.empty()) throw std::invalid_argument(std::string(who) + ": empty p-value list");
    for (double p : ps)
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument(std::string(who) + ": p-value outside [0,1]");
}

} // namespace

double stouffer_combine(std::span<const double> ps) {
    check_probabilities(ps, "stouffer_combine");
    // Continuous extension of Phi: a p of exactly 1 dominates and forces the
    // combination to 1; failing that, a p of 0 forces it to 0.
    bool any_one = false, any_zero = false;
    for (double p : ps) {
        any_one |= p == 1.0;
        any_zero |= p == 0.0;
    }
    if (any_one) return 1.0;
    if (any_zero) return 0.0;
    double z_sum = 0.0;
    for (double p : ps) z_sum += std_normal_quantile(p);
    return std_normal_cdf(z_sum / std::sqrt(static_cast<double>(ps.size())));
}

double fisher_combine(std::span<const double> ps) {
    check_probabilities(ps, "fisher_combine");
    double log_sum = 0.0;
    for (double p : ps) {
        if (p == 0.0) return 0.0;
        log_sum += std::log(p);
    }
    return chi_square_sf(-2.0 * log_sum, 2 * static_cast<int>(ps.size()));
}

std::vector<double> brown_adjust(std::span<const double> ps, double cap) {
    if (!(cap > 0.0 && cap < 1.0))
        throw std::invalid_argument("brown_adjust: cap must lie in (0,1)");
    std::vector<double> out(ps.begin(), ps.end());
    for (double& p : out) p = std::min(p, cap);
    return out;
}

double log_sum_statistic(std::span<const double> ps) {
    check_probabilities(ps, "log_sum_statistic");
    double sum = 0.0;
    for (double p : ps) {
        if (p == 0.0) return -kInf;
        sum += std::log(p);
    }
    return sum;
}

double stouffer_statistic(std::span<const double> ps) {
    check_probabilities(ps, "stouffer_statistic");
    bool any_one = false, any_zero = false;
    for (double p : ps) {
        any_one |= p == 1.0;
        any_zero |= p == 0.0;
    }
    if (any_one) return kInf;
    if (any_zero) return -kInf;
    double sum = 0.0;
    for (double p : ps) sum += std_normal_quantile(p);
    return sum;
}

} // namespace bscreen

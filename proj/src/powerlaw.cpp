#include <cmath>
#include <stdexcept>
#include <vector>

#include "fgrec/kernels.hpp"
#include "fgrec/synth.hpp"

namespace fgrec {

double riemann_zeta(double s) {
    if (s <= 1.0) throw std::invalid_argument("riemann_zeta: requires s > 1");
    constexpr int kCutoff = 16;
    double total = 0.0;
    for (int k = 1; k < kCutoff; ++k) total += std::pow(static_cast<double>(k), -s);
    const double n = static_cast<double>(kCutoff);
    total += std::pow(n, 1.0 - s) / (s - 1.0);
    total += 0.5 * std::pow(n, -s);
    // Euler-Maclaurin corrections with B_2 .. B_12.
    static constexpr double kBernoulliOverFact[6] = {
        1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0, 1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
    };
    double poch = s;  // s (s+1) ... rising factorial
    for (int j = 1; j <= 6; ++j) {
        const double exponent = -(s + 2.0 * j - 1.0);
        total += kBernoulliOverFact[j - 1] * poch * std::pow(n, exponent);
        poch *= (s + 2.0 * j - 1.0) * (s + 2.0 * j);
    }
    return total;
}

namespace {

// E[ln X] under the zeta(alpha) distribution, i.e. -zeta'(alpha)/zeta(alpha).
double zeta_mean_log(double alpha) {
    const double h = 1e-6;
    const double d = (riemann_zeta(alpha + h) - riemann_zeta(alpha - h)) / (2.0 * h);
    return -d / riemann_zeta(alpha);
}

}  // namespace

double fit_power_law(std::span<const std::uint64_t> counts, double x_min) {
    if (x_min < 1.0) throw std::invalid_argument("fit_power_law: x_min must be >= 1");
    std::vector<double> log_ratio;
    log_ratio.reserve(counts.size());
    bool distinct = false;
    std::uint64_t first = 0;
    for (auto c : counts) {
        if (c == 0) throw std::invalid_argument("fit_power_law: counts must be positive");
        if (static_cast<double>(c) < x_min) continue;
        if (log_ratio.empty()) {
            first = c;
        } else if (c != first) {
            distinct = true;
        }
        log_ratio.push_back(std::log(static_cast<double>(c) / x_min));
    }
    if (log_ratio.size() < 50) {
        throw std::invalid_argument("fit_power_law: needs at least 50 counts above x_min");
    }
    if (!distinct) {
        throw std::invalid_argument("fit_power_law: degenerate input (all counts equal)");
    }
    const double mean_log = kernels::sum(log_ratio) / static_cast<double>(log_ratio.size());
    if (mean_log <= 0.0) {
        throw std::invalid_argument("fit_power_law: degenerate input (no tail mass above x_min)");
    }

    // zeta_mean_log decreases strictly in alpha; bisect the MLE condition
    // E[ln X] = mean_log. The bracket keeps alpha - h > 1 for the zeta
    // derivative stencil.
    double lo = 1.0 + 1e-5;
    double hi = 50.0;
    if (zeta_mean_log(hi) >= mean_log) return hi;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (zeta_mean_log(mid) > mean_log) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-10) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace fgrec

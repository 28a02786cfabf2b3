#include "fgrec/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fgrec {

std::uint64_t derive_seed(std::uint64_t root, std::string_view stream) {
    // FNV-1a over the stream name, then mixed with the root seed.
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : stream) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return splitmix64(root ^ splitmix64(h));
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Box-Muller; u1 in (0,1] to keep the log finite.
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

double Rng::exponential() {
    return -std::log(1.0 - uniform());
}

double Rng::gamma(double shape) {
    if (shape <= 0.0) throw std::invalid_argument("Rng::gamma: shape must be positive");
    if (shape < 1.0) {
        // Boost to shape+1 and scale back.
        double u = uniform();
        while (u <= 0.0) u = uniform();
        return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = normal();
        double v = 1.0 + c * x;
        if (v <= 0.0) continue;
        v = v * v * v;
        double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

std::vector<double> Rng::dirichlet(std::size_t k, double concentration) {
    std::vector<double> out(k);
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        out[i] = gamma(concentration);
        total += out[i];
    }
    if (total <= 0.0) {
        for (auto& x : out) x = 1.0 / static_cast<double>(k);
        return out;
    }
    for (auto& x : out) x /= total;
    return out;
}

std::uint64_t Rng::zipf(double alpha) {
    if (alpha <= 1.0) throw std::invalid_argument("Rng::zipf: alpha must exceed 1");
    const double am1 = alpha - 1.0;
    const double b = std::pow(2.0, am1);
    for (;;) {
        double u1 = 1.0 - uniform();  // (0,1]
        double u2 = uniform();
        double x = std::floor(std::pow(u1, -1.0 / am1));
        if (x < 1.0 || x > 1e18) continue;
        double t = std::pow(1.0 + 1.0 / x, am1);
        if (u2 * x * (t - 1.0) / (b - 1.0) <= t / b) {
            return static_cast<std::uint64_t>(x);
        }
    }
}

std::size_t Rng::categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw std::invalid_argument("Rng::categorical: weights must have positive sum");
    double target = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (target < acc) return i;
    }
    return weights.size() - 1;
}

ZipfTable::ZipfTable(std::size_t n, double s) {
    if (n == 0) throw std::invalid_argument("ZipfTable: empty support");
    cdf_.resize(n);
    double acc = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        acc += std::pow(static_cast<double>(r + 1), -s);
        cdf_[r] = acc;
    }
    for (auto& x : cdf_) x /= acc;
}

std::size_t ZipfTable::sample(Rng& rng) const {
    double u = rng.uniform();
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) return cdf_.size() - 1;
    return static_cast<std::size_t>(it - cdf_.begin());
}

}  // namespace fgrec

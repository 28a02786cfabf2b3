#pragma once
// Seeded random streams. All distribution sampling is hand-rolled on top of
// mt19937_64 so that a given seed produces the same draws on every platform
// (std::uniform_real_distribution and friends are implementation-defined).

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace fgrec {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derives an independent stream seed from a root seed and a stream name,
// so adding a stage never perturbs another stage's draws.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n), unbiased (rejection).
    std::uint64_t below(std::uint64_t n);

    bool bernoulli(double p) { return uniform() < p; }

    double normal();
    double exponential() ;

    // Marsaglia-Tsang; valid for any shape > 0.
    double gamma(double shape);

    std::vector<double> dirichlet(std::size_t k, double concentration);

    // Unbounded zeta/Zipf sample on {1, 2, ...} with P(x) proportional to
    // x^-alpha, alpha > 1 (Devroye's rejection method).
    std::uint64_t zipf(double alpha);

    // Index in [0, weights.size()) with probability proportional to weight.
    std::size_t categorical(std::span<const double> weights);

    // In-place Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Finite Zipf over ranks 1..n (P(r) proportional to r^-s), sampled by
// inverse CDF over a precomputed table.
class ZipfTable {
public:
    ZipfTable(std::size_t n, double s);
    // Returns a rank in [0, n).
    std::size_t sample(Rng& rng) const;

private:
    std::vector<double> cdf_;
};

}  // namespace fgrec

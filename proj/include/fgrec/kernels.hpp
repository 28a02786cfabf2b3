#pragma once
// Dense double-precision kernels used by the feature, graph and inference
// hot loops. Each kernel has a scalar reference implementation and, where
// the CPU supports it, an AVX2 (x86-64) or NEON (aarch64) variant selected
// once at startup. The variants are equivalence-tested against the scalar
// reference: elementwise kernels must match bit-for-bit, reductions within
// a small relative tolerance (vector lanes reorder the accumulation).

#include <cstddef>
#include <span>
#include <string_view>

namespace fgrec::kernels {

struct MinMax {
    double min;
    double max;
};

// sum of x
double sum(std::span<const double> x);
// <x, y>; sizes must match
double dot(std::span<const double> x, std::span<const double> y);
// ||x - y||^2; sizes must match
double squared_distance(std::span<const double> x, std::span<const double> y);
// max_i |x_i - y_i|; sizes must match; 0 for empty input
double max_abs_diff(std::span<const double> x, std::span<const double> y);
// column min/max; undefined for empty input (asserted)
MinMax min_max(std::span<const double> x);
// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);
// x *= a
void scale(std::span<double> x, double a);

enum class Backend { scalar, avx2, neon };

std::string_view backend_name(Backend b);
bool backend_available(Backend b);

// The backend all kernel entry points currently route to. Defaults to the
// best available one; FGREC_KERNELS=scalar|avx2|neon overrides at startup.
Backend active_backend();
void force_backend(Backend b);  // throws if unavailable

}  // namespace fgrec::kernels

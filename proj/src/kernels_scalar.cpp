// Scalar reference kernels. These define the semantics the SIMD variants
// are tested against; keep them plain sequential loops.

#include <cassert>
#include <cmath>

#include "kernels_internal.hpp"

namespace fgrec::kernels::detail {

namespace {

double sum_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double squared_distance_scalar(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = x[i] - y[i];
        acc += d * d;
    }
    return acc;
}

double max_abs_diff_scalar(const double* x, const double* y, std::size_t n) {
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = std::fabs(x[i] - y[i]);
        if (d > best) best = d;
    }
    return best;
}

MinMax min_max_scalar(const double* x, std::size_t n) {
    assert(n > 0);
    MinMax mm{x[0], x[0]};
    for (std::size_t i = 1; i < n; ++i) {
        if (x[i] < mm.min) mm.min = x[i];
        if (x[i] > mm.max) mm.max = x[i];
    }
    return mm;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_scalar(double* x, double a, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable table{
        sum_scalar,          dot_scalar,  squared_distance_scalar,
        max_abs_diff_scalar, min_max_scalar, axpy_scalar, scale_scalar,
    };
    return table;
}

}  // namespace fgrec::kernels::detail

// NEON kernels, 2 doubles per lane. Baseline on aarch64, no runtime check
// needed. Same mul/add structure as the scalar reference.

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cassert>
#include <cmath>

#include "kernels_internal.hpp"

namespace fgrec::kernels::detail {

namespace {

double sum_neon(const double* x, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        acc = vaddq_f64(acc, vld1q_f64(x + i));
    }
    double total = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
    for (; i < n; ++i) total += x[i];
    return total;
}

double dot_neon(const double* x, const double* y, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
    }
    double total = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
    for (; i < n; ++i) total += x[i] * y[i];
    return total;
}

double squared_distance_neon(const double* x, const double* y, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t d = vsubq_f64(vld1q_f64(x + i), vld1q_f64(y + i));
        acc = vaddq_f64(acc, vmulq_f64(d, d));
    }
    double total = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
    for (; i < n; ++i) {
        double d = x[i] - y[i];
        total += d * d;
    }
    return total;
}

double max_abs_diff_neon(const double* x, const double* y, std::size_t n) {
    float64x2_t best = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t d = vabdq_f64(vld1q_f64(x + i), vld1q_f64(y + i));
        best = vmaxq_f64(best, d);
    }
    double out = vgetq_lane_f64(best, 0);
    double lane1 = vgetq_lane_f64(best, 1);
    if (lane1 > out) out = lane1;
    for (; i < n; ++i) {
        double d = std::fabs(x[i] - y[i]);
        if (d > out) out = d;
    }
    return out;
}

MinMax min_max_neon(const double* x, std::size_t n) {
    assert(n > 0);
    if (n < 2) return MinMax{x[0], x[0]};
    float64x2_t vmin = vld1q_f64(x);
    float64x2_t vmax = vmin;
    std::size_t i = 2;
    for (; i + 2 <= n; i += 2) {
        float64x2_t v = vld1q_f64(x + i);
        vmin = vminq_f64(vmin, v);
        vmax = vmaxq_f64(vmax, v);
    }
    MinMax mm{vgetq_lane_f64(vmin, 0), vgetq_lane_f64(vmax, 0)};
    double min1 = vgetq_lane_f64(vmin, 1), max1 = vgetq_lane_f64(vmax, 1);
    if (min1 < mm.min) mm.min = min1;
    if (max1 > mm.max) mm.max = max1;
    for (; i < n; ++i) {
        if (x[i] < mm.min) mm.min = x[i];
        if (x[i] > mm.max) mm.max = x[i];
    }
    return mm;
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t prod = vmulq_f64(va, vld1q_f64(x + i));
        vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), prod));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void scale_neon(double* x, double a, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        vst1q_f64(x + i, vmulq_f64(vld1q_f64(x + i), va));
    }
    for (; i < n; ++i) x[i] *= a;
}

}  // namespace

const KernelTable& neon_table() {
    static const KernelTable table{
        sum_neon,          dot_neon,  squared_distance_neon,
        max_abs_diff_neon, min_max_neon, axpy_neon, scale_neon,
    };
    return table;
}

}  // namespace fgrec::kernels::detail

#endif  // __aarch64__

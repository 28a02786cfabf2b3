// AVX2 kernels, 4 doubles per lane. This translation unit is compiled with
// -mavx2 and must only be entered after a runtime cpuid check. Elementwise
// ops use the same mul/add sequence as the scalar reference (no FMA) so
// they match it bit-for-bit; reductions differ only in accumulation order.

#if defined(__x86_64__)

#include <immintrin.h>

#include <cassert>
#include <cmath>

#include "kernels_internal.hpp"

namespace fgrec::kernels::detail {

namespace {

double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swap = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swap));
}

double sum_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    }
    double total = hsum(acc);
    for (; i < n; ++i) total += x[i];
    return total;
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d p = _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        acc = _mm256_add_pd(acc, p);
    }
    double total = hsum(acc);
    for (; i < n; ++i) total += x[i] * y[i];
    return total;
}

double squared_distance_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    double total = hsum(acc);
    for (; i < n; ++i) {
        double d = x[i] - y[i];
        total += d * d;
    }
    return total;
}

double max_abs_diff_avx2(const double* x, const double* y, std::size_t n) {
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    __m256d best = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        best = _mm256_max_pd(best, _mm256_andnot_pd(sign_mask, d));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, best);
    double out = lanes[0];
    for (int k = 1; k < 4; ++k) {
        if (lanes[k] > out) out = lanes[k];
    }
    for (; i < n; ++i) {
        double d = std::fabs(x[i] - y[i]);
        if (d > out) out = d;
    }
    return out;
}

MinMax min_max_avx2(const double* x, std::size_t n) {
    assert(n > 0);
    if (n < 4) {
        MinMax mm{x[0], x[0]};
        for (std::size_t i = 1; i < n; ++i) {
            if (x[i] < mm.min) mm.min = x[i];
            if (x[i] > mm.max) mm.max = x[i];
        }
        return mm;
    }
    __m256d vmin = _mm256_loadu_pd(x);
    __m256d vmax = vmin;
    std::size_t i = 4;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(x + i);
        vmin = _mm256_min_pd(vmin, v);
        vmax = _mm256_max_pd(vmax, v);
    }
    alignas(32) double lo[4], hi[4];
    _mm256_store_pd(lo, vmin);
    _mm256_store_pd(hi, vmax);
    MinMax mm{lo[0], hi[0]};
    for (int k = 1; k < 4; ++k) {
        if (lo[k] < mm.min) mm.min = lo[k];
        if (hi[k] > mm.max) mm.max = hi[k];
    }
    for (; i < n; ++i) {
        if (x[i] < mm.min) mm.min = x[i];
        if (x[i] > mm.max) mm.max = x[i];
    }
    return mm;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void scale_avx2(double* x, double a, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), va));
    }
    for (; i < n; ++i) x[i] *= a;
}

}  // namespace

const KernelTable& avx2_table() {
    static const KernelTable table{
        sum_avx2,          dot_avx2,  squared_distance_avx2,
        max_abs_diff_avx2, min_max_avx2, axpy_avx2, scale_avx2,
    };
    return table;
}

}  // namespace fgrec::kernels::detail

#endif  // __x86_64__

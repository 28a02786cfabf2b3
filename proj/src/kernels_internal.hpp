#pragma once
// Per-backend kernel tables. Only the dispatcher includes this.

#include <cstddef>

#include "fgrec/kernels.hpp"

namespace fgrec::kernels::detail {

struct KernelTable {
    double (*sum)(const double*, std::size_t);
    double (*dot)(const double*, const double*, std::size_t);
    double (*squared_distance)(const double*, const double*, std::size_t);
    double (*max_abs_diff)(const double*, const double*, std::size_t);
    MinMax (*min_max)(const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*scale)(double*, double, std::size_t);
};

const KernelTable& scalar_table();

#if defined(__x86_64__)
const KernelTable& avx2_table();
#endif
#if defined(__aarch64__)
const KernelTable& neon_table();
#endif

}  // namespace fgrec::kernels::detail

#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels_internal.hpp"

namespace fgrec::kernels {

namespace {

using detail::KernelTable;

Backend best_available() {
#if defined(__x86_64__)
    if (__builtin_cpu_supports("avx2")) return Backend::avx2;
#elif defined(__aarch64__)
    return Backend::neon;
#endif
    return Backend::scalar;
}

Backend initial_backend() {
    if (const char* env = std::getenv("FGREC_KERNELS")) {
        std::string want(env);
        if (want == "scalar") return Backend::scalar;
        if (want == "avx2" && backend_available(Backend::avx2)) return Backend::avx2;
        if (want == "neon" && backend_available(Backend::neon)) return Backend::neon;
        // Unknown or unavailable request: fall through to autodetect.
    }
    return best_available();
}

const KernelTable& table_for(Backend b) {
    switch (b) {
        case Backend::scalar:
            return detail::scalar_table();
#if defined(__x86_64__)
        case Backend::avx2:
            return detail::avx2_table();
#endif
#if defined(__aarch64__)
        case Backend::neon:
            return detail::neon_table();
#endif
        default:
            return detail::scalar_table();
    }
}

struct Dispatch {
    Backend backend;
    const KernelTable* table;
    Dispatch() : backend(initial_backend()), table(&table_for(backend)) {}
};

Dispatch& dispatch() {
    static Dispatch d;
    return d;
}

}  // namespace

std::string_view backend_name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
        case Backend::neon: return "neon";
    }
    return "?";
}

bool backend_available(Backend b) {
    switch (b) {
        case Backend::scalar:
            return true;
        case Backend::avx2:
#if defined(__x86_64__)
            return __builtin_cpu_supports("avx2") != 0;
#else
            return false;
#endif
        case Backend::neon:
#if defined(__aarch64__)
            return true;
#else
            return false;
#endif
    }
    return false;
}

Backend active_backend() { return dispatch().backend; }

void force_backend(Backend b) {
    if (!backend_available(b)) {
        throw std::runtime_error("kernel backend not available on this CPU: " +
                                 std::string(backend_name(b)));
    }
    dispatch().backend = b;
    dispatch().table = &table_for(b);
}

double sum(std::span<const double> x) {
    return dispatch().table->sum(x.data(), x.size());
}

double dot(std::span<const double> x, std::span<const double> y) {
    return dispatch().table->dot(x.data(), y.data(), x.size());
}

double squared_distance(std::span<const double> x, std::span<const double> y) {
    return dispatch().table->squared_distance(x.data(), y.data(), x.size());
}

double max_abs_diff(std::span<const double> x, std::span<const double> y) {
    return dispatch().table->max_abs_diff(x.data(), y.data(), x.size());
}

MinMax min_max(std::span<const double> x) {
    return dispatch().table->min_max(x.data(), x.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    dispatch().table->axpy(a, x.data(), y.data(), x.size());
}

void scale(std::span<double> x, double a) {
    dispatch().table->scale(x.data(), a, x.size());
}

}  // namespace fgrec::kernels

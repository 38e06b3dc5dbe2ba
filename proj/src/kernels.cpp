#include "logan/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <string>

#include "logan/errors.hpp"

namespace logan::kernels {

namespace detail {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_scalar(double* y, double alpha, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void add_scalar(double* out, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void mul_scalar(double* out, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void scale_scalar(double* out, const double* a, double alpha, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = alpha * a[i];
}

double reduce_sum_scalar(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i];
    return acc;
}

double reduce_max_scalar(const double* a, std::size_t n) {
    double m = a[0];
    for (std::size_t i = 1; i < n; ++i) m = a[i] > m ? a[i] : m;
    return m;
}

}  // namespace detail

namespace {

struct Table {
    double (*dot)(const double*, const double*, std::size_t);
    void (*axpy)(double*, double, const double*, std::size_t);
    void (*add)(double*, const double*, const double*, std::size_t);
    void (*mul)(double*, const double*, const double*, std::size_t);
    void (*scale)(double*, const double*, double, std::size_t);
    double (*reduce_sum)(const double*, std::size_t);
    double (*reduce_max)(const double*, std::size_t);
};

constexpr Table kScalar{detail::dot_scalar,   detail::axpy_scalar,
                        detail::add_scalar,   detail::mul_scalar,
                        detail::scale_scalar, detail::reduce_sum_scalar,
                        detail::reduce_max_scalar};

#if defined(__x86_64__) || defined(_M_X64)
constexpr Table kAvx2{detail::dot_avx2,   detail::axpy_avx2,
                      detail::add_avx2,   detail::mul_avx2,
                      detail::scale_avx2, detail::reduce_sum_avx2,
                      detail::reduce_max_avx2};
#endif

#if defined(__aarch64__) || defined(__ARM_NEON)
constexpr Table kNeon{detail::dot_neon,   detail::axpy_neon,
                      detail::add_neon,   detail::mul_neon,
                      detail::scale_neon, detail::reduce_sum_neon,
                      detail::reduce_max_neon};
#endif

const Table* table_for(Backend b) {
    switch (b) {
        case Backend::scalar:
            return &kScalar;
#if defined(__x86_64__) || defined(_M_X64)
        case Backend::avx2:
            return &kAvx2;
#endif
#if defined(__aarch64__) || defined(__ARM_NEON)
        case Backend::neon:
            return &kNeon;
#endif
        default:
            return nullptr;
    }
}

Backend detect() {
    if (const char* env = std::getenv("LOGAN_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
        if (std::strcmp(env, "avx2") == 0 && supported(Backend::avx2)) return Backend::avx2;
        if (std::strcmp(env, "neon") == 0 && supported(Backend::neon)) return Backend::neon;
    }
    if (supported(Backend::avx2)) return Backend::avx2;
    if (supported(Backend::neon)) return Backend::neon;
    return Backend::scalar;
}

struct State {
    Backend backend = detect();
    const Table* table = table_for(backend);
};

State& state() {
    static State s;
    return s;
}

}  // namespace

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::scalar:
            return "scalar";
        case Backend::avx2:
            return "avx2";
        case Backend::neon:
            return "neon";
    }
    return "?";
}

bool supported(Backend b) {
    switch (b) {
        case Backend::scalar:
            return true;
        case Backend::avx2:
#if defined(__x86_64__) || defined(_M_X64)
            return __builtin_cpu_supports("avx2") != 0;
#else
            return false;
#endif
        case Backend::neon:
#if defined(__aarch64__) || defined(__ARM_NEON)
            return true;
#else
            return false;
#endif
    }
    return false;
}

Backend active() { return state().backend; }

void set_backend(Backend b) {
    if (!supported(b))
        throw ContractError(std::string("kernel backend not supported on this host: ") +
                            backend_name(b));
    state().backend = b;
    state().table = table_for(b);
}

double dot(const double* a, const double* b, std::size_t n) {
    return state().table->dot(a, b, n);
}

void axpy(double* y, double alpha, const double* x, std::size_t n) {
    state().table->axpy(y, alpha, x, n);
}

void add(double* out, const double* a, const double* b, std::size_t n) {
    state().table->add(out, a, b, n);
}

void mul(double* out, const double* a, const double* b, std::size_t n) {
    state().table->mul(out, a, b, n);
}

void scale(double* out, const double* a, double alpha, std::size_t n) {
    state().table->scale(out, a, alpha, n);
}

double reduce_sum(const double* a, std::size_t n) {
    return state().table->reduce_sum(a, n);
}

double reduce_max(const double* a, std::size_t n) {
    return state().table->reduce_max(a, n);
}

}  // namespace logan::kernels

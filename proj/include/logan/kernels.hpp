#pragma once

#include <cstddef>

// Dense double-precision kernels behind the tensor core. Every routine has a
// scalar reference implementation and may have SIMD variants; the active
// backend is picked once at startup from CPU capabilities and can be forced
// (used by the equivalence tests and the LOGAN_KERNELS env var).
namespace logan::kernels {

enum class Backend {
    scalar,
    avx2,
    neon,
};

const char* backend_name(Backend b);

// True if this build/CPU can run the given backend.
bool supported(Backend b);

// Currently active backend. Defaults to the widest supported one.
Backend active();

// Forces a backend; throws ContractError if unsupported.
void set_backend(Backend b);

// sum_i a[i]*b[i]
double dot(const double* a, const double* b, std::size_t n);

// y[i] += alpha * x[i]
void axpy(double* y, double alpha, const double* x, std::size_t n);

// out[i] = a[i] + b[i]
void add(double* out, const double* a, const double* b, std::size_t n);

// out[i] = a[i] * b[i]
void mul(double* out, const double* a, const double* b, std::size_t n);

// out[i] = alpha * a[i]
void scale(double* out, const double* a, double alpha, std::size_t n);

double reduce_sum(const double* a, std::size_t n);

// Max over n >= 1 entries.
double reduce_max(const double* a, std::size_t n);

namespace detail {
double dot_scalar(const double* a, const double* b, std::size_t n);
void axpy_scalar(double* y, double alpha, const double* x, std::size_t n);
void add_scalar(double* out, const double* a, const double* b, std::size_t n);
void mul_scalar(double* out, const double* a, const double* b, std::size_t n);
void scale_scalar(double* out, const double* a, double alpha, std::size_t n);
double reduce_sum_scalar(const double* a, std::size_t n);
double reduce_max_scalar(const double* a, std::size_t n);

#if defined(__x86_64__) || defined(_M_X64)
double dot_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double* y, double alpha, const double* x, std::size_t n);
void add_avx2(double* out, const double* a, const double* b, std::size_t n);
void mul_avx2(double* out, const double* a, const double* b, std::size_t n);
void scale_avx2(double* out, const double* a, double alpha, std::size_t n);
double reduce_sum_avx2(const double* a, std::size_t n);
double reduce_max_avx2(const double* a, std::size_t n);
#endif

#if defined(__aarch64__) || defined(__ARM_NEON)
double dot_neon(const double* a, const double* b, std::size_t n);
void axpy_neon(double* y, double alpha, const double* x, std::size_t n);
void add_neon(double* out, const double* a, const double* b, std::size_t n);
void mul_neon(double* out, const double* a, const double* b, std::size_t n);
void scale_neon(double* out, const double* a, double alpha, std::size_t n);
double reduce_sum_neon(const double* a, std::size_t n);
double reduce_max_neon(const double* a, std::size_t n);
#endif
}  // namespace detail

}  // namespace logan::kernels

// NEON variants for aarch64 builds. float64x2 lanes, tails handled scalar.
#if defined(__aarch64__) || defined(__ARM_NEON)

#include <arm_neon.h>

#include <cstddef>

#include "logan/kernels.hpp"

namespace logan::kernels::detail {

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
    }
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy_neon(double* y, double alpha, const double* x, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t vy = vld1q_f64(y + i);
        vy = vfmaq_f64(vy, va, vld1q_f64(x + i));
        vst1q_f64(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void add_neon(double* out, const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        vst1q_f64(out + i, vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    }
    for (; i < n; ++i) out[i] = a[i] + b[i];
}

void mul_neon(double* out, const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    }
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void scale_neon(double* out, const double* a, double alpha, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        vst1q_f64(out + i, vmulq_f64(va, vld1q_f64(a + i)));
    }
    for (; i < n; ++i) out[i] = alpha * a[i];
}

double reduce_sum_neon(const double* a, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(a + i));
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) s += a[i];
    return s;
}

double reduce_max_neon(const double* a, std::size_t n) {
    if (n < 2) return a[0];
    float64x2_t acc = vld1q_f64(a);
    std::size_t i = 2;
    for (; i + 2 <= n; i += 2) acc = vmaxq_f64(acc, vld1q_f64(a + i));
    double m = vmaxvq_f64(acc);
    for (; i < n; ++i) m = a[i] > m ? a[i] : m;
    return m;
}

}  // namespace logan::kernels::detail

#endif

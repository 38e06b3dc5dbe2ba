#include <doctest.h>

#include <cmath>
#include <vector>

#include "logan/kernels.hpp"
#include "logan/rng.hpp"

using namespace logan;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-2.0, 2.0);
    return v;
}

struct BackendGuard {
    kernels::Backend saved = kernels::active();
    ~BackendGuard() { kernels::set_backend(saved); }
};

// Sizes straddle the vector width so tails get exercised.
const std::size_t kSizes[] = {1, 2, 3, 4, 5, 7, 8, 15, 16, 17, 64, 100, 257};

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("scalar reference basics") {
    BackendGuard guard;
    kernels::set_backend(kernels::Backend::scalar);
    const double a[] = {1.0, 2.0, 3.0};
    const double b[] = {4.0, -5.0, 6.0};
    CHECK(kernels::dot(a, b, 3) == doctest::Approx(1.0 * 4 - 2 * 5 + 3 * 6));
    CHECK(kernels::reduce_sum(a, 3) == doctest::Approx(6.0));
    CHECK(kernels::reduce_max(b, 3) == doctest::Approx(6.0));
    double y[] = {1.0, 1.0, 1.0};
    kernels::axpy(y, 2.0, a, 3);
    CHECK(y[0] == doctest::Approx(3.0));
    CHECK(y[2] == doctest::Approx(7.0));
}

TEST_CASE("simd variants match scalar reference") {
    BackendGuard guard;
    for (auto backend : {kernels::Backend::avx2, kernels::Backend::neon}) {
        if (!kernels::supported(backend)) continue;
        CAPTURE(kernels::backend_name(backend));
        Rng rng(42);
        for (std::size_t n : kSizes) {
            auto a = random_vec(rng, n);
            auto b = random_vec(rng, n);

            kernels::set_backend(kernels::Backend::scalar);
            const double dot_ref = kernels::dot(a.data(), b.data(), n);
            const double sum_ref = kernels::reduce_sum(a.data(), n);
            const double max_ref = kernels::reduce_max(a.data(), n);
            std::vector<double> add_ref(n), mul_ref(n), scale_ref(n), axpy_ref = b;
            kernels::add(add_ref.data(), a.data(), b.data(), n);
            kernels::mul(mul_ref.data(), a.data(), b.data(), n);
            kernels::scale(scale_ref.data(), a.data(), 1.7, n);
            kernels::axpy(axpy_ref.data(), -0.3, a.data(), n);

            kernels::set_backend(backend);
            CHECK(kernels::dot(a.data(), b.data(), n) ==
                  doctest::Approx(dot_ref).epsilon(1e-13));
            CHECK(kernels::reduce_sum(a.data(), n) ==
                  doctest::Approx(sum_ref).epsilon(1e-13));
            CHECK(kernels::reduce_max(a.data(), n) == max_ref);
            std::vector<double> out(n);
            kernels::add(out.data(), a.data(), b.data(), n);
            for (std::size_t i = 0; i < n; ++i) CHECK(out[i] == add_ref[i]);
            kernels::mul(out.data(), a.data(), b.data(), n);
            for (std::size_t i = 0; i < n; ++i) CHECK(out[i] == mul_ref[i]);
            kernels::scale(out.data(), a.data(), 1.7, n);
            for (std::size_t i = 0; i < n; ++i) CHECK(out[i] == scale_ref[i]);
            out = b;
            kernels::axpy(out.data(), -0.3, a.data(), n);
            for (std::size_t i = 0; i < n; ++i)
                CHECK(out[i] == doctest::Approx(axpy_ref[i]).epsilon(1e-13));
        }
    }
}

TEST_CASE("forcing an unsupported backend throws") {
#if !defined(__x86_64__) && !defined(_M_X64)
    CHECK_THROWS(kernels::set_backend(kernels::Backend::avx2));
#else
    CHECK(kernels::supported(kernels::Backend::scalar));
#endif
}

}  // TEST_SUITE

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "offload/kernels.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace offload;

namespace {

std::vector<double> random_values(std::size_t n, std::uint32_t seed,
                                  double lo = -10.0, double hi = 10.0) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> out(n);
    for (double& v : out)
        v = dist(rng);
    return out;
}

long double sum_longdouble(const std::vector<double>& xs) {
    long double acc = 0.0L;
    for (double x : xs)
        acc += x;
    return acc;
}

long double centered_longdouble(const std::vector<double>& xs,
                                const std::vector<double>& ys, double mx,
                                double my) {
    long double acc = 0.0L;
    for (std::size_t i = 0; i < xs.size(); ++i)
        acc += (static_cast<long double>(xs[i]) - mx) *
               (static_cast<long double>(ys[i]) - my);
    return acc;
}

// Absolute tolerance scaled by the magnitude of the terms involved.
double tolerance(const std::vector<double>& xs) {
    double mag = 1.0;
    for (double x : xs)
        mag += std::abs(x);
    return 1e-12 * mag;
}

struct BackendGuard {
    kernels::Backend saved = kernels::active_backend();
    ~BackendGuard() { kernels::force_backend(saved); }
};

} // namespace

TEST_CASE("active backend matches this CPU") {
    const kernels::Backend backend = kernels::active_backend();
#if defined(__x86_64__)
    if (__builtin_cpu_supports("avx2"))
        CHECK(backend == kernels::Backend::Avx2);
    else
        CHECK(backend == kernels::Backend::Scalar);
#elif defined(__aarch64__)
    CHECK(backend == kernels::Backend::Neon);
#else
    CHECK(backend == kernels::Backend::Scalar);
#endif
    CHECK(kernels::backend_name(backend) != "");
}

TEST_CASE("sum: active backend agrees with scalar reference") {
    BackendGuard guard;
    for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 15u, 16u, 33u, 100u, 1000u}) {
        const auto xs = random_values(n, 1000 + static_cast<std::uint32_t>(n));
        const double reference = kernels::detail::sum_scalar(xs);
        const double active = kernels::sum(xs);
        CHECK(std::abs(active - reference) <= tolerance(xs));
        CHECK(std::abs(active - static_cast<double>(sum_longdouble(xs))) <=
              tolerance(xs));
    }
}

TEST_CASE("centered_dot: active backend agrees with scalar reference") {
    BackendGuard guard;
    for (std::size_t n : {2u, 3u, 4u, 5u, 9u, 16u, 63u, 64u, 65u, 500u}) {
        const auto xs = random_values(n, 77 + static_cast<std::uint32_t>(n));
        const auto ys = random_values(n, 177 + static_cast<std::uint32_t>(n));
        const double mx = kernels::detail::sum_scalar(xs) / static_cast<double>(n);
        const double my = kernels::detail::sum_scalar(ys) / static_cast<double>(n);
        const double reference =
            kernels::detail::centered_dot_scalar(xs, ys, mx, my);
        const double active = kernels::centered_dot(xs, ys, mx, my);
        CHECK(std::abs(active - reference) <= tolerance(xs) + tolerance(ys));
        const double ld =
            static_cast<double>(centered_longdouble(xs, ys, mx, my));
        CHECK(std::abs(active - ld) <= tolerance(xs) + tolerance(ys));
    }
}

TEST_CASE("forcing the scalar backend changes the dispatch") {
    BackendGuard guard;
    kernels::force_backend(kernels::Backend::Scalar);
    CHECK(kernels::active_backend() == kernels::Backend::Scalar);
    const auto xs = random_values(129, 9);
    CHECK(kernels::sum(xs) == kernels::detail::sum_scalar(xs));
}

#if defined(__x86_64__)
TEST_CASE("avx2 variant equivalence when supported") {
    if (!__builtin_cpu_supports("avx2"))
        return;
    for (std::size_t n : {1u, 4u, 6u, 31u, 32u, 1001u}) {
        const auto xs = random_values(n, 31 + static_cast<std::uint32_t>(n));
        const auto ys = random_values(n, 131 + static_cast<std::uint32_t>(n));
        CHECK(std::abs(kernels::detail::sum_avx2(xs) -
                       kernels::detail::sum_scalar(xs)) <= tolerance(xs));
        CHECK(std::abs(kernels::detail::centered_dot_avx2(xs, ys, 0.5, -0.25) -
                       kernels::detail::centered_dot_scalar(xs, ys, 0.5, -0.25)) <=
              tolerance(xs) + tolerance(ys));
    }
}
#else
TEST_CASE("avx2 backend is rejected off x86-64") {
    CHECK_THROWS_AS(kernels::force_backend(kernels::Backend::Avx2),
                    std::invalid_argument);
}
#endif

TEST_CASE("centered_dot rejects mismatched lengths") {
    const std::vector<double> xs{1.0, 2.0};
    const std::vector<double> ys{1.0};
    CHECK_THROWS_AS(kernels::centered_dot(xs, ys, 0.0, 0.0),
                    std::invalid_argument);
}

TEST_CASE("centered_sum_sq equals centered_dot with itself") {
    const auto xs = random_values(97, 5);
    CHECK(kernels::centered_sum_sq(xs, 0.3) ==
          kernels::centered_dot(xs, xs, 0.3, 0.3));
}

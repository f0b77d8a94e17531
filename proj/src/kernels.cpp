#include "offload/kernels.hpp"

#include <cassert>
#include <stdexcept>

namespace offload::kernels {

namespace detail {

double sum_scalar(std::span<const double> xs) {
    double acc = 0.0;
    for (double x : xs)
        acc += x;
    return acc;
}

double centered_dot_scalar(std::span<const double> xs, std::span<const double> ys,
                           double mean_x, double mean_y) {
    assert(xs.size() == ys.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
        acc += (xs[i] - mean_x) * (ys[i] - mean_y);
    return acc;
}

} // namespace detail

namespace {

Backend detect_backend() {
#if defined(__x86_64__)
    if (__builtin_cpu_supports("avx2"))
        return Backend::Avx2;
#elif defined(__aarch64__)
    return Backend::Neon;
#endif
    return Backend::Scalar;
}

Backend g_backend = detect_backend();

} // namespace

Backend active_backend() {
    return g_backend;
}

void force_backend(Backend backend) {
    switch (backend) {
    case Backend::Scalar:
        break;
    case Backend::Avx2:
#if defined(__x86_64__)
        if (__builtin_cpu_supports("avx2"))
            break;
#endif
        throw std::invalid_argument("AVX2 backend not available on this CPU");
    case Backend::Neon:
#if defined(__aarch64__)
        break;
#else
        throw std::invalid_argument("NEON backend not available on this CPU");
#endif
    }
    g_backend = backend;
}

std::string_view backend_name(Backend backend) {
    switch (backend) {
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
    case Backend::Scalar: break;
    }
    return "scalar";
}

double sum(std::span<const double> xs) {
    switch (g_backend) {
#if defined(__x86_64__)
    case Backend::Avx2: return detail::sum_avx2(xs);
#endif
#if defined(__aarch64__)
    case Backend::Neon: return detail::sum_neon(xs);
#endif
    default: return detail::sum_scalar(xs);
    }
}

double centered_dot(std::span<const double> xs, std::span<const double> ys,
                    double mean_x, double mean_y) {
    if (xs.size() != ys.size())
        throw std::invalid_argument("centered_dot: length mismatch");
    switch (g_backend) {
#if defined(__x86_64__)
    case Backend::Avx2: return detail::centered_dot_avx2(xs, ys, mean_x, mean_y);
#endif
#if defined(__aarch64__)
    case Backend::Neon: return detail::centered_dot_neon(xs, ys, mean_x, mean_y);
#endif
    default: return detail::centered_dot_scalar(xs, ys, mean_x, mean_y);
    }
}

double centered_sum_sq(std::span<const double> xs, double mean_x) {
    return centered_dot(xs, xs, mean_x, mean_x);
}

} // namespace offload::kernels

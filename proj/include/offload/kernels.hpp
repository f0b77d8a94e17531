#pragma once

// Reduction kernels used by the regression and correlation code paths.
//
// Every kernel exists as a scalar reference implementation plus SIMD
// variants (AVX2 on x86-64, NEON on aarch64).  The active variant is
// picked once at startup from CPU capabilities; the scalar path is the
// semantic reference and the SIMD paths are equivalence-tested against it.
// Within one process the selected backend never changes, so repeated
// evaluation of the same input is bit-identical.

#include <cstddef>
#include <span>
#include <string_view>

namespace offload::kernels {

enum class Backend {
    Scalar,
    Avx2,
    Neon,
};

// Backend selected for this process (CPU detection, done once).
Backend active_backend();

// Test hook: force a specific backend.  Throws std::invalid_argument if the
// backend is not compiled in or not supported by the running CPU.
void force_backend(Backend backend);

std::string_view backend_name(Backend backend);

// Sum of all elements.
double sum(std::span<const double> xs);

// Sum of (x[i] - mean_x) * (y[i] - mean_y).  xs and ys must have equal
// length; the centered form is what the two-pass regression and Pearson
// computations consume.
double centered_dot(std::span<const double> xs, std::span<const double> ys,
                    double mean_x, double mean_y);

// Sum of squared deviations from mean_x.
double centered_sum_sq(std::span<const double> xs, double mean_x);

namespace detail {

double sum_scalar(std::span<const double> xs);
double centered_dot_scalar(std::span<const double> xs, std::span<const double> ys,
                           double mean_x, double mean_y);

#if defined(__x86_64__)
double sum_avx2(std::span<const double> xs);
double centered_dot_avx2(std::span<const double> xs, std::span<const double> ys,
                         double mean_x, double mean_y);
#endif

#if defined(__aarch64__)
double sum_neon(std::span<const double> xs);
double centered_dot_neon(std::span<const double> xs, std::span<const double> ys,
                         double mean_x, double mean_y);
#endif

} // namespace detail

} // namespace offload::kernels

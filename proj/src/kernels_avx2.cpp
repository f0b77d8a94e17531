// AVX2 kernel variants.  This translation unit is compiled with
// -mavx2 -mfma; callers must check CPU support before dispatching here.

#if defined(__x86_64__)

#include "offload/kernels.hpp"

#include <immintrin.h>

#include <cassert>

namespace offload::kernels::detail {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

} // namespace

double sum_avx2(std::span<const double> xs) {
    const double* p = xs.data();
    std::size_t n = xs.size();
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_add_pd(acc, _mm256_loadu_pd(p + i));
    double total = hsum(acc);
    for (; i < n; ++i)
        total += p[i];
    return total;
}

double centered_dot_avx2(std::span<const double> xs, std::span<const double> ys,
                         double mean_x, double mean_y) {
    assert(xs.size() == ys.size());
    const double* px = xs.data();
    const double* py = ys.data();
    std::size_t n = xs.size();
    const __m256d mx = _mm256_set1_pd(mean_x);
    const __m256d my = _mm256_set1_pd(mean_y);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(px + i), mx);
        __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(py + i), my);
        acc = _mm256_fmadd_pd(dx, dy, acc);
    }
    double total = hsum(acc);
    for (; i < n; ++i)
        total += (px[i] - mean_x) * (py[i] - mean_y);
    return total;
}

} // namespace offload::kernels::detail

#endif // __x86_64__

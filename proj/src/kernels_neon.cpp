// NEON kernel variants for aarch64, where NEON is baseline.

#if defined(__aarch64__)

#include "offload/kernels.hpp"

#include <arm_neon.h>

#include <cassert>

namespace offload::kernels::detail {

double sum_neon(std::span<const double> xs) {
    const double* p = xs.data();
    std::size_t n = xs.size();
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        acc = vaddq_f64(acc, vld1q_f64(p + i));
    double total = vaddvq_f64(acc);
    for (; i < n; ++i)
        total += p[i];
    return total;
}

double centered_dot_neon(std::span<const double> xs, std::span<const double> ys,
                         double mean_x, double mean_y) {
    assert(xs.size() == ys.size());
    const double* px = xs.data();
    const double* py = ys.data();
    std::size_t n = xs.size();
    const float64x2_t mx = vdupq_n_f64(mean_x);
    const float64x2_t my = vdupq_n_f64(mean_y);
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t dx = vsubq_f64(vld1q_f64(px + i), mx);
        float64x2_t dy = vsubq_f64(vld1q_f64(py + i), my);
        acc = vfmaq_f64(acc, dx, dy);
    }
    double total = vaddvq_f64(acc);
    for (; i < n; ++i)
        total += (px[i] - mean_x) * (py[i] - mean_y);
    return total;
}

} // namespace offload::kernels::detail

#endif // __aarch64__

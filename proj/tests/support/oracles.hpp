#pragma once

// Independent reference implementations used to check the library.  These
// deliberately share no code with src/: plain loops, long-double
// accumulation, list-based windows.

#include "offload/engine.hpp"
#include "offload/window_model.hpp"
#include "offload/workload.hpp"

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace testsupport {

struct RefLine {
    double slope = 0.0;
    double intercept = 0.0;
    bool degenerate = false;
};

// Closed-form two-pass OLS with long-double accumulation.
inline RefLine ols_reference(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("ols_reference: bad input");
    long double sum_x = 0.0L, sum_y = 0.0L;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sum_x += xs[i];
        sum_y += ys[i];
    }
    const long double mean_x = sum_x / xs.size();
    const long double mean_y = sum_y / ys.size();
    long double sxx = 0.0L, sxy = 0.0L;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mean_x) * (xs[i] - mean_x);
        sxy += (xs[i] - mean_x) * (ys[i] - mean_y);
    }
    RefLine line;
    if (sxx == 0.0L) {
        line.degenerate = true;
        line.intercept = static_cast<double>(mean_y);
        return line;
    }
    const long double slope = sxy / sxx;
    line.slope = static_cast<double>(slope);
    line.intercept = static_cast<double>(mean_y - slope * mean_x);
    return line;
}

// Direct covariance-over-sigmas Pearson, long-double accumulation.
inline double pearson_reference(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("pearson_reference: bad input");
    long double sum_x = 0.0L, sum_y = 0.0L;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sum_x += xs[i];
        sum_y += ys[i];
    }
    const long double mean_x = sum_x / xs.size();
    const long double mean_y = sum_y / ys.size();
    long double sxx = 0.0L, syy = 0.0L, sxy = 0.0L;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const long double dx = xs[i] - mean_x;
        const long double dy = ys[i] - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0L || syy == 0.0L)
        throw std::runtime_error("pearson_reference: zero variance");
    return static_cast<double>(sxy / std::sqrt(static_cast<double>(sxx) *
                                               static_cast<double>(syy)));
}

// Sum of squared residuals of a candidate line over a window.
inline double ssr(std::span<const double> xs, std::span<const double> ys,
                  double slope, double intercept) {
    long double total = 0.0L;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const long double r = ys[i] - (slope * xs[i] + intercept);
        total += r * r;
    }
    return static_cast<double>(total);
}

// List-slice re-simulation of the control loop in replay mode: plain
// vectors with explicit front erasure, reference OLS, same tie rules.
class ReferenceReplay {
public:
    ReferenceReplay(std::size_t capacity, bool clamp)
        : capacity_(capacity), clamp_(clamp) {}

    struct StepResult {
        bool warmup = false;
        std::optional<offload::Target> chosen;
        double p_local = 0.0;
        double p_cloud = 0.0;
    };

    StepResult step(const offload::Task& task) {
        StepResult result;
        if (local_.size() < capacity_ || cloud_.size() < capacity_) {
            result.warmup = true;
            push(local_, task.d, task.t_local);
            push(cloud_, task.d, task.t_cloud);
            return result;
        }
        const RefLine ml = fit_window(local_);
        const RefLine mc = fit_window(cloud_);
        double p_local = ml.slope * task.d + ml.intercept;
        double p_cloud = mc.slope * task.d + mc.intercept;
        if (clamp_) {
            p_local = std::max(p_local, 0.0);
            p_cloud = std::max(p_cloud, 0.0);
        }
        result.p_local = p_local;
        result.p_cloud = p_cloud;
        if (p_cloud < p_local) {
            result.chosen = offload::Target::Cloud;
            push(cloud_, task.d, task.t_cloud);
        } else {
            result.chosen = offload::Target::Local;
            push(local_, task.d, task.t_local);
        }
        return result;
    }

    const std::vector<offload::Observation>& local_window() const { return local_; }
    const std::vector<offload::Observation>& cloud_window() const { return cloud_; }

private:
    void push(std::vector<offload::Observation>& window, double d, double t) {
        window.push_back({d, t});
        if (window.size() > capacity_)
            window.erase(window.begin());
    }

    static RefLine fit_window(const std::vector<offload::Observation>& window) {
        std::vector<double> xs, ys;
        xs.reserve(window.size());
        ys.reserve(window.size());
        for (const offload::Observation& obs : window) {
            xs.push_back(obs.d);
            ys.push_back(obs.t);
        }
        return ols_reference(xs, ys);
    }

    std::size_t capacity_;
    bool clamp_;
    std::vector<offload::Observation> local_;
    std::vector<offload::Observation> cloud_;
};

// Spearman rank correlation (no tie handling; callers pass distinct values).
inline double spearman(std::span<const double> xs, std::span<const double> ys) {
    const std::size_t n = xs.size();
    if (ys.size() != n || n < 2)
        throw std::invalid_argument("spearman: bad input");
    auto ranks = [n](std::span<const double> v) {
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t rank = 0;
            for (std::size_t j = 0; j < n; ++j)
                if (v[j] < v[i] || (v[j] == v[i] && j < i))
                    ++rank;
            r[i] = static_cast<double>(rank);
        }
        return r;
    };
    const std::vector<double> rx = ranks(xs);
    const std::vector<double> ry = ranks(ys);
    return pearson_reference(rx, ry);
}

} // namespace testsupport

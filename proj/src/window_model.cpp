#include "offload/window_model.hpp"

#include "offload/kernels.hpp"

#include <stdexcept>

namespace offload {

SlidingWindow::SlidingWindow(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0)
        throw std::invalid_argument("SlidingWindow capacity must be positive");
    d_.resize(capacity);
    t_.resize(capacity);
}

void SlidingWindow::append(Observation obs) {
    const std::size_t slot = (head_ + size_) % capacity_;
    d_[slot] = obs.d;
    t_[slot] = obs.t;
    if (size_ == capacity_)
        head_ = (head_ + 1) % capacity_; // evict the oldest
    else
        ++size_;
}

Observation SlidingWindow::at(std::size_t i) const {
    if (i >= size_)
        throw std::out_of_range("SlidingWindow index out of range");
    const std::size_t slot = (head_ + i) % capacity_;
    return {d_[slot], t_[slot]};
}

void SlidingWindow::unpack(std::vector<double>& ds, std::vector<double>& ts) const {
    ds.resize(size_);
    ts.resize(size_);
    for (std::size_t i = 0; i < size_; ++i) {
        const std::size_t slot = (head_ + i) % capacity_;
        ds[i] = d_[slot];
        ts[i] = t_[slot];
    }
}

std::vector<Observation> SlidingWindow::entries() const {
    std::vector<Observation> out;
    out.reserve(size_);
    for (std::size_t i = 0; i < size_; ++i)
        out.push_back(at(i));
    return out;
}

LinearModel fit_points(std::span<const double> ds, std::span<const double> ts) {
    if (ds.size() != ts.size())
        throw std::invalid_argument("fit_points: length mismatch");
    if (ds.size() < 2)
        throw std::invalid_argument("insufficient observations");

    const double n = static_cast<double>(ds.size());
    const double mean_d = kernels::sum(ds) / n;
    const double mean_t = kernels::sum(ts) / n;

    const double sxx = kernels::centered_sum_sq(ds, mean_d);
    if (sxx == 0.0)
        return {0.0, mean_t, true};

    const double sxy = kernels::centered_dot(ds, ts, mean_d, mean_t);
    const double slope = sxy / sxx;
    return {slope, mean_t - slope * mean_d, false};
}

LinearModel fit(const SlidingWindow& window) {
    if (window.size() < 2)
        throw std::invalid_argument("insufficient observations");
    thread_local std::vector<double> ds, ts;
    window.unpack(ds, ts);
    return fit_points(ds, ts);
}

} // namespace offload

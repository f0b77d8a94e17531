#pragma once

// Observation windows and the least-squares execution-time predictor.
//
// One SlidingWindow per execution target holds the N most recent
// (input size, execution time) pairs; fit() produces the line used to
// predict the next task's execution time from its input size.

#include <cstddef>
#include <span>
#include <vector>

namespace offload {

// One measured execution: input data size d (dimensionless, normalized)
// and execution time t in seconds.
struct Observation {
    double d = 0.0;
    double t = 0.0;

    friend bool operator==(const Observation&, const Observation&) = default;
};

// Fixed-capacity FIFO buffer of observations, oldest first.  Appending at
// capacity evicts exactly the oldest entry.
class SlidingWindow {
public:
    explicit SlidingWindow(std::size_t capacity);

    void append(Observation obs);

    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }
    bool full() const { return size_ == capacity_; }

    // i = 0 is the oldest retained observation.
    Observation at(std::size_t i) const;

    // Copies the retained observations, oldest first, into contiguous
    // storage for the fit kernels.  Vectors are resized to size().
    void unpack(std::vector<double>& ds, std::vector<double>& ts) const;

    std::vector<Observation> entries() const;

private:
    std::size_t capacity_;
    std::size_t head_ = 0; // index of the oldest entry
    std::size_t size_ = 0;
    std::vector<double> d_;
    std::vector<double> t_;
};

// Fitted line t = slope * d + intercept for one target.  When every d in
// the window is identical the least-squares slope is undefined; the fit
// falls back to the window's mean time (slope 0) and sets `degenerate`.
struct LinearModel {
    double slope = 0.0;     // seconds per unit of d
    double intercept = 0.0; // seconds
    bool degenerate = false;

    double predict(double d) const { return slope * d + intercept; }

    friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

// Ordinary least squares over parallel d/t arrays (two-pass, mean-centered).
// Throws std::invalid_argument on fewer than two points or length mismatch.
LinearModel fit_points(std::span<const double> ds, std::span<const double> ts);

// Fits the window's contents.  Throws std::invalid_argument
// ("insufficient observations") when the window holds fewer than two.
LinearModel fit(const SlidingWindow& window);

} // namespace offload

#pragma once

// Evaluation of replay traces: correlation between input size and
// execution time, prediction residuals and error rates, decision
// accuracy against the oracle, and the window-size sweep that ties them
// together.

#include "offload/engine.hpp"
#include "offload/workload.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace offload::metrics {

// Sample Pearson correlation coefficient.  Throws std::invalid_argument
// on length mismatch or fewer than two points, std::runtime_error
// ("undefined correlation") when either sequence has zero variance.
double pearson(std::span<const double> xs, std::span<const double> ys);

struct RollingCorrelation {
    double average = 0.0;
    std::size_t windows_used = 0;
    std::size_t windows_skipped = 0; // zero-variance windows
};

// Pearson over every contiguous window of length n (stride 1);
// zero-variance windows are skipped and counted.  Throws when n < 2,
// n exceeds the data length, or every window is degenerate.
RollingCorrelation rolling_correlation(std::span<const double> xs,
                                       std::span<const double> ys,
                                       std::size_t n);

double rolling_avg_correlation(std::span<const double> xs,
                               std::span<const double> ys, std::size_t n);

struct ResidualReport {
    double mean_t = 0.0;
    double mean_p = 0.0;
    double residual = 0.0;   // mean_p - mean_t; positive = overprediction
    double error_rate = 0.0; // |residual| / mean_t
    std::size_t samples = 0;
};

// Prediction-vs-actual comparison for one target over the steady records
// that carry both a prediction and a measured time for it (replay traces
// carry both for every steady task).  Throws when no records qualify.
ResidualReport residual_report(std::span<const TaskRecord> trace, Target target);

// Fraction of steady records whose decision matches the oracle target.
// Throws when the trace has no steady records with an oracle.
double decision_accuracy(std::span<const TaskRecord> trace);

struct SweepRow {
    std::size_t window = 0;  // N; for the split row, the stream length
    bool full_split = false; // single 80:20 train/test fit instead of sliding
    double avg_corr_cloud = 0.0;
    double avg_corr_local = 0.0;
    double mean_t_cloud = 0.0;
    double mean_p_cloud = 0.0;
    double residual_cloud = 0.0;
    double mean_t_local = 0.0;
    double mean_p_local = 0.0;
    double residual_local = 0.0;
    double error_rate_cloud = 0.0;
    double error_rate_local = 0.0;
    double accuracy = 0.0;
};

struct SweepReport {
    std::vector<SweepRow> rows;
    std::vector<std::string> warnings; // skipped window sizes etc.
};

inline const std::vector<std::size_t> kDefaultSweepWindows = {
    5, 10, 20, 30, 40, 50, 75, 100, 500};

struct SweepOptions {
    std::vector<std::size_t> windows = kDefaultSweepWindows;
    bool include_full_split = true;
    EngineConfig engine;          // window_capacity is overridden per row
    double train_fraction = 0.8;  // split row only
};

// One replay per window size over the same stream, plus (optionally) a
// final row where the predictors are fitted once on the leading
// train_fraction of the stream and evaluated on the remainder.  Window
// sizes that do not fit the stream are skipped with a warning.
SweepReport sweep(const TaskStream& stream, const SweepOptions& options);

// Report CSV: one leading comment line stating conventions, then a header
// and one row per window size.
void write_sweep_csv(const SweepReport& report, std::ostream& out);
void write_sweep_csv(const SweepReport& report, const std::string& path);

// Aligned plain-text rendering for terminals.
std::string format_sweep_table(const SweepReport& report);

} // namespace offload::metrics

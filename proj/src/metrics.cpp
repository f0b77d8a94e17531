#include "offload/metrics.hpp"

#include "offload/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace offload::metrics {

double pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size())
        throw std::invalid_argument("pearson: length mismatch");
    if (xs.size() < 2)
        throw std::invalid_argument("pearson: need at least two points");

    const double n = static_cast<double>(xs.size());
    const double mean_x = kernels::sum(xs) / n;
    const double mean_y = kernels::sum(ys) / n;
    const double sxx = kernels::centered_sum_sq(xs, mean_x);
    const double syy = kernels::centered_sum_sq(ys, mean_y);
    if (sxx == 0.0 || syy == 0.0)
        throw std::runtime_error("undefined correlation");
    const double sxy = kernels::centered_dot(xs, ys, mean_x, mean_y);
    // Exactly collinear data can land a hair outside [-1, 1] in floating
    // point.
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

RollingCorrelation rolling_correlation(std::span<const double> xs,
                                       std::span<const double> ys,
                                       std::size_t n) {
    if (xs.size() != ys.size())
        throw std::invalid_argument("rolling_correlation: length mismatch");
    if (n < 2)
        throw std::invalid_argument("rolling_correlation: window must be >= 2");
    if (n > xs.size())
        throw std::invalid_argument("rolling_correlation: window exceeds data length");

    RollingCorrelation result;
    double total = 0.0;
    for (std::size_t start = 0; start + n <= xs.size(); ++start) {
        const auto wx = xs.subspan(start, n);
        const auto wy = ys.subspan(start, n);
        const double nn = static_cast<double>(n);
        const double mean_x = kernels::sum(wx) / nn;
        const double mean_y = kernels::sum(wy) / nn;
        const double sxx = kernels::centered_sum_sq(wx, mean_x);
        const double syy = kernels::centered_sum_sq(wy, mean_y);
        if (sxx == 0.0 || syy == 0.0) {
            ++result.windows_skipped;
            continue;
        }
        total += std::clamp(
            kernels::centered_dot(wx, wy, mean_x, mean_y) / std::sqrt(sxx * syy),
            -1.0, 1.0);
        ++result.windows_used;
    }
    if (result.windows_used == 0)
        throw std::runtime_error("undefined correlation: all windows degenerate");
    result.average = total / static_cast<double>(result.windows_used);
    return result;
}

double rolling_avg_correlation(std::span<const double> xs,
                               std::span<const double> ys, std::size_t n) {
    return rolling_correlation(xs, ys, n).average;
}

ResidualReport residual_report(std::span<const TaskRecord> trace, Target target) {
    double sum_t = 0.0;
    double sum_p = 0.0;
    std::size_t count = 0;
    for (const TaskRecord& rec : trace) {
        if (rec.phase != Phase::Steady || !rec.decision)
            continue;
        const std::optional<double>& measured =
            target == Target::Local ? rec.measured_local : rec.measured_cloud;
        if (!measured)
            continue;
        sum_t += *measured;
        sum_p += target == Target::Local ? rec.decision->p_local
                                         : rec.decision->p_cloud;
        ++count;
    }
    if (count == 0)
        throw std::runtime_error("residual_report: no applicable steady records");

    ResidualReport report;
    report.samples = count;
    report.mean_t = sum_t / static_cast<double>(count);
    report.mean_p = sum_p / static_cast<double>(count);
    report.residual = report.mean_p - report.mean_t;
    report.error_rate = std::abs(report.residual) / report.mean_t;
    return report;
}

double decision_accuracy(std::span<const TaskRecord> trace) {
    std::size_t total = 0;
    std::size_t matched = 0;
    for (const TaskRecord& rec : trace) {
        if (rec.phase != Phase::Steady || !rec.decision || !rec.oracle_target)
            continue;
        ++total;
        if (rec.decision->target == *rec.oracle_target)
            ++matched;
    }
    if (total == 0)
        throw std::runtime_error("decision_accuracy: no steady records with oracle");
    return static_cast<double>(matched) / static_cast<double>(total);
}

namespace {

SweepRow sliding_row(const TaskStream& stream, std::size_t n,
                     const SweepOptions& options,
                     const std::vector<double>& ds,
                     const std::vector<double>& t_local,
                     const std::vector<double>& t_cloud) {
    ReplayOptions replay;
    replay.engine = options.engine;
    replay.engine.window_capacity = n;
    const std::vector<TaskRecord> trace = run_replay(stream, replay);

    SweepRow row;
    row.window = n;
    row.avg_corr_cloud = rolling_avg_correlation(ds, t_cloud, n);
    row.avg_corr_local = rolling_avg_correlation(ds, t_local, n);
    const ResidualReport cloud = residual_report(trace, Target::Cloud);
    const ResidualReport local = residual_report(trace, Target::Local);
    row.mean_t_cloud = cloud.mean_t;
    row.mean_p_cloud = cloud.mean_p;
    row.residual_cloud = cloud.residual;
    row.error_rate_cloud = cloud.error_rate;
    row.mean_t_local = local.mean_t;
    row.mean_p_local = local.mean_p;
    row.residual_local = local.residual;
    row.error_rate_local = local.error_rate;
    row.accuracy = decision_accuracy(trace);
    return row;
}

SweepRow split_row(const TaskStream& stream, const SweepOptions& options,
                   const std::vector<double>& ds,
                   const std::vector<double>& t_local,
                   const std::vector<double>& t_cloud) {
    const std::size_t total = stream.size();
    const std::size_t train =
        static_cast<std::size_t>(std::floor(options.train_fraction *
                                            static_cast<double>(total)));
    if (train < 2 || train >= total)
        throw std::invalid_argument("split row: stream too short for the split");

    const std::span<const double> ds_all(ds);
    const std::span<const double> tl_all(t_local);
    const std::span<const double> tc_all(t_cloud);
    const LinearModel local_model =
        fit_points(ds_all.first(train), tl_all.first(train));
    const LinearModel cloud_model =
        fit_points(ds_all.first(train), tc_all.first(train));

    SweepRow row;
    row.window = total;
    row.full_split = true;
    row.avg_corr_cloud = pearson(ds, t_cloud);
    row.avg_corr_local = pearson(ds, t_local);

    double sum_tl = 0.0, sum_tc = 0.0, sum_pl = 0.0, sum_pc = 0.0;
    std::size_t matched = 0;
    const std::size_t tests = total - train;
    for (std::size_t i = train; i < total; ++i) {
        double p_local = local_model.predict(ds[i]);
        double p_cloud = cloud_model.predict(ds[i]);
        if (options.engine.clamp_negative_predictions) {
            p_local = std::max(p_local, 0.0);
            p_cloud = std::max(p_cloud, 0.0);
        }
        sum_pl += p_local;
        sum_pc += p_cloud;
        sum_tl += t_local[i];
        sum_tc += t_cloud[i];
        const Decision decision = decide(p_local, p_cloud);
        if (decision.target == oracle_target(t_local[i], t_cloud[i]))
            ++matched;
    }
    const double denom = static_cast<double>(tests);
    row.mean_t_cloud = sum_tc / denom;
    row.mean_p_cloud = sum_pc / denom;
    row.residual_cloud = row.mean_p_cloud - row.mean_t_cloud;
    row.error_rate_cloud = std::abs(row.residual_cloud) / row.mean_t_cloud;
    row.mean_t_local = sum_tl / denom;
    row.mean_p_local = sum_pl / denom;
    row.residual_local = row.mean_p_local - row.mean_t_local;
    row.error_rate_local = std::abs(row.residual_local) / row.mean_t_local;
    row.accuracy = static_cast<double>(matched) / denom;
    return row;
}

} // namespace

SweepReport sweep(const TaskStream& stream, const SweepOptions& options) {
    SweepReport report;
    const std::vector<double> ds = stream.input_sizes();
    const std::vector<double> t_local = stream.local_times();
    const std::vector<double> t_cloud = stream.cloud_times();

    for (std::size_t n : options.windows) {
        if (n < 2) {
            report.warnings.push_back("skipping window " + std::to_string(n) +
                                      ": must be at least 2");
            continue;
        }
        if (n >= stream.size()) {
            report.warnings.push_back("skipping window " + std::to_string(n) +
                                      ": stream has only " +
                                      std::to_string(stream.size()) + " tasks");
            continue;
        }
        report.rows.push_back(sliding_row(stream, n, options, ds, t_local, t_cloud));
    }
    if (options.include_full_split) {
        if (stream.size() < 5)
            report.warnings.push_back("skipping split row: stream too short");
        else
            report.rows.push_back(split_row(stream, options, ds, t_local, t_cloud));
    }
    return report;
}

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string fixed5(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.5f", v);
    return buf;
}

constexpr const char* kSweepComment =
    "# avg_corr_*: mean Pearson r over sliding windows of d vs time; "
    "residual_* = mean_p - mean_t; error_rate_* = |residual| / mean_t; "
    "accuracy over steady-phase (post warm-up) decisions vs oracle; the "
    "split row fits once on the leading train fraction and evaluates on "
    "the rest";

constexpr const char* kSweepHeader =
    "window,avg_corr_cloud,avg_corr_local,mean_t_cloud,mean_p_cloud,"
    "residual_cloud,mean_t_local,mean_p_local,residual_local,"
    "error_rate_cloud,error_rate_local,accuracy";

} // namespace

void write_sweep_csv(const SweepReport& report, std::ostream& out) {
    out << kSweepComment << '\n' << kSweepHeader << '\n';
    for (const SweepRow& row : report.rows) {
        out << row.window << ',' << format_double(row.avg_corr_cloud) << ','
            << format_double(row.avg_corr_local) << ','
            << format_double(row.mean_t_cloud) << ','
            << format_double(row.mean_p_cloud) << ','
            << format_double(row.residual_cloud) << ','
            << format_double(row.mean_t_local) << ','
            << format_double(row.mean_p_local) << ','
            << format_double(row.residual_local) << ','
            << format_double(row.error_rate_cloud) << ','
            << format_double(row.error_rate_local) << ','
            << format_double(row.accuracy) << '\n';
    }
}

void write_sweep_csv(const SweepReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    write_sweep_csv(report, out);
    out.flush();
    if (!out)
        throw std::runtime_error("failed writing '" + path + "'");
}

std::string format_sweep_table(const SweepReport& report) {
    constexpr const char* kRowFormat =
        "%-12s  %8s  %8s  %8s  %8s  %8s  %8s  %8s  %8s  %7s  %7s  %8s";

    std::ostringstream out;
    out << "accuracy is over steady-phase decisions only; residual = mean_p - mean_t\n";
    char line[256];
    std::snprintf(line, sizeof line, kRowFormat, "window", "r_cloud", "r_local",
                  "mean_t_c", "mean_p_c", "resid_c", "mean_t_l", "mean_p_l",
                  "resid_l", "err_c", "err_l", "accuracy");
    out << line << '\n';

    for (const SweepRow& row : report.rows) {
        std::string label = std::to_string(row.window);
        if (row.full_split)
            label += " (split)";
        std::snprintf(line, sizeof line, kRowFormat, label.c_str(),
                      fixed5(row.avg_corr_cloud).c_str(),
                      fixed5(row.avg_corr_local).c_str(),
                      fixed5(row.mean_t_cloud).c_str(),
                      fixed5(row.mean_p_cloud).c_str(),
                      fixed5(row.residual_cloud).c_str(),
                      fixed5(row.mean_t_local).c_str(),
                      fixed5(row.mean_p_local).c_str(),
                      fixed5(row.residual_local).c_str(),
                      fixed5(row.error_rate_cloud).c_str(),
                      fixed5(row.error_rate_local).c_str(),
                      fixed5(row.accuracy).c_str());
        out << line << '\n';
    }
    for (const std::string& warning : report.warnings)
        out << "warning: " << warning << '\n';
    return out.str();
}

} // namespace offload::metrics

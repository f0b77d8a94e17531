#include "offload/workload.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace offload {

double node_count(const PlanQuery& query) {
    if (query.grid_resolution <= 0.0)
        throw std::invalid_argument("grid_resolution must be positive");
    const double dist = std::hypot(query.goal_x - query.start_x,
                                   query.goal_y - query.start_y);
    const double area = 0.5 * dist * dist;
    // Whole nodes; the square with the start-goal diagonal covers an
    // integral number of grid cells.
    return std::round(area / (query.grid_resolution * query.grid_resolution));
}

double raw_input_size(double n) {
    if (n < 0.0)
        throw std::invalid_argument("node count must be non-negative");
    if (n <= 1.0)
        return 0.0;
    return n * std::log(n);
}

double normalize_input_size(double raw, double map_scale) {
    if (map_scale <= 0.0)
        throw std::invalid_argument("map_scale must be positive");
    return raw / map_scale;
}

CostProfile CostProfile::defaults() {
    CostProfile p;
    p.local = {kDefaultLocalSlope, kDefaultLocalIntercept, kDefaultLocalNoiseStd, {}};
    p.cloud = {kDefaultCloudSlope, kDefaultCloudIntercept, kDefaultCloudNoiseStd, {}};
    return p;
}

std::vector<double> TaskStream::input_sizes() const {
    std::vector<double> out;
    out.reserve(tasks.size());
    for (const Task& t : tasks)
        out.push_back(t.d);
    return out;
}

std::vector<double> TaskStream::local_times() const {
    std::vector<double> out;
    out.reserve(tasks.size());
    for (const Task& t : tasks)
        out.push_back(t.t_local);
    return out;
}

std::vector<double> TaskStream::cloud_times() const {
    std::vector<double> out;
    out.reserve(tasks.size());
    for (const Task& t : tasks)
        out.push_back(t.t_cloud);
    return out;
}

namespace {

// Uniform [0,1) from the top 53 bits; avoids libstdc++ distribution
// internals so equal seeds give equal streams on any platform.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Box-Muller, one variate per call, u1 in (0,1].
double gaussian(std::mt19937_64& rng) {
    const double u1 = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
}

double apply_disturbances(const TargetCost& cost, std::uint64_t task_id, double t) {
    for (const Disturbance& dist : cost.disturbances) {
        if (dist.start_task > dist.end_task)
            throw std::invalid_argument("disturbance interval has start > end");
        if (task_id >= dist.start_task && task_id <= dist.end_task)
            t = t * dist.scale + dist.add_seconds;
    }
    return t;
}

} // namespace

double profile_time(const TargetCost& cost, std::uint64_t task_id, double d,
                    double noise) {
    double t = cost.base_slope * d + cost.base_intercept + noise;
    t = apply_disturbances(cost, task_id, t);
    return std::max(t, kTimeFloorSeconds);
}

TaskStream generate_stream(const CostProfile& profile, std::size_t count,
                           std::uint64_t seed) {
    if (count < 1)
        throw std::invalid_argument("count must be at least 1");

    std::mt19937_64 rng(seed);
    TaskStream stream;
    stream.seed = seed;
    stream.tasks.reserve(count);
    for (std::size_t i = 1; i <= count; ++i) {
        Task task;
        task.task_id = i;
        task.d = 5.0 * uniform01(rng);
        // Noise draws happen unconditionally so the d sequence is the
        // same regardless of noise settings.
        const double noise_local = gaussian(rng) * profile.local.noise_std;
        const double noise_cloud = gaussian(rng) * profile.cloud.noise_std;
        task.t_local = profile_time(profile.local, i, task.d, noise_local);
        task.t_cloud = profile_time(profile.cloud, i, task.d, noise_cloud);
        stream.tasks.push_back(task);
    }
    return stream;
}

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

[[noreturn]] void parse_fail(const std::string& name, std::size_t line_no,
                             const std::string& what) {
    std::ostringstream msg;
    msg << name << " line " << line_no << ": " << what;
    throw std::runtime_error(msg.str());
}

double parse_double(const std::string& field, const std::string& name,
                    std::size_t line_no) {
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
        parse_fail(name, line_no, "bad numeric field '" + field + "'");
    return value;
}

std::uint64_t parse_id(const std::string& field, const std::string& name,
                       std::size_t line_no) {
    std::uint64_t value = 0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
        parse_fail(name, line_no, "bad task_id field '" + field + "'");
    return value;
}

} // namespace

void write_stream_csv(const TaskStream& stream, std::ostream& out) {
    out << "task_id,d,t_local,t_cloud\n";
    for (const Task& task : stream.tasks) {
        out << task.task_id << ',' << format_double(task.d) << ','
            << format_double(task.t_local) << ',' << format_double(task.t_cloud)
            << '\n';
    }
}

void write_stream_csv(const TaskStream& stream, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    write_stream_csv(stream, out);
    out.flush();
    if (!out)
        throw std::runtime_error("failed writing '" + path + "'");
}

TaskStream read_stream_csv(std::istream& in, const std::string& name) {
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line))
        parse_fail(name, 1, "empty file, expected header");
    ++line_no;
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != "task_id,d,t_local,t_cloud")
        parse_fail(name, line_no, "bad header '" + line + "'");

    TaskStream stream;
    std::uint64_t prev_id = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const auto fields = split_fields(line);
        if (fields.size() != 4)
            parse_fail(name, line_no,
                       "expected 4 fields, got " + std::to_string(fields.size()));
        Task task;
        task.task_id = parse_id(fields[0], name, line_no);
        task.d = parse_double(fields[1], name, line_no);
        task.t_local = parse_double(fields[2], name, line_no);
        task.t_cloud = parse_double(fields[3], name, line_no);
        if (prev_id == 0 && task.task_id != 1)
            parse_fail(name, line_no, "task ids must start at 1");
        if (prev_id != 0 && task.task_id <= prev_id)
            parse_fail(name, line_no, "task ids must be strictly increasing");
        if (!std::isfinite(task.d) || task.d < 0.0)
            parse_fail(name, line_no, "d must be finite and non-negative");
        if (!std::isfinite(task.t_local) || task.t_local <= 0.0 ||
            !std::isfinite(task.t_cloud) || task.t_cloud <= 0.0)
            parse_fail(name, line_no, "times must be finite and positive");
        prev_id = task.task_id;
        stream.tasks.push_back(task);
    }
    return stream;
}

TaskStream read_stream_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("no such file: '" + path + "'");
    return read_stream_csv(in, path);
}

} // namespace offload

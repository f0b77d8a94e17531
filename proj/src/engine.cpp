#include "offload/engine.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace offload {

const char* target_name(Target target) {
    return target == Target::Local ? "local" : "cloud";
}

Decision decide(double p_local, double p_cloud) {
    if (std::isnan(p_local) || std::isnan(p_cloud))
        throw std::invalid_argument("invalid prediction");
    Decision d;
    d.p_local = p_local;
    d.p_cloud = p_cloud;
    d.target = p_cloud < p_local ? Target::Cloud : Target::Local;
    return d;
}

Target oracle_target(double t_local, double t_cloud) {
    return t_cloud < t_local ? Target::Cloud : Target::Local;
}

Engine::Engine(const EngineConfig& config)
    : config_(config),
      local_window_(config.window_capacity),
      cloud_window_(config.window_capacity) {
    if (config.window_capacity < 2)
        throw std::invalid_argument("window_capacity must be at least 2");
}

bool Engine::warmed_up() const {
    return local_window_.full() && cloud_window_.full();
}

const SlidingWindow& Engine::window(Target target) const {
    return target == Target::Local ? local_window_ : cloud_window_;
}

Engine::Predictions Engine::predict_both(double d) const {
    const LinearModel local_model = fit(local_window_);
    const LinearModel cloud_model = fit(cloud_window_);
    double p_local = local_model.predict(d);
    double p_cloud = cloud_model.predict(d);
    if (config_.clamp_negative_predictions) {
        p_local = std::max(p_local, 0.0);
        p_cloud = std::max(p_cloud, 0.0);
    }
    return {p_local, p_cloud};
}

TaskRecord Engine::step_replay(const Task& task, bool oracle_predictor) {
    TaskRecord rec;
    rec.task_id = task.task_id;
    rec.d = task.d;
    rec.measured_local = task.t_local;
    rec.measured_cloud = task.t_cloud;
    rec.oracle_target = oracle_target(task.t_local, task.t_cloud);

    if (!warmed_up()) {
        rec.phase = Phase::Warmup;
        local_window_.append({task.d, task.t_local});
        cloud_window_.append({task.d, task.t_cloud});
        return rec;
    }

    rec.phase = Phase::Steady;
    double p_local;
    double p_cloud;
    if (oracle_predictor) {
        p_local = task.t_local;
        p_cloud = task.t_cloud;
    } else {
        const Predictions p = predict_both(task.d);
        p_local = p.p_local;
        p_cloud = p.p_cloud;
    }
    const Decision decision = decide(p_local, p_cloud);
    rec.decision = decision;

    if (decision.target == Target::Local)
        local_window_.append({task.d, task.t_local});
    else
        cloud_window_.append({task.d, task.t_cloud});
    return rec;
}

TaskRecord Engine::step_live(std::uint64_t task_id, double d, Executor& local,
                             Executor& cloud) {
    TaskRecord rec;
    rec.task_id = task_id;
    rec.d = d;

    auto try_execute = [&](Target target) -> std::optional<double> {
        Executor& exec = target == Target::Local ? local : cloud;
        try {
            return exec.execute(task_id, d);
        } catch (const ExecutorError& err) {
            events_.push_back({task_id, target, err.what()});
            return std::nullopt;
        }
    };

    if (!warmed_up()) {
        rec.phase = Phase::Warmup;
        const std::optional<double> t_local = try_execute(Target::Local);
        const std::optional<double> t_cloud = try_execute(Target::Cloud);
        // Failed runs contribute nothing; a failure time would poison
        // the regressor.
        if (t_local) {
            rec.measured_local = t_local;
            local_window_.append({d, *t_local});
        }
        if (t_cloud) {
            rec.measured_cloud = t_cloud;
            cloud_window_.append({d, *t_cloud});
        }
        if (t_local && t_cloud)
            rec.oracle_target = oracle_target(*t_local, *t_cloud);
        return rec;
    }

    rec.phase = Phase::Steady;
    const Predictions p = predict_both(d);
    const Decision decision = decide(p.p_local, p.p_cloud);
    rec.decision = decision;

    const Target first = decision.target;
    const Target second = first == Target::Local ? Target::Cloud : Target::Local;
    std::optional<double> measured = try_execute(first);
    Target executed = first;
    if (!measured) {
        measured = try_execute(second);
        executed = second;
    }
    if (measured) {
        if (executed == Target::Local) {
            rec.measured_local = measured;
            local_window_.append({d, *measured});
        } else {
            rec.measured_cloud = measured;
            cloud_window_.append({d, *measured});
        }
    }
    return rec;
}

std::vector<TaskRecord> run_replay(const TaskStream& stream,
                                   const ReplayOptions& options) {
    Engine engine(options.engine);
    std::vector<TaskRecord> trace;
    trace.reserve(stream.tasks.size());
    for (const Task& task : stream.tasks)
        trace.push_back(engine.step_replay(task, options.oracle_predictor));
    return trace;
}

LiveResult run_live(std::span<const double> input_sizes, Executor& local,
                    Executor& cloud, const EngineConfig& config) {
    Engine engine(config);
    LiveResult result;
    result.trace.reserve(input_sizes.size());
    for (std::size_t i = 0; i < input_sizes.size(); ++i)
        result.trace.push_back(
            engine.step_live(static_cast<std::uint64_t>(i + 1), input_sizes[i],
                             local, cloud));
    result.events = engine.events();
    return result;
}

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string opt_double(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

std::string opt_target(const std::optional<Target>& t) {
    return t ? target_name(*t) : std::string();
}

constexpr const char* kTraceHeader =
    "task_id,d,phase,p_local,p_cloud,target,t_local,t_cloud,oracle_target";

[[noreturn]] void parse_fail(const std::string& name, std::size_t line_no,
                             const std::string& what) {
    std::ostringstream msg;
    msg << name << " line " << line_no << ": " << what;
    throw std::runtime_error(msg.str());
}

std::optional<double> parse_opt_double(const std::string& field,
                                       const std::string& name,
                                       std::size_t line_no) {
    if (field.empty())
        return std::nullopt;
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
        parse_fail(name, line_no, "bad numeric field '" + field + "'");
    return value;
}

std::optional<Target> parse_opt_target(const std::string& field,
                                       const std::string& name,
                                       std::size_t line_no) {
    if (field.empty())
        return std::nullopt;
    if (field == "local")
        return Target::Local;
    if (field == "cloud")
        return Target::Cloud;
    parse_fail(name, line_no, "bad target field '" + field + "'");
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

} // namespace

void write_trace_csv(std::span<const TaskRecord> trace, std::ostream& out) {
    out << kTraceHeader << '\n';
    for (const TaskRecord& rec : trace) {
        out << rec.task_id << ',' << format_double(rec.d) << ','
            << (rec.phase == Phase::Warmup ? "warmup" : "steady") << ',';
        if (rec.decision) {
            out << format_double(rec.decision->p_local) << ','
                << format_double(rec.decision->p_cloud) << ','
                << target_name(rec.decision->target);
        } else {
            out << ",,";
        }
        out << ',' << opt_double(rec.measured_local) << ','
            << opt_double(rec.measured_cloud) << ','
            << opt_target(rec.oracle_target) << '\n';
    }
}

void write_trace_csv(std::span<const TaskRecord> trace, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    write_trace_csv(trace, out);
    out.flush();
    if (!out)
        throw std::runtime_error("failed writing '" + path + "'");
}

std::vector<TaskRecord> read_trace_csv(std::istream& in, const std::string& name) {
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line))
        parse_fail(name, 1, "empty file, expected header");
    ++line_no;
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != kTraceHeader)
        parse_fail(name, line_no, "bad header '" + line + "'");

    std::vector<TaskRecord> trace;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const auto fields = split_fields(line);
        if (fields.size() != 9)
            parse_fail(name, line_no,
                       "expected 9 fields, got " + std::to_string(fields.size()));
        TaskRecord rec;
        {
            std::uint64_t id = 0;
            const char* begin = fields[0].data();
            const char* end = begin + fields[0].size();
            auto [ptr, ec] = std::from_chars(begin, end, id);
            if (ec != std::errc{} || ptr != end)
                parse_fail(name, line_no, "bad task_id '" + fields[0] + "'");
            rec.task_id = id;
        }
        const std::optional<double> d = parse_opt_double(fields[1], name, line_no);
        if (!d)
            parse_fail(name, line_no, "missing d");
        rec.d = *d;
        if (fields[2] == "warmup")
            rec.phase = Phase::Warmup;
        else if (fields[2] == "steady")
            rec.phase = Phase::Steady;
        else
            parse_fail(name, line_no, "bad phase '" + fields[2] + "'");
        const std::optional<double> p_local = parse_opt_double(fields[3], name, line_no);
        const std::optional<double> p_cloud = parse_opt_double(fields[4], name, line_no);
        const std::optional<Target> target = parse_opt_target(fields[5], name, line_no);
        if (target) {
            if (!p_local || !p_cloud)
                parse_fail(name, line_no, "decision row missing predictions");
            rec.decision = Decision{*target, *p_local, *p_cloud};
        } else if (p_local || p_cloud) {
            parse_fail(name, line_no, "predictions present without a target");
        }
        rec.measured_local = parse_opt_double(fields[6], name, line_no);
        rec.measured_cloud = parse_opt_double(fields[7], name, line_no);
        rec.oracle_target = parse_opt_target(fields[8], name, line_no);
        trace.push_back(rec);
    }
    return trace;
}

std::vector<TaskRecord> read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("no such file: '" + path + "'");
    return read_trace_csv(in, path);
}

} // namespace offload

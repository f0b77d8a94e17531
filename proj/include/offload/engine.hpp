#pragma once

// The offloading control loop: warm up both observation windows by
// executing each task on both targets, then per task fit both predictors,
// predict, pick the cheaper target, execute there, and feed the
// measurement back into that target's window.

#include "offload/window_model.hpp"
#include "offload/workload.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace offload {

enum class Target { Local, Cloud };

const char* target_name(Target target);

// Outcome of comparing the two predictions.  Cloud wins only on strict
// inequality; ties execute onboard.
struct Decision {
    Target target = Target::Local;
    double p_local = 0.0;
    double p_cloud = 0.0;

    friend bool operator==(const Decision&, const Decision&) = default;
};

// Throws std::invalid_argument("invalid prediction") when either input is NaN.
Decision decide(double p_local, double p_cloud);

enum class Phase { Warmup, Steady };

// Per-task trace row.  Warm-up rows have no decision and both
// measurements.  Steady rows always have a decision; in live mode they
// carry only the executed target's measurement, while replay retains both
// recorded times so the oracle target is known for every task.
struct TaskRecord {
    std::uint64_t task_id = 0;
    double d = 0.0;
    Phase phase = Phase::Warmup;
    std::optional<Decision> decision;
    std::optional<double> measured_local;
    std::optional<double> measured_cloud;
    std::optional<Target> oracle_target; // set whenever both times are known
};

struct EngineConfig {
    std::size_t window_capacity = 50;
    bool clamp_negative_predictions = true;
};

class ExecutorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Executes one task and returns measured wall-clock seconds.
// Implementations throw ExecutorError on failure.
class Executor {
public:
    virtual ~Executor() = default;
    virtual double execute(std::uint64_t task_id, double d) = 0;
};

// Executor failure log entry; the engine falls back to the other target
// and appends nothing for the failed one.
struct EngineEvent {
    std::uint64_t task_id = 0;
    Target target = Target::Local;
    std::string message;
};

class Engine {
public:
    explicit Engine(const EngineConfig& config);

    // Replay step: both recorded times are known.  With oracle_predictor
    // the recorded times stand in for the model predictions, which makes
    // every steady decision match the oracle by construction.
    TaskRecord step_replay(const Task& task, bool oracle_predictor = false);

    // Live step: measurements come from the executors.
    TaskRecord step_live(std::uint64_t task_id, double d, Executor& local,
                         Executor& cloud);

    bool warmed_up() const;
    const SlidingWindow& window(Target target) const;
    const std::vector<EngineEvent>& events() const { return events_; }
    const EngineConfig& config() const { return config_; }

private:
    struct Predictions {
        double p_local;
        double p_cloud;
    };
    Predictions predict_both(double d) const;

    EngineConfig config_;
    SlidingWindow local_window_;
    SlidingWindow cloud_window_;
    std::vector<EngineEvent> events_;
};

struct ReplayOptions {
    EngineConfig engine;
    bool oracle_predictor = false;
};

// Runs the loop over a recorded stream.  An empty stream yields an empty
// trace.  Pure function of (stream, options).
std::vector<TaskRecord> run_replay(const TaskStream& stream,
                                   const ReplayOptions& options);

// Runs the loop live: task ids are 1..input_sizes.size(), measurements
// come from the executors.  Executor failures are logged through the
// returned engine events and retried on the other target.
struct LiveResult {
    std::vector<TaskRecord> trace;
    std::vector<EngineEvent> events;
};
LiveResult run_live(std::span<const double> input_sizes, Executor& local,
                    Executor& cloud, const EngineConfig& config);

// Oracle target for a recorded task: the target with the smaller measured
// time, ties onboard (same rule as decide()).
Target oracle_target(double t_local, double t_cloud);

// Trace CSV: header
// task_id,d,phase,p_local,p_cloud,target,t_local,t_cloud,oracle_target
// with empty fields where a value does not apply.
void write_trace_csv(std::span<const TaskRecord> trace, std::ostream& out);
void write_trace_csv(std::span<const TaskRecord> trace, const std::string& path);
std::vector<TaskRecord> read_trace_csv(std::istream& in,
                                       const std::string& name = "trace");
std::vector<TaskRecord> read_trace_csv(const std::string& path);

} // namespace offload

#pragma once

// Task stream synthesis: the path-planning input-size model, input
// normalization, and a seeded stochastic execution-time generator whose
// output serves as ground truth for replay runs.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace offload {

// A point-to-point planning query over an occupancy grid.
struct PlanQuery {
    double start_x = 0.0;
    double start_y = 0.0;
    double goal_x = 0.0;
    double goal_y = 0.0;
    double grid_resolution = 0.05; // meters per grid cell edge
};

// Number of grid nodes a planner explores for the query: the area of a
// square with the start-goal segment as diagonal, divided by the cell
// area, rounded to the nearest whole node.  Zero when start equals goal.
// Throws std::invalid_argument when grid_resolution <= 0.
double node_count(const PlanQuery& query);

// Input data size for a plan over n nodes: n * ln(n), with 0 returned for
// n <= 1 so the value stays non-negative.  Throws std::invalid_argument
// for negative n.
double raw_input_size(double n);

// Scales a raw input size by the global map size so typical values land
// in a small dimensionless range.  Throws std::invalid_argument when
// map_scale <= 0.
double normalize_input_size(double raw, double map_scale);

// Divisor that maps raw sizes of whole-map plans into roughly 0-5.
inline constexpr double kDefaultMapScale = 1'000'000.0;

// A scheduled execution-time disturbance: tasks with start_task <=
// task_id <= end_task get t -> t * scale + add_seconds.  Models load
// spikes and network degradation that the input size cannot explain.
struct Disturbance {
    std::uint64_t start_task = 0;
    std::uint64_t end_task = 0;
    double add_seconds = 0.0;
    double scale = 1.0;
};

// Ground-truth cost model for one execution target.
struct TargetCost {
    double base_slope = 0.0;     // seconds per unit of input size
    double base_intercept = 0.0; // seconds
    double noise_std = 0.0;      // seconds, gaussian
    std::vector<Disturbance> disturbances;
};

struct CostProfile {
    TargetCost local;
    TargetCost cloud;

    // Calibrated defaults: over d ~ U[0,5] (sd(d) = 5/sqrt(12)) the means
    // come out near 0.175 s local / 0.140 s cloud, and the noise levels
    // are set from noise_std = slope * sd(d) * sqrt(1-r^2) / r so that
    // corr(t, d) lands near 0.69 for local and 0.28 for cloud.
    static CostProfile defaults();
};

inline constexpr double kDefaultLocalSlope = 0.010;
inline constexpr double kDefaultLocalIntercept = 0.150;
inline constexpr double kDefaultLocalNoiseStd = 0.0151419;
inline constexpr double kDefaultCloudSlope = 0.008;
inline constexpr double kDefaultCloudIntercept = 0.120;
inline constexpr double kDefaultCloudNoiseStd = 0.0395897;

// No generated time may fall below this floor.
inline constexpr double kTimeFloorSeconds = 1e-3;

// One synthesized task: input size plus ground-truth execution times on
// both targets.
struct Task {
    std::uint64_t task_id = 0;
    double d = 0.0;
    double t_local = 0.0;
    double t_cloud = 0.0;

    friend bool operator==(const Task&, const Task&) = default;
};

struct TaskStream {
    std::vector<Task> tasks;
    std::uint64_t seed = 0;

    std::size_t size() const { return tasks.size(); }

    std::vector<double> input_sizes() const;
    std::vector<double> local_times() const;
    std::vector<double> cloud_times() const;
};

// Draws `count` tasks with d ~ U[0,5] and times from the profile's lines
// plus gaussian noise, disturbances applied, floored at
// kTimeFloorSeconds.  Identical (profile, count, seed) inputs produce a
// bit-identical stream; the generator does not depend on libc
// distribution internals.  Throws std::invalid_argument when count < 1.
TaskStream generate_stream(const CostProfile& profile, std::size_t count,
                           std::uint64_t seed);

// Ground-truth time the profile assigns to one task on one target before
// noise (line value with disturbances and floor applied).  Used by the
// loopback server and by tests that pin noiseless behavior.
double profile_time(const TargetCost& cost, std::uint64_t task_id, double d,
                    double noise = 0.0);

// Stream CSV interchange: header "task_id,d,t_local,t_cloud", one row per
// task.  Reading validates the header, field counts, id ordering from 1,
// and positive times; errors name the offending line.
void write_stream_csv(const TaskStream& stream, std::ostream& out);
void write_stream_csv(const TaskStream& stream, const std::string& path);
TaskStream read_stream_csv(std::istream& in, const std::string& name = "stream");
TaskStream read_stream_csv(const std::string& path);

} // namespace offload

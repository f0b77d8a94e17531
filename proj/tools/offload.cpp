// offload: dataset generation, replay/live runs, window-size sweeps, and
// the loopback cloud-executor server, in one binary.
//
//   offload generate --count 1000 --seed 42 --out data.csv
//   offload run      --data data.csv --window 50 --trace trace.csv
//   offload sweep    --data data.csv --out report.csv
//   offload serve    --bind 127.0.0.1:7070 --rtt-ms 30
//   offload run      --live --server 127.0.0.1:7070 --count 100 --trace t.csv
//
// Every subcommand is deterministic for a fixed seed, except live runs,
// which measure real wall-clock time.  OFFLOAD_SERVER_ADDR overrides the
// default server/bind endpoint when the flag is not given.

#include "offload/engine.hpp"
#include "offload/metrics.hpp"
#include "offload/transport.hpp"
#include "offload/workload.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <thread>

namespace {

using namespace offload;

constexpr std::uint64_t kDefaultSeed = 42;
constexpr const char* kServerAddrEnv = "OFFLOAD_SERVER_ADDR";
constexpr const char* kDefaultEndpoint = "127.0.0.1:7070";

std::string default_endpoint() {
    if (const char* env = std::getenv(kServerAddrEnv); env && *env)
        return env;
    return kDefaultEndpoint;
}

// start:end:add[:scale] -> Disturbance
Disturbance parse_disturbance(const std::string& text) {
    Disturbance d;
    unsigned long long start = 0;
    unsigned long long end = 0;
    double add = 0.0;
    double scale = 1.0;
    const int n = std::sscanf(text.c_str(), "%llu:%llu:%lf:%lf", &start, &end,
                              &add, &scale);
    if (n < 3)
        throw CLI::ValidationError(
            "disturbance", "expected start:end:add[:scale], got '" + text + "'");
    if (start > end)
        throw CLI::ValidationError("disturbance", "start must be <= end");
    d.start_task = start;
    d.end_task = end;
    d.add_seconds = add;
    d.scale = scale;
    return d;
}

struct ProfileFlags {
    double local_slope = kDefaultLocalSlope;
    double local_intercept = kDefaultLocalIntercept;
    double local_noise = kDefaultLocalNoiseStd;
    double cloud_slope = kDefaultCloudSlope;
    double cloud_intercept = kDefaultCloudIntercept;
    double cloud_noise = kDefaultCloudNoiseStd;
    std::vector<std::string> disturb_local;
    std::vector<std::string> disturb_cloud;

    CostProfile to_profile() const {
        CostProfile p;
        p.local = {local_slope, local_intercept, local_noise, {}};
        p.cloud = {cloud_slope, cloud_intercept, cloud_noise, {}};
        for (const std::string& s : disturb_local)
            p.local.disturbances.push_back(parse_disturbance(s));
        for (const std::string& s : disturb_cloud)
            p.cloud.disturbances.push_back(parse_disturbance(s));
        return p;
    }
};

void add_profile_flags(CLI::App& cmd, ProfileFlags& flags, bool local_side = true) {
    if (local_side) {
        cmd.add_option("--local-slope", flags.local_slope,
                       "local cost: seconds per unit of d")
            ->capture_default_str();
        cmd.add_option("--local-intercept", flags.local_intercept,
                       "local cost: base seconds")
            ->capture_default_str();
        cmd.add_option("--local-noise", flags.local_noise,
                       "local cost: gaussian noise std (s)")
            ->capture_default_str();
        cmd.add_option("--disturb-local", flags.disturb_local,
                       "local disturbance start:end:add[:scale], repeatable");
    }
    cmd.add_option("--cloud-slope", flags.cloud_slope,
                   "cloud cost: seconds per unit of d")
        ->capture_default_str();
    cmd.add_option("--cloud-intercept", flags.cloud_intercept,
                   "cloud cost: base seconds")
        ->capture_default_str();
    cmd.add_option("--cloud-noise", flags.cloud_noise,
                   "cloud cost: gaussian noise std (s)")
        ->capture_default_str();
    cmd.add_option("--disturb-cloud", flags.disturb_cloud,
                   "cloud disturbance start:end:add[:scale], repeatable");
}

void print_stream_summary(const TaskStream& stream) {
    const auto ds = stream.input_sizes();
    const auto tl = stream.local_times();
    const auto tc = stream.cloud_times();
    const double n = static_cast<double>(stream.size());
    double sum_l = 0.0;
    double sum_c = 0.0;
    for (std::size_t i = 0; i < stream.size(); ++i) {
        sum_l += tl[i];
        sum_c += tc[i];
    }
    std::printf("tasks: %zu  mean t_local: %.6f s  mean t_cloud: %.6f s\n",
                stream.size(), sum_l / n, sum_c / n);
    if (stream.size() >= 2) {
        try {
            std::printf("pearson r(d, t_local): %.5f  r(d, t_cloud): %.5f\n",
                        metrics::pearson(ds, tl), metrics::pearson(ds, tc));
        } catch (const std::runtime_error&) {
            std::printf("pearson: undefined (zero variance)\n");
        }
    }
}

int cmd_generate(std::size_t count, std::uint64_t seed, const std::string& out,
                 const ProfileFlags& flags) {
    const TaskStream stream = generate_stream(flags.to_profile(), count, seed);
    write_stream_csv(stream, out);
    std::printf("wrote %zu tasks to %s (seed %llu)\n", stream.size(), out.c_str(),
                static_cast<unsigned long long>(seed));
    print_stream_summary(stream);
    return 0;
}

void print_replay_summary(const std::vector<TaskRecord>& trace) {
    std::size_t warmup = 0;
    std::size_t steady = 0;
    for (const TaskRecord& rec : trace)
        (rec.phase == Phase::Warmup ? warmup : steady) += 1;
    std::printf("tasks: %zu  warmup: %zu  steady: %zu\n", trace.size(), warmup,
                steady);
    if (steady == 0) {
        std::printf("no steady-phase tasks; window does not fit the stream\n");
        return;
    }
    const auto local = metrics::residual_report(trace, Target::Local);
    const auto cloud = metrics::residual_report(trace, Target::Cloud);
    std::printf("local:  mean t %.6f  mean p %.6f  residual %+.6f  error %.4f\n",
                local.mean_t, local.mean_p, local.residual, local.error_rate);
    std::printf("cloud:  mean t %.6f  mean p %.6f  residual %+.6f  error %.4f\n",
                cloud.mean_t, cloud.mean_p, cloud.residual, cloud.error_rate);
    std::printf("decision accuracy: %.4f\n", metrics::decision_accuracy(trace));
}

int cmd_run_replay(const std::string& data, std::size_t window, bool clamp,
                   const std::string& trace_path) {
    const TaskStream stream = read_stream_csv(data);
    ReplayOptions options;
    options.engine.window_capacity = window;
    options.engine.clamp_negative_predictions = clamp;
    const std::vector<TaskRecord> trace = run_replay(stream, options);
    write_trace_csv(trace, trace_path);
    std::printf("wrote trace to %s\n", trace_path.c_str());
    print_replay_summary(trace);
    return 0;
}

// Sleeps the ground-truth time for each task and reports measured
// wall-clock, standing in for onboard execution.
class SleepExecutor : public Executor {
public:
    explicit SleepExecutor(std::vector<double> times) : times_(std::move(times)) {}

    double execute(std::uint64_t task_id, double) override {
        if (task_id == 0 || task_id > times_.size())
            throw ExecutorError("task id out of range");
        const auto start = std::chrono::steady_clock::now();
        std::this_thread::sleep_for(
            std::chrono::duration<double>(times_[task_id - 1]));
        const auto end = std::chrono::steady_clock::now();
        return std::chrono::duration<double>(end - start).count();
    }

private:
    std::vector<double> times_;
};

int cmd_run_live(const std::string& endpoint, std::size_t count,
                 std::uint64_t seed, std::size_t window, bool clamp,
                 double timeout, const ProfileFlags& flags,
                 const std::string& trace_path) {
    // The local side sleeps the profile's ground-truth times; the cloud
    // side is whatever the server at `endpoint` decides.
    const TaskStream stream = generate_stream(flags.to_profile(), count, seed);
    SleepExecutor local(stream.local_times());

    const auto [host, port] = transport::parse_endpoint(endpoint);
    transport::Client client;
    client.connect(host, port, timeout);
    transport::RemoteExecutor cloud(client);

    EngineConfig config;
    config.window_capacity = window;
    config.clamp_negative_predictions = clamp;
    const LiveResult result =
        run_live(stream.input_sizes(), local, cloud, config);

    write_trace_csv(result.trace, trace_path);
    std::printf("wrote live trace to %s (%zu tasks, %zu executor failures)\n",
                trace_path.c_str(), result.trace.size(), result.events.size());
    for (const EngineEvent& event : result.events)
        std::fprintf(stderr, "task %llu %s: %s\n",
                     static_cast<unsigned long long>(event.task_id),
                     target_name(event.target), event.message.c_str());
    return 0;
}

int cmd_sweep(const std::string& data, const std::string& out,
              const std::vector<std::size_t>& windows, bool include_full,
              bool clamp) {
    const TaskStream stream = read_stream_csv(data);
    metrics::SweepOptions options;
    if (!windows.empty())
        options.windows = windows;
    options.include_full_split = include_full;
    options.engine.clamp_negative_predictions = clamp;
    const metrics::SweepReport report = metrics::sweep(stream, options);
    metrics::write_sweep_csv(report, out);
    std::fputs(metrics::format_sweep_table(report).c_str(), stdout);
    for (const std::string& warning : report.warnings)
        std::fprintf(stderr, "warning: %s\n", warning.c_str());
    std::printf("wrote report to %s\n", out.c_str());
    return 0;
}

std::atomic<bool> g_shutdown{false};

void handle_signal(int) {
    g_shutdown.store(true);
}

int cmd_serve(const std::string& endpoint, double rtt_ms,
              std::uint64_t noise_seed, const ProfileFlags& flags) {
    transport::ServerConfig config;
    const auto [host, port] = transport::parse_endpoint(endpoint);
    config.bind_host = host;
    config.port = port;
    config.injected_rtt = rtt_ms / 1000.0;
    config.noise_seed = noise_seed;
    config.log_requests = true;
    const CostProfile profile = flags.to_profile();
    config.cloud_cost = profile.cloud;

    transport::Server server(std::move(config));
    server.start();
    std::printf("listening on %s:%u (rtt %.1f ms)\n", host.c_str(),
                server.port(), rtt_ms);
    std::fflush(stdout);

    struct sigaction action {};
    action.sa_handler = handle_signal;
    sigaction(SIGINT, &action, nullptr);
    sigaction(SIGTERM, &action, nullptr);

    while (!g_shutdown.load())
        std::this_thread::sleep_for(std::chrono::milliseconds(50));

    server.stop();
    std::printf("served %llu requests, shutting down\n",
                static_cast<unsigned long long>(server.requests_served()));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sliding-window execution-time prediction and offloading harness"};
    app.require_subcommand(1);

    // generate
    auto* generate = app.add_subcommand("generate", "synthesize a task stream CSV");
    std::size_t gen_count = 0;
    std::uint64_t gen_seed = kDefaultSeed;
    std::string gen_out;
    ProfileFlags gen_flags;
    generate->add_option("--count", gen_count, "number of tasks")
        ->required()
        ->check(CLI::PositiveNumber);
    generate->add_option("--seed", gen_seed, "rng seed")->capture_default_str();
    generate->add_option("--out", gen_out, "output CSV path")->required();
    add_profile_flags(*generate, gen_flags);

    // run
    auto* run = app.add_subcommand("run", "replay a stream or drive live executors");
    std::string run_data;
    bool run_live_mode = false;
    std::string run_server = default_endpoint();
    std::size_t run_count = 100;
    std::uint64_t run_seed = kDefaultSeed;
    std::size_t run_window = 50;
    bool run_no_clamp = false;
    double run_timeout = 5.0;
    std::string run_trace;
    ProfileFlags run_flags;
    auto* data_opt = run->add_option("--data", run_data, "recorded stream CSV (replay mode)");
    auto* live_opt = run->add_flag("--live", run_live_mode, "execute tasks live");
    run->add_option("--server", run_server,
                    "cloud executor host:port (live mode; env OFFLOAD_SERVER_ADDR)")
        ->capture_default_str();
    run->add_option("--count", run_count, "task count (live mode)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    run->add_option("--seed", run_seed, "rng seed (live mode)")->capture_default_str();
    run->add_option("--window", run_window, "observation window capacity N")
        ->capture_default_str()
        ->check(CLI::Range(std::size_t{2}, std::size_t{1000000}));
    run->add_flag("--no-clamp", run_no_clamp, "keep negative predictions");
    run->add_option("--timeout", run_timeout, "cloud call timeout, seconds")
        ->capture_default_str();
    run->add_option("--trace", run_trace, "output trace CSV path")->required();
    add_profile_flags(*run, run_flags);
    data_opt->excludes(live_opt);
    live_opt->excludes(data_opt);

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "replay across window sizes");
    std::string sweep_data;
    std::string sweep_out;
    std::vector<std::size_t> sweep_windows;
    bool sweep_full = false;
    bool sweep_no_clamp = false;
    sweep_cmd->add_option("--data", sweep_data, "recorded stream CSV")->required();
    sweep_cmd->add_option("--out", sweep_out, "output report CSV path")->required();
    auto* windows_opt =
        sweep_cmd->add_option("--windows", sweep_windows, "window sizes, comma separated")
            ->delimiter(',');
    sweep_cmd->add_flag("--full", sweep_full,
                        "append the 80:20 train/test split row");
    sweep_cmd->add_flag("--no-clamp", sweep_no_clamp, "keep negative predictions");

    // serve
    auto* serve = app.add_subcommand("serve", "run the loopback cloud executor");
    std::string serve_bind = default_endpoint();
    double serve_rtt_ms = 30.0;
    std::uint64_t serve_noise_seed = 0;
    ProfileFlags serve_flags;
    serve->add_option("--bind", serve_bind,
                      "bind host:port (env OFFLOAD_SERVER_ADDR)")
        ->capture_default_str();
    serve->add_option("--rtt-ms", serve_rtt_ms, "injected round trip, milliseconds")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    serve->add_option("--noise-seed", serve_noise_seed, "seed for cost-model noise")
        ->capture_default_str();
    add_profile_flags(*serve, serve_flags, /*local_side=*/false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed())
            return cmd_generate(gen_count, gen_seed, gen_out, gen_flags);
        if (run->parsed()) {
            if (run_live_mode)
                return cmd_run_live(run_server, run_count, run_seed, run_window,
                                    !run_no_clamp, run_timeout, run_flags,
                                    run_trace);
            if (run_data.empty())
                throw CLI::ValidationError("run", "either --data or --live is required");
            return cmd_run_replay(run_data, run_window, !run_no_clamp, run_trace);
        }
        if (sweep_cmd->parsed()) {
            const bool include_full = sweep_full || windows_opt->count() == 0;
            return cmd_sweep(sweep_data, sweep_out, sweep_windows, include_full,
                             !sweep_no_clamp);
        }
        if (serve->parsed())
            return cmd_serve(serve_bind, serve_rtt_ms, serve_noise_seed,
                             serve_flags);
    } catch (const CLI::Error& err) {
        return app.exit(err);
    } catch (const std::exception& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return 1;
    }
    return 0;
}

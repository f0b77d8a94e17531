#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "offload/window_model.hpp"
#include "offload/workload.hpp"

#include "support/oracles.hpp"

#include <cmath>
#include <sstream>

using namespace offload;

TEST_CASE("node_count reproduces the worked planning example") {
    // 35.02 m start-goal distance on a 0.05 m grid.
    const PlanQuery query{0.0, 0.0, 35.02, 0.0, 0.05};
    const double n = node_count(query);
    CHECK(std::abs(n - 245280.0) <= 1.0);

    const double d = raw_input_size(n);
    CHECK(std::abs(d - 3043962.0) <= 2.0);
}

TEST_CASE("node_count is zero when start equals goal") {
    const PlanQuery query{3.0, -2.0, 3.0, -2.0, 0.05};
    CHECK(node_count(query) == 0.0);
}

TEST_CASE("node_count hand-checked small case") {
    // |AB| = 2, g = 0.1 -> 0.5 * 4 / 0.01 = 200.
    const PlanQuery query{0.0, 0.0, 0.0, 2.0, 0.1};
    CHECK(node_count(query) == doctest::Approx(200.0).epsilon(1e-12));
}

TEST_CASE("node_count rejects non-positive grid resolution") {
    CHECK_THROWS_AS(node_count({0, 0, 1, 1, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(node_count({0, 0, 1, 1, -0.05}), std::invalid_argument);
}

TEST_CASE("node_count monotonicity in distance and grid size") {
    double prev = 0.0;
    for (double reach = 1.0; reach <= 50.0; reach += 1.0) {
        const double n = node_count({0, 0, reach, 0, 0.05});
        CHECK(n > prev);
        prev = n;
    }
    prev = node_count({0, 0, 10, 0, 0.01});
    for (double g = 0.02; g <= 0.2; g += 0.01) {
        const double n = node_count({0, 0, 10, 0, g});
        CHECK(n < prev);
        prev = n;
    }
}

TEST_CASE("raw_input_size uses the natural logarithm") {
    CHECK(raw_input_size(0.0) == 0.0);
    CHECK(raw_input_size(1.0) == 0.0);
    CHECK(std::abs(raw_input_size(200.0) - 1059.66) < 0.01); // 200 ln 200
    CHECK_THROWS_AS(raw_input_size(-1.0), std::invalid_argument);
}

TEST_CASE("raw_input_size is monotone for n >= 1") {
    double prev = raw_input_size(1.0);
    for (double n = 1.5; n < 100.0; n += 0.5) {
        const double v = raw_input_size(n);
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("normalize_input_size scales by the map size") {
    CHECK(normalize_input_size(3043962.0, 1e6) ==
          doctest::Approx(3.043962).epsilon(1e-12));
    CHECK(normalize_input_size(0.0, kDefaultMapScale) == 0.0);
    CHECK(normalize_input_size(123.0, 123.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(normalize_input_size(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(normalize_input_size(1.0, -5.0), std::invalid_argument);
}

TEST_CASE("worked example normalizes into the expected range") {
    const double n = node_count({0.0, 0.0, 35.02, 0.0, 0.05});
    const double d = normalize_input_size(raw_input_size(n), kDefaultMapScale);
    CHECK(d > 0.0);
    CHECK(d < 5.0);
    CHECK(d == doctest::Approx(3.044).epsilon(1e-3));
}

TEST_CASE("zero-noise streams sit exactly on the profile lines") {
    CostProfile profile;
    profile.local = {0.02, 0.10, 0.0, {}};
    profile.cloud = {0.01, 0.05, 0.0, {}};
    const TaskStream stream = generate_stream(profile, 3, 99);
    REQUIRE(stream.size() == 3);
    for (const Task& task : stream.tasks) {
        CHECK(task.t_local == doctest::Approx(0.02 * task.d + 0.10).epsilon(1e-12));
        CHECK(task.t_cloud == doctest::Approx(0.01 * task.d + 0.05).epsilon(1e-12));
    }
}

TEST_CASE("equal seeds give identical streams, different seeds differ") {
    const CostProfile profile = CostProfile::defaults();
    const TaskStream a = generate_stream(profile, 200, 5);
    const TaskStream b = generate_stream(profile, 200, 5);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(a.tasks[i] == b.tasks[i]); // bit-identical

    const TaskStream c = generate_stream(profile, 200, 6);
    bool any_difference = false;
    for (std::size_t i = 0; i < a.size(); ++i)
        any_difference = any_difference || !(a.tasks[i] == c.tasks[i]);
    CHECK(any_difference);
}

TEST_CASE("generate_stream validates count and task invariants") {
    CHECK_THROWS_AS(generate_stream(CostProfile::defaults(), 0, 1),
                    std::invalid_argument);
    const TaskStream stream = generate_stream(CostProfile::defaults(), 50, 1);
    for (std::size_t i = 0; i < stream.size(); ++i) {
        CHECK(stream.tasks[i].task_id == i + 1);
        CHECK(stream.tasks[i].d >= 0.0);
        CHECK(stream.tasks[i].d <= 5.0);
        CHECK(stream.tasks[i].t_local > 0.0);
        CHECK(stream.tasks[i].t_cloud > 0.0);
    }
}

TEST_CASE("default profile matches its calibration targets") {
    const TaskStream stream =
        generate_stream(CostProfile::defaults(), 1000, 2024);
    const auto ds = stream.input_sizes();
    const auto tl = stream.local_times();
    const auto tc = stream.cloud_times();
    double mean_l = 0.0;
    double mean_c = 0.0;
    for (std::size_t i = 0; i < stream.size(); ++i) {
        mean_l += tl[i];
        mean_c += tc[i];
    }
    mean_l /= static_cast<double>(stream.size());
    mean_c /= static_cast<double>(stream.size());
    CHECK(std::abs(mean_c - 0.14011) < 0.15 * 0.14011);
    CHECK(std::abs(mean_l - 0.17530) < 0.15 * 0.17530);
    CHECK(testsupport::pearson_reference(ds, tl) >
          testsupport::pearson_reference(ds, tc));
}

TEST_CASE("noiseless streams refit to the profile coefficients") {
    CostProfile profile;
    profile.local = {0.031, 0.12, 0.0, {}};
    profile.cloud = {0.007, 0.08, 0.0, {}};
    const TaskStream stream = generate_stream(profile, 100, 17);
    const auto ds = stream.input_sizes();
    const LinearModel local_fit = fit_points(ds, stream.local_times());
    const LinearModel cloud_fit = fit_points(ds, stream.cloud_times());
    CHECK(std::abs(local_fit.slope - 0.031) < 1e-6);
    CHECK(std::abs(local_fit.intercept - 0.12) < 1e-6);
    CHECK(std::abs(cloud_fit.slope - 0.007) < 1e-6);
    CHECK(std::abs(cloud_fit.intercept - 0.08) < 1e-6);
}

TEST_CASE("disturbance intervals raise times only inside the interval") {
    CostProfile profile;
    profile.local = {0.02, 0.10, 0.0, {{21, 40, 0.05, 1.0}}};
    profile.cloud = {0.01, 0.05, 0.0, {}};
    const TaskStream stream = generate_stream(profile, 60, 31);
    for (const Task& task : stream.tasks) {
        const double line = 0.02 * task.d + 0.10;
        if (task.task_id >= 21 && task.task_id <= 40)
            CHECK(task.t_local == doctest::Approx(line + 0.05).epsilon(1e-12));
        else
            CHECK(task.t_local == doctest::Approx(line).epsilon(1e-12));
    }

    // Multiplicative form, and under noise the disturbed mean stays above
    // the undisturbed expectation.
    CostProfile noisy;
    noisy.local = {0.02, 0.10, 0.005, {{1, 500, 0.0, 1.5}}};
    noisy.cloud = {0.01, 0.05, 0.0, {}};
    const TaskStream disturbed = generate_stream(noisy, 1000, 8);
    double inside = 0.0;
    double line_mean = 0.0;
    std::size_t inside_count = 0;
    for (const Task& task : disturbed.tasks) {
        if (task.task_id <= 500) {
            inside += task.t_local;
            line_mean += 0.02 * task.d + 0.10;
            ++inside_count;
        }
    }
    CHECK(inside / inside_count > line_mean / inside_count);
}

TEST_CASE("stream CSV round-trips exactly") {
    const TaskStream stream = generate_stream(CostProfile::defaults(), 128, 44);
    std::ostringstream out;
    write_stream_csv(stream, out);
    std::istringstream in(out.str());
    const TaskStream back = read_stream_csv(in, "mem");
    REQUIRE(back.size() == stream.size());
    for (std::size_t i = 0; i < stream.size(); ++i) {
        CHECK(back.tasks[i].task_id == stream.tasks[i].task_id);
        CHECK(back.tasks[i].d == doctest::Approx(stream.tasks[i].d).epsilon(1e-9));
        CHECK(back.tasks[i].t_local ==
              doctest::Approx(stream.tasks[i].t_local).epsilon(1e-9));
        CHECK(back.tasks[i].t_cloud ==
              doctest::Approx(stream.tasks[i].t_cloud).epsilon(1e-9));
    }
}

TEST_CASE("stream CSV reader names the offending line") {
    const std::string good = "task_id,d,t_local,t_cloud\n1,1.0,0.1,0.2\n";

    {
        std::istringstream in(good + "2,nonsense,0.1,0.2\n");
        CHECK_THROWS_WITH_AS(read_stream_csv(in, "bad.csv"),
                             doctest::Contains("bad.csv line 3"),
                             std::runtime_error);
    }
    {
        std::istringstream in(good + "2,1.0,0.1\n");
        CHECK_THROWS_WITH_AS(read_stream_csv(in, "bad.csv"),
                             doctest::Contains("line 3"), std::runtime_error);
    }
    {
        std::istringstream in(good + "1,1.0,0.1,0.2\n"); // id not increasing
        CHECK_THROWS_WITH_AS(read_stream_csv(in, "bad.csv"),
                             doctest::Contains("line 3"), std::runtime_error);
    }
    {
        std::istringstream in(std::string("wrong,header\n"));
        CHECK_THROWS_WITH_AS(read_stream_csv(in, "bad.csv"),
                             doctest::Contains("header"), std::runtime_error);
    }
    {
        std::istringstream in(good + "2,1.0,-0.1,0.2\n");
        CHECK_THROWS_WITH_AS(read_stream_csv(in, "bad.csv"),
                             doctest::Contains("positive"), std::runtime_error);
    }
}

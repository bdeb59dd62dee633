#include <catch2/catch.hpp>

#include <filesystem>
#include <thread>
#include <vector>

#include "seats/sandbox.hpp"
#include "seats/util.hpp"

using namespace seats;
namespace fs = std::filesystem;

namespace {

SandboxSettings make_settings(const std::string& name, double timeout = 30.0) {
    auto root = fs::temp_directory_path() / ("seats_sandbox_" + name);
    fs::remove_all(root);
    fs::create_directories(root);
    SandboxSettings s;
    s.interpreter = {"sh"};
    s.extension = ".sh";
    s.workdir = root.string();
    s.timeout_seconds = timeout;
    return s;
}

} // namespace

TEST_CASE("a program printing the metric line executes ok") {
    auto s = make_settings("ok");
    ExecutionResult r = execute("echo noise\necho 'SEATS_METRIC: 17.12'\nexit 0\n", s, "iter_00001");
    CHECK(r.status == ExecutionStatus::Ok);
    REQUIRE(r.metric);
    CHECK(*r.metric == 17.12);
    CHECK(r.exit_code == 0);
    CHECK(r.stdout_tail.find("noise") != std::string::npos);

    // per-node audit layout
    fs::path dir = fs::path(s.workdir) / "iter_00001";
    CHECK(fs::exists(dir / "solution.sh"));
    CHECK(fs::exists(dir / "stdout.log"));
    CHECK(fs::exists(dir / "stderr.log"));
}

TEST_CASE("a crashing program is a runtime error without a metric") {
    auto s = make_settings("crash");
    ExecutionResult r = execute("echo 'SEATS_METRIC: 5.0'\nawk 'BEGIN { exit 9 }'\nexit 9\n", s, "iter_00001");
    CHECK(r.status == ExecutionStatus::RuntimeError);
    CHECK_FALSE(r.metric);
    CHECK(r.exit_code == 9);
}

TEST_CASE("a program sleeping past the timeout is killed") {
    auto s = make_settings("sleep", 1.0);
    ExecutionResult r = execute("sleep 30\necho 'SEATS_METRIC: 1.0'\n", s, "iter_00001");
    CHECK(r.status == ExecutionStatus::Timeout);
    CHECK_FALSE(r.metric);
    CHECK(r.duration_seconds < 5.0);
}

TEST_CASE("clean exit without a metric is no_metric") {
    auto s = make_settings("nometric");
    ExecutionResult r = execute("echo hello\nexit 0\n", s, "iter_00001");
    CHECK(r.status == ExecutionStatus::NoMetric);
    CHECK_FALSE(r.metric);
}

TEST_CASE("parse_metric: last line wins") {
    auto dir = fs::temp_directory_path() / "seats_parse_lastline";
    fs::remove_all(dir);
    fs::create_directories(dir);
    CHECK(parse_metric("SEATS_METRIC: 3.0\nnoise\nSEATS_METRIC: 2.0\n", dir) == 2.0);
    CHECK(parse_metric("noise\nSEATS_METRIC: 1.757\n", dir) == 1.757);
    CHECK_FALSE(parse_metric("no line at all\n", dir).has_value());
    CHECK_FALSE(parse_metric("SEATS_METRIC: nan\n", dir).has_value());
}

TEST_CASE("parse_metric: metrics.json fallback and conflicts") {
    auto dir = fs::temp_directory_path() / "seats_parse_file";
    fs::remove_all(dir);
    fs::create_directories(dir);
    write_file(dir / "metrics.json", "{\"metric\": 4.25}");
    CHECK(parse_metric("", dir) == 4.25);
    // agreeing line and file: line wins, no conflict
    CHECK(parse_metric("SEATS_METRIC: 4.25\n", dir) == 4.25);
    // disagreement beyond 1e-9 is a conflict
    CHECK_THROWS_AS(parse_metric("SEATS_METRIC: 9.0\n", dir), MetricConflictError);
    // malformed file counts as absent
    write_file(dir / "metrics.json", "{not json");
    CHECK_FALSE(parse_metric("", dir).has_value());
}

TEST_CASE("execute accepts a metrics.json-only candidate") {
    auto s = make_settings("jsonmetric");
    ExecutionResult r = execute("printf '{\"metric\": 6.5}' > metrics.json\n", s, "iter_00001");
    CHECK(r.status == ExecutionStatus::Ok);
    CHECK(r.metric == 6.5);
}

TEST_CASE("conflicting self-reports degrade to no_metric") {
    auto s = make_settings("conflict");
    ExecutionResult r = execute("printf '{\"metric\": 1.0}' > metrics.json\necho 'SEATS_METRIC: 2.0'\n", s, "iter_00001");
    CHECK(r.status == ExecutionStatus::NoMetric);
    CHECK_FALSE(r.metric);
}

TEST_CASE("output tails stay bounded for chatty programs") {
    auto s = make_settings("chatty");
    // ~1.6 MB of output, far over the 64 KiB cap
    ExecutionResult r = execute("i=0\nwhile [ $i -lt 20000 ]; do echo "
                                "\"line $i: aaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaa\"; "
                                "i=$((i+1)); done\necho 'SEATS_METRIC: 1.0'\n",
                                s, "iter_00001");
    CHECK(r.status == ExecutionStatus::Ok);
    CHECK(r.stdout_tail.size() <= 64 * 1024);
    // the tail keeps the end of the stream, where the metric lives
    CHECK(r.stdout_tail.find("SEATS_METRIC: 1.0") != std::string::npos);
    CHECK(r.stdout_tail.find("line 0:") == std::string::npos);
}

TEST_CASE("concurrent executions use disjoint directories") {
    auto s = make_settings("concurrent");
    std::vector<std::thread> threads;
    std::vector<ExecutionResult> results(4);
    for (int i = 0; i < 4; ++i) {
        threads.emplace_back([&, i] {
            results[static_cast<std::size_t>(i)] =
                execute("echo \"SEATS_METRIC: " + std::to_string(i) + ".5\"\n", s, "iter_0000" + std::to_string(i));
        });
    }
    for (auto& t : threads) t.join();
    for (int i = 0; i < 4; ++i) {
        CHECK(results[static_cast<std::size_t>(i)].status == ExecutionStatus::Ok);
        CHECK(*results[static_cast<std::size_t>(i)].metric == i + 0.5);
    }
}

TEST_CASE("data paths are linked into the node directory") {
    auto s = make_settings("data");
    auto data = fs::temp_directory_path() / "seats_sandbox_datafile.txt";
    write_file(data, "SEATS_METRIC: 7.75\n");
    s.data_paths = {data.string()};
    ExecutionResult r = execute("cat seats_sandbox_datafile.txt\n", s, "iter_00001");
    CHECK(r.status == ExecutionStatus::Ok);
    CHECK(r.metric == 7.75);
}

TEST_CASE("SEATS_WORKDIR overrides the configured workspace root") {
    auto override_root = fs::temp_directory_path() / "seats_sandbox_envroot";
    fs::remove_all(override_root);
    fs::create_directories(override_root);
    setenv("SEATS_WORKDIR", override_root.c_str(), 1);
    auto s = make_settings("envignored");
    ExecutionResult r = execute("echo 'SEATS_METRIC: 3.5'\n", s, "iter_00009");
    unsetenv("SEATS_WORKDIR");
    CHECK(r.status == ExecutionStatus::Ok);
    CHECK(fs::exists(override_root / "iter_00009" / "solution.sh"));
    CHECK_FALSE(fs::exists(fs::path(s.workdir) / "iter_00009"));
}

TEST_CASE("the execution summary excludes wall-clock time") {
    ExecutionResult r;
    r.status = ExecutionStatus::Ok;
    r.metric = 1.25;
    r.exit_code = 0;
    r.stdout_tail = "SEATS_METRIC: 1.25\n";
    r.duration_seconds = 123.0;
    std::string summary = make_execution_summary(r);
    CHECK(summary.find("123") == std::string::npos);
    CHECK(summary.find("status: ok") != std::string::npos);
    CHECK(summary.find("metric: 1.25") != std::string::npos);
}

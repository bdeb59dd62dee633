#pragma once

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "seats/errors.hpp"
#include "seats/util.hpp"

extern char** environ;

namespace seats {

constexpr std::size_t kOutputTailCap = 64 * 1024;

enum class ExecutionStatus { Ok, RuntimeError, Timeout, NoMetric };

inline std::string to_string(ExecutionStatus s) {
    switch (s) {
        case ExecutionStatus::Ok: return "ok";
        case ExecutionStatus::RuntimeError: return "runtime_error";
        case ExecutionStatus::Timeout: return "timeout";
        case ExecutionStatus::NoMetric: return "no_metric";
    }
    return "runtime_error";
}

inline ExecutionStatus execution_status_from_string(const std::string& s) {
    if (s == "ok") return ExecutionStatus::Ok;
    if (s == "runtime_error") return ExecutionStatus::RuntimeError;
    if (s == "timeout") return ExecutionStatus::Timeout;
    if (s == "no_metric") return ExecutionStatus::NoMetric;
    throw std::runtime_error("unknown execution status: " + s);
}

/// Outcome of one sandboxed run. status == Ok iff a finite metric was
/// extracted; anything else marks the node buggy.
struct ExecutionResult {
    ExecutionStatus status = ExecutionStatus::RuntimeError;
    std::optional<double> metric;
    std::optional<int> exit_code;
    std::string stdout_tail; // last 64 KiB
    std::string stderr_tail; // last 64 KiB
    double duration_seconds = 0.0;
};

struct SandboxSettings {
    std::vector<std::string> interpreter = {"sh"};
    std::string extension = ".sh";
    std::vector<std::string> data_paths; // symlinked read-only into each node dir
    std::string workdir;                 // workspace root; SEATS_WORKDIR env overrides
    double timeout_seconds = 3600.0;
};

/// Workspace root resolution: SEATS_WORKDIR env var wins over config.
inline std::filesystem::path resolve_workspace_root(const SandboxSettings& s) {
    if (const char* env = std::getenv("SEATS_WORKDIR"); env && *env) return std::filesystem::path(env);
    if (!s.workdir.empty()) return std::filesystem::path(s.workdir);
    throw SandboxError("no workspace root configured (set sandbox.workdir or SEATS_WORKDIR)");
}

/// Extracts the candidate's metric: the last stdout line of the form
/// "SEATS_METRIC: <decimal>" wins; otherwise a metrics.json file with a
/// top-level numeric "metric" field is accepted. Non-finite values count
/// as absent. A line and a file that disagree beyond 1e-9 signal a
/// misbehaving candidate.
inline std::optional<double> parse_metric(const std::string& stdout_text, const std::filesystem::path& workdir) {
    std::optional<double> line_value;
    for (const auto& raw_line : split_lines(stdout_text)) {
        std::string line = trim(raw_line);
        if (!line.starts_with("SEATS_METRIC:")) continue;
        std::string num = trim(line.substr(std::string("SEATS_METRIC:").size()));
        try {
            std::size_t used = 0;
            double v = std::stod(num, &used);
            if (used == num.size() && std::isfinite(v)) line_value = v;
        } catch (...) {
            // malformed line: not a match
        }
    }

    std::optional<double> file_value;
    auto metrics_path = workdir / "metrics.json";
    if (std::filesystem::exists(metrics_path)) {
        try {
            auto j = nlohmann::json::parse(read_file(metrics_path));
            if (j.is_object() && j.contains("metric") && j["metric"].is_number()) {
                double v = j["metric"].get<double>();
                if (std::isfinite(v)) file_value = v;
            }
        } catch (...) {
            // unreadable metrics.json counts as absent
        }
    }

    if (line_value && file_value && std::fabs(*line_value - *file_value) > 1e-9)
        throw MetricConflictError(*line_value, *file_value);
    if (line_value) return line_value;
    return file_value;
}

namespace detail {

inline void set_nonblocking(int fd) { fcntl(fd, F_SETFL, fcntl(fd, F_GETFL, 0) | O_NONBLOCK); }

} // namespace detail

/// Runs `code` as a subprocess in a fresh per-node directory under the
/// workspace root, with a wall-clock timeout and 64 KiB output tails.
/// The interpreter command is opaque: any language that satisfies the
/// metric contract executes identically.
inline ExecutionResult execute(const std::string& code, const SandboxSettings& settings,
                               const std::string& node_dir_name) {
    namespace fs = std::filesystem;
    if (settings.interpreter.empty()) throw SandboxError("no interpreter command configured");

    fs::path dir = resolve_workspace_root(settings) / node_dir_name;
    std::error_code ec;
    fs::remove_all(dir, ec); // a leftover dir from an unjournaled attempt is stale scratch
    fs::create_directories(dir);

    std::string solution_name = "solution" + settings.extension;
    write_file(dir / solution_name, code);
    for (const auto& data : settings.data_paths) {
        fs::path src = fs::absolute(data);
        fs::create_symlink(src, dir / src.filename(), ec);
        if (ec) throw SandboxError("cannot link data path " + src.string() + ": " + ec.message());
    }

    int out_pipe[2], err_pipe[2];
    if (pipe(out_pipe) != 0 || pipe(err_pipe) != 0) throw SandboxError("pipe() failed");

    std::vector<std::string> args = settings.interpreter;
    args.push_back(solution_name);
    std::vector<char*> argv;
    argv.reserve(args.size() + 1);
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);

    posix_spawn_file_actions_t fa;
    posix_spawn_file_actions_init(&fa);
    posix_spawn_file_actions_addchdir_np(&fa, dir.c_str());
    posix_spawn_file_actions_adddup2(&fa, out_pipe[1], 1);
    posix_spawn_file_actions_adddup2(&fa, err_pipe[1], 2);
    posix_spawn_file_actions_addclose(&fa, out_pipe[0]);
    posix_spawn_file_actions_addclose(&fa, err_pipe[0]);
    posix_spawn_file_actions_addclose(&fa, out_pipe[1]);
    posix_spawn_file_actions_addclose(&fa, err_pipe[1]);

    posix_spawnattr_t attr;
    posix_spawnattr_init(&attr);
    posix_spawnattr_setpgroup(&attr, 0); // own process group, so timeouts kill the whole tree
    posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);

    pid_t pid = -1;
    int spawn_rc = posix_spawnp(&pid, argv[0], &fa, &attr, argv.data(), environ);
    posix_spawn_file_actions_destroy(&fa);
    posix_spawnattr_destroy(&attr);
    close(out_pipe[1]);
    close(err_pipe[1]);
    if (spawn_rc != 0) {
        close(out_pipe[0]);
        close(err_pipe[0]);
        throw SandboxError("cannot spawn interpreter '" + args[0] + "': " + std::strerror(spawn_rc));
    }

    detail::set_nonblocking(out_pipe[0]);
    detail::set_nonblocking(err_pipe[0]);

    TailBuffer out_tail(kOutputTailCap), err_tail(kOutputTailCap);
    std::ofstream out_log(dir / "stdout.log", std::ios::binary);
    std::ofstream err_log(dir / "stderr.log", std::ios::binary);

    auto start = std::chrono::steady_clock::now();
    auto deadline = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                std::chrono::duration<double>(settings.timeout_seconds));

    bool out_open = true, err_open = true;
    bool timed_out = false;
    bool killed = false;
    bool reaped = false;
    int wait_status = 0;

    char buf[16384];
    while (out_open || err_open || !reaped) {
        if (!timed_out && std::chrono::steady_clock::now() >= deadline) timed_out = true;
        if (timed_out && !killed) {
            kill(-pid, SIGKILL);
            killed = true;
        }

        if (!reaped) {
            pid_t r = waitpid(pid, &wait_status, WNOHANG);
            if (r == pid) reaped = true;
        }

        struct pollfd fds[2];
        int nfds = 0;
        if (out_open) fds[nfds++] = {out_pipe[0], POLLIN, 0};
        if (err_open) fds[nfds++] = {err_pipe[0], POLLIN, 0};
        if (nfds > 0) poll(fds, static_cast<nfds_t>(nfds), 50);

        auto drain = [&](int fd, bool& open_flag, TailBuffer& tail, std::ofstream& log) {
            if (!open_flag) return;
            for (;;) {
                ssize_t n = read(fd, buf, sizeof(buf));
                if (n > 0) {
                    tail.append(buf, static_cast<std::size_t>(n));
                    log.write(buf, n);
                } else if (n == 0) {
                    open_flag = false;
                    close(fd);
                    break;
                } else {
                    if (errno == EAGAIN || errno == EWOULDBLOCK) break;
                    open_flag = false;
                    close(fd);
                    break;
                }
            }
        };
        drain(out_pipe[0], out_open, out_tail, out_log);
        drain(err_pipe[0], err_open, err_tail, err_log);
    }
    out_log.flush();
    err_log.flush();

    ExecutionResult result;
    result.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.stdout_tail = out_tail.str();
    result.stderr_tail = err_tail.str();

    if (timed_out) {
        result.status = ExecutionStatus::Timeout;
        return result;
    }
    int exit_code = WIFEXITED(wait_status) ? WEXITSTATUS(wait_status)
                                           : (WIFSIGNALED(wait_status) ? 128 + WTERMSIG(wait_status) : 1);
    result.exit_code = exit_code;
    if (exit_code != 0) {
        result.status = ExecutionStatus::RuntimeError;
        return result;
    }
    try {
        auto metric = parse_metric(result.stdout_tail, dir);
        if (metric) {
            result.metric = metric;
            result.status = ExecutionStatus::Ok;
        } else {
            result.status = ExecutionStatus::NoMetric;
        }
    } catch (const MetricConflictError&) {
        result.status = ExecutionStatus::NoMetric; // conflicting self-reports: trust neither
    }
    return result;
}

/// Deterministic one-screen summary of an execution, used as the start
/// of a node's analysis and as the review prompt's execution output.
/// Wall-clock duration is deliberately excluded so replays stay exact.
inline std::string make_execution_summary(const ExecutionResult& r) {
    std::string s = "status: " + to_string(r.status) + "\n";
    if (r.metric) s += "metric: " + format_double(*r.metric) + "\n";
    if (r.exit_code) s += "exit_code: " + std::to_string(*r.exit_code) + "\n";
    s += "stdout (tail):\n" + r.stdout_tail + "\n";
    s += "stderr (tail):\n" + r.stderr_tail + "\n";
    return s;
}

} // namespace seats

// Copyright (c) 2026, T2J harness contributors
// SPDX-License-Identifier: Apache-2.0
//
// Client side of the snippet runner. The runner is an external program:
//
//     runner <file> --timeout <seconds>
//
// which prints exactly one JSON object with the keys exit_code, stdout,
// stderr, wall_seconds and timed_out.

#pragma once

#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "t2j/error.hpp"

extern char** environ;

namespace t2j::runner {

namespace fs = std::filesystem;

struct RunResult {
    int exit_code = 0;
    std::string stdout_text;
    std::string stderr_text;
    double wall_seconds = 0.0;
    bool timed_out = false;

    bool operator==(const RunResult&) const = default;
};

inline nlohmann::ordered_json to_json(const RunResult& r) {
    nlohmann::ordered_json j;
    j["exit_code"] = r.exit_code;
    j["stdout"] = r.stdout_text;
    j["stderr"] = r.stderr_text;
    j["wall_seconds"] = r.wall_seconds;
    j["timed_out"] = r.timed_out;
    return j;
}

/// Strict parse of the runner's result object. Extra keys (e.g. metadata)
/// are allowed; the five contract keys must be present and well typed.
inline RunResult parse_run_result(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("runner result is not JSON: ") + e.what(), e.byte);
    }
    if (!j.is_object()) throw ValidationError("runner result must be a JSON object");
    auto need = [&](const char* key, auto check, const char* type) -> const nlohmann::json& {
        if (!j.contains(key)) {
            throw ValidationError(std::string("runner result lacks \"") + key + "\"");
        }
        const auto& v = j.at(key);
        if (!check(v)) {
            throw ValidationError(std::string("runner result \"") + key + "\" must be " + type);
        }
        return v;
    };
    RunResult r;
    r.exit_code = need("exit_code", [](auto& v) { return v.is_number_integer(); }, "an integer")
                      .template get<int>();
    r.stdout_text = need("stdout", [](auto& v) { return v.is_string(); }, "a string")
                        .template get<std::string>();
    r.stderr_text = need("stderr", [](auto& v) { return v.is_string(); }, "a string")
                        .template get<std::string>();
    r.wall_seconds = need("wall_seconds", [](auto& v) { return v.is_number(); }, "a number")
                         .template get<double>();
    r.timed_out = need("timed_out", [](auto& v) { return v.is_boolean(); }, "a boolean")
                      .template get<bool>();
    if (!(r.wall_seconds >= 0.0)) throw ValidationError("runner result wall_seconds is negative");
    return r;
}

inline bool is_executable(const fs::path& p) {
    std::error_code ec;
    return fs::is_regular_file(p, ec) && ::access(p.c_str(), X_OK) == 0;
}

/// Locates the runner: an explicit path, then $T2J_RUNNER, then `runner`
/// on $PATH.
inline fs::path resolve_runner(const std::optional<fs::path>& explicit_path = std::nullopt) {
    if (explicit_path && !explicit_path->empty()) {
        if (!is_executable(*explicit_path)) {
            throw ConfigError("runner " + explicit_path->string() + " is not an executable file");
        }
        return *explicit_path;
    }
    if (const char* env = std::getenv("T2J_RUNNER"); env && *env) {
        if (!is_executable(env)) {
            throw ConfigError(std::string("T2J_RUNNER=") + env + " is not an executable file");
        }
        return env;
    }
    if (const char* path = std::getenv("PATH")) {
        std::stringstream ss(path);
        std::string dir;
        while (std::getline(ss, dir, ':')) {
            if (dir.empty()) continue;
            const fs::path candidate = fs::path(dir) / "runner";
            if (is_executable(candidate)) return candidate;
        }
    }
    throw ConfigError("runner not found (pass --runner, set T2J_RUNNER or put `runner` on PATH)");
}

namespace detail {

struct Captured {
    int status = 0;
    std::string out;
    std::string err;
    bool killed = false;
};

inline std::string format_seconds(double s) {
    std::ostringstream os;
    os << s;
    return os.str();
}

/// Spawns argv, captures both streams, and kills the child if it outlives
/// `guard`.
inline Captured spawn_capture(const std::vector<std::string>& argv,
                              std::chrono::milliseconds guard) {
    int out_pipe[2], err_pipe[2];
    if (::pipe(out_pipe) != 0) throw IoError(std::string("pipe: ") + std::strerror(errno));
    if (::pipe(err_pipe) != 0) {
        ::close(out_pipe[0]);
        ::close(out_pipe[1]);
        throw IoError(std::string("pipe: ") + std::strerror(errno));
    }
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_addclose(&actions, out_pipe[0]);
    posix_spawn_file_actions_addclose(&actions, err_pipe[0]);
    posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
    posix_spawn_file_actions_adddup2(&actions, err_pipe[1], STDERR_FILENO);
    posix_spawn_file_actions_addclose(&actions, out_pipe[1]);
    posix_spawn_file_actions_addclose(&actions, err_pipe[1]);

    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);

    pid_t pid = 0;
    const int rc = ::posix_spawn(&pid, argv[0].c_str(), &actions, nullptr, args.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    ::close(out_pipe[1]);
    ::close(err_pipe[1]);
    if (rc != 0) {
        ::close(out_pipe[0]);
        ::close(err_pipe[0]);
        throw IoError("cannot start runner " + argv[0] + ": " + std::strerror(rc));
    }

    Captured cap;
    const auto deadline = std::chrono::steady_clock::now() + guard;
    pollfd fds[2] = {{out_pipe[0], POLLIN, 0}, {err_pipe[0], POLLIN, 0}};
    int open_fds = 2;
    char buf[8192];
    while (open_fds > 0) {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
            deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0 && !cap.killed) {
            ::kill(pid, SIGKILL);
            cap.killed = true;
        }
        // A grandchild may keep the pipes open after the kill; stop waiting.
        if (cap.killed && left.count() < -2000) break;
        const int ready = ::poll(fds, 2, cap.killed ? 1000 : static_cast<int>(std::min<long long>(
                                                              left.count(), 1000)));
        if (ready < 0) {
            if (errno == EINTR) continue;
            break;
        }
        for (int k = 0; k < 2; ++k) {
            if (fds[k].fd < 0 || !(fds[k].revents & (POLLIN | POLLHUP | POLLERR))) continue;
            const ssize_t n = ::read(fds[k].fd, buf, sizeof buf);
            if (n > 0) {
                (k == 0 ? cap.out : cap.err).append(buf, static_cast<std::size_t>(n));
            } else if (n == 0 || errno != EINTR) {
                ::close(fds[k].fd);
                fds[k].fd = -1;
                --open_fds;
            }
        }
    }
    for (auto& f : fds) {
        if (f.fd >= 0) ::close(f.fd);
    }
    while (::waitpid(pid, &cap.status, 0) < 0 && errno == EINTR) {
    }
    return cap;
}

}  // namespace detail

/// Runs one snippet through the runner and returns its parsed result.
inline RunResult invoke_runner(const fs::path& runner, const fs::path& file, double timeout_seconds) {
    if (!(timeout_seconds > 0.0)) throw ArgumentError("timeout must be positive");
    // Give the runner time to clean up after its own timeout before we step in.
    const auto guard = std::chrono::milliseconds(
        static_cast<long long>(std::ceil(timeout_seconds * 1000.0)) + 30000);
    auto cap = detail::spawn_capture(
        {runner.string(), file.string(), "--timeout", detail::format_seconds(timeout_seconds)},
        guard);
    if (cap.killed) {
        throw TransportError("runner did not finish within " +
                             detail::format_seconds(timeout_seconds + 30) + " s on " +
                             file.string());
    }
    const int code = WIFEXITED(cap.status) ? WEXITSTATUS(cap.status) : 128 + WTERMSIG(cap.status);
    if (code != 0) {
        throw IoError("runner failed on " + file.string() + " (exit " + std::to_string(code) +
                      "): " + cap.err);
    }
    try {
        return parse_run_result(cap.out);
    } catch (const Error& e) {
        throw IoError("runner produced an invalid result for " + file.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Timing study

struct SnippetSet {
    std::string name;
    std::vector<std::pair<std::string, fs::path>> items;  // (example id, file)
};

struct TimingTable {
    std::vector<std::string> set_names;
    std::vector<std::string> example_ids;  // union, first-appearance order
    /// cells[example][set]; absent when the set lacks the example.
    std::vector<std::vector<std::optional<RunResult>>> cells;

    double total(std::size_t set) const {
        double t = 0.0;
        for (const auto& row : cells) {
            if (row[set]) t += row[set]->wall_seconds;
        }
        return t;
    }
};

/// Executes every snippet once, sequentially so timings do not interfere.
inline TimingTable run_timing(const fs::path& runner, const std::vector<SnippetSet>& sets,
                              double timeout_seconds) {
    if (sets.empty()) throw ArgumentError("run_timing: no snippet sets");
    TimingTable t;
    std::map<std::string, std::size_t> row_of;
    for (const auto& s : sets) {
        t.set_names.push_back(s.name);
        for (const auto& [id, _] : s.items) {
            if (row_of.emplace(id, t.example_ids.size()).second) t.example_ids.push_back(id);
        }
    }
    t.cells.assign(t.example_ids.size(),
                   std::vector<std::optional<RunResult>>(sets.size(), std::nullopt));
    for (std::size_t si = 0; si < sets.size(); ++si) {
        for (const auto& [id, file] : sets[si].items) {
            t.cells[row_of.at(id)][si] = invoke_runner(runner, file, timeout_seconds);
        }
    }
    return t;
}

inline nlohmann::ordered_json to_json(const TimingTable& t) {
    nlohmann::ordered_json j;
    j["sets"] = t.set_names;
    auto& rows = j["rows"] = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < t.example_ids.size(); ++r) {
        nlohmann::ordered_json row;
        row["id"] = t.example_ids[r];
        for (std::size_t s = 0; s < t.set_names.size(); ++s) {
            const auto& c = t.cells[r][s];
            row[t.set_names[s]] = c ? to_json(*c) : nlohmann::ordered_json(nullptr);
        }
        rows.push_back(std::move(row));
    }
    auto& totals = j["totals"] = nlohmann::ordered_json::object();
    for (std::size_t s = 0; s < t.set_names.size(); ++s) totals[t.set_names[s]] = t.total(s);
    return j;
}

inline std::string to_markdown(const TimingTable& t) {
    auto cell = [](const std::optional<RunResult>& c) -> std::string {
        if (!c) return "-";
        std::ostringstream os;
        os.setf(std::ios::fixed);
        os.precision(2);
        os << c->wall_seconds;
        if (c->timed_out) os << " (timeout)";
        else if (c->exit_code != 0) os << " (exit " << c->exit_code << ")";
        return os.str();
    };
    std::ostringstream os;
    os << "| Example |";
    for (const auto& s : t.set_names) os << ' ' << s << " |";
    os << "\n|---|";
    for (std::size_t s = 0; s < t.set_names.size(); ++s) os << "---:|";
    os << '\n';
    for (std::size_t r = 0; r < t.example_ids.size(); ++r) {
        os << "| " << t.example_ids[r] << " |";
        for (std::size_t s = 0; s < t.set_names.size(); ++s) os << ' ' << cell(t.cells[r][s]) << " |";
        os << '\n';
    }
    os << "| Total |";
    os.setf(std::ios::fixed);
    os.precision(2);
    for (std::size_t s = 0; s < t.set_names.size(); ++s) os << ' ' << t.total(s) << " |";
    os << '\n';
    return os.str();
}

}  // namespace t2j::runner

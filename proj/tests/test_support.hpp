// Copyright (c) 2026, T2J harness contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace t2j_test {

namespace fs = std::filesystem;

inline fs::path fixture(const std::string& name) { return fs::path(T2J_FIXTURE_DIR) / name; }
inline fs::path golden(const std::string& name) { return fs::path(T2J_GOLDEN_DIR) / name; }

inline std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

// scratch directory removed on scope exit
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        std::random_device rd;
        path_ = fs::temp_directory_path() /
                ("t2j_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + "_" +
                 std::to_string(rd() % 100000));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

struct CliResult {
    int exit_code = -1;
    std::string out;
};

/// Runs the built CLI through the shell; stderr goes to `err_file` when set.
inline CliResult run_cli(const std::string& args, const std::string& stdin_text = "",
                         const fs::path& err_file = {}) {
    std::string cmd = std::string("'") + T2J_CLI_PATH + "' " + args;
    cmd += err_file.empty() ? " 2>/dev/null" : " 2>'" + err_file.string() + "'";
    TempDir tmp;
    if (!stdin_text.empty()) {
        spit(tmp / "stdin.txt", stdin_text);
        cmd += " <'" + (tmp / "stdin.txt").string() + "'";
    } else {
        cmd += " </dev/null";
    }
    CliResult r;
    FILE* p = ::popen(cmd.c_str(), "r");
    if (!p) return r;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
    const int status = ::pclose(p);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

}  // namespace t2j_test

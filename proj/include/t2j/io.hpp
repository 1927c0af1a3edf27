// Copyright (c) 2026, T2J harness contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include "t2j/error.hpp"

namespace t2j::io {

namespace fs = std::filesystem;

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        const int err = errno;
        if (err == ENOENT) throw NotFoundError("no such file: " + path.string());
        throw IoError("cannot open " + path.string() + ": " + std::strerror(err));
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Writes `content` to a temporary sibling, fsyncs it and renames it over
/// `path`. Readers observe either the old or the new file, never a mix.
inline void atomic_write_file(const fs::path& path, std::string_view content) {
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) {
        throw IoError("cannot create " + tmp.string() + ": " + std::strerror(errno));
    }
    std::size_t written = 0;
    while (written < content.size()) {
        ssize_t n = ::write(fd, content.data() + written, content.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            int err = errno;
            ::close(fd);
            ::unlink(tmp.c_str());
            throw IoError("write failed for " + tmp.string() + ": " + std::strerror(err));
        }
        written += static_cast<std::size_t>(n);
    }
    if (::fsync(fd) != 0 || ::close(fd) != 0) {
        int err = errno;
        ::unlink(tmp.c_str());
        throw IoError("cannot flush " + tmp.string() + ": " + std::strerror(err));
    }
    if (::rename(tmp.c_str(), path.c_str()) != 0) {
        int err = errno;
        ::unlink(tmp.c_str());
        throw IoError("cannot replace " + path.string() + ": " + std::strerror(err));
    }
}

/// Exclusive advisory lock on `<target>.lock`, held for the object's lifetime.
class FileLock {
public:
    explicit FileLock(const fs::path& target) {
        fs::path lock_path = target;
        lock_path += ".lock";
        fd_ = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
        if (fd_ < 0) {
            throw IoError("cannot open lock " + lock_path.string() + ": " + std::strerror(errno));
        }
        while (::flock(fd_, LOCK_EX) != 0) {
            if (errno != EINTR) {
                int err = errno;
                ::close(fd_);
                throw IoError("cannot lock " + lock_path.string() + ": " + std::strerror(err));
            }
        }
    }
    FileLock(const FileLock&) = delete;
    FileLock& operator=(const FileLock&) = delete;
    ~FileLock() {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }

private:
    int fd_ = -1;
};

}  // namespace t2j::io

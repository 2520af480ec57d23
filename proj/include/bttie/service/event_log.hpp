#pragma once

#include <bttie/errors.hpp>

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <fcntl.h>
#include <unistd.h>

namespace bttie::service {

namespace fs = std::filesystem;

// Append-only newline-delimited log. append() returns once the line is on
// disk (write + fsync).
class AppendLog {
public:
  AppendLog() = default;
  explicit AppendLog(fs::path path) : path_(std::move(path)) { open(); }
  AppendLog(const AppendLog&) = delete;
  AppendLog& operator=(const AppendLog&) = delete;
  AppendLog(AppendLog&& o) noexcept : path_(std::move(o.path_)), fd_(o.fd_) { o.fd_ = -1; }
  AppendLog& operator=(AppendLog&& o) noexcept {
    if (this != &o) {
      close();
      path_ = std::move(o.path_);
      fd_ = o.fd_;
      o.fd_ = -1;
    }
    return *this;
  }
  ~AppendLog() { close(); }

  const fs::path& path() const noexcept { return path_; }

  void append(const std::string& line) {
    std::string buf = line;
    buf += '\n';
    const char* p = buf.data();
    std::size_t left = buf.size();
    while (left > 0) {
      const auto n = ::write(fd_, p, left);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error("write to " + path_.string() + " failed: " + std::strerror(errno));
      }
      p += n;
      left -= static_cast<std::size_t>(n);
    }
    if (::fsync(fd_) != 0) throw Error("fsync of " + path_.string() + " failed: " + std::strerror(errno));
  }

  // Complete lines only; a torn final line from a crash is ignored.
  static std::vector<std::string> read_lines(const fs::path& path) {
    std::vector<std::string> out;
    std::ifstream in(path, std::ios::binary);
    if (!in) return out;
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t start = 0;
    for (std::size_t k = 0; k < content.size(); ++k)
      if (content[k] == '\n') {
        if (k > start) out.push_back(content.substr(start, k - start));
        start = k + 1;
      }
    return out;
  }

  // Replaces `path` atomically with `content`.
  static void write_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
      const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
      if (fd < 0) throw Error("cannot create " + tmp.string() + ": " + std::strerror(errno));
      const char* p = content.data();
      std::size_t left = content.size();
      while (left > 0) {
        const auto n = ::write(fd, p, left);
        if (n < 0) {
          if (errno == EINTR) continue;
          ::close(fd);
          throw Error("write to " + tmp.string() + " failed");
        }
        p += n;
        left -= static_cast<std::size_t>(n);
      }
      ::fsync(fd);
      ::close(fd);
    }
    fs::rename(tmp, path);
  }

private:
  // Cuts a torn tail back to the last newline so new records start on a
  // fresh line.
  void drop_torn_tail() {
    std::error_code ec;
    const auto size = fs::file_size(path_, ec);
    if (ec || size == 0) return;
    std::ifstream in(path_, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (content.back() == '\n') return;
    const auto last = content.find_last_of('\n');
    fs::resize_file(path_, last == std::string::npos ? 0 : last + 1);
  }

  void open() {
    drop_torn_tail();
    fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
    if (fd_ < 0) throw Error("cannot open log " + path_.string() + ": " + std::strerror(errno));
  }
  void close() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

  fs::path path_;
  int fd_ = -1;
};

} // namespace bttie::service

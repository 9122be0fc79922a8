#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace btk::testing {

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("btk-test-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  out << contents;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct CommandResult {
  int status = -1;
  std::string out;
};

// Runs a shell command capturing stdout; stderr goes to /dev/null unless
// stderr_path is given.
inline CommandResult run_command(const std::string& command, const std::string& stderr_path = {}) {
  const std::string redirect = stderr_path.empty() ? " 2>/dev/null" : " 2>" + stderr_path;
  FILE* proc = ::popen((command + redirect).c_str(), "r");
  CommandResult result;
  if (!proc) return result;
  char buf[1024];
  while (std::fgets(buf, sizeof(buf), proc)) result.out += buf;
  const int raw = ::pclose(proc);
  result.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return result;
}

inline std::string cli_path() { return BTK_CLI_PATH; }

}  // namespace btk::testing

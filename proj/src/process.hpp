#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace semfilter::detail {

/// Resolves a bare command name against $PATH; names containing '/' are checked as given.
std::optional<std::filesystem::path> find_executable(const std::string& name);

struct ProcessOutcome {
  int exit_code = 0;  // negative: killed by that signal
  std::string output; // combined stdout and stderr
};

/// Runs argv[0] without a shell, capturing both output streams into `log_file`.
ProcessOutcome run_process(const std::vector<std::string>& argv, const std::filesystem::path& log_file);

/// Private directory under the system temp path, removed on destruction.
class TempDir {
public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }

private:
  std::filesystem::path path_;
};

}  // namespace semfilter::detail

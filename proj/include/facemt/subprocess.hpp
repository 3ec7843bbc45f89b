#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace facemt {

/// Child process with piped stdin/stdout (and optionally stderr). The
/// destructor kills and reaps a child that is still running.
class Subprocess {
 public:
  using Clock = std::chrono::steady_clock;

  enum class StderrMode { Capture, Inherit, Discard };
  enum class ReadStatus { Line, Timeout, Eof };

  /// Throws TransportError when the process cannot be started.
  static Subprocess spawn(const std::vector<std::string>& argv, StderrMode stderr_mode);

  Subprocess(Subprocess&& other) noexcept;
  Subprocess& operator=(Subprocess&& other) noexcept;
  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;
  ~Subprocess();

  /// False when the child has closed its end.
  bool write_all(std::string_view data);
  void close_stdin();

  /// Next newline-terminated line from stdout (newline stripped).
  ReadStatus read_line(std::string& line, Clock::time_point deadline);

  /// Drains stdout and captured stderr until both reach EOF. False on timeout.
  bool read_to_end(std::string& out, std::string& err, Clock::time_point deadline);

  /// Exit code (128 + signal for signalled children), or nullopt if the child
  /// is still running at the deadline.
  std::optional<int> wait(Clock::time_point deadline);

  void kill();
  int pid() const noexcept { return pid_; }

 private:
  Subprocess() = default;
  void close_all() noexcept;

  int pid_ = -1;
  int stdin_fd_ = -1;
  int stdout_fd_ = -1;
  int stderr_fd_ = -1;
  std::string line_buffer_;
  std::optional<int> exit_code_;
};

/// argv running `command_template` through /bin/sh with `args` appended as
/// separate, unquoted-safe positional arguments.
std::vector<std::string> shell_command(const std::string& command_template,
                                       const std::vector<std::string>& args = {});

}  // namespace facemt

#include "facemt/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>
#include <thread>

#include "facemt/errors.hpp"

extern char** environ;

namespace facemt {

namespace {

void ignore_sigpipe_once() {
  static std::once_flag flag;
  std::call_once(flag, [] { ::signal(SIGPIPE, SIG_IGN); });
}

struct Pipe {
  int read = -1;
  int write = -1;
};

Pipe make_pipe() {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) throw TransportError(std::string("pipe: ") + std::strerror(errno));
  return {fds[0], fds[1]};
}

void close_fd(int& fd) noexcept {
  if (fd >= 0) {
    ::close(fd);
    fd = -1;
  }
}

int remaining_ms(Subprocess::Clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Subprocess::Clock::now());
  return left.count() <= 0 ? 0 : static_cast<int>(std::min<long long>(left.count(), 1 << 30));
}

int decode_status(int status) {
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return -1;
}

}  // namespace

Subprocess Subprocess::spawn(const std::vector<std::string>& argv, StderrMode stderr_mode) {
  if (argv.empty()) throw TransportError("empty command");
  ignore_sigpipe_once();

  Pipe in = make_pipe();
  Pipe out = make_pipe();
  Pipe err;
  if (stderr_mode == StderrMode::Capture) err = make_pipe();

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in.read, 0);
  posix_spawn_file_actions_adddup2(&actions, out.write, 1);
  if (stderr_mode == StderrMode::Capture) {
    posix_spawn_file_actions_adddup2(&actions, err.write, 2);
  } else if (stderr_mode == StderrMode::Discard) {
    posix_spawn_file_actions_addopen(&actions, 2, "/dev/null", O_WRONLY, 0);
  }

  std::vector<char*> cargv;
  cargv.reserve(argv.size() + 1);
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);

  pid_t pid = -1;
  const int rc = ::posix_spawnp(&pid, cargv[0], &actions, nullptr, cargv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  close_fd(in.read);
  close_fd(out.write);
  close_fd(err.write);
  if (rc != 0) {
    close_fd(in.write);
    close_fd(out.read);
    close_fd(err.read);
    throw TransportError("cannot start '" + argv[0] + "': " + std::strerror(rc));
  }

  Subprocess proc;
  proc.pid_ = pid;
  proc.stdin_fd_ = in.write;
  proc.stdout_fd_ = out.read;
  proc.stderr_fd_ = err.read;
  return proc;
}

Subprocess::Subprocess(Subprocess&& other) noexcept { *this = std::move(other); }

Subprocess& Subprocess::operator=(Subprocess&& other) noexcept {
  if (this != &other) {
    if (pid_ > 0) kill();
    close_all();
    pid_ = std::exchange(other.pid_, -1);
    stdin_fd_ = std::exchange(other.stdin_fd_, -1);
    stdout_fd_ = std::exchange(other.stdout_fd_, -1);
    stderr_fd_ = std::exchange(other.stderr_fd_, -1);
    line_buffer_ = std::move(other.line_buffer_);
    exit_code_ = std::exchange(other.exit_code_, std::nullopt);
  }
  return *this;
}

Subprocess::~Subprocess() {
  if (pid_ > 0) kill();
  close_all();
}

void Subprocess::close_all() noexcept {
  close_fd(stdin_fd_);
  close_fd(stdout_fd_);
  close_fd(stderr_fd_);
}

bool Subprocess::write_all(std::string_view data) {
  while (!data.empty()) {
    if (stdin_fd_ < 0) return false;
    const ssize_t n = ::write(stdin_fd_, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

void Subprocess::close_stdin() { close_fd(stdin_fd_); }

Subprocess::ReadStatus Subprocess::read_line(std::string& line, Clock::time_point deadline) {
  for (;;) {
    if (const auto nl = line_buffer_.find('\n'); nl != std::string::npos) {
      line.assign(line_buffer_, 0, nl);
      line_buffer_.erase(0, nl + 1);
      return ReadStatus::Line;
    }
    if (stdout_fd_ < 0) return ReadStatus::Eof;
    pollfd pfd{stdout_fd_, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, remaining_ms(deadline));
    if (rc < 0) {
      if (errno == EINTR) continue;
      return ReadStatus::Eof;
    }
    if (rc == 0) return ReadStatus::Timeout;
    char chunk[4096];
    const ssize_t n = ::read(stdout_fd_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      close_fd(stdout_fd_);
      if (!line_buffer_.empty()) {
        line = std::exchange(line_buffer_, {});
        return ReadStatus::Line;
      }
      return ReadStatus::Eof;
    }
    line_buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

bool Subprocess::read_to_end(std::string& out, std::string& err, Clock::time_point deadline) {
  out = std::exchange(line_buffer_, {});
  while (stdout_fd_ >= 0 || stderr_fd_ >= 0) {
    pollfd pfds[2];
    int count = 0;
    int* owners[2];
    if (stdout_fd_ >= 0) {
      pfds[count] = {stdout_fd_, POLLIN, 0};
      owners[count++] = &stdout_fd_;
    }
    if (stderr_fd_ >= 0) {
      pfds[count] = {stderr_fd_, POLLIN, 0};
      owners[count++] = &stderr_fd_;
    }
    const int rc = ::poll(pfds, static_cast<nfds_t>(count), remaining_ms(deadline));
    if (rc < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    if (rc == 0) return false;
    for (int i = 0; i < count; ++i) {
      if (pfds[i].revents == 0) continue;
      char chunk[4096];
      const ssize_t n = ::read(*owners[i], chunk, sizeof chunk);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        close_fd(*owners[i]);
        continue;
      }
      (owners[i] == &stdout_fd_ ? out : err).append(chunk, static_cast<std::size_t>(n));
    }
  }
  return true;
}

std::optional<int> Subprocess::wait(Clock::time_point deadline) {
  if (exit_code_) return exit_code_;
  if (pid_ <= 0) return std::nullopt;
  auto pause = std::chrono::milliseconds(1);
  for (;;) {
    int status = 0;
    const pid_t rc = ::waitpid(pid_, &status, WNOHANG);
    if (rc == pid_) {
      exit_code_ = decode_status(status);
      pid_ = -1;
      return exit_code_;
    }
    if (rc < 0 && errno != EINTR) return std::nullopt;
    if (Clock::now() >= deadline) return std::nullopt;
    std::this_thread::sleep_for(pause);
    pause = std::min(pause * 2, std::chrono::milliseconds(20));
  }
}

void Subprocess::kill() {
  if (pid_ <= 0) return;
  ::kill(pid_, SIGKILL);
  int status = 0;
  while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
  }
  exit_code_ = decode_status(status);
  pid_ = -1;
}

std::vector<std::string> shell_command(const std::string& command_template,
                                       const std::vector<std::string>& args) {
  std::vector<std::string> argv{"/bin/sh", "-c", command_template + " \"$@\"", "facemt"};
  argv.insert(argv.end(), args.begin(), args.end());
  return argv;
}

}  // namespace facemt

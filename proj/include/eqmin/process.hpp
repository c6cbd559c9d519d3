#pragma once

// Running an external prover: spawn, collect stdout and stderr, kill hard
// once the wall-clock limit has passed.

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <string>
#include <vector>

#include "eqmin/errors.hpp"

extern char** environ;

namespace eqmin {

struct ProcessResult {
  int exit_code = -1;  // -1 when killed or not exited normally
  bool killed = false;
  std::string output;  // stdout followed by stderr interleaved as read
  double seconds = 0;
};

/// Runs `argv` (argv[0] is looked up on PATH) and kills it with SIGKILL
/// after `kill_after` seconds. Throws Error when the process cannot start.
inline ProcessResult run_process(const std::vector<std::string>& argv, double kill_after) {
  if (argv.empty()) throw Error("empty command line");
  int fds[2];
  if (pipe(fds) != 0) throw Error(std::string("pipe: ") + std::strerror(errno));

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, fds[1], STDOUT_FILENO);
  posix_spawn_file_actions_adddup2(&actions, fds[1], STDERR_FILENO);
  posix_spawn_file_actions_addclose(&actions, fds[0]);
  posix_spawn_file_actions_addclose(&actions, fds[1]);
  posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null", O_RDONLY, 0);

  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  auto start = std::chrono::steady_clock::now();
  pid_t pid = 0;
  int rc = posix_spawnp(&pid, args[0], &actions, nullptr, args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  close(fds[1]);
  if (rc != 0) {
    close(fds[0]);
    throw Error("cannot start " + argv[0] + ": " + std::strerror(rc));
  }

  ProcessResult out;
  auto deadline = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                              std::chrono::duration<double>(kill_after));
  char buf[4096];
  bool open = true;
  while (open) {
    auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      kill(pid, SIGKILL);
      out.killed = true;
      break;
    }
    int wait_ms = static_cast<int>(std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count()) + 1;
    pollfd p{fds[0], POLLIN, 0};
    int r = poll(&p, 1, wait_ms);
    if (r < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (r == 0) continue;
    ssize_t n = read(fds[0], buf, sizeof buf);
    if (n > 0) out.output.append(buf, static_cast<std::size_t>(n));
    else if (n == 0 || errno != EINTR) open = false;
  }
  close(fds[0]);
  int status = 0;
  // the output may close before the process exits
  for (;;) {
    pid_t w = waitpid(pid, &status, out.killed ? 0 : WNOHANG);
    if (w == pid) break;
    if (w < 0 && errno != EINTR) break;
    if (w == 0) {
      if (std::chrono::steady_clock::now() >= deadline) {
        kill(pid, SIGKILL);
        out.killed = true;
      } else {
        usleep(5000);
      }
    }
  }
  if (!out.killed && WIFEXITED(status)) out.exit_code = WEXITSTATUS(status);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace eqmin

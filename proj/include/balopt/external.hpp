// Copyright 2026 The balopt Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Objective backend that scores a configuration by running an external
// command. The hyperparameters are exported through environment variables
// and the last non-empty line of standard output is parsed as the score.

#pragma once

#include <cerrno>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdlib>
#include <string>

#include <poll.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "balopt/errors.hpp"
#include "balopt/reparam.hpp"
#include "balopt/text.hpp"

namespace balopt {

struct ExternalCommandSpec {
  std::string command;          // run through /bin/sh -c
  double timeout_seconds = 0.0; // 0 disables the timeout
  std::string lambda_p_env = "LAMBDA_P";
  std::string lambda_e_env = "LAMBDA_E";
  std::string batch_size_env = "BATCH_SIZE";
};

inline void validate(const ExternalCommandSpec& spec) {
  if (spec.command.empty()) throw InvalidConfig("command template is empty");
  if (spec.timeout_seconds < 0.0)
    throw InvalidConfig("timeout must be nonnegative");
}

// Training commands take an even integer batch size (two instances per
// class); the continuous search value is snapped here, never inside the
// search itself.
inline long long round_batch_size(double batch_size) {
  const long long half = std::llround(batch_size / 2.0);
  return std::max<long long>(2, 2 * half);
}

namespace detail {

struct CommandResult {
  int exit_code = -1;
  std::string output;
};

inline CommandResult run_command(const ExternalCommandSpec& spec,
                                 const HyperConfig& h) {
  int fds[2];
  if (pipe(fds) != 0) throw CommandFailed("pipe() failed");
  const pid_t pid = fork();
  if (pid < 0) {
    close(fds[0]);
    close(fds[1]);
    throw CommandFailed("fork() failed");
  }
  if (pid == 0) {
    setpgid(0, 0);  // own process group, so a timeout can kill children too
    close(fds[0]);
    dup2(fds[1], STDOUT_FILENO);
    close(fds[1]);
    setenv(spec.lambda_p_env.c_str(),
           text::format_double(h.lambda_p_rate).c_str(), 1);
    setenv(spec.lambda_e_env.c_str(),
           text::format_double(h.lambda_e_rate).c_str(), 1);
    setenv(spec.batch_size_env.c_str(),
           std::to_string(round_batch_size(h.batch_size)).c_str(), 1);
    execl("/bin/sh", "sh", "-c", spec.command.c_str(), (char*)nullptr);
    _exit(127);
  }
  close(fds[1]);
  const auto deadline =
      std::chrono::steady_clock::now() +
      std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          std::chrono::duration<double>(spec.timeout_seconds));
  CommandResult result;
  char buf[4096];
  bool timed_out = false;
  while (true) {
    int wait_ms = -1;
    if (spec.timeout_seconds > 0.0) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                            deadline - std::chrono::steady_clock::now())
                            .count();
      if (left <= 0) {
        timed_out = true;
        break;
      }
      wait_ms = static_cast<int>(std::min<long long>(left, 200));
    }
    pollfd pfd{fds[0], POLLIN, 0};
    const int ready = poll(&pfd, 1, wait_ms);
    if (ready < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (ready == 0) continue;
    const ssize_t n = read(fds[0], buf, sizeof buf);
    if (n < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (n == 0) break;  // EOF
    result.output.append(buf, static_cast<size_t>(n));
  }
  close(fds[0]);
  if (timed_out) {
    kill(-pid, SIGKILL);
    kill(pid, SIGKILL);
    int status = 0;
    waitpid(pid, &status, 0);
    throw TimedOut("command exceeded " +
                   text::format_double(spec.timeout_seconds) + "s: " +
                   spec.command);
  }
  int status = 0;
  waitpid(pid, &status, 0);
  if (WIFEXITED(status))
    result.exit_code = WEXITSTATUS(status);
  else
    result.exit_code = -1;
  return result;
}

}  // namespace detail

inline double external_eval(const ExternalCommandSpec& spec,
                            const HyperConfig& h) {
  validate(spec);
  validate(h);
  const auto result = detail::run_command(spec, h);
  if (result.exit_code != 0)
    throw CommandFailed("exit status " + std::to_string(result.exit_code) +
                        " from: " + spec.command);
  std::string last;
  for (const auto& line : text::split_lines(result.output)) {
    const auto trimmed = text::trim(line);
    if (!trimmed.empty()) last = std::string(trimmed);
  }
  if (last.empty())
    throw ParseFailed("command produced no output: " + spec.command);
  try {
    return text::parse_double(last);
  } catch (const FormatError&) {
    throw ParseFailed("last output line is not a score: '" + last + "'");
  }
}

}  // namespace balopt

#include "hpcserve/execute.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <thread>

#include "hpcserve/error.hpp"
#include "hpcserve/shell.hpp"

namespace hpcserve {

namespace {

bool is_executable(const std::filesystem::path& p) {
  struct stat st {};
  return ::stat(p.c_str(), &st) == 0 && S_ISREG(st.st_mode) && ::access(p.c_str(), X_OK) == 0;
}

std::filesystem::path resolve_binary(const RenderedArtifact& artifact, const ExecOptions& options) {
  const std::string name = options.binary_override ? *options.binary_override : artifact.program;
  if (name.empty())
    throw Error(ErrorKind::binary_not_found,
                "artifact " + artifact.provenance + " is not an executable command");
  if (name.find('/') != std::string::npos) {
    if (is_executable(name)) return name;
    throw Error(ErrorKind::binary_not_found, "binary not found: " + name);
  }
  if (auto p = find_on_path(name)) return *p;
  throw Error(ErrorKind::binary_not_found, "binary not found on PATH: " + name);
}

std::string script_for(const RenderedArtifact& artifact, const std::filesystem::path& binary) {
  const std::string& content = artifact.content;
  const std::string& program = artifact.program;
  if (content.rfind(program, 0) != 0 ||
      (content.size() > program.size() && !std::isspace(static_cast<unsigned char>(content[program.size()]))))
    throw ValidationError("content", "artifact does not start with " + program);
  return shell_quote(binary.string()) + content.substr(program.size());
}

void kill_group(pid_t pid) {
  ::kill(-pid, SIGTERM);
  for (int i = 0; i < 20; ++i) {
    if (::waitpid(pid, nullptr, WNOHANG) == pid) return;
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  ::kill(-pid, SIGKILL);
  ::waitpid(pid, nullptr, 0);
}

}  // namespace

std::optional<std::filesystem::path> find_on_path(std::string_view name) {
  const char* path = std::getenv("PATH");
  if (!path) return std::nullopt;
  std::string_view rest(path);
  while (true) {
    const auto colon = rest.find(':');
    const std::string dir(rest.substr(0, colon));
    const std::filesystem::path candidate = std::filesystem::path(dir.empty() ? "." : dir) / name;
    if (is_executable(candidate)) return candidate;
    if (colon == std::string_view::npos) break;
    rest = rest.substr(colon + 1);
  }
  return std::nullopt;
}

ExecResult SystemProcessRunner::run(const RenderedArtifact& artifact, const ExecOptions& options) {
  ExecResult result;
  result.binary = resolve_binary(artifact, options);
  const std::string script = script_for(artifact, result.binary);

  std::vector<std::pair<std::string, std::string>> env;
  for (const auto& e : artifact.env) {
    env.emplace_back(e.name, expand_env(e.value, [](const std::string& n) -> std::optional<std::string> {
                       if (const char* v = std::getenv(n.c_str())) return std::string(v);
                       return std::nullopt;
                     }));
  }

  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0)
    throw Error(ErrorKind::non_zero_exit, std::string("pipe: ") + std::strerror(errno));

  const auto start = std::chrono::steady_clock::now();
  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(fds[0]);
    ::close(fds[1]);
    throw Error(ErrorKind::non_zero_exit, std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(fds[1], STDOUT_FILENO);
    ::dup2(fds[1], STDERR_FILENO);
    const int devnull = ::open("/dev/null", O_RDONLY);
    if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
    for (const auto& [k, v] : env) ::setenv(k.c_str(), v.c_str(), 1);
    ::execl("/bin/sh", "sh", "-c", script.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  ::close(fds[1]);

  const bool watchdog = options.timeout.count() > 0;
  const auto deadline = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(options.timeout);
  char buf[4096];
  while (true) {
    int wait_ms = -1;
    if (watchdog) {
      const auto left = deadline - std::chrono::steady_clock::now();
      if (left <= std::chrono::steady_clock::duration::zero()) {
        result.timed_out = true;
        break;
      }
      wait_ms = static_cast<int>(std::chrono::duration_cast<std::chrono::milliseconds>(left).count()) + 1;
    }
    pollfd pfd{fds[0], POLLIN, 0};
    const int rc = ::poll(&pfd, 1, wait_ms);
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (rc == 0) continue;
    const ssize_t n = ::read(fds[0], buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    result.output.append(buf, static_cast<std::size_t>(n));
    if (options.stream) options.stream->write(buf, n).flush();
  }
  ::close(fds[0]);

  if (result.timed_out) {
    kill_group(pid);
    result.exit_code = -1;
  } else {
    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    if (WIFEXITED(status)) {
      result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
      result.exit_code = 128 + WTERMSIG(status);
    }
  }
  result.elapsed = std::chrono::steady_clock::now() - start;
  return result;
}

ExecResult execute(ProcessRunner& runner, const RenderedArtifact& artifact,
                   const ExecOptions& options) {
  ExecResult r = runner.run(artifact, options);
  if (r.timed_out)
    throw TimeoutError(r.binary.filename().string() + " timed out after " +
                           std::to_string(r.elapsed.count()) + " s",
                       r.elapsed);
  if (r.exit_code != 0)
    throw NonZeroExitError(r.binary.filename().string() + " exited with code " +
                               std::to_string(r.exit_code),
                           r.exit_code);
  return r;
}

}  // namespace hpcserve

#include <fcntl.h>
#include <sched.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/stat.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "tmpc/errors.hpp"
#include "tmpc/rewards.hpp"

namespace tmpc {
namespace {

namespace fs = std::filesystem;

// Installed before any candidate code runs. Blocks network, process spawning,
// and writes or destructive filesystem calls outside the working directory.
// Kernel-level isolation (new net/user namespace) is layered on top where the
// host allows it; this guard is the portable floor.
constexpr const char* kAuditPrelude = R"PY(
import sys as _tmpc_sys, os as _tmpc_os
_TMPC_ROOT = _tmpc_os.path.realpath(_tmpc_os.getcwd())
_TMPC_BLOCKED = (
    "socket.connect", "socket.bind", "socket.sendto", "socket.sendmsg",
    "socket.getaddrinfo", "socket.gethostbyname", "socket.gethostbyaddr",
    "socket.getnameinfo", "subprocess.Popen", "os.system", "os.posix_spawn",
    "os.spawn", "os.exec", "os.fork", "os.forkpty",
)
_TMPC_PATHED = ("os.remove", "os.unlink", "os.rmdir", "os.rename", "os.replace",
                "os.truncate", "shutil.rmtree")

def _tmpc_outside(path):
    try:
        real = _tmpc_os.path.realpath(_tmpc_os.fspath(path))
    except TypeError:
        return False
    return not (real == _TMPC_ROOT or real.startswith(_TMPC_ROOT + _tmpc_os.sep))

def _tmpc_guard(event, args):
    if event in _TMPC_BLOCKED:
        raise RuntimeError("sandbox: blocked " + event)
    if event == "open":
        path, mode, flags = args
        if isinstance(path, int):
            return
        if mode:
            writing = any(m in mode for m in ("w", "a", "x", "+"))
        else:
            writing = bool(flags & (_tmpc_os.O_WRONLY | _tmpc_os.O_RDWR |
                                    _tmpc_os.O_APPEND | _tmpc_os.O_CREAT |
                                    _tmpc_os.O_TRUNC))
        if writing and _tmpc_outside(path):
            raise RuntimeError("sandbox: write outside working directory")
    elif event in _TMPC_PATHED:
        if args and not isinstance(args[0], int) and _tmpc_outside(args[0]):
            raise RuntimeError("sandbox: blocked " + event + " outside working directory")

_tmpc_sys.addaudithook(_tmpc_guard)
del _tmpc_guard
)PY";

// Bounds the number of live candidate processes across all threads.
class ChildGate {
public:
    explicit ChildGate(int limit) : limit_(limit > 0 ? limit : 1) {}

    void acquire() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return active_ < limit_; });
        ++active_;
    }

    void release() {
        {
            std::lock_guard lock(mutex_);
            --active_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    int limit_;
    int active_ = 0;
};

ChildGate& gate_for(const SandboxConfig& config) {
    static std::mutex mutex;
    static int limit = 0;
    static ChildGate* gate = nullptr;
    std::lock_guard lock(mutex);
    int want = config.max_concurrent;
    if (want <= 0) {
        want = static_cast<int>(std::thread::hardware_concurrency());
        if (want <= 0) {
            want = 1;
        }
    }
    if (gate == nullptr) {
        limit = want;
        gate = new ChildGate(limit);
    }
    return *gate;
}

std::string resolve_executable(const std::string& name) {
    if (name.find('/') != std::string::npos) {
        return name;
    }
    const char* path_env = std::getenv("PATH");
    std::string path = path_env != nullptr ? path_env : "/usr/local/bin:/usr/bin:/bin";
    std::size_t start = 0;
    while (start <= path.size()) {
        const std::size_t end = path.find(':', start);
        const std::string dir = path.substr(start, end == std::string::npos ? end : end - start);
        if (!dir.empty()) {
            const std::string candidate = dir + "/" + name;
            if (::access(candidate.c_str(), X_OK) == 0) {
                return candidate;
            }
        }
        if (end == std::string::npos) {
            break;
        }
        start = end + 1;
    }
    throw InfrastructureError("sandbox: cannot find executable " + name);
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) {
        throw InfrastructureError("sandbox: cannot write " + path.string());
    }
    out << content;
    out.close();
    if (!out) {
        throw InfrastructureError("sandbox: short write to " + path.string());
    }
}

struct ChildSpec {
    std::string executable;
    std::vector<std::string> args;
    std::vector<std::string> env;
    std::string working_dir;
    std::size_t memory_limit_bytes = 0;
    std::chrono::milliseconds wall_timeout{0};
};

// Runs one candidate process to completion. Returns true when it exits 0
// within the deadline. Throws InfrastructureError only for harness faults.
bool run_child(const ChildSpec& spec) {
    std::vector<char*> argv;
    argv.reserve(spec.args.size() + 1);
    for (const std::string& a : spec.args) {
        argv.push_back(const_cast<char*>(a.c_str()));
    }
    argv.push_back(nullptr);
    std::vector<char*> envp;
    envp.reserve(spec.env.size() + 1);
    for (const std::string& e : spec.env) {
        envp.push_back(const_cast<char*>(e.c_str()));
    }
    envp.push_back(nullptr);

    int exec_pipe[2];
    if (::pipe2(exec_pipe, O_CLOEXEC) != 0) {
        throw InfrastructureError("sandbox: pipe2 failed: " + std::string(std::strerror(errno)));
    }

    const pid_t pid = ::fork();
    if (pid < 0) {
        ::close(exec_pipe[0]);
        ::close(exec_pipe[1]);
        throw InfrastructureError("sandbox: fork failed: " + std::string(std::strerror(errno)));
    }

    if (pid == 0) {
        ::close(exec_pipe[0]);
        ::setsid();

        // Kernel-level network isolation when the host permits it; the audit
        // prelude remains the fallback.
        if (::unshare(CLONE_NEWUSER | CLONE_NEWNET) != 0) {
            (void)::unshare(CLONE_NEWNET);
        }

        if (::chdir(spec.working_dir.c_str()) != 0) {
            const int err = errno;
            (void)!::write(exec_pipe[1], &err, sizeof(err));
            ::_exit(127);
        }

        rlimit mem{spec.memory_limit_bytes, spec.memory_limit_bytes};
        (void)::setrlimit(RLIMIT_AS, &mem);
        const auto cpu_seconds =
            static_cast<rlim_t>(spec.wall_timeout.count() / 1000 + 2);
        rlimit cpu{cpu_seconds, cpu_seconds};
        (void)::setrlimit(RLIMIT_CPU, &cpu);
        rlimit fsize{16ull * 1024 * 1024, 16ull * 1024 * 1024};
        (void)::setrlimit(RLIMIT_FSIZE, &fsize);
        rlimit core{0, 0};
        (void)::setrlimit(RLIMIT_CORE, &core);

        const int devnull = ::open("/dev/null", O_RDWR);
        if (devnull >= 0) {
            ::dup2(devnull, STDIN_FILENO);
            ::dup2(devnull, STDOUT_FILENO);
            ::dup2(devnull, STDERR_FILENO);
            if (devnull > STDERR_FILENO) {
                ::close(devnull);
            }
        }

        ::execve(spec.executable.c_str(), argv.data(), envp.data());
        const int err = errno;
        (void)!::write(exec_pipe[1], &err, sizeof(err));
        ::_exit(127);
    }

    ::close(exec_pipe[1]);
    int exec_errno = 0;
    const ssize_t got = ::read(exec_pipe[0], &exec_errno, sizeof(exec_errno));
    ::close(exec_pipe[0]);
    // got > 0 means exec (or pre-exec setup) failed; reap and report.

    const auto deadline = std::chrono::steady_clock::now() + spec.wall_timeout;
    int status = 0;
    bool timed_out = false;
    for (;;) {
        const pid_t done = ::waitpid(pid, &status, WNOHANG);
        if (done == pid) {
            break;
        }
        if (done < 0) {
            throw InfrastructureError("sandbox: waitpid failed: " +
                                      std::string(std::strerror(errno)));
        }
        if (std::chrono::steady_clock::now() >= deadline) {
            timed_out = true;
            ::kill(-pid, SIGKILL);
            ::kill(pid, SIGKILL);
            ::waitpid(pid, &status, 0);
            break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }

    if (got > 0) {
        throw InfrastructureError("sandbox: exec failed: " +
                                  std::string(std::strerror(exec_errno)));
    }
    if (timed_out) {
        return false;
    }
    return WIFEXITED(status) && WEXITSTATUS(status) == 0;
}

} // namespace

PassRateResult pass_rate(const std::string& candidate_code, const TestSuite& suite,
                         const SandboxConfig& sandbox) {
    if (suite.cases.empty()) {
        throw ContractViolation("pass_rate: suite needs at least one case");
    }
    if (suite.per_test_timeout.count() <= 0) {
        throw ContractViolation("pass_rate: per_test_timeout must be positive");
    }

    const std::string python = resolve_executable(sandbox.python_executable);

    char root_template[] = "/tmp/tmpc-sbx-XXXXXX";
    if (::mkdtemp(root_template) == nullptr) {
        throw InfrastructureError("sandbox: mkdtemp failed: " +
                                  std::string(std::strerror(errno)));
    }
    const fs::path root(root_template);

    std::vector<std::string> env;
    for (const std::string& key : sandbox.env_allowlist) {
        if (const char* value = std::getenv(key.c_str())) {
            env.push_back(key + "=" + value);
        }
    }

    PassRateResult result;
    result.per_test.reserve(suite.cases.size());
    ChildGate& gate = gate_for(sandbox);

    try {
        for (std::size_t i = 0; i < suite.cases.size(); ++i) {
            const TestCase& test = suite.cases[i];
            const fs::path work = root / ("case" + std::to_string(i));
            std::error_code ec;
            fs::create_directory(work, ec);
            if (ec) {
                throw InfrastructureError("sandbox: cannot create " + work.string());
            }

            std::string program;
            program += kAuditPrelude;
            program += "\n";
            program += candidate_code;
            program += "\n";
            if (!test.setup.empty()) {
                program += test.setup;
                program += "\n";
            }
            program += test.assertion;
            program += "\n";
            write_file(work / "main.py", program);

            ChildSpec spec;
            spec.executable = python;
            spec.args = {python, "-I", "main.py"};
            spec.env = env;
            spec.working_dir = work.string();
            spec.memory_limit_bytes = sandbox.memory_limit_bytes;
            spec.wall_timeout = suite.per_test_timeout;

            gate.acquire();
            bool passed = false;
            try {
                passed = run_child(spec);
            } catch (...) {
                gate.release();
                throw;
            }
            gate.release();
            result.per_test.push_back(passed);
        }
    } catch (...) {
        std::error_code ec;
        fs::remove_all(root, ec);
        throw;
    }

    std::error_code ec;
    fs::remove_all(root, ec);

    const auto passes =
        static_cast<double>(std::count(result.per_test.begin(), result.per_test.end(), true));
    result.rate = passes / static_cast<double>(result.per_test.size());
    return result;
}

} // namespace tmpc

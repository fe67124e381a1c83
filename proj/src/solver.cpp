#include "needle/solver.hpp"

#include <atomic>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

namespace needle {

namespace {

std::atomic<long> g_calls{0}, g_sat{0}, g_unsat{0}, g_unknown{0}, g_timeout{0};

struct RunOutput {
    std::string out, err;
    bool timed_out = false;
    int status = 0;
};

void close_fd(int& fd) {
    if (fd >= 0) ::close(fd);
    fd = -1;
}

RunOutput run_process(const std::string& exe, const std::vector<std::string>& args, const std::string& input,
                      std::chrono::milliseconds timeout) {
    static const bool sigpipe_ignored = [] {
        signal(SIGPIPE, SIG_IGN);
        return true;
    }();
    (void)sigpipe_ignored;
    int in[2], out[2], err[2], ex[2];
    if (pipe(in) || pipe(out) || pipe(err) || pipe(ex)) throw SolverLaunchError("pipe: " + std::string(strerror(errno)));
    fcntl(ex[1], F_SETFD, FD_CLOEXEC);

    pid_t pid = fork();
    if (pid < 0) throw SolverLaunchError("fork: " + std::string(strerror(errno)));
    if (pid == 0) {
        dup2(in[0], 0);
        dup2(out[1], 1);
        dup2(err[1], 2);
        for (int fd : {in[0], in[1], out[0], out[1], err[0], err[1], ex[0]}) ::close(fd);
        std::vector<char*> argv;
        argv.push_back(const_cast<char*>(exe.c_str()));
        for (auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
        argv.push_back(nullptr);
        execvp(exe.c_str(), argv.data());
        int e = errno;
        (void)!write(ex[1], &e, sizeof e);
        _exit(127);
    }
    ::close(in[0]);
    ::close(out[1]);
    ::close(err[1]);
    ::close(ex[1]);
    int exec_errno = 0;
    ssize_t got = read(ex[0], &exec_errno, sizeof exec_errno);
    ::close(ex[0]);
    if (got == sizeof exec_errno) {
        close_fd(in[1]);
        close_fd(out[0]);
        close_fd(err[0]);
        waitpid(pid, nullptr, 0);
        throw SolverLaunchError("cannot execute solver '" + exe + "': " + strerror(exec_errno));
    }

    int win = in[1], rout = out[0], rerr = err[0];
    fcntl(win, F_SETFL, O_NONBLOCK);
    size_t written = 0;
    if (input.empty()) close_fd(win);
    RunOutput r;
    auto deadline = std::chrono::steady_clock::now() + timeout;
    char buf[65536];
    while (rout >= 0 || rerr >= 0) {
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) {
            r.timed_out = true;
            break;
        }
        pollfd fds[3];
        int n = 0;
        int iw = -1, io = -1, ie = -1;
        if (win >= 0) { iw = n; fds[n++] = {win, POLLOUT, 0}; }
        if (rout >= 0) { io = n; fds[n++] = {rout, POLLIN, 0}; }
        if (rerr >= 0) { ie = n; fds[n++] = {rerr, POLLIN, 0}; }
        int rc = poll(fds, n, static_cast<int>(std::min<long long>(left.count(), 1000)));
        if (rc < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (iw >= 0 && (fds[iw].revents & (POLLOUT | POLLERR | POLLHUP))) {
            ssize_t w = write(win, input.data() + written, input.size() - written);
            if (w > 0) written += static_cast<size_t>(w);
            if (w < 0 && errno != EAGAIN) written = input.size();
            if (written >= input.size()) close_fd(win);
        }
        auto drain = [&](int idx, int& fd, std::string& dst) {
            if (idx < 0 || !(fds[idx].revents & (POLLIN | POLLHUP | POLLERR))) return;
            ssize_t k = read(fd, buf, sizeof buf);
            if (k > 0)
                dst.append(buf, static_cast<size_t>(k));
            else if (k == 0 || errno != EAGAIN)
                close_fd(fd);
        };
        drain(io, rout, r.out);
        drain(ie, rerr, r.err);
    }
    close_fd(win);
    close_fd(rout);
    close_fd(rerr);
    if (r.timed_out) kill(pid, SIGKILL);
    int st = 0;
    waitpid(pid, &st, 0);
    r.status = st;
    return r;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n"), b = s.find_last_not_of(" \t\r\n");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

}  // namespace

const char* to_string(SatResult::Status s) {
    switch (s) {
    case SatResult::Status::Sat: return "sat";
    case SatResult::Status::Unsat: return "unsat";
    case SatResult::Status::Unknown: return "unknown";
    case SatResult::Status::Timeout: return "timeout";
    }
    return "?";
}

SolverConfig SolverConfig::from_env() { return SolverConfig{}; }

std::string SolverConfig::resolved_executable() const {
    if (!executable.empty()) return executable;
    if (const char* e = std::getenv("NEEDLE_SOLVER"); e && *e) return e;
    return "z3";
}

std::vector<std::string> SolverConfig::resolved_args() const {
    if (!args.empty()) return args;
    std::string exe = resolved_executable();
    std::string base = exe.substr(exe.find_last_of('/') == std::string::npos ? 0 : exe.find_last_of('/') + 1);
    if (base.find("cvc") != std::string::npos) return {"--lang=smt2"};
    if (base.find("z3") != std::string::npos) return {"-in", "-smt2"};
    return {};
}

Model parse_values(const std::string& text) {
    Model m;
    for (auto& e : parse_sexprs(text)) {
        if (e.is_app("error")) continue;
        if (!e.is_list()) throw SolverOutputError("malformed value list: " + e.str());
        for (auto& pair : e.items) {
            if (!pair.is_list() || pair.items.size() != 2 || !pair.items[0].is_symbol())
                throw SolverOutputError("malformed value pair: " + pair.str());
            const auto& v = pair.items[1];
            const auto& name = pair.items[0].text;
            if (v.is_symbol("true"))
                m[name] = true;
            else if (v.is_symbol("false"))
                m[name] = false;
            else if (v.is_numeral())
                m[name] = static_cast<Int>(std::stoll(v.text));
            else if (v.is_app("-") && v.items.size() == 2 && v.items[1].is_numeral())
                m[name] = -static_cast<Int>(std::stoll(v.items[1].text));
            else
                throw SolverOutputError("unsupported value for " + name + ": " + v.str());
        }
    }
    return m;
}

SatResult check(const SolverConfig& cfg, const std::string& script, const std::vector<std::string>& wanted) {
    std::string input;
    if (!wanted.empty()) input += "(set-option :produce-models true)\n";
    if (cfg.seed) input += "(set-option :random-seed " + std::to_string(*cfg.seed) + ")\n";
    input += script;
    input += "(check-sat)\n";
    if (!wanted.empty()) {
        input += "(get-value (";
        for (size_t i = 0; i < wanted.size(); ++i) {
            if (i) input += ' ';
            input += quote_symbol(wanted[i]);
        }
        input += "))\n";
    }
    input += "(exit)\n";

    auto t0 = std::chrono::steady_clock::now();
    ++g_calls;
    RunOutput run = run_process(cfg.resolved_executable(), cfg.resolved_args(), input, cfg.timeout);
    SatResult r;
    r.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0);
    if (run.timed_out) {
        r.status = SatResult::Status::Timeout;
        r.reason = "wall-clock timeout after " + std::to_string(cfg.timeout.count()) + " ms";
        ++g_timeout;
        return r;
    }
    std::string out = run.out;
    size_t nl = out.find('\n');
    std::string first = trim(out.substr(0, nl));
    std::string rest = nl == std::string::npos ? "" : out.substr(nl + 1);
    if (first == "sat") {
        r.status = SatResult::Status::Sat;
        if (!wanted.empty()) r.model = parse_values(rest);
        for (auto& w : wanted)
            if (!r.model.count(w)) throw SolverOutputError("solver did not report a value for " + w);
        ++g_sat;
    } else if (first == "unsat") {
        r.status = SatResult::Status::Unsat;
        ++g_unsat;
    } else if (first == "unknown") {
        r.status = SatResult::Status::Unknown;
        r.reason = trim(run.err.empty() ? "unknown" : run.err);
        ++g_unknown;
    } else if (first == "timeout") {
        r.status = SatResult::Status::Timeout;
        r.reason = "solver reported timeout";
        ++g_timeout;
    } else {
        throw SolverOutputError("unexpected solver output: " + trim(out).substr(0, 400) +
                                (run.err.empty() ? "" : " / stderr: " + trim(run.err).substr(0, 400)));
    }
    return r;
}

SatResult check_formula(const SolverConfig& cfg, const LiaFormula& f, const std::vector<std::string>& wanted) {
    return check(cfg, emit_smtlib(f, {}, {}, cfg.logic), wanted);
}

SolverStats solver_stats() {
    SolverStats s;
    s.calls = g_calls;
    s.sat = g_sat;
    s.unsat = g_unsat;
    s.unknown = g_unknown;
    s.timeout = g_timeout;
    return s;
}

}  // namespace needle

#include "degrade/subprocess.hpp"

#include "degrade/error.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <fcntl.h>
#include <mutex>
#include <poll.h>
#include <sys/wait.h>
#include <thread>
#include <unistd.h>

namespace degrade::process {

namespace {

constexpr std::size_t kTailLimit = 4096;

void ignore_sigpipe() {
	static std::once_flag once;
	std::call_once(once, [] { std::signal(SIGPIPE, SIG_IGN); });
}

struct Argv {
	std::vector<std::string> storage;
	std::vector<char*> pointers;

	explicit Argv(const std::vector<std::string>& argv) : storage(argv) {
		if (storage.empty())
			throw Error("empty command");
		for (auto& s : storage)
			pointers.push_back(s.data());
		pointers.push_back(nullptr);
	}
};

void close_fd(int& fd) noexcept {
	if (fd >= 0) {
		::close(fd);
		fd = -1;
	}
}

std::chrono::steady_clock::time_point deadline_after(std::chrono::milliseconds timeout) {
	return std::chrono::steady_clock::now() + timeout;
}

int remaining_ms(std::chrono::steady_clock::time_point deadline) {
	auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
	return static_cast<int>(std::max<std::chrono::milliseconds::rep>(0, left.count()));
}

}  // namespace

std::vector<std::string> split_command(std::string_view command) {
	std::vector<std::string> out;
	std::string current;
	bool in_token = false;
	char quote = 0;
	for (std::size_t i = 0; i < command.size(); ++i) {
		const char c = command[i];
		if (quote == '\'') {
			if (c == '\'')
				quote = 0;
			else
				current += c;
		} else if (quote == '"') {
			if (c == '"')
				quote = 0;
			else if (c == '\\' && i + 1 < command.size() && (command[i + 1] == '"' || command[i + 1] == '\\'))
				current += command[++i];
			else
				current += c;
		} else if (c == '\'' || c == '"') {
			quote = c;
			in_token = true;
		} else if (c == '\\' && i + 1 < command.size()) {
			current += command[++i];
			in_token = true;
		} else if (c == ' ' || c == '\t' || c == '\n') {
			if (in_token) {
				out.push_back(std::move(current));
				current.clear();
				in_token = false;
			}
		} else {
			current += c;
			in_token = true;
		}
	}
	if (quote)
		throw Error("unbalanced quote in command: " + std::string(command));
	if (in_token)
		out.push_back(std::move(current));
	return out;
}

std::string join_command(const std::vector<std::string>& argv) {
	std::string out;
	for (const auto& arg : argv) {
		if (!out.empty())
			out += ' ';
		const bool plain = !arg.empty() && arg.find_first_of(" \t\n'\"\\") == std::string::npos;
		if (plain) {
			out += arg;
			continue;
		}
		out += '\'';
		for (char c : arg) {
			if (c == '\'')
				out += "'\\''";
			else
				out += c;
		}
		out += '\'';
	}
	return out;
}

std::string RunResult::describe() const {
	std::string s;
	if (timed_out)
		s = "timed out";
	else if (term_signal)
		s = "killed by signal " + std::to_string(term_signal);
	else
		s = "exit code " + std::to_string(exit_code);
	if (!output_tail.empty())
		s += ": " + output_tail;
	return s;
}

RunResult run(const std::vector<std::string>& argv, std::chrono::milliseconds timeout, bool capture_stdout) {
	ignore_sigpipe();
	Argv args(argv);

	int out_pipe[2];
	int err_pipe[2];
	if (::pipe2(out_pipe, O_CLOEXEC) != 0)
		throw Error(std::string("pipe: ") + std::strerror(errno));
	if (::pipe2(err_pipe, O_CLOEXEC) != 0) {
		::close(out_pipe[0]);
		::close(out_pipe[1]);
		throw Error(std::string("pipe: ") + std::strerror(errno));
	}

	const pid_t pid = ::fork();
	if (pid < 0) {
		for (int fd : {out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]})
			::close(fd);
		throw Error(std::string("fork: ") + std::strerror(errno));
	}
	if (pid == 0) {
		::setpgid(0, 0);
		int devnull = ::open("/dev/null", O_RDONLY);
		if (devnull >= 0)
			::dup2(devnull, STDIN_FILENO);
		::dup2(out_pipe[1], STDOUT_FILENO);
		::dup2(err_pipe[1], STDERR_FILENO);
		::execvp(args.pointers[0], args.pointers.data());
		const char msg[] = "exec failed\n";
		[[maybe_unused]] auto n = ::write(STDERR_FILENO, msg, sizeof msg - 1);
		::_exit(127);
	}
	::setpgid(pid, pid);
	::close(out_pipe[1]);
	::close(err_pipe[1]);

	RunResult result;
	std::string tail;
	const auto deadline = deadline_after(timeout);
	pollfd fds[2] = {{out_pipe[0], POLLIN, 0}, {err_pipe[0], POLLIN, 0}};
	int open_count = 2;
	char buf[4096];
	while (open_count > 0) {
		const int wait = remaining_ms(deadline);
		if (wait == 0) {
			result.timed_out = true;
			break;
		}
		const int rc = ::poll(fds, 2, wait);
		if (rc < 0) {
			if (errno == EINTR)
				continue;
			break;
		}
		for (int i = 0; i < 2; ++i) {
			if (fds[i].fd < 0 || !(fds[i].revents & (POLLIN | POLLHUP | POLLERR)))
				continue;
			const ssize_t n = ::read(fds[i].fd, buf, sizeof buf);
			if (n <= 0) {
				::close(fds[i].fd);
				fds[i].fd = -1;
				--open_count;
				continue;
			}
			tail.append(buf, static_cast<std::size_t>(n));
			if (tail.size() > 2 * kTailLimit)
				tail.erase(0, tail.size() - kTailLimit);
			if (i == 0 && capture_stdout)
				result.stdout_text.append(buf, static_cast<std::size_t>(n));
		}
	}
	if (result.timed_out)
		::kill(-pid, SIGKILL);
	for (auto& f : fds)
		close_fd(f.fd);

	int status = 0;
	while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
	}
	if (WIFEXITED(status))
		result.exit_code = WEXITSTATUS(status);
	else if (WIFSIGNALED(status))
		result.term_signal = WTERMSIG(status);

	if (tail.size() > kTailLimit)
		tail.erase(0, tail.size() - kTailLimit);
	while (!tail.empty() && (tail.back() == '\n' || tail.back() == '\r'))
		tail.pop_back();
	result.output_tail = std::move(tail);
	return result;
}

Child::Child(const std::vector<std::string>& argv) {
	ignore_sigpipe();
	Argv args(argv);

	int in_pipe[2];
	int out_pipe[2];
	if (::pipe2(in_pipe, O_CLOEXEC) != 0)
		throw Error(std::string("pipe: ") + std::strerror(errno));
	if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
		::close(in_pipe[0]);
		::close(in_pipe[1]);
		throw Error(std::string("pipe: ") + std::strerror(errno));
	}

	const pid_t pid = ::fork();
	if (pid < 0) {
		for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]})
			::close(fd);
		throw Error(std::string("fork: ") + std::strerror(errno));
	}
	if (pid == 0) {
		::setpgid(0, 0);
		::dup2(in_pipe[0], STDIN_FILENO);
		::dup2(out_pipe[1], STDOUT_FILENO);
		::execvp(args.pointers[0], args.pointers.data());
		const char msg[] = "exec failed\n";
		[[maybe_unused]] auto n = ::write(STDERR_FILENO, msg, sizeof msg - 1);
		::_exit(127);
	}
	::setpgid(pid, pid);
	::close(in_pipe[0]);
	::close(out_pipe[1]);
	pid_ = pid;
	stdin_fd_ = in_pipe[1];
	stdout_fd_ = out_pipe[0];
}

Child::~Child() { terminate(); }

Child::Child(Child&& other) noexcept
	: pid_(std::exchange(other.pid_, -1)),
	  stdin_fd_(std::exchange(other.stdin_fd_, -1)),
	  stdout_fd_(std::exchange(other.stdout_fd_, -1)),
	  buffer_(std::move(other.buffer_)) {}

Child& Child::operator=(Child&& other) noexcept {
	if (this != &other) {
		terminate();
		pid_ = std::exchange(other.pid_, -1);
		stdin_fd_ = std::exchange(other.stdin_fd_, -1);
		stdout_fd_ = std::exchange(other.stdout_fd_, -1);
		buffer_ = std::move(other.buffer_);
	}
	return *this;
}

bool Child::write_line(std::string_view line) {
	if (stdin_fd_ < 0)
		return false;
	std::string data(line);
	data += '\n';
	std::size_t off = 0;
	while (off < data.size()) {
		const ssize_t n = ::write(stdin_fd_, data.data() + off, data.size() - off);
		if (n < 0) {
			if (errno == EINTR)
				continue;
			return false;
		}
		off += static_cast<std::size_t>(n);
	}
	return true;
}

std::optional<std::string> Child::read_line(std::chrono::milliseconds timeout) {
	const auto deadline = deadline_after(timeout);
	char buf[4096];
	for (;;) {
		if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
			std::string line = buffer_.substr(0, nl);
			buffer_.erase(0, nl + 1);
			if (!line.empty() && line.back() == '\r')
				line.pop_back();
			return line;
		}
		if (stdout_fd_ < 0)
			throw Error("child output closed");
		pollfd pfd{stdout_fd_, POLLIN, 0};
		const int rc = ::poll(&pfd, 1, remaining_ms(deadline));
		if (rc < 0) {
			if (errno == EINTR)
				continue;
			throw Error(std::string("poll: ") + std::strerror(errno));
		}
		if (rc == 0)
			return std::nullopt;
		const ssize_t n = ::read(stdout_fd_, buf, sizeof buf);
		if (n < 0) {
			if (errno == EINTR)
				continue;
			throw Error(std::string("read: ") + std::strerror(errno));
		}
		if (n == 0)
			throw Error("child closed its output");
		buffer_.append(buf, static_cast<std::size_t>(n));
	}
}

void Child::terminate() noexcept {
	close_fd(stdin_fd_);
	close_fd(stdout_fd_);
	if (pid_ <= 0)
		return;
	int status = 0;
	for (int i = 0; i < 20; ++i) {
		if (::waitpid(pid_, &status, WNOHANG) == pid_) {
			pid_ = -1;
			return;
		}
		std::this_thread::sleep_for(std::chrono::milliseconds(5));
	}
	::kill(-pid_, SIGKILL);
	::kill(pid_, SIGKILL);
	while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
	}
	pid_ = -1;
	buffer_.clear();
}

}  // namespace degrade::process

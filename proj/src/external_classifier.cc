// Copyright 2026 The qtab Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <json.hpp>
#include <thread>
#include <unordered_map>

#include "qtab/base64.h"
#include "qtab/error.h"
#include "qtab/evaluator.h"

extern char** environ;

namespace qtab {

class ExternalEvaluator::Connection {
 public:
  Connection(const ExternalEndpoint& ep, std::chrono::milliseconds timeout) : timeout_(timeout) {
    if (!ep.command.empty()) {
      spawn(ep.command);
    } else {
      dial(ep.host, ep.port);
    }
  }

  ~Connection() {
    if (write_fd_ >= 0) ::close(write_fd_);
    if (read_fd_ >= 0 && read_fd_ != write_fd_) ::close(read_fd_);
    if (child_ > 0) reap();
  }

  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;

  void write_all(const std::string& data) {
    std::size_t off = 0;
    while (off < data.size()) {
      const ssize_t n = socket_ ? ::send(write_fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL)
                                : ::write(write_fd_, data.data() + off, data.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error(std::string("write to evaluator failed: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::string read_line() {
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    while (true) {
      if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) throw Error("evaluator timed out");
      pollfd p{read_fd_, POLLIN, 0};
      const int r = ::poll(&p, 1, static_cast<int>(left.count()));
      if (r < 0) {
        if (errno == EINTR) continue;
        throw Error(std::string("poll failed: ") + std::strerror(errno));
      }
      if (r == 0) continue;
      char chunk[4096];
      const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error(std::string("read from evaluator failed: ") + std::strerror(errno));
      }
      if (n == 0) throw Error("evaluator closed the connection");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  void spawn(const std::string& command) {
    int in_pipe[2], out_pipe[2];
    if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw Error("pipe failed");
    if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
      ::close(in_pipe[0]);
      ::close(in_pipe[1]);
      throw Error("pipe failed");
    }
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
    posix_spawnattr_t attr;
    posix_spawnattr_init(&attr);
    posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
    posix_spawnattr_setpgroup(&attr, 0);
    const char* argv[] = {"sh", "-c", command.c_str(), nullptr};
    const int rc = ::posix_spawn(&child_, "/bin/sh", &actions, &attr,
                                 const_cast<char* const*>(argv), environ);
    posix_spawnattr_destroy(&attr);
    posix_spawn_file_actions_destroy(&actions);
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    if (rc != 0) {
      ::close(in_pipe[1]);
      ::close(out_pipe[0]);
      child_ = -1;
      throw Error(std::string("cannot start evaluator: ") + std::strerror(rc));
    }
    write_fd_ = in_pipe[1];
    read_fd_ = out_pipe[0];
  }

  void dial(const std::string& host, int port) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const std::string service = std::to_string(port);
    if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
      throw Error("cannot resolve " + host + ": " + ::gai_strerror(rc));
    }
    int fd = -1;
    for (addrinfo* a = res; a; a = a->ai_next) {
      fd = ::socket(a->ai_family, a->ai_socktype | SOCK_CLOEXEC, a->ai_protocol);
      if (fd < 0) continue;
      if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) break;
      ::close(fd);
      fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0) throw Error("cannot connect to " + host + ":" + service);
    socket_ = true;
    read_fd_ = write_fd_ = fd;
  }

  void reap() {
    int status = 0;
    for (int i = 0; i < 100; ++i) {
      if (::waitpid(child_, &status, WNOHANG) != 0) break;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    // The shell may have forked the evaluator instead of exec'ing it.
    ::kill(-child_, SIGKILL);
    ::waitpid(child_, &status, 0);
  }

  std::chrono::milliseconds timeout_;
  pid_t child_ = -1;
  bool socket_ = false;
  int read_fd_ = -1;
  int write_fd_ = -1;
  std::string buffer_;
};

ExternalEvaluator::ExternalEvaluator(ExternalEndpoint endpoint, ExternalOptions options)
    : endpoint_(std::move(endpoint)), options_(options) {
  if (options_.connections < 1) throw InvalidArgument("external evaluator needs >= 1 connection");
  if (options_.max_in_flight < 1) throw InvalidArgument("max_in_flight must be positive");
  if (endpoint_.command.empty() && (endpoint_.host.empty() || endpoint_.port <= 0)) {
    throw InvalidArgument("external evaluator needs a command or host:port");
  }
  ::signal(SIGPIPE, SIG_IGN);
  for (int i = 0; i < options_.connections; ++i) {
    try {
      auto conn = std::make_unique<Connection>(endpoint_, options_.timeout);
      const std::string line = conn->read_line();
      const auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object() || !j.contains("hello") ||
          !j["hello"].contains("classes") || !j["hello"]["classes"].is_number_integer()) {
        throw Error("bad handshake: " + line.substr(0, 200));
      }
      const int classes = j["hello"]["classes"].get<int>();
      if (classes < 1) throw Error("handshake reports no classes");
      if (class_count_ != 0 && classes != class_count_) throw Error("connections disagree on class count");
      class_count_ = classes;
      pool_.push_back(std::move(conn));
    } catch (const Error& e) {
      throw EvaluatorError(std::string("external evaluator: ") + e.what(), 0, 0);
    }
  }
}

ExternalEvaluator::~ExternalEvaluator() = default;

std::string ExternalEvaluator::id() const {
  if (!endpoint_.command.empty()) return "external:command=" + endpoint_.command;
  return "external:host=" + endpoint_.host + ",port=" + std::to_string(endpoint_.port);
}

std::vector<int> ExternalEvaluator::predict(std::span<const RawImage> images, int) {
  const std::size_t total = images.size();
  std::vector<int> labels(total, -1);
  std::atomic<std::size_t> completed{0};
  const std::size_t n_conn = std::min(pool_.size(), std::max<std::size_t>(total, 1));
  const std::int64_t base_id = next_id_;
  next_id_ += static_cast<std::int64_t>(total);

  std::vector<std::string> errors(n_conn);
  auto run = [&](std::size_t c) {
    const std::size_t begin = total * c / n_conn;
    const std::size_t end = total * (c + 1) / n_conn;
    Connection& conn = *pool_[c];
    std::unordered_map<std::int64_t, std::size_t> pending;
    std::size_t sent = begin;
    try {
      while (sent < end || !pending.empty()) {
        while (sent < end && pending.size() < static_cast<std::size_t>(options_.max_in_flight)) {
          const RawImage& img = images[sent];
          const std::int64_t id = base_id + static_cast<std::int64_t>(sent);
          nlohmann::json req{{"id", id},
                             {"width", img.width},
                             {"height", img.height},
                             {"pixels_b64", base64_encode(img.pixels)}};
          conn.write_all(req.dump() + "\n");
          pending.emplace(id, sent);
          ++sent;
        }
        const std::string line = conn.read_line();
        const auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("id") || !j["id"].is_number_integer() ||
            !j.contains("label") || !j["label"].is_number_integer()) {
          throw Error("malformed response: " + line.substr(0, 200));
        }
        const auto it = pending.find(j["id"].get<std::int64_t>());
        if (it == pending.end()) throw Error("response for unknown id " + j["id"].dump());
        const int label = j["label"].get<int>();
        if (label < 0 || label >= class_count_) throw Error("label out of range: " + std::to_string(label));
        labels[it->second] = label;
        pending.erase(it);
        ++completed;
      }
    } catch (const Error& e) {
      errors[c] = e.what();
    }
  };

  if (n_conn <= 1) {
    if (total) run(0);
  } else {
    std::vector<std::thread> workers;
    for (std::size_t c = 0; c < n_conn; ++c) workers.emplace_back(run, c);
    for (auto& t : workers) t.join();
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw EvaluatorError("external evaluator: " + e, completed.load(), total);
  }
  return labels;
}

}  // namespace qtab

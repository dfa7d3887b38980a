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

// Test double for the external classifier protocol.
//   stub_classifier [--classes N] [--constant K | --proxy] [--die-after M]
//                   [--hang-after M] [--bad-hello] [--tcp PORT]

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <json.hpp>
#include <string>
#include <thread>

#include "qtab/base64.h"
#include "qtab/proxy_classifier.h"

namespace {

struct Options {
  int classes = 20;
  int constant = 0;
  bool proxy = false;
  long die_after = -1;
  long hang_after = -1;
  bool bad_hello = false;
  int tcp_port = 0;
};

bool read_line(int fd, std::string& buffer, std::string& line) {
  while (true) {
    if (auto nl = buffer.find('\n'); nl != std::string::npos) {
      line = buffer.substr(0, nl);
      buffer.erase(0, nl + 1);
      return true;
    }
    char chunk[65536];
    const ssize_t n = ::read(fd, chunk, sizeof chunk);
    if (n <= 0) return false;
    buffer.append(chunk, static_cast<std::size_t>(n));
  }
}

void write_all(int fd, const std::string& s) {
  std::size_t off = 0;
  while (off < s.size()) {
    const ssize_t n = ::write(fd, s.data() + off, s.size() - off);
    if (n <= 0) std::exit(0);
    off += static_cast<std::size_t>(n);
  }
}

void serve(int in_fd, int out_fd, const Options& opt) {
  qtab::ProxyConfig pc;
  pc.class_count = opt.classes;
  const qtab::ProxyClassifier proxy(pc);
  write_all(out_fd, opt.bad_hello ? "{\"greeting\":1}\n"
                                  : "{\"hello\":{\"classes\":" + std::to_string(opt.classes) + "}}\n");
  std::string buffer, line;
  long answered = 0;
  while (read_line(in_fd, buffer, line)) {
    if (opt.die_after >= 0 && answered >= opt.die_after) std::exit(3);
    if (opt.hang_after >= 0 && answered >= opt.hang_after) {
      std::this_thread::sleep_for(std::chrono::hours(1));
    }
    const auto req = nlohmann::json::parse(line);
    int label = opt.constant;
    if (opt.proxy) {
      auto bytes = qtab::base64_decode(req.at("pixels_b64").get<std::string>());
      if (!bytes) std::exit(4);
      label = proxy.classify(
          qtab::RawImage(req.at("width").get<int>(), req.at("height").get<int>(), std::move(*bytes)));
    }
    write_all(out_fd, nlohmann::json{{"id", req.at("id")}, {"label", label}}.dump() + "\n");
    ++answered;
  }
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    auto next = [&] { return i + 1 < argc ? std::atol(argv[++i]) : 0L; };
    if (a == "--classes") opt.classes = static_cast<int>(next());
    else if (a == "--constant") opt.constant = static_cast<int>(next());
    else if (a == "--proxy") opt.proxy = true;
    else if (a == "--die-after") opt.die_after = next();
    else if (a == "--hang-after") opt.hang_after = next();
    else if (a == "--bad-hello") opt.bad_hello = true;
    else if (a == "--tcp") opt.tcp_port = static_cast<int>(next());
  }
  if (opt.tcp_port == 0) {
    serve(0, 1, opt);
    return 0;
  }
  const int listener = ::socket(AF_INET, SOCK_STREAM, 0);
  const int one = 1;
  ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(opt.tcp_port));
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listener, 16) != 0) {
    std::perror("stub_classifier");
    return 1;
  }
  std::printf("listening\n");
  std::fflush(stdout);
  while (true) {
    const int fd = ::accept(listener, nullptr, nullptr);
    if (fd < 0) break;
    std::thread([fd, opt] {
      serve(fd, fd, opt);
      ::close(fd);
    }).detach();
  }
  return 0;
}

#include "agentic/tcp.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>

#include <fmt/format.h>

#include "agentic/errors.hpp"

namespace agentic::net {
namespace {

constexpr std::size_t kMaxLine = 4096;

std::string errno_text() { return std::strerror(errno); }

bool write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

LineServer::LineServer(Handler handler) : handler_(std::move(handler)) {}

LineServer::~LineServer() {
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void LineServer::listen(const std::string& host, int port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (int rc = ::getaddrinfo(host.empty() ? nullptr : host.c_str(), service.c_str(), &hints, &res);
      rc != 0) {
    throw PlantIoError(fmt::format("cannot resolve {}: {}", host, ::gai_strerror(rc)));
  }
  const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd < 0) {
    ::freeaddrinfo(res);
    throw PlantIoError("socket: " + errno_text());
  }
  int yes = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  if (::bind(fd, res->ai_addr, res->ai_addrlen) != 0) {
    const std::string why = errno_text();
    ::freeaddrinfo(res);
    ::close(fd);
    throw PlantIoError(fmt::format("cannot bind {}:{}: {}", host, port, why));
  }
  ::freeaddrinfo(res);
  if (::listen(fd, 16) != 0) {
    const std::string why = errno_text();
    ::close(fd);
    throw PlantIoError("listen: " + why);
  }
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len);
  if (listen_fd_ >= 0) ::close(listen_fd_);
  listen_fd_ = fd;
  port_ = ntohs(bound.sin_port);
}

void LineServer::serve(const std::atomic<bool>& stop, int poll_ms) {
  if (listen_fd_ < 0) throw InvalidState("LineServer::serve called before listen");
  while (!stop.load()) {
    pollfd pfd{listen_fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, poll_ms);
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw PlantIoError("poll: " + errno_text());
    }
    if (ready == 0) continue;
    const int client = ::accept(listen_fd_, nullptr, nullptr);
    if (client < 0) {
      if (errno == EINTR || errno == ECONNABORTED) continue;
      throw PlantIoError("accept: " + errno_text());
    }
    serve_client(client, stop, poll_ms);
    ::close(client);
  }
}

void LineServer::serve_client(int fd, const std::atomic<bool>& stop, int poll_ms) {
  std::string pending;
  char chunk[1024];
  while (!stop.load()) {
    pollfd pfd{fd, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, poll_ms);
    if (ready < 0) {
      if (errno == EINTR) continue;
      return;
    }
    if (ready == 0) continue;
    const ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return;
    pending.append(chunk, static_cast<std::size_t>(n));

    std::size_t nl;
    while ((nl = pending.find('\n')) != std::string::npos) {
      const std::string line = strip_cr(pending.substr(0, nl));
      pending.erase(0, nl + 1);
      if (!write_all(fd, handler_(line) + "\n")) return;
    }
    if (pending.size() > kMaxLine) {
      // Oversized line: answer once and drop it.
      pending.clear();
      if (!write_all(fd, "ERR\n")) return;
    }
  }
}

LineClient::LineClient(const std::string& host, int port, double timeout_s) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
    throw PlantIoError(fmt::format("cannot resolve {}: {}", host, ::gai_strerror(rc)));
  }
  fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd_ < 0) {
    ::freeaddrinfo(res);
    throw PlantIoError("socket: " + errno_text());
  }
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(timeout_s);
  tv.tv_usec = static_cast<suseconds_t>((timeout_s - std::floor(timeout_s)) * 1e6);
  ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  ::setsockopt(fd_, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
  if (::connect(fd_, res->ai_addr, res->ai_addrlen) != 0) {
    const std::string why = errno_text();
    ::freeaddrinfo(res);
    ::close(fd_);
    fd_ = -1;
    throw PlantIoError(fmt::format("cannot connect to {}:{}: {}", host, port, why));
  }
  ::freeaddrinfo(res);
}

LineClient::~LineClient() {
  if (fd_ >= 0) ::close(fd_);
}

void LineClient::send_line(std::string_view line) {
  std::string data(line);
  data.push_back('\n');
  if (!write_all(fd_, data)) throw PlantIoError("send failed: " + errno_text());
}

std::string LineClient::read_line() {
  char chunk[512];
  for (;;) {
    if (const std::size_t nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = strip_cr(buffer_.substr(0, nl));
      buffer_.erase(0, nl + 1);
      return line;
    }
    const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n < 0) throw PlantIoError("receive failed: " + errno_text());
    if (n == 0) throw PlantIoError("connection closed by plant");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

}  // namespace agentic::net

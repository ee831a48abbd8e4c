#pragma once

#include <atomic>
#include <functional>
#include <string>
#include <string_view>

namespace agentic::net {

// Newline-delimited request/reply server. Connections are served one at a
// time in accept order; later clients wait in the listen backlog.
class LineServer {
 public:
  using Handler = std::function<std::string(std::string_view)>;

  explicit LineServer(Handler handler);
  ~LineServer();
  LineServer(const LineServer&) = delete;
  LineServer& operator=(const LineServer&) = delete;

  // Binds and listens. Port 0 picks a free port. Throws PlantIoError.
  void listen(const std::string& host, int port);
  int port() const noexcept { return port_; }

  // Accepts and serves clients until `stop` becomes true. Polls `stop`
  // every `poll_ms` milliseconds.
  void serve(const std::atomic<bool>& stop, int poll_ms = 50);

 private:
  void serve_client(int fd, const std::atomic<bool>& stop, int poll_ms);

  Handler handler_;
  int listen_fd_ = -1;
  int port_ = 0;
};

// Blocking line-oriented client socket.
class LineClient {
 public:
  // Throws PlantIoError.
  LineClient(const std::string& host, int port, double timeout_s);
  ~LineClient();
  LineClient(const LineClient&) = delete;
  LineClient& operator=(const LineClient&) = delete;

  void send_line(std::string_view line);
  std::string read_line();

 private:
  int fd_ = -1;
  std::string buffer_;
};

}  // namespace agentic::net

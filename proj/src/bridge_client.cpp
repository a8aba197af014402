#include "stx/bridge_client.hpp"

#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <thread>

#include "stx/error.hpp"

namespace stx {

using nlohmann::json;

BridgeEndpoint BridgeEndpoint::parse(std::string_view spec) {
  BridgeEndpoint ep;
  if (spec.starts_with("cmd:")) {
    ep.kind = Kind::Command;
    ep.command = std::string(spec.substr(4));
    if (ep.command.empty()) throw InvalidArgument("bridge command line is empty");
    return ep;
  }
  if (spec.starts_with("tcp:")) {
    const auto rest = spec.substr(4);
    const auto colon = rest.rfind(':');
    if (colon == std::string_view::npos || colon == 0) throw InvalidArgument("bridge endpoint must be tcp:<host>:<port>");
    ep.kind = Kind::Tcp;
    ep.host = std::string(rest.substr(0, colon));
    const std::string port(rest.substr(colon + 1));
    char* end = nullptr;
    const long value = std::strtol(port.c_str(), &end, 10);
    if (port.empty() || *end != '\0' || value <= 0 || value > 65535)
      throw InvalidArgument("invalid bridge port '" + port + "'");
    ep.port = static_cast<int>(value);
    return ep;
  }
  throw InvalidArgument("unknown bridge endpoint '" + std::string(spec) + "' (expected tcp:... or cmd:...)");
}

std::chrono::milliseconds bridge_timeout_from_env() {
  if (const char* raw = std::getenv("STX_BRIDGE_TIMEOUT_MS")) {
    char* end = nullptr;
    const long long value = std::strtoll(raw, &end, 10);
    if (*raw != '\0' && *end == '\0' && value > 0) return std::chrono::milliseconds(value);
    throw InvalidArgument(std::string("invalid STX_BRIDGE_TIMEOUT_MS '") + raw + "'");
  }
  return std::chrono::milliseconds(30000);
}

json encode_task(const TaskSpec& task) {
  json j{{"kind", task_kind_name(task.kind)}};
  switch (task.kind) {
    case TaskKind::EntityBinary: break;
    case TaskKind::EntityMulticlass:
    case TaskKind::GraphMulticlass: j["classes"] = task.width; break;
    case TaskKind::EntityRegression:
    case TaskKind::GraphRegression: j["dim"] = task.width; break;
  }
  return j;
}

TaskSpec decode_task(const json& j) {
  TaskSpec t;
  try {
    t.kind = parse_task_kind(j.at("kind").get<std::string>());
    switch (t.kind) {
      case TaskKind::EntityBinary: t.width = 1; break;
      case TaskKind::EntityMulticlass:
      case TaskKind::GraphMulticlass: t.width = j.at("classes").get<std::size_t>(); break;
      case TaskKind::EntityRegression:
      case TaskKind::GraphRegression: t.width = j.at("dim").get<std::size_t>(); break;
    }
    t.validate();
  } catch (const json::exception& e) {
    throw OracleError(std::string("malformed task descriptor: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw OracleError(std::string("invalid task descriptor: ") + e.what());
  }
  return t;
}

json make_predict_request(std::int64_t request_id, EventId target, std::span<const EventId> included) {
  for (std::size_t i = 1; i < included.size(); ++i) {
    if (included[i - 1] >= included[i]) throw InvalidArgument("predict request ids must be strictly ascending");
  }
  return json{{"type", "predict"},
              {"request_id", request_id},
              {"target", target},
              {"included", std::vector<EventId>(included.begin(), included.end())}};
}

namespace {

std::vector<double> finite_array(const json& j, const char* what) {
  if (!j.is_array()) throw OracleError(std::string(what) + " must be an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw OracleError(std::string(what) + " must contain numbers");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw OracleError(std::string(what) + " contains a non-finite value");
    out.push_back(d);
  }
  return out;
}

}  // namespace

Prediction parse_prediction_reply(const json& reply, std::int64_t request_id, const TaskSpec& task) {
  if (!reply.is_object()) throw OracleError("bridge reply is not a JSON object");
  const auto type = reply.value("type", std::string{});
  const auto id_it = reply.find("request_id");
  if (type == "error") {
    throw OracleError("bridge reported an error for request " + std::to_string(request_id) + ": " +
                      reply.value("message", std::string("(no message)")));
  }
  if (type != "prediction") throw OracleError("unexpected bridge reply type '" + type + "'");
  if (id_it == reply.end() || !id_it->is_number_integer() || id_it->get<std::int64_t>() != request_id)
    throw OracleError("bridge reply does not echo request_id " + std::to_string(request_id));
  if (!reply.contains("values")) throw OracleError("bridge reply has no values");

  Prediction p;
  p.task = task;
  p.values = finite_array(reply.at("values"), "values");
  if (auto it = reply.find("per_node"); it != reply.end() && !it->is_null()) {
    if (!it->is_array()) throw OracleError("per_node must be an array");
    for (const auto& row : *it) p.per_node.push_back(finite_array(row, "per_node entry"));
  }
  p.validate();
  return p;
}

/// Bidirectional line transport over a socket or a child's stdio pipes.
class LineChannel {
 public:
  LineChannel(int read_fd, int write_fd, pid_t child, std::chrono::milliseconds timeout)
      : read_fd_(read_fd), write_fd_(write_fd), child_(child), timeout_(timeout) {}

  ~LineChannel() {
    if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
    if (read_fd_ >= 0) ::close(read_fd_);
    if (child_ > 0) reap();
  }

  LineChannel(const LineChannel&) = delete;
  LineChannel& operator=(const LineChannel&) = delete;

  void write_line(const std::string& line) {
    std::string data = line;
    data.push_back('\n');
    std::size_t sent = 0;
    while (sent < data.size()) {
      const ssize_t n = ::write(write_fd_, data.data() + sent, data.size() - sent);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw OracleError(std::string("bridge write failed: ") + std::strerror(errno));
      }
      sent += static_cast<std::size_t>(n);
    }
  }

  std::string read_line() {
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    while (true) {
      if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      const auto remaining =
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (remaining.count() <= 0) throw OracleError("bridge timed out after " + std::to_string(timeout_.count()) + " ms");
      pollfd pfd{read_fd_, POLLIN, 0};
      const int ready = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(remaining.count(), 1 << 30)));
      if (ready < 0) {
        if (errno == EINTR) continue;
        throw OracleError(std::string("bridge poll failed: ") + std::strerror(errno));
      }
      if (ready == 0) continue;
      char chunk[4096];
      const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw OracleError(std::string("bridge read failed: ") + std::strerror(errno));
      }
      if (n == 0) throw OracleError("bridge closed the connection");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  void reap() {
    // Closing stdin asks the server to shut down; give it a moment first.
    for (int i = 0; i < 100; ++i) {
      int status = 0;
      if (::waitpid(child_, &status, WNOHANG) != 0) return;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ::kill(child_, SIGKILL);
    int status = 0;
    ::waitpid(child_, &status, 0);
  }

  int read_fd_;
  int write_fd_;
  pid_t child_;
  std::chrono::milliseconds timeout_;
  std::string buffer_;
};

namespace {

std::unique_ptr<LineChannel> connect_tcp(const BridgeEndpoint& ep, std::chrono::milliseconds timeout) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  const std::string port = std::to_string(ep.port);
  if (const int rc = ::getaddrinfo(ep.host.c_str(), port.c_str(), &hints, &found); rc != 0) {
    throw OracleError("cannot resolve bridge host '" + ep.host + "': " + ::gai_strerror(rc));
  }
  int fd = -1;
  for (addrinfo* ai = found; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(found);
  if (fd < 0) throw OracleError("cannot connect to bridge at " + ep.host + ":" + port);
  return std::make_unique<LineChannel>(fd, fd, -1, timeout);
}

std::unique_ptr<LineChannel> spawn_command(const BridgeEndpoint& ep, std::chrono::milliseconds timeout) {
  int to_child[2];
  int from_child[2];
  if (::pipe(to_child) != 0) throw OracleError("pipe() failed");
  if (::pipe(from_child) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw OracleError("pipe() failed");
  }
  const pid_t pid = ::fork();
  if (pid < 0) throw OracleError("fork() failed");
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    ::execl("/bin/sh", "sh", "-c", ep.command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  return std::make_unique<LineChannel>(from_child[0], to_child[1], pid, timeout);
}

json read_json_line(LineChannel& channel) {
  const std::string line = channel.read_line();
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    throw OracleError(std::string("bridge sent malformed JSON: ") + e.what());
  }
}

}  // namespace

BridgeOracle::BridgeOracle(const BridgeEndpoint& endpoint, std::chrono::milliseconds timeout) {
  // A dead peer must surface as a write error, not kill the process.
  ::signal(SIGPIPE, SIG_IGN);
  channel_ = endpoint.kind == BridgeEndpoint::Kind::Tcp ? connect_tcp(endpoint, timeout)
                                                        : spawn_command(endpoint, timeout);
  channel_->write_line(json{{"type", "hello"}}.dump());
  const json hello = read_json_line(*channel_);
  if (!hello.is_object() || hello.value("type", std::string{}) != "hello")
    throw OracleError("bridge handshake: expected a hello reply");
  if (hello.value("version", -1) != kBridgeProtocolVersion)
    throw OracleError("bridge handshake: unsupported protocol version");
  if (!hello.contains("task")) throw OracleError("bridge handshake: missing task");
  task_ = decode_task(hello.at("task"));
  reentrant_ = hello.value("reentrant", false);
  try {
    attribute_dim_ = hello.value("attribute_dim", std::size_t{0});
  } catch (const json::exception&) {
    throw OracleError("bridge handshake: attribute_dim must be a non-negative integer");
  }
}

BridgeOracle::~BridgeOracle() = default;

Prediction BridgeOracle::predict(const EventStore&, std::span<const EventId> included, EventId target) const {
  std::lock_guard lock(mutex_);
  const std::int64_t id = next_request_id_++;
  channel_->write_line(make_predict_request(id, target, included).dump());
  return parse_prediction_reply(read_json_line(*channel_), id, task_);
}

}  // namespace stx

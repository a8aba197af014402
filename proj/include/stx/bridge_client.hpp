#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "stx/model_oracle.hpp"

namespace stx {

inline constexpr int kBridgeProtocolVersion = 1;

/// Where a bridge-served model lives. Parsed from the part after "bridge:",
/// either "tcp:<host>:<port>" or "cmd:<shell command line>".
struct BridgeEndpoint {
  enum class Kind { Tcp, Command };
  Kind kind = Kind::Command;
  std::string host;
  int port = 0;
  std::string command;

  static BridgeEndpoint parse(std::string_view spec);
};

/// Reads STX_BRIDGE_TIMEOUT_MS, defaulting to 30 s.
std::chrono::milliseconds bridge_timeout_from_env();

nlohmann::json encode_task(const TaskSpec& task);
TaskSpec decode_task(const nlohmann::json& j);

/// Builds a predict request; `included` must be ascending.
nlohmann::json make_predict_request(std::int64_t request_id, EventId target, std::span<const EventId> included);
/// Validates a reply to request `request_id` and converts it. Error replies
/// and malformed replies raise OracleError.
Prediction parse_prediction_reply(const nlohmann::json& reply, std::int64_t request_id, const TaskSpec& task);

class LineChannel;

/// ModelOracle that forwards predictions to an out-of-process model over
/// newline-delimited JSON. Requests are serialized over one connection.
class BridgeOracle final : public ModelOracle {
 public:
  BridgeOracle(const BridgeEndpoint& endpoint, std::chrono::milliseconds timeout);
  ~BridgeOracle() override;

  BridgeOracle(const BridgeOracle&) = delete;
  BridgeOracle& operator=(const BridgeOracle&) = delete;

  [[nodiscard]] TaskSpec task() const override { return task_; }
  [[nodiscard]] bool reentrant() const override { return reentrant_; }
  [[nodiscard]] std::size_t attribute_dim() const { return attribute_dim_; }
  [[nodiscard]] Prediction predict(const EventStore& store, std::span<const EventId> included,
                                   EventId target) const override;

 private:
  std::unique_ptr<LineChannel> channel_;
  mutable std::mutex mutex_;
  mutable std::int64_t next_request_id_ = 1;
  TaskSpec task_;
  bool reentrant_ = false;
  std::size_t attribute_dim_ = 0;
};

}  // namespace stx

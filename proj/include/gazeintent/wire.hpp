#pragma once

// WebSocket transport for sessions: every inbound text frame holds one JSON
// message and is answered by one frame holding the JSON array of responses.
// The first message of a connection must be {"type":"start","t","seed","mode"}.

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "gazeintent/session.hpp"

namespace gazeintent {

struct ServerOptions {
  std::string host = "127.0.0.1";
  unsigned short port = 8765;  ///< 0 picks a free port
  std::string log_dir;         ///< session logs are written here when non-empty
  SessionConfig session;
};

class WireServer {
 public:
  /// Binds immediately; throws DataError when the address cannot be bound.
  WireServer(std::shared_ptr<const PredictorModels> models, ServerOptions options);
  ~WireServer();
  WireServer(const WireServer&) = delete;
  WireServer& operator=(const WireServer&) = delete;

  [[nodiscard]] unsigned short port() const;
  /// Serves connections until stop(); one thread per connection.
  void run();
  /// Starts run() on a background thread.
  void start();
  /// Closes the listener and every open connection, then joins their threads.
  void stop();

  /// Paths of the session logs written so far.
  [[nodiscard]] std::vector<std::string> logs() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

class WireClient {
 public:
  WireClient();
  ~WireClient();
  WireClient(const WireClient&) = delete;
  WireClient& operator=(const WireClient&) = delete;

  /// Throws DataError when the handshake fails.
  void connect(const std::string& host, unsigned short port);
  /// Sends one message and returns the responses of its reply frame.
  std::vector<nlohmann::json> send(const nlohmann::json& msg);
  void close();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Synthetic-user session: plays board `seed` and streams its gaze, triggers and
/// rotations through `send`; returns the summary received for the final "end".
using SendFn = std::function<std::vector<nlohmann::json>(const nlohmann::json&)>;
[[nodiscard]] nlohmann::json drive_synthetic_session(const SendFn& send, std::uint64_t seed, Mode mode,
                                                     const GazeProfileParams& user = GazeProfileParams{},
                                                     const AttentionConfig& cfg = AttentionConfig{},
                                                     const BoardLayout& layout = standard_layout());

}  // namespace gazeintent

#include "gazeintent/wire.hpp"

#include <filesystem>
#include <set>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "gazeintent/errors.hpp"
#include "gazeintent/rng.hpp"

namespace gazeintent {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using nlohmann::json;

namespace {

json error_frame(const std::string& code, const std::string& text) {
  return json::array({{{"type", "error"}, {"t", 0.0}, {"code", code}, {"message", text}}});
}

}  // namespace

struct WireServer::Impl {
  std::shared_ptr<const PredictorModels> models;
  ServerOptions options;
  asio::io_context ioc;
  tcp::acceptor acceptor{ioc};
  std::thread runner;
  std::atomic<bool> stopping{false};
  std::atomic<std::uint64_t> counter{0};

  mutable std::mutex mu;
  std::vector<std::thread> workers;
  std::set<std::shared_ptr<websocket::stream<tcp::socket>>> open;
  std::vector<std::string> written;

  void accept_next() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec || stopping) return;
      auto ws = std::make_shared<websocket::stream<tcp::socket>>(std::move(socket));
      {
        std::lock_guard lock(mu);
        open.insert(ws);
        workers.emplace_back([this, ws] { serve(ws); });
      }
      accept_next();
    });
  }

  void serve(const std::shared_ptr<websocket::stream<tcp::socket>>& ws) {
    std::unique_ptr<Session> session;
    try {
      ws->accept();
      ws->text(true);
      for (;;) {
        beast::flat_buffer buffer;
        ws->read(buffer);
        json reply;
        json msg = json::parse(beast::buffers_to_string(buffer.data()), nullptr, false);
        if (msg.is_discarded()) {
          reply = error_frame("protocol", "frame is not valid JSON");
        } else if (!session) {
          reply = open_session(msg, session);
        } else {
          reply = json(session->handle(msg));
        }
        ws->write(asio::buffer(reply.dump()));
      }
    } catch (const std::exception&) {
      // connection closed or reset
    }
    if (session) {
      try {
        save(*session);
      } catch (const std::exception&) {
        // a lost log must not take the server down
      }
    }
    std::lock_guard lock(mu);
    open.erase(ws);
  }

  json open_session(const json& msg, std::unique_ptr<Session>& session) {
    if (!msg.is_object() || msg.value("type", "") != "start") return error_frame("protocol", "first message must be 'start'");
    try {
      auto seed = msg.at("seed").get<std::uint64_t>();
      Mode mode = mode_from_string(msg.value("mode", std::string("FollowIntention")));
      session = std::make_unique<Session>(seed, mode, models, options.session);
      return json(session->handle(msg));
    } catch (const std::exception& e) {
      session.reset();
      return error_frame("protocol", e.what());
    }
  }

  void save(const Session& session) {
    if (options.log_dir.empty()) return;
    std::filesystem::create_directories(options.log_dir);
    auto n = counter++;
    auto path = (std::filesystem::path(options.log_dir) /
                 ("session-" + std::to_string(session.summary().seed) + "-" + std::to_string(n) + ".jsonl"))
                    .string();
    session.write_log(path);
    std::lock_guard lock(mu);
    written.push_back(path);
  }
};

WireServer::WireServer(std::shared_ptr<const PredictorModels> models, ServerOptions options)
    : impl_(std::make_unique<Impl>()) {
  if (!models) throw ModelLoadError("server needs trained models");
  options.session.validate();
  impl_->models = std::move(models);
  impl_->options = std::move(options);
  beast::error_code ec;
  auto addr = asio::ip::make_address(impl_->options.host, ec);
  if (ec) throw DataError("bad listen address '" + impl_->options.host + "'");
  tcp::endpoint ep{addr, impl_->options.port};
  impl_->acceptor.open(ep.protocol(), ec);
  if (!ec) impl_->acceptor.set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) impl_->acceptor.bind(ep, ec);
  if (!ec) impl_->acceptor.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) throw DataError("cannot listen on " + impl_->options.host + ":" + std::to_string(impl_->options.port) + ": " + ec.message());
}

WireServer::~WireServer() { stop(); }

unsigned short WireServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void WireServer::run() {
  impl_->accept_next();
  impl_->ioc.run();
}

void WireServer::start() {
  impl_->runner = std::thread([this] { run(); });
}

void WireServer::stop() {
  if (impl_->stopping.exchange(true)) return;
  asio::post(impl_->ioc, [this] {
    beast::error_code ec;
    impl_->acceptor.close(ec);
  });
  impl_->ioc.stop();
  if (impl_->runner.joinable()) impl_->runner.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(impl_->mu);
    for (const auto& ws : impl_->open) {
      beast::error_code ec;
      beast::get_lowest_layer(*ws).shutdown(tcp::socket::shutdown_both, ec);
    }
    workers.swap(impl_->workers);
  }
  for (auto& w : workers)
    if (w.joinable()) w.join();
}

std::vector<std::string> WireServer::logs() const {
  std::lock_guard lock(impl_->mu);
  return impl_->written;
}

struct WireClient::Impl {
  asio::io_context ioc;
  websocket::stream<tcp::socket> ws{ioc};
  bool connected = false;
};

WireClient::WireClient() : impl_(std::make_unique<Impl>()) {}

WireClient::~WireClient() {
  try {
    close();
  } catch (...) {
  }
}

void WireClient::connect(const std::string& host, unsigned short port) {
  try {
    tcp::resolver resolver(impl_->ioc);
    auto results = resolver.resolve(host, std::to_string(port));
    asio::connect(impl_->ws.next_layer(), results.begin(), results.end());
    impl_->ws.handshake(host + ":" + std::to_string(port), "/");
    impl_->ws.text(true);
    impl_->connected = true;
  } catch (const std::exception& e) {
    throw DataError(std::string("cannot connect to session service: ") + e.what());
  }
}

std::vector<json> WireClient::send(const json& msg) {
  if (!impl_->connected) throw ProtocolError("client is not connected");
  try {
    impl_->ws.write(asio::buffer(msg.dump()));
    beast::flat_buffer buffer;
    impl_->ws.read(buffer);
    auto reply = json::parse(beast::buffers_to_string(buffer.data()));
    if (!reply.is_array()) throw ProtocolError("reply frame is not an array");
    return reply.get<std::vector<json>>();
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed reply: ") + e.what());
  } catch (const beast::system_error& e) {
    throw DataError(std::string("connection failed: ") + e.what());
  }
}

void WireClient::close() {
  if (!impl_->connected) return;
  impl_->connected = false;
  beast::error_code ec;
  impl_->ws.close(websocket::close_code::normal, ec);
}

json drive_synthetic_session(const SendFn& send, std::uint64_t seed, Mode mode, const GazeProfileParams& user,
                             const AttentionConfig& cfg, const BoardLayout& layout) {
  BoardRun run = play_board(seed, derive_seed(seed, {0x64726976ULL}), user, layout, cfg);
  auto expect_no_error = [](const std::vector<json>& replies) {
    for (const auto& r : replies)
      if (r.value("type", "") == "error") throw ProtocolError("session rejected a message: " + r.dump());
    return replies;
  };
  expect_no_error(send({{"type", "start"}, {"t", 0.0}, {"seed", seed}, {"mode", to_string(mode)}}));

  std::size_t next_action = 0;
  double last_t = 0.0;
  for (const auto& s : run.gaze) {
    json g{{"type", "gaze"}, {"t", s.t}, {"valid", s.valid}};
    if (s.valid) {
      g["x"] = s.pos.x;
      g["y"] = s.pos.y;
    }
    expect_no_error(send(g));
    last_t = s.t;
    while (next_action < run.actions.size() && run.actions[next_action].action_time <= s.t + 1e-9) {
      const auto& a = run.actions[next_action++];
      if (a.kind == ActionKind::Place) {
        // the held piece is still unrotated on the wire; rotations precede the trigger
        int turns = a.before.cells[static_cast<std::size_t>(object_index(a.target))].model.orientation.quarter_turns;
        for (int r = 0; r < turns; ++r) expect_no_error(send({{"type", "rotate"}, {"t", s.t}}));
      }
      Vec2 p = object_position(layout, a.target);
      expect_no_error(send({{"type", "trigger"}, {"t", s.t}, {"x", p.x}, {"y", p.y}}));
    }
  }
  double end_t = std::max(last_t, run.actions.empty() ? 0.0 : run.actions.back().action_time + user.gripper_latency) + cfg.frame;
  auto replies = expect_no_error(send({{"type", "end"}, {"t", end_t}}));
  for (auto it = replies.rbegin(); it != replies.rend(); ++it)
    if (it->value("type", "") == "summary") return *it;
  throw ProtocolError("end did not produce a summary");
}

}  // namespace gazeintent

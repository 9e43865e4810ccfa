// Copyright 2026 The Softgames Authors.
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

#ifndef SOFTGAMES_SERVER_SERVER_HPP_
#define SOFTGAMES_SERVER_SERVER_HPP_

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <boost/asio/co_spawn.hpp>
#include <boost/asio/detached.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/io_context.hpp>
#include <boost/asio/redirect_error.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/asio/strand.hpp>
#include <boost/asio/this_coro.hpp>
#include <boost/asio/use_awaitable.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "json.hpp"
#include "softgames/server/policy_source.hpp"
#include "softgames/server/protocol.hpp"
#include "softgames/server/session.hpp"

namespace softgames::server {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

struct ServerOptions {
  std::string address = "127.0.0.1";
  std::uint16_t port = 8080;  // 0 picks a free port
  // Ticks per second. 0 = lockstep: one tick per received action message.
  double tick_rate = 30.0;
  std::filesystem::path ui_dir;  // static bundle served under GET /
  SessionConfig session;
  int threads = 0;  // 0 = hardware concurrency

  void validate() const {
    if (!(tick_rate >= 0.0) || !std::isfinite(tick_rate)) {
      throw std::invalid_argument("ServerOptions: tick_rate must be finite and >= 0");
    }
    if (threads < 0) throw std::invalid_argument("ServerOptions: threads must be >= 0");
    session.balance.validate();
  }
};

namespace detail {

inline std::string_view mime_type(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".html") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json" || ext == ".map") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".ico") return "image/x-icon";
  if (ext == ".wasm") return "application/wasm";
  return "application/octet-stream";
}

/// Maps a request target onto a file inside root; nullopt if it escapes root
/// or does not exist.
inline std::optional<std::filesystem::path> resolve_static(
    const std::filesystem::path& root, std::string_view target) {
  namespace fs = std::filesystem;
  if (root.empty()) return std::nullopt;
  target = target.substr(0, target.find_first_of("?#"));
  if (target.empty() || target.front() != '/') return std::nullopt;
  std::string rel(target.substr(1));
  if (rel.empty() || rel.back() == '/') rel += "index.html";
  const fs::path rel_path(rel);
  for (const auto& part : rel_path) {
    if (part == ".." || part.string().find('\\') != std::string::npos) return std::nullopt;
  }
  std::error_code ec;
  const auto base = fs::weakly_canonical(root, ec);
  if (ec) return std::nullopt;
  const auto full = fs::weakly_canonical(base / rel_path, ec);
  if (ec || !fs::is_regular_file(full, ec)) return std::nullopt;
  const auto [b, f] = std::mismatch(base.begin(), base.end(), full.begin(), full.end());
  if (b != base.end()) return std::nullopt;
  return full;
}

}  // namespace detail

/// HTTP + WebSocket play service. GET /healthz, static files under /, and the
/// game protocol on /ws. Each connection runs on its own strand.
class PlayServer {
 public:
  PlayServer(std::shared_ptr<const PolicySource> source, ServerOptions opts)
      : source_(std::move(source)), opts_(std::move(opts)) {
    if (!source_) throw std::invalid_argument("PlayServer: null policy source");
    opts_.validate();
  }

  ~PlayServer() { stop(); }
  PlayServer(const PlayServer&) = delete;
  PlayServer& operator=(const PlayServer&) = delete;

  /// Binds and starts worker threads; returns the bound port.
  std::uint16_t start() {
    tcp::endpoint ep(net::ip::make_address(opts_.address), opts_.port);
    acceptor_.open(ep.protocol());
    acceptor_.set_option(net::socket_base::reuse_address(true));
    acceptor_.bind(ep);
    acceptor_.listen();
    port_ = acceptor_.local_endpoint().port();
    net::co_spawn(acceptor_.get_executor(), accept_loop(), net::detached);
    const int n = opts_.threads > 0
                      ? opts_.threads
                      : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    for (int i = 0; i < n; ++i) workers_.emplace_back([this] { ioc_.run(); });
    return port_;
  }

  /// Blocks until stop() is called from another thread or a signal handler.
  void wait() {
    for (auto& t : workers_) {
      if (t.joinable()) t.join();
    }
  }

  void stop() {
    if (stopped_.exchange(true)) return;
    ioc_.stop();
    wait();
  }

  std::uint16_t port() const { return port_; }
  std::size_t session_count() const { return sessions_.load(); }

 private:
  net::awaitable<void> accept_loop() {
    for (;;) {
      beast::error_code ec;
      auto socket = co_await acceptor_.async_accept(
          net::make_strand(ioc_), net::redirect_error(net::use_awaitable, ec));
      if (ec) {
        if (ec == net::error::operation_aborted) co_return;
        continue;
      }
      auto ex = socket.get_executor();
      net::co_spawn(ex, serve_connection(beast::tcp_stream(std::move(socket))),
                    net::detached);
    }
  }

  net::awaitable<void> serve_connection(beast::tcp_stream stream) {
    beast::flat_buffer buffer;
    try {
      for (;;) {
        http::request<http::string_body> req;
        stream.expires_after(std::chrono::seconds(30));
        co_await http::async_read(stream, buffer, req, net::use_awaitable);
        if (websocket::is_upgrade(req)) {
          if (req.target() != "/ws") {
            co_await send(stream, text_response(req, http::status::not_found, "not found\n"));
            co_return;
          }
          stream.expires_never();
          websocket::stream<beast::tcp_stream> ws(std::move(stream));
          co_await ws.async_accept(req, net::use_awaitable);
          co_await play(std::move(ws));
          co_return;
        }
        const bool keep = req.keep_alive();
        co_await send(stream, route(req));
        if (!keep) break;
      }
      beast::error_code ec;
      stream.socket().shutdown(tcp::socket::shutdown_send, ec);
    } catch (const std::exception&) {
      // Connection-level failures only end this connection.
    }
  }

  template <typename Response>
  static net::awaitable<void> send(beast::tcp_stream& stream, Response res) {
    co_await http::async_write(stream, res, net::use_awaitable);
  }

  static http::response<http::string_body> text_response(
      const http::request<http::string_body>& req, http::status status,
      std::string body, std::string_view type = "text/plain; charset=utf-8") {
    http::response<http::string_body> res{status, req.version()};
    res.set(http::field::content_type, std::string(type));
    res.keep_alive(req.keep_alive());
    res.body() = std::move(body);
    res.prepare_payload();
    return res;
  }

  http::response<http::string_body> route(const http::request<http::string_body>& req) const {
    if (req.method() != http::verb::get) {
      return text_response(req, http::status::method_not_allowed, "method not allowed\n");
    }
    const auto target = req.target();
    if (target == "/healthz") {
      const nlohmann::json body = {{"status", "ok"}, {"sessions", session_count()},
                                   {"policy", source_->kind()}};
      return text_response(req, http::status::ok, body.dump() + "\n", "application/json");
    }
    const auto file = detail::resolve_static(opts_.ui_dir,
                                             std::string_view(target.data(), target.size()));
    if (!file) return text_response(req, http::status::not_found, "not found\n");
    std::ifstream in(*file, std::ios::binary);
    std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return text_response(req, http::status::ok, std::move(body),
                         std::string(detail::mime_type(*file)));
  }

  // Shared state of one WebSocket game; all access is on the connection strand.
  struct Live {
    explicit Live(websocket::stream<beast::tcp_stream> s, PlaySession p)
        : ws(std::move(s)), session(std::move(p)) {}
    websocket::stream<beast::tcp_stream> ws;
    PlaySession session;
    bool closing = false;
    bool protocol_error = false;
  };

  SessionConfig next_session_config() {
    SessionConfig cfg = opts_.session;
    cfg.seed = opts_.session.seed + next_session_.fetch_add(1);
    return cfg;
  }

  net::awaitable<void> write_frame(Live& live, StateFrame f) {
    f.sessions = session_count();
    co_await live.ws.async_write(net::buffer(encode(f)), net::use_awaitable);
  }

  net::awaitable<void> play(websocket::stream<beast::tcp_stream> ws) {
    ws.text(true);
    auto live = std::make_shared<Live>(std::move(ws),
                                       PlaySession(source_, next_session_config()));
    ++sessions_;
    struct Guard {
      std::atomic<std::size_t>& n;
      ~Guard() { --n; }
    } guard{sessions_};
    try {
      co_await write_frame(*live, live->session.frame());
      if (opts_.tick_rate > 0.0) {
        auto ex = co_await net::this_coro::executor;
        auto timer = std::make_shared<net::steady_timer>(ex);
        net::co_spawn(ex, tick_loop(live, timer), net::detached);
        co_await read_loop(*live, timer.get());
      } else {
        co_await read_loop(*live, nullptr);
      }
    } catch (const std::exception&) {
      live->closing = true;
    }
  }

  // Reads client messages. In lockstep mode each action also advances one
  // tick and answers with the frame.
  net::awaitable<void> read_loop(Live& live, net::steady_timer* timer) {
    beast::flat_buffer buffer;
    for (;;) {
      beast::error_code ec;
      co_await live.ws.async_read(buffer, net::redirect_error(net::use_awaitable, ec));
      if (ec) break;
      const auto text = beast::buffers_to_string(buffer.data());
      buffer.consume(buffer.size());
      ClientMessage msg;
      try {
        msg = live.session.handle_text(text);
      } catch (const ProtocolError&) {
        live.protocol_error = true;
        break;
      }
      if (timer == nullptr && std::holds_alternative<ActionMessage>(msg)) {
        co_await write_frame(live, live.session.step());
      }
    }
    live.closing = true;
    if (timer != nullptr) {
      timer->cancel();  // the tick loop owns writes and sends the close frame
    } else if (live.protocol_error) {
      co_await close_protocol_error(live);
    }
  }

  net::awaitable<void> tick_loop(std::shared_ptr<Live> live,
                                 std::shared_ptr<net::steady_timer> timer) {
    const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / opts_.tick_rate));
    auto next = std::chrono::steady_clock::now();
    try {
      while (!live->closing) {
        next += period;
        timer->expires_at(next);
        beast::error_code ec;
        co_await timer->async_wait(net::redirect_error(net::use_awaitable, ec));
        if (live->closing) break;
        co_await write_frame(*live, live->session.step());
      }
      if (live->protocol_error) co_await close_protocol_error(*live);
    } catch (const std::exception&) {
      live->closing = true;
    }
  }

  static net::awaitable<void> close_protocol_error(Live& live) {
    beast::error_code ec;
    co_await live.ws.async_close(websocket::close_reason(websocket::close_code::protocol_error),
                                 net::redirect_error(net::use_awaitable, ec));
  }

  std::shared_ptr<const PolicySource> source_;
  ServerOptions opts_;
  net::io_context ioc_;
  tcp::acceptor acceptor_{net::make_strand(ioc_)};
  std::vector<std::thread> workers_;
  std::uint16_t port_ = 0;
  std::atomic<std::size_t> sessions_{0};
  std::atomic<std::uint64_t> next_session_{0};
  std::atomic<bool> stopped_{false};
};

}  // namespace softgames::server

#endif  // SOFTGAMES_SERVER_SERVER_HPP_

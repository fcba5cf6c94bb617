#include "fleetsim/server/server.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <deque>
#include <future>
#include <iostream>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "fleetsim/errors.hpp"

namespace fleetsim::server {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

using Text = std::shared_ptr<const std::string>;

Text text(const json& j) { return std::make_shared<const std::string>(j.dump()); }

// One WebSocket client. Acks are queued in order; snapshots use a single
// slot that newer snapshots overwrite.
class WsConnection : public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(tcp::socket&& socket, LiveSession& session) : ws_(std::move(socket)), session_(session) {}

  void run(http::request<http::string_body> request) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(request, beast::bind_front_handler(&WsConnection::on_accept, shared_from_this()));
  }

  void publish(Text snapshot) {
    if (!open_) return;
    snapshot_ = std::move(snapshot);
    write_next();
  }

  bool closed() const { return closed_; }

  /// Drops the connection without a close handshake; used on server stop.
  void shutdown() {
    open_ = false;
    closed_ = true;
    beast::error_code ignored;
    beast::get_lowest_layer(ws_).socket().shutdown(tcp::socket::shutdown_both, ignored);
    beast::get_lowest_layer(ws_).socket().close(ignored);
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) {
      closed_ = true;
      return;
    }
    open_ = true;
    snapshot_ = text(session_.snapshot());
    write_next();
    read();
  }

  void read() { ws_.async_read(buffer_, beast::bind_front_handler(&WsConnection::on_read, shared_from_this())); }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      open_ = false;
      closed_ = true;
      return;
    }
    const std::string message = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    acks_.push_back(text(session_.apply_control_text(message).to_json()));
    // The next snapshot the client sees already reflects the control.
    snapshot_ = text(session_.snapshot());
    write_next();
    read();
  }

  void write_next() {
    if (writing_ || !open_) return;
    if (!acks_.empty()) {
      current_ = acks_.front();
      acks_.pop_front();
    } else if (snapshot_) {
      current_ = std::move(snapshot_);
      snapshot_.reset();
    } else {
      return;
    }
    writing_ = true;
    ws_.text(true);
    ws_.async_write(net::buffer(*current_), beast::bind_front_handler(&WsConnection::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    writing_ = false;
    current_.reset();
    if (ec) {
      open_ = false;
      closed_ = true;
      return;
    }
    write_next();
  }

  websocket::stream<beast::tcp_stream> ws_;
  LiveSession& session_;
  beast::flat_buffer buffer_;
  std::deque<Text> acks_;
  Text snapshot_;
  Text current_;
  bool writing_ = false;
  bool open_ = false;
  bool closed_ = false;
};

}  // namespace

struct Server::Impl {
  std::shared_ptr<LiveSession> session;
  std::string bind_address;
  unsigned short requested_port;
  unsigned short bound_port = 0;

  net::io_context ioc{1};
  tcp::acceptor acceptor{ioc};
  net::steady_timer snapshot_timer{ioc};
  std::vector<std::weak_ptr<WsConnection>> clients;

  std::atomic<bool> running{false};
  std::thread io_thread;
  std::thread sim_thread;

  void accept();
  void publish_snapshots();
  void sim_loop();
  void add_client(const std::shared_ptr<WsConnection>& c) { clients.push_back(c); }
  http::response<http::string_body> handle(const http::request<http::string_body>& req);
};

namespace {

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket&& socket, Server::Impl& server) : stream_(std::move(socket)), server_(server) {}

  void run() { read(); }

 private:
  void read() {
    request_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, request_,
                     beast::bind_front_handler(&HttpConnection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      beast::error_code ignored;
      stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
      return;
    }
    if (websocket::is_upgrade(request_) && request_.target() == "/session") {
      stream_.expires_never();
      auto ws = std::make_shared<WsConnection>(stream_.release_socket(), *server_.session);
      server_.add_client(ws);
      ws->run(std::move(request_));
      return;
    }
    auto response = std::make_shared<http::response<http::string_body>>(server_.handle(request_));
    http::async_write(stream_, *response, [self = shared_from_this(), response](beast::error_code wec, std::size_t) {
      if (wec) return;
      if (!response->keep_alive()) {
        beast::error_code ignored;
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
        return;
      }
      self->read();
    });
  }

  beast::tcp_stream stream_;
  Server::Impl& server_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> request_;
};

}  // namespace

http::response<http::string_body> Server::Impl::handle(const http::request<http::string_body>& req) {
  http::response<http::string_body> res{http::status::ok, req.version()};
  res.set(http::field::server, "fleetsim");
  res.set(http::field::access_control_allow_origin, "*");
  res.set(http::field::content_type, "application/json");
  res.keep_alive(req.keep_alive());

  std::string target(req.target());
  if (const auto q = target.find('?'); q != std::string::npos) target.resize(q);

  auto reply = [&](http::status status, const json& body) {
    res.result(status);
    res.body() = body.dump();
    res.prepare_payload();
    return res;
  };

  if (req.method() == http::verb::options) {
    res.set(http::field::access_control_allow_methods, "GET, OPTIONS");
    res.set(http::field::access_control_allow_headers, "Content-Type");
    res.result(http::status::no_content);
    res.prepare_payload();
    return res;
  }
  if (req.method() != http::verb::get) return reply(http::status::method_not_allowed, {{"error", "GET only"}});
  try {
    if (target == "/health") return reply(http::status::ok, {{"status", "ok"}});
    if (target == "/config") return reply(http::status::ok, session->config_document());
    if (target == "/report") {
      res.body() = report_json(session->report(), false);
      res.prepare_payload();
      return res;
    }
  } catch (const std::exception& e) {
    return reply(http::status::internal_server_error, {{"error", e.what()}});
  }
  return reply(http::status::not_found, {{"error", "no route " + target}});
}

void Server::Impl::accept() {
  acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
    if (ec) {
      if (ec != net::error::operation_aborted && running) accept();
      return;
    }
    std::make_shared<HttpConnection>(std::move(socket), *this)->run();
    accept();
  });
}

void Server::Impl::publish_snapshots() {
  const double hz = session->snapshot_hz();
  snapshot_timer.expires_after(std::chrono::microseconds(static_cast<std::int64_t>(1e6 / hz)));
  snapshot_timer.async_wait([this](beast::error_code ec) {
    if (ec || !running) return;
    std::erase_if(clients, [](const std::weak_ptr<WsConnection>& w) {
      const auto c = w.lock();
      return !c || c->closed();
    });
    if (!clients.empty()) {
      const Text snapshot = text(session->snapshot());
      for (const auto& w : clients) {
        if (auto c = w.lock()) c->publish(snapshot);
      }
    }
    publish_snapshots();
  });
}

void Server::Impl::sim_loop() {
  using clock = std::chrono::steady_clock;
  const double tick_s = session->tick_s();
  auto last = clock::now();
  double due_s = 0.0;
  while (running) {
    const auto now = clock::now();
    const double wall_s = std::chrono::duration<double>(now - last).count();
    last = now;
    if (session->paused()) {
      due_s = 0.0;
    } else {
      const double scale = session->time_scale();
      // Never try to catch up more than half a second of wall time.
      due_s = std::min(due_s + wall_s * scale, std::max(tick_s, 0.5 * scale));
    }
    try {
      while (running && due_s >= tick_s) {
        session->step();
        due_s -= tick_s;
      }
    } catch (const std::exception& e) {
      std::cerr << "simulation stopped: " << e.what() << '\n';
      return;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
}

Server::Server(std::shared_ptr<LiveSession> session, std::string bind_address, unsigned short port)
    : impl_(std::make_unique<Impl>()) {
  impl_->session = std::move(session);
  impl_->bind_address = std::move(bind_address);
  impl_->requested_port = port;
}

Server::~Server() { stop(); }

void Server::start() {
  if (impl_->running) return;
  const tcp::endpoint endpoint{net::ip::make_address(impl_->bind_address), impl_->requested_port};
  impl_->acceptor.open(endpoint.protocol());
  impl_->acceptor.set_option(net::socket_base::reuse_address(true));
  impl_->acceptor.bind(endpoint);
  impl_->acceptor.listen(net::socket_base::max_listen_connections);
  impl_->bound_port = impl_->acceptor.local_endpoint().port();
  impl_->running = true;
  impl_->accept();
  impl_->publish_snapshots();
  impl_->io_thread = std::thread([this] { impl_->ioc.run(); });
  impl_->sim_thread = std::thread([this] { impl_->sim_loop(); });
}

void Server::stop() {
  if (!impl_ || !impl_->running.exchange(false)) return;
  // Close sockets on the I/O thread so clients see the disconnect.
  std::promise<void> closed;
  net::post(impl_->ioc, [this, &closed] {
    beast::error_code ignored;
    impl_->acceptor.close(ignored);
    impl_->snapshot_timer.cancel();
    for (const auto& w : impl_->clients) {
      if (auto c = w.lock()) c->shutdown();
    }
    impl_->clients.clear();
    closed.set_value();
  });
  closed.get_future().wait();
  impl_->ioc.stop();
  if (impl_->io_thread.joinable()) impl_->io_thread.join();
  if (impl_->sim_thread.joinable()) impl_->sim_thread.join();
}

unsigned short Server::port() const { return impl_->bound_port; }

LiveSession& Server::session() { return *impl_->session; }

int serve(const ScenarioConfig& config, int port) {
  if (port < 0 || port > 65535) throw InvalidConfig("port out of range");
  ScenarioConfig live = config;
  live.mode = RunMode::Live;
  live.validate();
  const auto inputs = load_inputs(live);
  std::optional<EmissionCoefficients> coefficients;
  if (!live.coefficients_file.empty()) coefficients = load_coefficients(live.coefficients_file);
  auto session = std::make_shared<LiveSession>(live, inputs, coefficients);

  const char* env = std::getenv("FLEETSIM_BIND");
  const std::string bind = env && *env ? env : "127.0.0.1";
  Server server(session, bind, static_cast<unsigned short>(port));
  server.start();
  std::cerr << "listening on " << bind << ':' << server.port() << '\n';

  net::io_context signals_ioc;
  net::signal_set signals(signals_ioc, SIGINT, SIGTERM);
  signals.async_wait([](beast::error_code, int) {});
  signals_ioc.run();
  server.stop();
  return 0;
}

}  // namespace fleetsim::server

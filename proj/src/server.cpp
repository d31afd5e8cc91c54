#include "stagelink/server.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <json.hpp>

#include "json_util.hpp"
#include "stagelink/engine.hpp"
#include "stagelink/error.hpp"
#include "stagelink/posebus.hpp"

namespace stagelink {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace ws = beast::websocket;
using asio::ip::tcp;
using asio::ip::udp;
using nlohmann::json;

namespace {

std::string error_reply(std::string_view code, const std::string& message) {
    return json{{"type", "error"}, {"code", code}, {"message", message}}.dump();
}

double axis(const json& j, const char* key) {
    if (!j.contains(key)) {
        return 0.0;
    }
    return detail::number_from(j[key], ErrorCode::InvalidArgument, std::string("/") + key);
}

std::string text_field(const json& j, const char* key) {
    return detail::string_from(detail::member(j, key, ErrorCode::InvalidArgument, ""), ErrorCode::InvalidArgument,
                               std::string("/") + key);
}

} // namespace

std::string handle_control_message(Engine& engine, const std::string& text, bool& subscribe) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        return error_reply("ParseError", e.what());
    }
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
        return error_reply("InvalidArgument", "message needs a string \"type\"");
    }
    const std::string type = j["type"].get<std::string>();
    try {
        if (type == "axes") {
            AxisInput a;
            a.forward = axis(j, "forward");
            a.lateral = axis(j, "lateral");
            a.vertical = axis(j, "vertical");
            a.yaw_rate = axis(j, "yaw_rate");
            a.pitch_rate = axis(j, "pitch_rate");
            engine.set_axes(text_field(j, "avatar"), a);
        } else if (type == "ownership") {
            const auto channel = parse_channel_id(text_field(j, "channel"));
            const auto kind = parse_owner_kind(text_field(j, "owner"));
            if (!channel || !kind) {
                return error_reply("InvalidArgument", "unknown channel or owner");
            }
            Owner owner{*kind, 0.0};
            if (*kind == OwnerKind::Blend) {
                owner = Owner::blend(axis(j, "weight"));
            }
            engine.request_ownership(text_field(j, "avatar"), *channel, owner);
        } else if (type == "fire_cue") {
            engine.request_fire(text_field(j, "id"));
        } else if (type == "watch") {
            const std::string avatar = text_field(j, "avatar");
            if (!engine.mixer().ownership().has_avatar(avatar)) {
                throw Error(ErrorCode::UnknownAvatar, avatar);
            }
            const json& t = detail::member(j, "target", ErrorCode::InvalidArgument, "");
            std::optional<WatchTarget> target;
            if (!t.is_null()) {
                target = detail::watch_from(t, ErrorCode::InvalidArgument, "/target");
            }
            engine.request_action(SetWatch{avatar, target});
        } else if (type == "subscribe_state") {
            subscribe = true;
        } else {
            return error_reply("InvalidArgument", "unknown message type '" + type + "'");
        }
    } catch (const Error& e) {
        return error_reply(to_string(e.code()), e.what());
    }
    return json{{"type", "ack"}, {"of", type}}.dump();
}

struct Server::Impl {
    // A control connection; TCP and WebSocket differ only in framing.
    struct Session : std::enable_shared_from_this<Session> {
        explicit Session(Impl& s) : server(s) {}
        virtual ~Session() = default;
        virtual void start() = 0;
        virtual void send(std::string text) = 0;
        virtual void close() = 0;
        bool subscribed = false;
        Impl& server;
    };

    struct TcpSession final : Session {
        TcpSession(Impl& s, tcp::socket sock) : Session(s), socket(std::move(sock)) {}

        void start() override { read(); }

        void read() {
            asio::async_read_until(socket, asio::dynamic_buffer(in), '\n',
                                   [self = shared()](beast::error_code ec, std::size_t n) {
                                       if (ec) {
                                           return;
                                       }
                                       std::string line = self->in.substr(0, n - 1);
                                       self->in.erase(0, n);
                                       if (!line.empty() && line.back() == '\r') {
                                           line.pop_back();
                                       }
                                       if (!line.empty()) {
                                           self->send(self->server.handle(line, *self));
                                       }
                                       self->read();
                                   });
        }

        void send(std::string text) override {
            out.push_back(std::move(text) + "\n");
            if (out.size() == 1) {
                write();
            }
        }

        void write() {
            asio::async_write(socket, asio::buffer(out.front()), [self = shared()](beast::error_code ec, std::size_t) {
                if (ec) {
                    self->out.clear();
                    return;
                }
                self->out.pop_front();
                if (!self->out.empty()) {
                    self->write();
                }
            });
        }

        void close() override {
            beast::error_code ec;
            socket.shutdown(tcp::socket::shutdown_both, ec);
            socket.close(ec);
        }

        std::shared_ptr<TcpSession> shared() { return std::static_pointer_cast<TcpSession>(shared_from_this()); }

        tcp::socket socket;
        std::string in;
        std::deque<std::string> out;
    };

    struct WsSession final : Session {
        WsSession(Impl& s, tcp::socket sock) : Session(s), stream(std::move(sock)) {}

        void start() override {
            stream.async_accept([self = shared()](beast::error_code ec) {
                if (!ec) {
                    self->read();
                }
            });
        }

        void read() {
            stream.async_read(buffer, [self = shared()](beast::error_code ec, std::size_t) {
                if (ec) {
                    return;
                }
                const std::string text = beast::buffers_to_string(self->buffer.data());
                self->buffer.consume(self->buffer.size());
                self->send(self->server.handle(text, *self));
                self->read();
            });
        }

        void send(std::string text) override {
            out.push_back(std::move(text));
            if (out.size() == 1) {
                write();
            }
        }

        void write() {
            stream.text(true);
            stream.async_write(asio::buffer(out.front()), [self = shared()](beast::error_code ec, std::size_t) {
                if (ec) {
                    self->out.clear();
                    return;
                }
                self->out.pop_front();
                if (!self->out.empty()) {
                    self->write();
                }
            });
        }

        void close() override {
            beast::error_code ec;
            beast::get_lowest_layer(stream).close(ec);
        }

        std::shared_ptr<WsSession> shared() { return std::static_pointer_cast<WsSession>(shared_from_this()); }

        ws::stream<tcp::socket> stream;
        beast::flat_buffer buffer;
        std::deque<std::string> out;
    };

    Impl(SceneConfig scene, std::optional<CueSheet> cues, ServerConfig cfg)
        : config(std::move(cfg)),
          engine(std::move(scene), std::move(cues), config.tick_hz),
          mocap_socket(io),
          control_acceptor(io),
          ws_acceptor(io),
          tick_timer(io),
          state_timer(io) {
        for (const StreamConfig& s : engine.scene().streams) {
            if (s.origin == StreamOrigin::Udp) {
                live.emplace(s.id, LiveStream(s.id, s.topology.size()));
            } else {
                bvh.emplace(s.id, BvhStream(load_bvh(s.bvh_path, s.id), 0, s.loop, s.rate_hz));
            }
        }
        for (const auto& [host, port] : config.posebus_targets) {
            bus.add_sink(std::make_shared<UdpPoseSink>(host, port));
        }
        if (config.record_path) {
            engine.start_recording();
        }
    }

    std::string handle(const std::string& text, Session& session) {
        bool subscribe = false;
        std::string reply;
        {
            std::lock_guard lock(mutex);
            reply = handle_control_message(engine, text, subscribe);
        }
        if (subscribe) {
            session.subscribed = true;
        }
        return reply;
    }

    std::uint64_t now_us() const {
        return static_cast<std::uint64_t>(
            std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - epoch).count());
    }

    void listen(tcp::acceptor& acc, std::uint16_t port) {
        const tcp::endpoint ep(asio::ip::make_address(config.bind_host), port);
        acc.open(ep.protocol());
        acc.set_option(asio::socket_base::reuse_address(true));
        acc.bind(ep);
        acc.listen();
    }

    template <class S>
    void accept(tcp::acceptor& acc) {
        acc.async_accept([this, &acc](beast::error_code ec, tcp::socket sock) {
            if (ec) {
                return;
            }
            auto s = std::make_shared<S>(*this, std::move(sock));
            sessions.push_back(s);
            s->start();
            accept<S>(acc);
        });
    }

    void receive_mocap() {
        mocap_socket.async_receive_from(asio::buffer(datagram), sender, [this](beast::error_code ec, std::size_t n) {
            if (ec) {
                return;
            }
            try {
                const MocapFrame f =
                    decode_frame(std::span<const std::uint8_t>(datagram.data(), n));
                std::lock_guard lock(mutex);
                if (const auto it = live.find(f.stream_id); it != live.end()) {
                    it->second.push(f, now_us());
                }
            } catch (const Error&) {
                ++bad_datagrams;
            }
            receive_mocap();
        });
    }

    void schedule_tick() {
        tick_timer.expires_at(epoch + period * static_cast<long>(tick_count.load() + 1));
        tick_timer.async_wait([this](beast::error_code ec) {
            if (ec || stopping) {
                return;
            }
            tick();
            schedule_tick();
        });
    }

    void tick() {
        TickOutput out;
        {
            std::lock_guard lock(mutex);
            const std::uint64_t t = now_us();
            std::map<std::uint8_t, StreamSample> samples;
            for (const auto& [id, s] : bvh) {
                samples.emplace(id, s.tick(t));
            }
            for (const auto& [id, s] : live) {
                samples.emplace(id, s.tick(t));
            }
            out = engine.step(std::move(samples));
        }
        bus.publish(out);
        sent = bus.sent();
        dropped = bus.dropped();
        ++tick_count;
    }

    void schedule_state() {
        state_timer.expires_after(std::chrono::duration_cast<std::chrono::steady_clock::duration>(
            std::chrono::duration<double>(1.0 / config.state_hz)));
        state_timer.async_wait([this](beast::error_code ec) {
            if (ec || stopping) {
                return;
            }
            push_state();
            schedule_state();
        });
    }

    void push_state() {
        std::erase_if(sessions, [](const std::weak_ptr<Session>& w) { return w.expired(); });
        std::string snapshot;
        for (const auto& w : sessions) {
            if (auto s = w.lock(); s && s->subscribed) {
                if (snapshot.empty()) {
                    std::lock_guard lock(mutex);
                    snapshot = engine.snapshot_json();
                }
                s->send(snapshot);
            }
        }
    }

    ServerConfig config;
    asio::io_context io;
    mutable std::mutex mutex;  // engine and streams
    Engine engine;
    std::map<std::uint8_t, BvhStream> bvh;
    std::map<std::uint8_t, LiveStream> live;
    PoseBusPublisher bus;
    udp::socket mocap_socket;
    udp::endpoint sender;
    std::array<std::uint8_t, 65536> datagram{};
    tcp::acceptor control_acceptor;
    tcp::acceptor ws_acceptor;
    asio::steady_timer tick_timer;
    asio::steady_timer state_timer;
    std::vector<std::weak_ptr<Session>> sessions;
    std::chrono::steady_clock::time_point epoch;
    std::chrono::steady_clock::duration period{};
    std::atomic<std::uint64_t> tick_count{0};
    std::atomic<std::uint64_t> sent{0};
    std::atomic<std::uint64_t> dropped{0};
    std::atomic<std::uint64_t> bad_datagrams{0};
    std::atomic<bool> stopping{false};
    std::atomic<bool> running{false};
    std::thread thread;
    std::mutex wait_mutex;
    std::condition_variable wait_cv;
};

Server::Server(SceneConfig scene, std::optional<CueSheet> cues, ServerConfig config)
    : impl_(std::make_unique<Impl>(std::move(scene), std::move(cues), std::move(config))) {}

Server::~Server() { stop(); }

void Server::start() {
    Impl& s = *impl_;
    if (s.running) {
        return;
    }
    try {
        const udp::endpoint ep(asio::ip::make_address(s.config.bind_host), s.config.mocap_port);
        s.mocap_socket.open(ep.protocol());
        s.mocap_socket.bind(ep);
        s.listen(s.control_acceptor, s.config.control_port);
        s.listen(s.ws_acceptor, s.config.ws_port);
    } catch (const boost::system::system_error& e) {
        throw Error(ErrorCode::SocketError, e.what());
    }
    s.period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(tick_period(s.config.tick_hz)));
    s.epoch = std::chrono::steady_clock::now();
    s.receive_mocap();
    s.accept<Impl::TcpSession>(s.control_acceptor);
    s.accept<Impl::WsSession>(s.ws_acceptor);
    s.schedule_tick();
    s.schedule_state();
    s.running = true;
    s.thread = std::thread([&s] { s.io.run(); });
}

void Server::stop() {
    Impl& s = *impl_;
    if (!s.running.exchange(false)) {
        return;
    }
    s.stopping = true;
    asio::post(s.io, [&s] {
        beast::error_code ec;
        s.tick_timer.cancel();
        s.state_timer.cancel();
        s.control_acceptor.close(ec);
        s.ws_acceptor.close(ec);
        s.mocap_socket.close(ec);
        for (const auto& w : s.sessions) {
            if (auto p = w.lock()) {
                p->close();
            }
        }
    });
    s.thread.join();
    if (s.config.record_path && s.engine.recorder()) {
        s.engine.recorder()->write(*s.config.record_path);
    }
    {
        std::lock_guard lock(s.wait_mutex);
    }
    s.wait_cv.notify_all();
}

void Server::wait() {
    std::unique_lock lock(impl_->wait_mutex);
    impl_->wait_cv.wait(lock, [this] { return !impl_->running.load(); });
}

std::uint16_t Server::mocap_port() const { return impl_->mocap_socket.local_endpoint().port(); }
std::uint16_t Server::control_port() const { return impl_->control_acceptor.local_endpoint().port(); }
std::uint16_t Server::ws_port() const { return impl_->ws_acceptor.local_endpoint().port(); }
std::uint64_t Server::ticks() const { return impl_->tick_count; }
std::uint64_t Server::poses_sent() const { return impl_->sent; }
std::uint64_t Server::poses_dropped() const { return impl_->dropped; }

std::string Server::snapshot_json() const {
    std::lock_guard lock(impl_->mutex);
    return impl_->engine.snapshot_json();
}

} // namespace stagelink

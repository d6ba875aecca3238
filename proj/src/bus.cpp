#include "hca/bus.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>

#include <json.hpp>
#include <spdlog/spdlog.h>

namespace hca {
namespace {

void append_number(std::string& out, double v) {
    if (!std::isfinite(v)) {
        throw std::invalid_argument("encode_message: non-finite number");
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

void append_field(std::string& out, const char* key, double v) {
    out += ",\"";
    out += key;
    out += "\":";
    append_number(out, v);
}

}  // namespace

std::string encode_message(const StateMessage& msg) {
    std::string out = "{\"sender\":" + std::to_string(msg.sender) +
                      ",\"cycle\":" + std::to_string(msg.cycle);
    append_field(out, "x", msg.state.x);
    append_field(out, "y", msg.state.y);
    append_field(out, "phi", msg.state.phi);
    append_field(out, "vx", msg.velocity.x);
    append_field(out, "vy", msg.velocity.y);
    if (msg.sequence) {
        out += ",\"seq_cycle\":" + std::to_string(msg.sequence->cycle) + ",\"seq\":[";
        for (std::size_t i = 0; i < msg.sequence->inputs.size(); ++i) {
            if (i > 0) {
                out += ',';
            }
            append_number(out, msg.sequence->inputs[i]);
        }
        out += ']';
    }
    if (msg.lookahead) {
        out += ",\"ref\":[";
        for (std::size_t i = 0; i < msg.lookahead->size(); ++i) {
            if (i > 0) {
                out += ',';
            }
            out += '[';
            append_number(out, (*msg.lookahead)[i].x);
            out += ',';
            append_number(out, (*msg.lookahead)[i].y);
            out += ']';
        }
        out += ']';
    }
    out += "}\n";
    return out;
}

StateMessage decode_message(std::string_view payload) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(payload);
        StateMessage msg;
        msg.sender = j.at("sender").get<int>();
        msg.cycle = j.at("cycle").get<std::int64_t>();
        msg.state = {j.at("x").get<double>(), j.at("y").get<double>(), j.at("phi").get<double>()};
        msg.velocity = {j.at("vx").get<double>(), j.at("vy").get<double>()};
        if (j.contains("seq")) {
            PlannedSequence seq;
            seq.owner = msg.sender;
            seq.cycle = j.value("seq_cycle", msg.cycle);
            seq.inputs = j.at("seq").get<std::vector<double>>();
            msg.sequence = std::move(seq);
        }
        if (j.contains("ref")) {
            std::vector<Vec2> pts;
            for (const auto& p : j.at("ref")) {
                if (!p.is_array() || p.size() != 2) {
                    throw std::invalid_argument("ref entries must be [x, y]");
                }
                pts.push_back({p[0].get<double>(), p[1].get<double>()});
            }
            msg.lookahead = std::move(pts);
        }
        return msg;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("decode_message: ") + e.what());
    }
}

void Inbox::store(const StateMessage& msg) {
    auto& per_cycle = by_sender_[msg.sender];
    per_cycle[msg.cycle] = msg;
    // Keep only what collect can still return.
    const std::int64_t newest = per_cycle.rbegin()->first;
    while (per_cycle.size() > 2 && per_cycle.begin()->first < newest - max_stale_ - 1) {
        per_cycle.erase(per_cycle.begin());
    }
    while (per_cycle.size() > 4) {
        per_cycle.erase(per_cycle.begin());
    }
}

std::vector<StateMessage> Inbox::newest_before(int self, std::int64_t cycle) const {
    std::vector<StateMessage> out;
    for (const auto& [sender, per_cycle] : by_sender_) {
        if (sender == self) {
            continue;
        }
        auto it = per_cycle.lower_bound(cycle);
        if (it == per_cycle.begin()) {
            continue;
        }
        --it;
        if (cycle - it->first > max_stale_) {
            spdlog::debug("bus: message from {} is {} cycles old, dropped", sender, cycle - it->first);
            continue;
        }
        out.push_back(it->second);
    }
    return out;
}

std::int64_t Inbox::newest_cycle(int sender) const {
    const auto it = by_sender_.find(sender);
    if (it == by_sender_.end() || it->second.empty()) {
        return -1;
    }
    return it->second.rbegin()->first;
}

InProcessBus::InProcessBus(std::vector<int> roster, int max_stale_cycles)
    : roster_(std::move(roster)), inbox_(max_stale_cycles) {}

void InProcessBus::publish(const StateMessage& msg) {
    std::lock_guard lock(mutex_);
    inbox_.store(msg);
}

std::vector<StateMessage> InProcessBus::collect(int self, std::int64_t cycle) {
    std::lock_guard lock(mutex_);
    return inbox_.newest_before(self, cycle);
}

namespace {

sockaddr_in loopback(int port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    return addr;
}

}  // namespace

UdpBus::UdpBus(std::vector<int> roster, int base_port, int max_stale_cycles, int wait_ms)
    : roster_(std::move(roster)), wait_ms_(wait_ms) {
    send_fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (send_fd_ < 0) {
        throw std::runtime_error(std::string("udp bus: socket: ") + std::strerror(errno));
    }
    for (std::size_t i = 0; i < roster_.size(); ++i) {
        const int port = base_port + static_cast<int>(i);
        const int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
        if (fd < 0) {
            throw std::runtime_error(std::string("udp bus: socket: ") + std::strerror(errno));
        }
        const sockaddr_in addr = loopback(port);
        if (::bind(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
            const std::string err = std::strerror(errno);
            ::close(fd);
            throw std::runtime_error("udp bus: bind port " + std::to_string(port) + ": " + err);
        }
        ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL, 0) | O_NONBLOCK);
        endpoints_.push_back(std::make_unique<Endpoint>(roster_[i], port, fd, max_stale_cycles));
    }
}

UdpBus::~UdpBus() {
    for (const auto& ep : endpoints_) {
        ::close(ep->fd);
    }
    if (send_fd_ >= 0) {
        ::close(send_fd_);
    }
}

UdpBus::Endpoint& UdpBus::endpoint(int id) {
    for (const auto& ep : endpoints_) {
        if (ep->id == id) {
            return *ep;
        }
    }
    throw std::invalid_argument("udp bus: agent " + std::to_string(id) + " is not in the roster");
}

void UdpBus::publish(const StateMessage& msg) {
    const std::string payload = encode_message(msg);
    std::lock_guard lock(send_mutex_);
    for (const auto& ep : endpoints_) {
        if (ep->id == msg.sender) {
            continue;
        }
        const sockaddr_in addr = loopback(ep->port);
        const ssize_t n = ::sendto(send_fd_, payload.data(), payload.size(), 0,
                                   reinterpret_cast<const sockaddr*>(&addr), sizeof addr);
        if (n < 0 || static_cast<std::size_t>(n) != payload.size()) {
            spdlog::warn("udp bus: send from {} to {} failed: {}", msg.sender, ep->id,
                         std::strerror(errno));
        }
    }
}

void UdpBus::drain(Endpoint& ep, std::int64_t cycle) {
    using clock = std::chrono::steady_clock;
    const auto deadline = clock::now() + std::chrono::milliseconds(wait_ms_);
    std::vector<char> buf(65536);
    for (;;) {
        for (;;) {
            const ssize_t n = ::recv(ep.fd, buf.data(), buf.size(), 0);
            if (n < 0) {
                break;
            }
            try {
                StateMessage msg = decode_message(std::string_view(buf.data(), static_cast<std::size_t>(n)));
                ep.inbox.store(msg);
            } catch (const std::invalid_argument& e) {
                spdlog::warn("udp bus: agent {} dropped a malformed datagram: {}", ep.id, e.what());
            }
        }
        bool complete = true;
        for (int id : roster_) {
            if (id == ep.id) {
                continue;
            }
            if (ep.inbox.newest_cycle(id) < cycle - 1) {
                complete = false;
                break;
            }
        }
        const auto now = clock::now();
        if (complete || cycle == 0 || now >= deadline) {
            return;
        }
        pollfd pfd{ep.fd, POLLIN, 0};
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
        ::poll(&pfd, 1, static_cast<int>(std::max<long long>(1, left)));
    }
}

std::vector<StateMessage> UdpBus::collect(int self, std::int64_t cycle) {
    Endpoint& ep = endpoint(self);
    std::lock_guard lock(ep.mutex);
    drain(ep, cycle);
    return ep.inbox.newest_before(self, cycle);
}

}  // namespace hca

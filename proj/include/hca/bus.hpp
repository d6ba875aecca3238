#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "hca/messages.hpp"

namespace hca {

/// One line of JSON: {"sender","cycle","x","y","phi","vx","vy","seq":[...],"ref":[[x,y],...]}.
/// Numbers are written with 17 significant digits so decoding is bit-exact.
/// Throws std::invalid_argument on non-finite numbers.
std::string encode_message(const StateMessage& msg);

/// Throws std::invalid_argument on malformed payloads.
StateMessage decode_message(std::string_view payload);

/// Neighbor exchange between agents. publish and collect may be called from
/// concurrently running agents.
class Bus {
public:
    virtual ~Bus() = default;
    virtual void publish(const StateMessage& msg) = 0;
    /// Newest message per other agent with cycle < `cycle`; silent and stale senders omitted.
    virtual std::vector<StateMessage> collect(int self, std::int64_t cycle) = 0;
};

/// Messages received by one agent, newest few cycles per sender.
class Inbox {
public:
    explicit Inbox(int max_stale_cycles) : max_stale_(max_stale_cycles) {}
    void store(const StateMessage& msg);
    std::vector<StateMessage> newest_before(int self, std::int64_t cycle) const;
    /// Latest cycle heard from `sender`, -1 if none.
    std::int64_t newest_cycle(int sender) const;

private:
    int max_stale_;
    std::map<int, std::map<std::int64_t, StateMessage>> by_sender_;
};

/// Deterministic simulation bus: a message published at cycle k is visible to
/// every other agent from cycle k + 1. A second publish by the same sender in the
/// same cycle replaces the first.
class InProcessBus final : public Bus {
public:
    explicit InProcessBus(std::vector<int> roster, int max_stale_cycles = 10);
    void publish(const StateMessage& msg) override;
    std::vector<StateMessage> collect(int self, std::int64_t cycle) override;

private:
    std::vector<int> roster_;
    std::mutex mutex_;
    Inbox inbox_;
};

/// One loopback datagram socket per agent at base_port + roster index. publish
/// sends one datagram to every other agent; send errors are logged and dropped.
/// collect drains the caller's socket, waiting up to `wait_ms` for messages from
/// cycle - 1 that have not arrived yet.
class UdpBus final : public Bus {
public:
    UdpBus(std::vector<int> roster, int base_port, int max_stale_cycles = 10, int wait_ms = 50);
    ~UdpBus() override;
    UdpBus(const UdpBus&) = delete;
    UdpBus& operator=(const UdpBus&) = delete;

    void publish(const StateMessage& msg) override;
    std::vector<StateMessage> collect(int self, std::int64_t cycle) override;

private:
    struct Endpoint {
        int id;
        int port;
        int fd;
        std::mutex mutex;
        Inbox inbox;
        Endpoint(int id_, int port_, int fd_, int stale) : id(id_), port(port_), fd(fd_), inbox(stale) {}
    };
    Endpoint& endpoint(int id);
    void drain(Endpoint& ep, std::int64_t cycle);

    std::vector<int> roster_;
    int wait_ms_;
    int send_fd_{-1};
    std::mutex send_mutex_;
    std::vector<std::unique_ptr<Endpoint>> endpoints_;
};

}  // namespace hca

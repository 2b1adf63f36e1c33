#pragma once

#include "psdn/dataplane/switch.hpp"
#include "psdn/pubsub/participant.hpp"
#include "psdn/sim/kernel.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace psdn::dataplane {

struct PortRef {
    std::string node; // switch id, or device id for the device side of an access link
    PortId      port = 0;

    auto operator<=>(const PortRef &) const = default;
};

struct LinkConfig {
    std::string   id;
    PortRef       a;
    PortRef       b;
    sim::Duration latency = 0;
    sim::Duration jitter  = 0; // drawn from the kernel RNG; 0 = deterministic latency
    bool          drop    = false;
};

struct LinkCounters {
    std::map<Protocol, std::uint64_t> tx_packets; // accepted for transmission, both directions
    std::uint64_t                     tx_bytes    = 0;
    std::uint64_t                     down_drops  = 0;
    std::uint64_t                     lossy_drops = 0;
};

enum class DropCause : std::uint8_t { LinkDown, LinkLossy, NoLink, SwitchDrop, BadPort, NotForHost, Stale };

std::string_view to_string(DropCause cause) noexcept;

class Network;

/// Host with a single access link. Implements the participant transport.
class Device : public pubsub::Transport {
public:
    Device(Network &network, std::string id, std::string address);

    const std::string &id() const noexcept { return _id; }
    const std::string &address() const override { return _address; }
    void               send(Packet packet) override;

    void                       attach_participant(pubsub::DomainParticipant *participant) noexcept { _participant = participant; }
    pubsub::DomainParticipant *participant() const noexcept { return _participant; }

    std::uint64_t received() const noexcept { return _received; }

private:
    friend class Network;

    Network                   &_network;
    std::string                _id;
    std::string                _address;
    pubsub::DomainParticipant *_participant = nullptr;
    sim::EntityId              _entity;
    std::size_t                _link = 0;
    std::uint64_t              _received = 0;
};

/// Passive tap on network activity.
class NetworkObserver {
public:
    virtual ~NetworkObserver() = default;

    virtual void on_inject(const Device &, const Packet &, sim::SimTime) {}
    /// A switch put `packet` on `port`. `stale` marks egress on a port whose
    /// device has moved away.
    virtual void on_egress(const Switch &, PortId, const Packet &, sim::SimTime, bool /*stale*/) {}
    virtual void on_device_receive(const Device &, const Packet &, sim::SimTime) {}
    virtual void on_drop(std::string_view /*where*/, const Packet &, DropCause, sim::SimTime) {}
    virtual void on_packet_in(const Switch &, PortId, const Packet &, sim::SimTime) {}
};

/// Copy accounting: every packet copy is born once and dies once.
struct CopyLedger {
    std::uint64_t injected           = 0;
    std::uint64_t switch_transmits   = 0; // Transmit effects from table processing
    std::uint64_t packet_out_transmits = 0;
    std::uint64_t switch_arrivals    = 0;
    std::uint64_t device_arrivals    = 0; // accepted by the host (own address or multicast)
    std::uint64_t not_for_host       = 0;
    std::uint64_t link_drops         = 0;
    std::uint64_t no_link_drops      = 0; // transmit on a port with nothing attached
    std::uint64_t stale              = 0;
    std::uint64_t in_flight          = 0;

    std::uint64_t born() const noexcept { return injected + switch_transmits + packet_out_transmits; }
    std::uint64_t died() const noexcept {
        return switch_arrivals + device_arrivals + not_for_host + link_drops + no_link_drops + stale + in_flight;
    }
};

/// Switches, devices and links, driven by kernel events.
///
/// Topologies are expected to be loop-free; nothing here prevents a loop,
/// the harness validates that before building.
class Network {
public:
    using PacketInSink = std::function<void(const Switch &, PortId, const Packet &)>;

    explicit Network(sim::Kernel &kernel);
    ~Network();

    Network(const Network &)            = delete;
    Network &operator=(const Network &) = delete;

    Switch &add_switch(std::unique_ptr<Switch> sw); // DuplicateEntity
    Device &add_device(const std::string &id, const std::string &address, PortRef attachment, sim::Duration latency,
                       sim::Duration jitter = 0); // DuplicateEntity, UnknownEntity, InvalidOperation (port busy)
    void add_link(const LinkConfig &config);       // UnknownEntity, InvalidOperation (port busy), DuplicateEntity

    Switch       &switch_at(std::string_view id);
    const Switch &switch_at(std::string_view id) const;
    Device       &device(std::string_view id);
    const Device &device(std::string_view id) const;
    Device       *device_by_address(std::string_view address);
    bool          has_switch(std::string_view id) const { return _switches.contains(id); }

    std::vector<const Switch *> switches() const;
    std::vector<const Device *> devices() const;

    /// Where a device's access link currently lands.
    PortRef attachment(std::string_view device_id) const;

    void set_link_up(std::string_view link_id, bool up);
    void set_link_drop(std::string_view link_id, bool drop);
    const LinkCounters &link_counters(std::string_view link_id) const;
    const LinkConfig   &link_config(std::string_view link_id) const;
    std::vector<std::string> link_ids() const;
    /// Peer of a switch port, if a link is attached there.
    std::optional<PortRef> peer(const PortRef &port) const;

    /// Re-binds a device's access link to another switch port. In-flight
    /// packets towards the device become stale; the vacated port is
    /// remembered so later egress there counts as stale delivery.
    void move_device(std::string_view device_id, std::string_view new_switch, PortId new_port);

    /// Packet-out path from the mediation layer.
    void packet_out(std::string_view switch_id, const std::vector<FlowAction> &actions, Packet packet);

    void set_packet_in_sink(PacketInSink sink) { _packet_in_sink = std::move(sink); }
    void add_observer(NetworkObserver *observer) { _observers.push_back(observer); }

    /// Periodic idle-timeout sweep on every switch.
    void enable_idle_checks(sim::Duration period);

    const CopyLedger &ledger() const noexcept { return _ledger; }
    sim::Kernel      &kernel() noexcept { return _kernel; }

private:
    friend class Device;

    struct Link {
        LinkConfig   config;
        bool         up     = true;
        std::uint64_t epoch = 0; // bumped when a device end is re-bound
        LinkCounters counters;
        bool         device_link = false;
    };

    struct Arrival {
        PortId        port;
        Packet        packet;
        std::size_t   link;
        std::uint64_t epoch;
    };

    struct SwitchNode {
        std::unique_ptr<Switch>        sw;
        sim::EntityId                  entity;
        std::map<PortId, std::size_t>  port_links;
        std::map<PortId, std::string>  vacated; // port -> device that left
    };

    void inject(Device &device, Packet packet);
    void transmit(std::size_t link_index, const PortRef &from, Packet packet);
    void on_switch_arrival(SwitchNode &node, const Arrival &arrival);
    void on_device_arrival(Device &device, const Arrival &arrival);
    void apply_effects(SwitchNode &node, std::vector<Effect> effects, bool from_packet_out);
    sim::EntityId entity_of(const PortRef &end) const;
    std::size_t   link_index(std::string_view id) const;
    void          claim_port(const PortRef &end, std::size_t link);
    void          notify_drop(std::string_view where, const Packet &packet, DropCause cause);

    sim::Kernel                                             &_kernel;
    std::map<std::string, SwitchNode, std::less<>>           _switches;
    std::map<std::string, std::unique_ptr<Device>, std::less<>> _devices;
    std::vector<Link>                                        _links;
    PacketInSink                                             _packet_in_sink;
    std::vector<NetworkObserver *>                           _observers;
    CopyLedger                                               _ledger;
    std::uint64_t                                            _next_packet_id = 1;
    sim::EntityId                                            _idle_entity;
    sim::Duration                                            _idle_period = 0;
};

} // namespace psdn::dataplane

#pragma once

#include "psdn/dataplane/flow.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace psdn::dataplane {

enum class MissBehavior : std::uint8_t { ToController, Drop };

enum class DropReason : std::uint8_t { Action, TableMiss, BadPort };

std::string_view to_string(DropReason r) noexcept;

struct Effect {
    enum class Kind : std::uint8_t { Transmit, ToController, Dropped };

    Kind       kind = Kind::Dropped;
    PortId     port = 0; // egress port for Transmit/BadPort, ingress port for ToController
    Packet     packet;
    DropReason reason = DropReason::Action;
};

/// Who is asking to mutate a flow table. A sealed switch accepts only
/// Mediation; Boot is only accepted before sealing.
enum class MutationOrigin : std::uint8_t { Boot, Mediation, Direct };

class Switch;

/// Passive tap on a switch, used for trace audits.
class SwitchObserver {
public:
    virtual ~SwitchObserver() = default;

    virtual void on_lookup(const Switch &, PortId /*in_port*/, const Packet &, const FlowEntry * /*hit*/, sim::SimTime) {}
    virtual void on_mutation(const Switch &, const FlowMod &, ModResult, sim::SimTime, std::string_view /*app_id*/) {}
    virtual void on_expire(const Switch &, const FlowEntry &, sim::SimTime) {}
};

/// Per-packet disposition totals; rx == forwarded + to_controller + dropped.
struct SwitchCounters {
    std::uint64_t rx_packets       = 0;
    std::uint64_t forwarded        = 0;
    std::uint64_t to_controller    = 0;
    std::uint64_t dropped          = 0;
    std::uint64_t rx_bytes         = 0;
    std::uint64_t transmissions    = 0;
    std::uint64_t bad_port_drops   = 0;
    std::uint64_t guard_violations = 0;
};

/// OpenFlow-style switch with a single flow table.
///
/// Lookup picks the highest priority matching entry, earliest install first
/// among equals. Action lists run in order: set_dscp rewrites the packet for
/// every later output, drop stops processing, output/group to a port the
/// switch does not have yields a BadPort drop effect instead of an error.
class Switch {
public:
    Switch(std::string id, std::vector<PortId> ports, MissBehavior miss_behavior);
    virtual ~Switch() = default;

    Switch(const Switch &)            = delete;
    Switch &operator=(const Switch &) = delete;

    virtual bool is_gateway() const noexcept { return false; }

    const std::string         &id() const noexcept { return _id; }
    const std::vector<PortId> &ports() const noexcept { return _ports; }
    bool                       has_port(PortId port) const noexcept;
    MissBehavior               miss_behavior() const noexcept { return _miss; }

    const FlowEntry *lookup(const Packet &packet, PortId in_port) const;

    std::vector<Effect> process_packet(PortId in_port, const Packet &packet, sim::SimTime now = 0);

    /// Packet-out path: runs `actions` on `packet` without a table lookup and
    /// without touching any counter.
    std::vector<Effect> execute_actions(const std::vector<FlowAction> &actions, Packet packet) const;

    /// Throws Error(InvalidOperation) when the origin is not allowed (see
    /// MutationOrigin); every other failure is reported through ModResult.
    ModResult apply_flow_mod(const FlowMod &mod, sim::SimTime now = 0, MutationOrigin origin = MutationOrigin::Direct,
                             std::string_view app_id = {});

    /// All entries when `match` is empty, otherwise entries whose match is
    /// field-wise equal to it.
    std::vector<FlowStats> query_stats(const std::optional<FlowMatch> &match = std::nullopt) const;

    /// Removes entries whose idle_timeout elapsed without a hit. Returns the
    /// number removed.
    std::size_t expire_idle(sim::SimTime now);

    const std::vector<FlowEntry> &flow_table() const noexcept { return _table; }
    const SwitchCounters         &counters() const noexcept { return _counters; }

    void seal() noexcept { _sealed = true; }
    bool sealed() const noexcept { return _sealed; }

    void set_observer(SwitchObserver *observer) noexcept { _observer = observer; }

private:
    void run_actions(const std::vector<FlowAction> &actions, Packet packet, std::vector<Effect> &effects) const;

    std::string            _id;
    std::vector<PortId>    _ports;
    MissBehavior           _miss;
    std::vector<FlowEntry> _table; // install order
    std::uint64_t          _next_install_seq = 0;
    SwitchCounters         _counters;
    bool                   _sealed   = false;
    SwitchObserver        *_observer = nullptr;
};

/// Entry in a gateway's local object list.
struct ObjectInfo {
    std::string              object_id;
    std::string              location;
    std::string              description;
    std::vector<std::string> addresses;

    bool operator==(const ObjectInfo &) const = default;
};

class Gateway : public Switch {
public:
    Gateway(std::string id, std::vector<PortId> ports, MissBehavior miss_behavior, bool multicast_capable)
        : Switch(std::move(id), std::move(ports), miss_behavior), _multicast_capable(multicast_capable) {}

    bool is_gateway() const noexcept override { return true; }
    bool multicast_capable() const noexcept { return _multicast_capable; }

    /// Inserts or replaces by object_id.
    void upsert_object(ObjectInfo info);
    bool remove_object(std::string_view object_id);

    const std::vector<ObjectInfo> &object_list() const noexcept { return _objects; }

    /// One line per object: `id;location;description;addr1,addr2`.
    std::string format_object_list() const;

private:
    bool                    _multicast_capable;
    std::vector<ObjectInfo> _objects;
};

} // namespace psdn::dataplane

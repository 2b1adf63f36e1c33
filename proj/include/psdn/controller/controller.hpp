#pragma once

#include "psdn/controller/mediation.hpp"

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace psdn::controller {

using dataplane::FlowAction;
using dataplane::FlowMatch;
using dataplane::FlowMod;
using dataplane::ModResult;
using dataplane::Packet;
using dataplane::PortId;
using dataplane::PortRef;

struct SwitchInfo {
    std::string         id;
    std::vector<PortId> ports;
    bool                gateway           = false;
    bool                multicast_capable = false;
};

struct HostInfo {
    std::string device_id;
    std::string address;
    PortRef     attachment;
};

/// The controller's picture of the network: switches, inter-switch
/// adjacency and where hosts are attached. Assumed loop-free.
class TopologyView {
public:
    void add_switch(SwitchInfo info);
    void add_link(const PortRef &a, const PortRef &b);
    void add_host(HostInfo host);
    void move_host(std::string_view address, const PortRef &attachment);

    bool                                     has_switch(std::string_view id) const { return _switches.contains(id); }
    const SwitchInfo                        &switch_info(std::string_view id) const; // UnknownEntity
    const std::map<std::string, SwitchInfo, std::less<>> &switches() const noexcept { return _switches; }
    const std::vector<HostInfo>             &hosts() const noexcept { return _hosts; }
    const HostInfo                          *host_by_address(std::string_view address) const;

    bool is_inter_switch(const PortRef &port) const { return _adjacency.contains(port); }
    /// Port on `from` that leads towards `target`; nullopt if unreachable.
    std::optional<PortId> port_toward(std::string_view from, const PortRef &target) const;
    /// Switch ids from `from` to `to`, both included; empty if unreachable.
    std::vector<std::string> path(std::string_view from, std::string_view to) const;

private:
    std::map<std::string, SwitchInfo, std::less<>> _switches;
    std::map<PortRef, PortRef>                     _adjacency;
    std::vector<HostInfo>                          _hosts;
};

struct Location {
    std::string  switch_id;
    PortId       port      = 0;
    sim::SimTime last_seen = 0;
};

struct PacketIn {
    std::string  switch_id;
    PortId       in_port = 0;
    Packet       packet;
    sim::SimTime time = 0;
};

/// Match space an application may program. A mod is in-slice iff some
/// template subsumes its match.
struct Slice {
    std::vector<FlowMatch> templates;
};

/// Controller-side copy of a rule it installed.
struct MirrorEntry {
    int                     priority = 0;
    FlowMatch               match;
    std::vector<FlowAction> actions;
    std::string             app_id;
};

class Controller;

class App {
public:
    virtual ~App() = default;

    virtual std::string_view id() const = 0;
    /// Called once when the controller starts.
    virtual void start(Controller &) {}
    /// Return true to claim the PACKET_IN and stop dispatch.
    virtual bool on_packet_in(Controller &, const PacketIn &) { return false; }
};

struct ControllerConfig {
    pubsub::DomainId control_domain = 250;
    std::string      participant_id = "controller";
};

struct ControllerStats {
    std::map<dataplane::Protocol, std::uint64_t> packet_ins;
    std::map<std::string, std::uint64_t>         claims; // app id -> claimed PACKET_INs
    std::uint64_t                                unclaimed        = 0;
    std::uint64_t                                malformed        = 0;
    std::uint64_t                                packet_outs      = 0;
    std::uint64_t                                flow_mods_sent   = 0;
    std::uint64_t                                slice_violations = 0;
    std::uint64_t                                stats_requests   = 0;
    std::uint64_t                                stats_replies    = 0;
    std::map<ModResult, std::uint64_t>           mod_results;
};

/// SDN controller behind the mediation layer. PACKET_INs arrive as samples
/// and are dispatched to apps in registration order until one claims them.
/// Packet-outs, flow-mods and stats requests leave as samples; flow-mod and
/// stats replies are matched by correlation id.
class Controller {
public:
    using ModCallback   = std::function<void(ModResult)>;
    using StatsCallback = std::function<void(const std::vector<dataplane::FlowStats> &)>;

    Controller(sim::Kernel &kernel, ControlBus &bus, TopologyView topology, ControllerConfig config = {});
    ~Controller();

    Controller(const Controller &)            = delete;
    Controller &operator=(const Controller &) = delete;

    /// Apps without a slice are unrestricted. Throws DuplicateEntity.
    App &register_app(std::unique_ptr<App> app, std::optional<Slice> slice = std::nullopt);
    App *find_app(std::string_view id) const;
    template <class T> T *app(std::string_view id) const { return dynamic_cast<T *>(find_app(id)); }

    void start();

    /// Packet Forwarder. Throws UnknownEntity for an unknown switch.
    void send_packet_out(const std::string &switch_id, const std::vector<FlowAction> &actions, const Packet &packet);

    bool authorize_flow_mod(std::string_view app_id, const FlowMod &mod) const;

    /// Flow Programming. Returns the correlation id; the switch's result
    /// reaches `callback` with the reply. Throws UnknownEntity (app or
    /// switch) and SliceViolation, leaving every table untouched.
    std::uint64_t program_flow(const std::string &app_id, const std::string &switch_id, const FlowMod &mod, ModCallback callback = {});

    /// Throws UnknownEntity for an unknown switch.
    std::uint64_t request_stats(const std::string &switch_id, const std::optional<FlowMatch> &match, StatsCallback callback);

    /// Runs `fn` after `delay` inside a kernel event.
    void schedule(sim::Duration delay, std::function<void()> fn);

    void learn(const std::string &address, const std::string &switch_id, PortId port);

    const TopologyView                                &topology() const noexcept { return _topology; }
    TopologyView                                      &topology() noexcept { return _topology; }
    const std::map<std::string, Location, std::less<>> &locations() const noexcept { return _locations; }
    std::map<std::string, Location, std::less<>>       &locations() noexcept { return _locations; }
    const std::vector<MirrorEntry>                    &rules(std::string_view switch_id) const;
    const MirrorEntry *find_rule(std::string_view switch_id, int priority, const FlowMatch &match) const;
    std::optional<ModResult>                           result(std::uint64_t correlation_id) const;
    std::size_t                                        outstanding() const noexcept { return _pending_mods.size() + _pending_stats.size(); }
    const ControllerStats                             &stats() const noexcept { return _stats; }
    const std::vector<std::unique_ptr<App>>           &apps() const noexcept { return _apps; }
    sim::Kernel                                       &kernel() noexcept { return _kernel; }
    sim::SimTime                                       now() const noexcept { return _kernel.now(); }

private:
    struct PendingMod {
        std::string switch_id;
        ModCallback callback;
    };

    void on_packet_in(const pubsub::DataSample &sample);
    void on_flow_mod_reply(const pubsub::DataSample &sample);
    void on_stats_reply(const pubsub::DataSample &sample);
    void mirror(const std::string &switch_id, const std::string &app_id, const FlowMod &mod);

    sim::Kernel                                 &_kernel;
    TopologyView                                 _topology;
    ControllerConfig                             _config;
    sim::EntityId                                _timer_entity;
    std::unique_ptr<pubsub::DomainParticipant>   _participant;
    pubsub::EndpointId                           _packet_out_writer;
    pubsub::EndpointId                           _flow_mod_writer;
    pubsub::EndpointId                           _stats_request_writer;
    std::vector<std::unique_ptr<App>>            _apps;
    std::map<std::string, Slice, std::less<>>    _slices;
    std::map<std::string, Location, std::less<>> _locations;
    std::map<std::string, std::vector<MirrorEntry>, std::less<>> _mirror;
    std::uint64_t                                _next_correlation = 1;
    std::map<std::uint64_t, PendingMod>          _pending_mods;
    std::map<std::uint64_t, StatsCallback>       _pending_stats;
    std::map<std::uint64_t, ModResult>           _results;
    ControllerStats                              _stats;
    bool                                         _started = false;
};

} // namespace psdn::controller

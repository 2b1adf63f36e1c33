#pragma once

#include "psdn/controller/controller.hpp"

#include <deque>
#include <set>

namespace psdn::controller {

/// Installs {dst=address -> output(next hop)} along the path from `from`
/// to the host attachment, skipping switches that already hold the rule.
/// Returns the number of flow-mods issued.
std::size_t install_route(Controller &ctl, const std::string &app_id, const std::string &address, const PortRef &host,
                          const std::vector<std::string> &switches, int priority, std::optional<sim::Duration> idle_timeout = std::nullopt,
                          Controller::ModCallback callback = {});

/// Reactive forwarding for data-protocol packets: learns source locations at
/// edge ports, installs routes once the destination is known and floods
/// otherwise.
class LearningForwarder : public App {
public:
    struct Config {
        int                          priority = 10;
        std::optional<sim::Duration> idle_timeout;
    };

    LearningForwarder() = default;
    explicit LearningForwarder(Config config) : _config(config) {}

    std::string_view id() const override { return "learning-forwarder"; }
    bool             on_packet_in(Controller &ctl, const PacketIn &pi) override;

private:
    Config _config;
};

/// Relays discovery frames that a gateway without multicast support hands to
/// the controller and installs a group rule so later frames stay in the
/// data plane.
class DiscoveryProxy : public App {
public:
    explicit DiscoveryProxy(int priority = 50) : _priority(priority) {}

    std::string_view id() const override { return "discovery-proxy"; }
    bool             on_packet_in(Controller &ctl, const PacketIn &pi) override;

    std::size_t rules_installed() const noexcept { return _rules_installed; }

private:
    int         _priority;
    std::size_t _rules_installed = 0;
};

/// Installs destination routes for every known host at start.
class ProactiveRouter : public App {
public:
    explicit ProactiveRouter(int priority = 100) : _priority(priority) {}

    std::string_view id() const override { return "proactive-router"; }
    void             start(Controller &ctl) override;

private:
    int _priority;
};

struct MobilitySummary {
    std::string                 address;
    std::size_t                 deleted      = 0;
    std::size_t                 installed    = 0;
    sim::SimTime                trigger_time = 0;
    std::optional<sim::SimTime> completion_time; // all replies received
    std::size_t                 outstanding = 0;
    std::size_t                 failures    = 0;
};

/// Reprograms destination rules when a device changes attachment.
class MobilityManager : public App {
public:
    explicit MobilityManager(int route_priority = 100) : _priority(route_priority) {}

    std::string_view id() const override { return "mobility-manager"; }

    /// Deletes rules that send the device's traffic toward its old location,
    /// installs rules toward the new one and updates the location table.
    /// Throws UnknownEntity for an unknown device or switch.
    const MobilitySummary &handle_mobility_event(Controller &ctl, const std::string &address, const std::string &old_gw,
                                                 const std::string &new_gw, PortId new_port);

    const std::deque<MobilitySummary> &events() const noexcept { return _events; }

private:
    int                         _priority;
    std::deque<MobilitySummary> _events;
};

struct FloodPolicy {
    sim::Duration window              = 100'000;
    std::uint64_t rate_threshold      = 100; // packets per window
    int           mitigation_priority = 1000;
    bool          mitigate            = true;
};

struct Alert {
    sim::SimTime  time = 0;
    std::string   switch_id;
    FlowMatch     match;
    std::uint64_t delta = 0;
    std::string   action_taken;

    std::string to_ndjson() const;
};

/// Polls every switch once per window and reacts to entries whose packet
/// count grew by more than the threshold.
class FloodMonitor : public App {
public:
    explicit FloodMonitor(FloodPolicy policy) : _policy(policy) {}

    std::string_view id() const override { return "flood-monitor"; }
    void             start(Controller &ctl) override;

    void on_stats(Controller &ctl, const std::string &switch_id, const std::vector<dataplane::FlowStats> &stats);

    const FloodPolicy        &policy() const noexcept { return _policy; }
    const std::vector<Alert> &alerts() const noexcept { return _alerts; }
    /// Kernel time at which each mitigation rule was confirmed, keyed like alerts.
    const std::vector<std::pair<Alert, sim::SimTime>> &mitigations() const noexcept { return _mitigations; }

private:
    void tick(Controller &ctl);

    FloodPolicy                                       _policy;
    std::map<std::string, std::uint64_t>              _last; // switch|priority|match -> packet_count
    std::set<std::string>                             _mitigated; // switch|match
    std::vector<Alert>                                _alerts;
    std::vector<std::pair<Alert, sim::SimTime>>       _mitigations;
};

/// Passive app that only exists to own a slice; scenarios drive its
/// flow-mods.
class ScriptedApp : public App {
public:
    explicit ScriptedApp(std::string id) : _id(std::move(id)) {}

    std::string_view id() const override { return _id; }

private:
    std::string _id;
};

} // namespace psdn::controller

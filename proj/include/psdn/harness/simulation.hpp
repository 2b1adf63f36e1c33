#pragma once

#include "psdn/harness/documents.hpp"

#include <memory>
#include <string>
#include <vector>

namespace psdn::harness {

struct DeliveryRecord {
    std::string   writer;
    std::uint64_t seq = 0;
    std::string   via;
    sim::SimTime  time = 0;
    FieldMap      fields;
};

struct Hop {
    std::string       node; // switch id or device id
    dataplane::PortId port  = 0;
    sim::SimTime      time  = 0;
    bool              stale = false;
};

/// Where a probe packet went.
struct ProbeRecord {
    std::string      label;
    std::string      src;
    std::string      dst;
    sim::SimTime     sent = 0;
    std::vector<Hop> egress;   // switch ports that emitted it
    std::vector<Hop> received; // devices that accepted it
};

struct BurstRecord {
    std::string   label;
    std::string   src;
    std::string   dst;
    std::uint64_t sent      = 0;
    std::uint64_t delivered = 0; // accepted by the destination device
};

struct FlowModRecord {
    sim::SimTime                        time = 0;
    std::string                         app;
    std::string                         switch_id;
    dataplane::FlowMod                  mod;
    bool                                authorized = false;
    std::optional<dataplane::ModResult> result;
};

/// Fans one switch hook out to several observers.
class SwitchObserverMux : public dataplane::SwitchObserver {
public:
    void add(dataplane::SwitchObserver *observer) { _observers.push_back(observer); }

    void on_lookup(const dataplane::Switch &sw, dataplane::PortId in_port, const dataplane::Packet &packet,
                   const dataplane::FlowEntry *hit, sim::SimTime now) override;
    void on_mutation(const dataplane::Switch &sw, const dataplane::FlowMod &mod, dataplane::ModResult result, sim::SimTime now,
                     std::string_view app_id) override;
    void on_expire(const dataplane::Switch &sw, const dataplane::FlowEntry &entry, sim::SimTime now) override;

private:
    std::vector<dataplane::SwitchObserver *> _observers;
};

/// A built scenario: network, participants, control plane and apps, with
/// scenario actions queued on the kernel. Observers may be attached between
/// construction and run(); boot rules are already present at that point.
class Simulation {
public:
    Simulation(TopologyDoc topology, ScenarioDoc scenario, std::uint64_t seed = 0);
    ~Simulation();

    Simulation(const Simulation &)            = delete;
    Simulation &operator=(const Simulation &) = delete;

    void add_network_observer(dataplane::NetworkObserver *observer);
    void add_switch_observer(dataplane::SwitchObserver *observer) { _switch_mux.add(observer); }
    void set_trace_sink(std::function<void(const sim::TraceRecord &)> sink) { _kernel.set_trace_sink(std::move(sink)); }

    /// Runs to the scenario end. Kernel errors (including BudgetExceeded)
    /// are caught and reported through status().
    void run();

    bool               ok() const noexcept { return _status == "ok"; }
    const std::string &status() const noexcept { return _status; }
    const std::string &error() const noexcept { return _error; }

    const TopologyDoc &topology() const noexcept { return _topology; }
    const ScenarioDoc &scenario() const noexcept { return _scenario; }
    std::uint64_t      seed() const noexcept { return _seed; }
    sim::SimTime       end_time() const noexcept { return _end; }

    sim::Kernel                   &kernel() noexcept { return _kernel; }
    const sim::Kernel             &kernel() const noexcept { return _kernel; }
    dataplane::Network            &network() noexcept { return *_network; }
    const dataplane::Network      &network() const noexcept { return *_network; }
    controller::Controller        &controller() noexcept { return *_controller; }
    const controller::Controller  &controller() const noexcept { return *_controller; }
    const controller::ControlBus  &control_bus() const noexcept { return *_bus; }
    pubsub::DomainParticipant     *participant(std::string_view device_id) const;

    const std::vector<DeliveryRecord>    &deliveries(std::string_view reader_id) const;
    const std::vector<ProbeRecord>       &probes() const noexcept { return _probes; }
    const std::vector<BurstRecord>       &bursts() const noexcept { return _bursts; }
    const std::vector<FlowModRecord>     &flow_mods() const noexcept { return _flow_mods; }
    std::vector<controller::Alert>        alerts() const;
    std::vector<controller::MobilitySummary> mobility() const;

    /// Multicast groups that get pre-installed rules on multicast-capable
    /// switches: discovery groups of the data domains plus channel addresses.
    std::vector<std::string> multicast_groups() const;

private:
    class Recorder;
    struct Step {
        std::size_t action    = 0;
        std::size_t iteration = 0;
    };

    void build_network();
    void build_control_plane();
    void build_participants();
    void install_boot_rules();
    void schedule_actions();
    void perform(const Step &step);
    void send_probe(const Action &action, std::size_t iteration);

    TopologyDoc   _topology;
    ScenarioDoc   _scenario;
    std::uint64_t _seed;
    sim::SimTime  _end = 0;

    sim::Kernel                                             _kernel;
    SwitchObserverMux                                       _switch_mux;
    std::unique_ptr<dataplane::Network>                     _network;
    std::unique_ptr<controller::ControlBus>                 _bus;
    std::vector<std::unique_ptr<controller::SwitchAgent>>   _agents;
    std::unique_ptr<controller::Controller>                 _controller;
    std::unique_ptr<pubsub::ParticipantFactory>             _factory;
    std::unique_ptr<Recorder>                               _recorder;
    std::map<std::string, std::vector<DeliveryRecord>, std::less<>> _deliveries;
    std::vector<ProbeRecord>                                _probes;
    std::vector<BurstRecord>                                _bursts;
    std::vector<FlowModRecord>                              _flow_mods;
    sim::EntityId                                           _scenario_entity;
    std::string                                             _status = "pending";
    std::string                                             _error;
};

} // namespace psdn::harness

#include "psdn/harness/simulation.hpp"

#include "psdn/error.hpp"

#include <algorithm>

namespace psdn::harness {

using dataplane::FlowAction;
using dataplane::FlowMatch;
using dataplane::FlowMod;
using dataplane::ModResult;
using dataplane::Packet;
using dataplane::PortId;
using dataplane::PortRef;

namespace {

constexpr int         kBootPriority = 5;
constexpr std::string_view kProbeTag = "probe#";
constexpr std::string_view kBurstTag = "burst#";

/// Index encoded at the start of a probe or burst payload, if any.
std::optional<std::size_t> tag_index(const Packet &packet, std::string_view tag) {
    const auto *opaque = std::get_if<dataplane::OpaqueBytes>(&packet.payload);
    if (!opaque || !opaque->bytes.starts_with(tag)) return std::nullopt;
    const auto end = opaque->bytes.find(';', tag.size());
    if (end == std::string::npos) return std::nullopt;
    return std::stoull(opaque->bytes.substr(tag.size(), end - tag.size()));
}

} // namespace

void SwitchObserverMux::on_lookup(const dataplane::Switch &sw, PortId in_port, const Packet &packet, const dataplane::FlowEntry *hit,
                                  sim::SimTime now) {
    for (auto *o : _observers) o->on_lookup(sw, in_port, packet, hit, now);
}

void SwitchObserverMux::on_mutation(const dataplane::Switch &sw, const FlowMod &mod, ModResult result, sim::SimTime now,
                                    std::string_view app_id) {
    for (auto *o : _observers) o->on_mutation(sw, mod, result, now, app_id);
}

void SwitchObserverMux::on_expire(const dataplane::Switch &sw, const dataplane::FlowEntry &entry, sim::SimTime now) {
    for (auto *o : _observers) o->on_expire(sw, entry, now);
}

class Simulation::Recorder : public dataplane::NetworkObserver {
public:
    explicit Recorder(Simulation &sim) : _sim(sim) {}

    void on_egress(const dataplane::Switch &sw, PortId port, const Packet &packet, sim::SimTime now, bool stale) override {
        if (auto i = tag_index(packet, kProbeTag); i && *i < _sim._probes.size()) {
            _sim._probes[*i].egress.push_back(Hop{sw.id(), port, now, stale});
        }
    }

    void on_device_receive(const dataplane::Device &device, const Packet &packet, sim::SimTime now) override {
        if (auto i = tag_index(packet, kProbeTag); i && *i < _sim._probes.size()) {
            _sim._probes[*i].received.push_back(Hop{device.id(), 0, now, false});
        } else if (auto b = tag_index(packet, kBurstTag); b && *b < _sim._bursts.size()) {
            if (device.id() == _sim._bursts[*b].dst) ++_sim._bursts[*b].delivered;
        }
    }

private:
    Simulation &_sim;
};

Simulation::Simulation(TopologyDoc topology, ScenarioDoc scenario, std::uint64_t seed)
    : _topology(std::move(topology)), _scenario(std::move(scenario)), _seed(seed), _kernel(seed) {
    _kernel.set_event_budget(_topology.settings.event_budget);
    _end = _scenario.end_time(_topology.settings);
    build_network();
    build_control_plane();
    install_boot_rules();
    _controller->start();
    build_participants();
    schedule_actions();
}

Simulation::~Simulation() = default;

void Simulation::add_network_observer(dataplane::NetworkObserver *observer) { _network->add_observer(observer); }

void Simulation::build_network() {
    _network = std::make_unique<dataplane::Network>(_kernel);
    for (const auto &s : _topology.switches) {
        std::unique_ptr<dataplane::Switch> sw;
        if (s.gateway) sw = std::make_unique<dataplane::Gateway>(s.id, s.ports, s.miss_behavior, s.multicast_capable);
        else sw = std::make_unique<dataplane::Switch>(s.id, s.ports, s.miss_behavior);
        sw->set_observer(&_switch_mux);
        _network->add_switch(std::move(sw));
    }
    for (const auto &l : _topology.links) {
        _network->add_link(dataplane::LinkConfig{l.id, PortRef{l.a.node, l.a.port}, PortRef{l.b.node, l.b.port}, l.latency_us, l.jitter_us, l.drop});
    }
    for (const auto &d : _topology.devices) {
        _network->add_device(d.id, d.address, PortRef{d.attach.node, d.attach.port}, d.latency_us, d.jitter_us);
        if (auto *gw = dynamic_cast<dataplane::Gateway *>(&_network->switch_at(d.attach.node))) {
            gw->upsert_object(dataplane::ObjectInfo{d.id, d.location, d.description, {d.address}});
        }
    }
    _recorder = std::make_unique<Recorder>(*this);
    _network->add_observer(_recorder.get());
}

void Simulation::build_control_plane() {
    const auto &settings = _topology.settings;
    _bus = std::make_unique<controller::ControlBus>(_kernel, settings.control_latency_us);
    for (const auto &s : _topology.switches) {
        _agents.push_back(std::make_unique<controller::SwitchAgent>(_kernel, *_bus, *_network, s.id, settings.control_domain));
    }
    _network->set_packet_in_sink([this](const dataplane::Switch &sw, PortId port, const Packet &packet) {
        for (auto &agent : _agents) {
            if (agent->switch_id() == sw.id()) {
                agent->publish_packet_in(port, packet);
                return;
            }
        }
    });

    controller::TopologyView view;
    for (const auto &s : _topology.switches) view.add_switch(controller::SwitchInfo{s.id, s.ports, s.gateway, s.multicast_capable});
    for (const auto &l : _topology.links) view.add_link(PortRef{l.a.node, l.a.port}, PortRef{l.b.node, l.b.port});
    for (const auto &d : _topology.devices) view.add_host(controller::HostInfo{d.id, d.address, PortRef{d.attach.node, d.attach.port}});

    _controller = std::make_unique<controller::Controller>(_kernel, *_bus, std::move(view),
                                                           controller::ControllerConfig{settings.control_domain, "controller"});
    _controller->register_app(std::make_unique<controller::DiscoveryProxy>());
    _controller->register_app(std::make_unique<controller::MobilityManager>());
    if (const auto &f = _topology.flood_policy) {
        _controller->register_app(std::make_unique<controller::FloodMonitor>(
            controller::FloodPolicy{f->window_us, f->rate_threshold, f->mitigation_priority, f->mitigate}));
    }
    if (settings.learning) {
        controller::LearningForwarder::Config config;
        if (settings.learning_idle_timeout_us > 0) config.idle_timeout = settings.learning_idle_timeout_us;
        _controller->register_app(std::make_unique<controller::LearningForwarder>(config));
    }
    if (settings.proactive_routes) _controller->register_app(std::make_unique<controller::ProactiveRouter>());
    for (const auto &a : _topology.apps) {
        _controller->register_app(std::make_unique<controller::ScriptedApp>(a.id), controller::Slice{a.slice});
    }
}

std::vector<std::string> Simulation::multicast_groups() const {
    std::set<std::string> groups;
    for (const auto &d : _topology.devices) {
        if (d.domain_id) groups.insert(pubsub::discovery_group(*d.domain_id));
    }
    for (const auto &e : _topology.endpoints) {
        for (const auto &c : e.channels) groups.insert(c.address);
    }
    return {groups.begin(), groups.end()};
}

void Simulation::install_boot_rules() {
    const auto groups = multicast_groups();
    for (const auto &s : _topology.switches) {
        auto &sw = _network->switch_at(s.id);
        if (s.multicast_capable) {
            for (const auto &g : groups) {
                for (auto in : s.ports) {
                    std::vector<PortId> others;
                    for (auto p : s.ports) {
                        if (p != in) others.push_back(p);
                    }
                    FlowMatch match;
                    match.in_port  = in;
                    match.dst_addr = g;
                    sw.apply_flow_mod(FlowMod{dataplane::FlowCommand::Add, kBootPriority, match, {FlowAction::group(others)}, std::nullopt}, 0,
                                      dataplane::MutationOrigin::Boot);
                }
            }
        }
        sw.seal();
    }
    if (_topology.settings.idle_check_period_us > 0) _network->enable_idle_checks(_topology.settings.idle_check_period_us);
}

void Simulation::build_participants() {
    _factory = std::make_unique<pubsub::ParticipantFactory>(_kernel);
    for (const auto &d : _topology.devices) {
        if (!d.domain_id) continue;
        auto &device = _network->device(d.id);
        pubsub::ParticipantConfig config;
        config.domain_id       = *d.domain_id;
        config.participant_id  = d.id;
        config.announce_period = _topology.settings.discovery_period_us;
        auto &participant      = _factory->create_participant(device, config);
        device.attach_participant(&participant);
        for (const auto &t : _topology.topics) participant.register_topic(pubsub::Topic{t.name, t.type_name, t.schema});
    }
    for (const auto &e : _topology.endpoints) {
        auto *participant = _factory->find(e.device);
        if (e.kind == pubsub::EndpointKind::Writer) {
            std::vector<pubsub::Channel> channels;
            for (const auto &c : e.channels) channels.push_back(pubsub::Channel{filter::FilterExpression::parse(c.filter), c.address});
            participant->create_writer(e.topic, e.qos, std::move(channels), e.id);
        } else {
            std::optional<filter::FilterExpression> f;
            if (e.filter) f = filter::FilterExpression::parse(*e.filter);
            auto &log = _deliveries[e.id];
            participant->create_reader(
                e.topic, std::move(f), e.qos,
                [&log](const pubsub::DataSample &sample, const pubsub::DeliveryInfo &info) {
                    log.push_back(DeliveryRecord{sample.source_writer, sample.publication_seq, info.via, info.time, sample.fields});
                },
                e.id);
        }
    }
}

void Simulation::schedule_actions() {
    _scenario_entity = _kernel.register_entity("scenario", [this](const sim::Event &event) { perform(std::any_cast<const Step &>(event.payload)); });
    for (std::size_t i = 0; i < _scenario.actions.size(); ++i) {
        const auto &a    = _scenario.actions[i];
        const auto  kind = a.kind == ActionKind::Mobility ? sim::EventKind::MobilityTrigger : sim::EventKind::ScenarioAction;
        if (a.kind == ActionKind::Burst) {
            _bursts.push_back(BurstRecord{a.label, a.src, a.dst, 0, 0});
            for (std::size_t k = 0; k < a.count; ++k) {
                _kernel.schedule(_scenario_entity, a.at_us + a.interval_us * static_cast<sim::Duration>(k), kind, Step{i, k});
            }
        } else if (a.kind != ActionKind::RunUntil) {
            _kernel.schedule(_scenario_entity, a.at_us, kind, Step{i, 0});
        }
    }
}

void Simulation::send_probe(const Action &a, std::size_t iteration) {
    std::string tag;
    if (a.kind == ActionKind::Probe) {
        tag = std::string(kProbeTag) + std::to_string(_probes.size()) + ";" + a.label;
        _probes.push_back(ProbeRecord{a.label, a.src, a.dst, _kernel.now(), {}, {}});
    } else {
        std::size_t burst = 0;
        for (std::size_t i = 0, seen = 0; i < _scenario.actions.size(); ++i) {
            if (&_scenario.actions[i] == &a) burst = seen;
            seen += _scenario.actions[i].kind == ActionKind::Burst;
        }
        tag = std::string(kBurstTag) + std::to_string(burst) + ";" + std::to_string(iteration);
        ++_bursts[burst].sent;
    }
    const auto payload_size = a.size_bytes - dataplane::kHeaderBytes;
    if (tag.size() < payload_size) tag.resize(payload_size, '.');
    auto &src = _network->device(a.src);
    src.send(Packet(src.address(), _network->device(a.dst).address(), a.protocol, a.dscp, dataplane::OpaqueBytes{std::move(tag)}));
}

void Simulation::perform(const Step &step) {
    const auto &a = _scenario.actions[step.action];
    switch (a.kind) {
    case ActionKind::Publish: _factory->find(a.device)->write(a.writer, a.fields); break;
    case ActionKind::Flush: _factory->find(a.device)->flush(a.writer); break;
    case ActionKind::Announce: _factory->find(a.device)->announce(); break;
    case ActionKind::Mobility: {
        const auto old_at = _network->attachment(a.device);
        _network->move_device(a.device, a.to_switch, a.to_port);
        const auto *doc = _topology.find_device(a.device);
        if (auto *gw = dynamic_cast<dataplane::Gateway *>(&_network->switch_at(old_at.node))) gw->remove_object(a.device);
        if (auto *gw = dynamic_cast<dataplane::Gateway *>(&_network->switch_at(a.to_switch))) {
            gw->upsert_object(dataplane::ObjectInfo{doc->id, doc->location, doc->description, {doc->address}});
        }
        _controller->app<controller::MobilityManager>("mobility-manager")
            ->handle_mobility_event(*_controller, doc->address, old_at.node, a.to_switch, a.to_port);
        break;
    }
    case ActionKind::LinkSet:
        if (a.state == "up" || a.state == "down") _network->set_link_up(a.link, a.state == "up");
        else _network->set_link_drop(a.link, a.state == "drop");
        break;
    case ActionKind::Probe:
    case ActionKind::Burst: send_probe(a, step.iteration); break;
    case ActionKind::FlowMod: {
        const auto index = _flow_mods.size();
        _flow_mods.push_back(FlowModRecord{_kernel.now(), a.app, a.to_switch, a.mod, _controller->authorize_flow_mod(a.app, a.mod), std::nullopt});
        try {
            _controller->program_flow(a.app, a.to_switch, a.mod, [this, index](ModResult r) { _flow_mods[index].result = r; });
        } catch (const Error &e) {
            if (e.code() != ErrorCode::SliceViolation) throw;
            _flow_mods[index].result = ModResult::SliceViolation;
        }
        break;
    }
    case ActionKind::RunUntil: break;
    }
}

void Simulation::run() {
    if (_status != "pending") throw Error(ErrorCode::InvalidOperation, "simulation already ran");
    try {
        _kernel.run_until(_end);
        _status = "ok";
    } catch (const Error &e) {
        _status = e.code() == ErrorCode::BudgetExceeded ? "budget_exceeded" : "failed";
        _error  = e.what();
    }
}

pubsub::DomainParticipant *Simulation::participant(std::string_view device_id) const { return _factory->find(device_id); }

const std::vector<DeliveryRecord> &Simulation::deliveries(std::string_view reader_id) const {
    static const std::vector<DeliveryRecord> none;
    auto it = _deliveries.find(reader_id);
    return it == _deliveries.end() ? none : it->second;
}

std::vector<controller::Alert> Simulation::alerts() const {
    if (auto *monitor = _controller->app<controller::FloodMonitor>("flood-monitor")) return monitor->alerts();
    return {};
}

std::vector<controller::MobilitySummary> Simulation::mobility() const {
    const auto &events = _controller->app<controller::MobilityManager>("mobility-manager")->events();
    return {events.begin(), events.end()};
}

} // namespace psdn::harness

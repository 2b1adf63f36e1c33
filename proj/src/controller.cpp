#include "psdn/controller/controller.hpp"

#include "psdn/controller/codec.hpp"
#include "psdn/error.hpp"

#include <algorithm>
#include <queue>
#include <set>

namespace psdn::controller {

// ---- TopologyView --------------------------------------------------------

void TopologyView::add_switch(SwitchInfo info) {
    if (_switches.contains(info.id)) {
        throw Error(ErrorCode::DuplicateEntity, "switch '" + info.id + "'");
    }
    auto id = info.id;
    _switches.emplace(std::move(id), std::move(info));
}

void TopologyView::add_link(const PortRef &a, const PortRef &b) {
    _adjacency[a] = b;
    _adjacency[b] = a;
}

void TopologyView::add_host(HostInfo host) { _hosts.push_back(std::move(host)); }

void TopologyView::move_host(std::string_view address, const PortRef &attachment) {
    for (auto &h : _hosts) {
        if (h.address == address) {
            h.attachment = attachment;
        }
    }
}

const SwitchInfo &TopologyView::switch_info(std::string_view id) const {
    auto it = _switches.find(id);
    if (it == _switches.end()) {
        throw Error(ErrorCode::UnknownEntity, "switch '" + std::string(id) + "'");
    }
    return it->second;
}

const HostInfo *TopologyView::host_by_address(std::string_view address) const {
    for (const auto &h : _hosts) {
        if (h.address == address) return &h;
    }
    return nullptr;
}

std::vector<std::string> TopologyView::path(std::string_view from, std::string_view to) const {
    if (!has_switch(from) || !has_switch(to)) {
        return {};
    }
    std::map<std::string, std::string> parent;
    std::queue<std::string>            frontier;
    parent[std::string(from)] = "";
    frontier.emplace(from);
    while (!frontier.empty()) {
        const auto current = frontier.front();
        frontier.pop();
        if (current == to) break;
        for (auto port : switch_info(current).ports) {
            auto it = _adjacency.find(PortRef{current, port});
            if (it != _adjacency.end() && !parent.contains(it->second.node)) {
                parent[it->second.node] = current;
                frontier.push(it->second.node);
            }
        }
    }
    if (!parent.contains(std::string(to))) {
        return {};
    }
    std::vector<std::string> out;
    for (std::string at(to); !at.empty(); at = parent[at]) out.push_back(at);
    std::reverse(out.begin(), out.end());
    return out;
}

std::optional<PortId> TopologyView::port_toward(std::string_view from, const PortRef &target) const {
    if (from == target.node) {
        return target.port;
    }
    const auto hops = path(from, target.node);
    if (hops.size() < 2) {
        return std::nullopt;
    }
    for (auto port : switch_info(from).ports) {
        auto it = _adjacency.find(PortRef{std::string(from), port});
        if (it != _adjacency.end() && it->second.node == hops[1]) {
            return port;
        }
    }
    return std::nullopt;
}

// ---- Controller ----------------------------------------------------------

namespace {
const std::string &str(const pubsub::DataSample &s, const char *name) { return std::get<std::string>(s.fields.at(name)); }
std::int64_t       num(const pubsub::DataSample &s, const char *name) { return std::get<std::int64_t>(s.fields.at(name)); }

struct TimerPayload {
    std::function<void()> fn;
};
} // namespace

Controller::Controller(sim::Kernel &kernel, ControlBus &bus, TopologyView topology, ControllerConfig config)
    : _kernel(kernel), _topology(std::move(topology)), _config(std::move(config)) {
    _timer_entity = kernel.register_entity("controller", [](const sim::Event &e) {
        if (const auto *t = std::any_cast<TimerPayload>(&e.payload)) t->fn();
    });
    const auto address = "ctl:" + _config.participant_id;
    auto      &port    = bus.attach(address);
    _participant       = std::make_unique<pubsub::DomainParticipant>(
        kernel, port, pubsub::ParticipantConfig{_config.control_domain, _config.participant_id, 0, &bus.directory(), dataplane::Protocol::Control});
    bus.bind(address, _participant.get());
    for (auto &t : mediation_topics()) _participant->register_topic(std::move(t));

    _packet_out_writer    = _participant->create_writer(topics::kPacketOut, {});
    _flow_mod_writer      = _participant->create_writer(topics::kFlowMod, {});
    _stats_request_writer = _participant->create_writer(topics::kStatsRequest, {});
    _participant->create_reader(topics::kPacketIn, std::nullopt, {}, [this](const auto &s, const auto &) { on_packet_in(s); });
    _participant->create_reader(topics::kFlowModReply, std::nullopt, {}, [this](const auto &s, const auto &) { on_flow_mod_reply(s); });
    _participant->create_reader(topics::kStatsReply, std::nullopt, {}, [this](const auto &s, const auto &) { on_stats_reply(s); });
}

Controller::~Controller() { _kernel.set_handler(_timer_entity, {}); }

App &Controller::register_app(std::unique_ptr<App> app, std::optional<Slice> slice) {
    if (find_app(app->id()) != nullptr) {
        throw Error(ErrorCode::DuplicateEntity, "app '" + std::string(app->id()) + "'");
    }
    if (slice) {
        if (slice->templates.empty()) {
            throw Error(ErrorCode::InvalidOperation, "slice of app '" + std::string(app->id()) + "' has no templates");
        }
        _slices.emplace(std::string(app->id()), std::move(*slice));
    }
    _apps.push_back(std::move(app));
    return *_apps.back();
}

App *Controller::find_app(std::string_view id) const {
    for (const auto &a : _apps) {
        if (a->id() == id) return a.get();
    }
    return nullptr;
}

void Controller::start() {
    if (_started) {
        return;
    }
    _started = true;
    for (auto &a : _apps) a->start(*this);
}

void Controller::schedule(sim::Duration delay, std::function<void()> fn) {
    _kernel.schedule(_timer_entity, delay, sim::EventKind::TimerFired, TimerPayload{std::move(fn)});
}

void Controller::learn(const std::string &address, const std::string &switch_id, PortId port) {
    _locations[address] = Location{switch_id, port, _kernel.now()};
}

void Controller::send_packet_out(const std::string &switch_id, const std::vector<FlowAction> &actions, const Packet &packet) {
    _topology.switch_info(switch_id);
    ++_stats.packet_outs;
    _participant->write(_packet_out_writer,
                        {{"switch_id", switch_id}, {"actions", codec::to_json(actions).dump()}, {"packet", codec::to_json(packet).dump()}});
}

bool Controller::authorize_flow_mod(std::string_view app_id, const FlowMod &mod) const {
    auto it = _slices.find(app_id);
    if (it == _slices.end()) {
        return true;
    }
    return std::any_of(it->second.templates.begin(), it->second.templates.end(), [&](const FlowMatch &t) { return t.subsumes(mod.match); });
}

std::uint64_t Controller::program_flow(const std::string &app_id, const std::string &switch_id, const FlowMod &mod, ModCallback callback) {
    if (find_app(app_id) == nullptr) {
        throw Error(ErrorCode::UnknownEntity, "app '" + app_id + "'");
    }
    _topology.switch_info(switch_id);
    if (!authorize_flow_mod(app_id, mod)) {
        ++_stats.slice_violations;
        throw Error(ErrorCode::SliceViolation, "app '" + app_id + "' may not program " + codec::to_json(mod.match).dump());
    }
    const auto corr = _next_correlation++;
    _pending_mods.emplace(corr, PendingMod{switch_id, std::move(callback)});
    mirror(switch_id, app_id, mod);
    ++_stats.flow_mods_sent;
    _participant->write(_flow_mod_writer, {{"switch_id", switch_id},
                                           {"app_id", app_id},
                                           {"correlation_id", static_cast<std::int64_t>(corr)},
                                           {"command", std::string(to_string(mod.command))},
                                           {"priority", static_cast<std::int64_t>(mod.priority)},
                                           {"match", codec::to_json(mod.match).dump()},
                                           {"actions", codec::to_json(mod.actions).dump()},
                                           {"idle_timeout_us", static_cast<std::int64_t>(mod.idle_timeout.value_or(0))}});
    return corr;
}

std::uint64_t Controller::request_stats(const std::string &switch_id, const std::optional<FlowMatch> &match, StatsCallback callback) {
    _topology.switch_info(switch_id);
    const auto corr = _next_correlation++;
    _pending_stats.emplace(corr, std::move(callback));
    ++_stats.stats_requests;
    _participant->write(_stats_request_writer, {{"switch_id", switch_id},
                                                {"correlation_id", static_cast<std::int64_t>(corr)},
                                                {"match", match ? codec::to_json(*match).dump() : std::string()}});
    return corr;
}

void Controller::mirror(const std::string &switch_id, const std::string &app_id, const FlowMod &mod) {
    auto &table = _mirror[switch_id];
    switch (mod.command) {
    case dataplane::FlowCommand::Add:
        if (!mod.actions.empty() && std::all_of(mod.actions.begin(), mod.actions.end(), [](const auto &a) { return a.valid(); }) &&
            find_rule(switch_id, mod.priority, mod.match) == nullptr) {
            table.push_back(MirrorEntry{mod.priority, mod.match, mod.actions, app_id});
        }
        break;
    case dataplane::FlowCommand::Modify:
        for (auto &e : table) {
            if (e.priority == mod.priority && e.match == mod.match && !mod.actions.empty()) e.actions = mod.actions;
        }
        break;
    case dataplane::FlowCommand::Delete:
        std::erase_if(table, [&](const MirrorEntry &e) { return e.match == mod.match; });
        break;
    }
}

const std::vector<MirrorEntry> &Controller::rules(std::string_view switch_id) const {
    static const std::vector<MirrorEntry> none;
    auto                                  it = _mirror.find(switch_id);
    return it == _mirror.end() ? none : it->second;
}

const MirrorEntry *Controller::find_rule(std::string_view switch_id, int priority, const FlowMatch &match) const {
    for (const auto &e : rules(switch_id)) {
        if (e.priority == priority && e.match == match) return &e;
    }
    return nullptr;
}

std::optional<ModResult> Controller::result(std::uint64_t correlation_id) const {
    auto it = _results.find(correlation_id);
    if (it == _results.end()) return std::nullopt;
    return it->second;
}

void Controller::on_packet_in(const pubsub::DataSample &sample) {
    PacketIn pi;
    try {
        pi.switch_id = str(sample, "switch_id");
        pi.in_port   = static_cast<PortId>(num(sample, "in_port"));
        pi.packet    = codec::packet_from_json(codec::parse(str(sample, "packet")));
        pi.time      = _kernel.now();
        _topology.switch_info(pi.switch_id);
    } catch (const Error &) {
        ++_stats.malformed;
        return;
    }
    ++_stats.packet_ins[pi.packet.protocol];
    for (auto &a : _apps) {
        if (a->on_packet_in(*this, pi)) {
            ++_stats.claims[std::string(a->id())];
            return;
        }
    }
    ++_stats.unclaimed;
}

void Controller::on_flow_mod_reply(const pubsub::DataSample &sample) {
    const auto corr = static_cast<std::uint64_t>(num(sample, "correlation_id"));
    auto       it   = _pending_mods.find(corr);
    if (it == _pending_mods.end()) {
        ++_stats.malformed;
        return;
    }
    ModResult result = ModResult::InvalidMod;
    try {
        result = dataplane::parse_mod_result(str(sample, "result"));
    } catch (const Error &) {
        ++_stats.malformed;
    }
    auto pending = std::move(it->second);
    _pending_mods.erase(it);
    _results[corr] = result;
    ++_stats.mod_results[result];
    if (pending.callback) pending.callback(result);
}

void Controller::on_stats_reply(const pubsub::DataSample &sample) {
    const auto corr = static_cast<std::uint64_t>(num(sample, "correlation_id"));
    auto       it   = _pending_stats.find(corr);
    if (it == _pending_stats.end()) {
        ++_stats.malformed;
        return;
    }
    auto callback = std::move(it->second);
    _pending_stats.erase(it);
    ++_stats.stats_replies;
    try {
        const auto stats = codec::stats_from_json(codec::parse(str(sample, "stats")));
        if (callback) callback(stats);
    } catch (const ValidationError &) {
        ++_stats.malformed;
    }
}

} // namespace psdn::controller

#include "psdn/controller/apps.hpp"

#include "psdn/controller/codec.hpp"
#include "psdn/error.hpp"

namespace psdn::controller {

namespace {

FlowMatch dst_match(const std::string &address) {
    FlowMatch m;
    m.dst_addr = address;
    return m;
}

std::vector<PortId> other_ports(const SwitchInfo &sw, PortId in_port) {
    std::vector<PortId> out;
    for (auto p : sw.ports) {
        if (p != in_port) out.push_back(p);
    }
    return out;
}

std::vector<FlowAction> flood_actions(const std::vector<PortId> &ports) {
    if (ports.empty()) return {};
    return {FlowAction::group(ports)};
}

std::optional<PortId> output_port(const std::vector<FlowAction> &actions) {
    for (const auto &a : actions) {
        if (a.kind == FlowAction::Kind::Output) return a.port;
    }
    return std::nullopt;
}

} // namespace

std::size_t install_route(Controller &ctl, const std::string &app_id, const std::string &address, const PortRef &host,
                          const std::vector<std::string> &switches, int priority, std::optional<sim::Duration> idle_timeout,
                          Controller::ModCallback callback) {
    std::size_t issued = 0;
    const auto  match  = dst_match(address);
    for (const auto &sw : switches) {
        const auto port = ctl.topology().port_toward(sw, host);
        if (!port) continue;
        const std::vector<FlowAction> actions{FlowAction::output(*port)};
        const auto                   *existing = ctl.find_rule(sw, priority, match);
        if (existing != nullptr && existing->actions == actions) continue;
        FlowMod mod{existing ? dataplane::FlowCommand::Modify : dataplane::FlowCommand::Add, priority, match, actions, idle_timeout};
        ctl.program_flow(app_id, sw, mod, callback);
        ++issued;
    }
    return issued;
}

// ---- LearningForwarder ---------------------------------------------------

bool LearningForwarder::on_packet_in(Controller &ctl, const PacketIn &pi) {
    if (pi.packet.protocol != dataplane::Protocol::Data) {
        return false;
    }
    const auto &sw     = ctl.topology().switch_info(pi.switch_id);
    const auto  app_id = std::string(id());
    const auto  others = other_ports(sw, pi.in_port);

    if (!ctl.topology().is_inter_switch(PortRef{pi.switch_id, pi.in_port}) && !pubsub::is_multicast(pi.packet.src_addr)) {
        ctl.learn(pi.packet.src_addr, pi.switch_id, pi.in_port);
    }

    const auto &dst = pi.packet.dst_addr;
    if (pubsub::is_multicast(dst)) {
        if (!others.empty()) {
            FlowMatch m;
            m.in_port  = pi.in_port;
            m.dst_addr = dst;
            if (ctl.find_rule(pi.switch_id, _config.priority, m) == nullptr) {
                ctl.program_flow(app_id, pi.switch_id, FlowMod{dataplane::FlowCommand::Add, _config.priority, m, flood_actions(others), std::nullopt});
            }
        }
        ctl.send_packet_out(pi.switch_id, flood_actions(others), pi.packet);
        return true;
    }

    auto dst_loc = ctl.locations().find(dst);
    if (dst_loc == ctl.locations().end()) {
        ctl.send_packet_out(pi.switch_id, flood_actions(others), pi.packet);
        return true;
    }
    const PortRef dst_at{dst_loc->second.switch_id, dst_loc->second.port};
    install_route(ctl, app_id, dst, dst_at, ctl.topology().path(pi.switch_id, dst_at.node), _config.priority, _config.idle_timeout);
    if (auto src_loc = ctl.locations().find(pi.packet.src_addr); src_loc != ctl.locations().end()) {
        const PortRef src_at{src_loc->second.switch_id, src_loc->second.port};
        install_route(ctl, app_id, pi.packet.src_addr, src_at, ctl.topology().path(dst_at.node, src_at.node), _config.priority,
                      _config.idle_timeout);
    }
    const auto out = ctl.topology().port_toward(pi.switch_id, dst_at);
    ctl.send_packet_out(pi.switch_id, out ? std::vector<FlowAction>{FlowAction::output(*out)} : std::vector<FlowAction>{}, pi.packet);
    return true;
}

// ---- DiscoveryProxy ------------------------------------------------------

bool DiscoveryProxy::on_packet_in(Controller &ctl, const PacketIn &pi) {
    if (pi.packet.protocol != dataplane::Protocol::Discovery || !pubsub::is_multicast(pi.packet.dst_addr)) {
        return false;
    }
    const auto &sw = ctl.topology().switch_info(pi.switch_id);
    if (sw.multicast_capable) {
        return false;
    }
    const auto others = other_ports(sw, pi.in_port);
    ctl.send_packet_out(pi.switch_id, flood_actions(others), pi.packet);
    if (!others.empty()) {
        FlowMatch m;
        m.in_port  = pi.in_port;
        m.protocol = dataplane::Protocol::Discovery;
        m.dst_addr = pi.packet.dst_addr;
        if (ctl.find_rule(pi.switch_id, _priority, m) == nullptr) {
            ctl.program_flow(std::string(id()), pi.switch_id, FlowMod{dataplane::FlowCommand::Add, _priority, m, flood_actions(others), std::nullopt});
            ++_rules_installed;
        }
    }
    return true;
}

// ---- ProactiveRouter -----------------------------------------------------

void ProactiveRouter::start(Controller &ctl) {
    std::vector<std::string> all;
    for (const auto &[sid, info] : ctl.topology().switches()) all.push_back(sid);
    for (const auto &host : ctl.topology().hosts()) {
        install_route(ctl, std::string(id()), host.address, host.attachment, all, _priority);
    }
}

// ---- MobilityManager -----------------------------------------------------

const MobilitySummary &MobilityManager::handle_mobility_event(Controller &ctl, const std::string &address, const std::string &old_gw,
                                                              const std::string &new_gw, PortId new_port) {
    const auto *host    = ctl.topology().host_by_address(address);
    auto        learned = ctl.locations().find(address);
    if (host == nullptr && learned == ctl.locations().end()) {
        throw Error(ErrorCode::UnknownEntity, "device '" + address + "'");
    }
    ctl.topology().switch_info(old_gw);
    ctl.topology().switch_info(new_gw);

    PortRef old_at = host != nullptr ? host->attachment : PortRef{learned->second.switch_id, learned->second.port};
    if (learned != ctl.locations().end() && learned->second.switch_id == old_gw) {
        old_at = PortRef{learned->second.switch_id, learned->second.port};
    }
    const PortRef new_at{new_gw, new_port};

    _events.push_back(MobilitySummary{address, 0, 0, ctl.now(), std::nullopt, 0, 0});
    auto      &summary = _events.back();
    const auto app_id  = std::string(id());
    auto       done    = [&summary, &ctl](ModResult r) {
        if (r != ModResult::Ok) ++summary.failures;
        if (--summary.outstanding == 0) summary.completion_time = ctl.now();
    };

    std::vector<std::string> touched;
    for (const auto &[sid, info] : ctl.topology().switches()) {
        const auto toward_old = ctl.topology().port_toward(sid, old_at);
        const auto toward_new = ctl.topology().port_toward(sid, new_at);
        if (!toward_old || toward_old == toward_new) continue;

        std::vector<FlowMatch> stale;
        std::size_t            removed = 0;
        for (const auto &rule : ctl.rules(sid)) {
            if (rule.match.dst_addr != address || output_port(rule.actions) != toward_old) continue;
            if (std::find(stale.begin(), stale.end(), rule.match) == stale.end()) stale.push_back(rule.match);
        }
        for (const auto &m : stale) {
            for (const auto &rule : ctl.rules(sid)) removed += rule.match == m;
            ++summary.outstanding;
            ctl.program_flow(app_id, sid, FlowMod{dataplane::FlowCommand::Delete, 0, m, {}, std::nullopt}, done);
        }
        summary.deleted += removed;
        if (!stale.empty()) touched.push_back(sid);
    }
    if (std::find(touched.begin(), touched.end(), new_gw) == touched.end()) touched.push_back(new_gw);

    summary.installed = install_route(ctl, app_id, address, new_at, touched, _priority, std::nullopt, done);
    summary.outstanding += summary.installed;

    ctl.topology().move_host(address, new_at);
    ctl.learn(address, new_gw, new_port);
    if (summary.outstanding == 0) summary.completion_time = ctl.now();
    return summary;
}

// ---- FloodMonitor --------------------------------------------------------

std::string Alert::to_ndjson() const {
    return codec::Json{{"time", time}, {"switch_id", switch_id}, {"match", codec::to_json(match)}, {"delta", delta}, {"action_taken", action_taken}}
        .dump();
}

void FloodMonitor::start(Controller &ctl) {
    ctl.schedule(_policy.window, [this, &ctl] { tick(ctl); });
}

void FloodMonitor::tick(Controller &ctl) {
    for (const auto &[sid, info] : ctl.topology().switches()) {
        const auto switch_id = sid;
        ctl.request_stats(switch_id, std::nullopt, [this, &ctl, switch_id](const auto &stats) { on_stats(ctl, switch_id, stats); });
    }
    ctl.schedule(_policy.window, [this, &ctl] { tick(ctl); });
}

void FloodMonitor::on_stats(Controller &ctl, const std::string &switch_id, const std::vector<dataplane::FlowStats> &stats) {
    for (const auto &s : stats) {
        if (s.priority == _policy.mitigation_priority) continue;
        const auto match_key = codec::to_json(s.match).dump();
        auto      &last      = _last[switch_id + "|" + std::to_string(s.priority) + "|" + match_key];
        const auto delta     = s.packet_count >= last ? s.packet_count - last : s.packet_count;
        last                 = s.packet_count;
        if (delta <= _policy.rate_threshold) continue;
        if (!_mitigated.insert(switch_id + "|" + match_key).second) continue;

        Alert alert{ctl.now(), switch_id, s.match, delta, _policy.mitigate ? "drop_rule" : "none"};
        _alerts.push_back(alert);
        if (_policy.mitigate) {
            ctl.program_flow(std::string(id()), switch_id,
                             FlowMod{dataplane::FlowCommand::Add, _policy.mitigation_priority, s.match, {FlowAction::drop()}, std::nullopt},
                             [this, alert, &ctl](ModResult r) {
                                 if (r == ModResult::Ok) _mitigations.emplace_back(alert, ctl.now());
                             });
        }
    }
}

} // namespace psdn::controller

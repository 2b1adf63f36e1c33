#include "psdn/dataplane/switch.hpp"

#include "psdn/error.hpp"

#include <algorithm>

namespace psdn::dataplane {

std::string_view to_string(DropReason r) noexcept {
    switch (r) {
    case DropReason::Action: return "action";
    case DropReason::TableMiss: return "table-miss";
    case DropReason::BadPort: return "bad-port";
    }
    return "unknown";
}

Switch::Switch(std::string id, std::vector<PortId> ports, MissBehavior miss_behavior)
    : _id(std::move(id)), _ports(std::move(ports)), _miss(miss_behavior) {
    std::sort(_ports.begin(), _ports.end());
    if (std::adjacent_find(_ports.begin(), _ports.end()) != _ports.end()) {
        throw Error(ErrorCode::DuplicateEntity, "switch '" + _id + "' has duplicate port ids");
    }
}

bool Switch::has_port(PortId port) const noexcept { return std::binary_search(_ports.begin(), _ports.end(), port); }

const FlowEntry *Switch::lookup(const Packet &packet, PortId in_port) const {
    const FlowEntry *best = nullptr;
    for (const auto &entry : _table) {
        if (!entry.match.matches(packet, in_port)) {
            continue;
        }
        if (best == nullptr || entry.priority > best->priority || (entry.priority == best->priority && entry.install_seq < best->install_seq)) {
            best = &entry;
        }
    }
    return best;
}

void Switch::run_actions(const std::vector<FlowAction> &actions, Packet packet, std::vector<Effect> &effects) const {
    const auto before = effects.size();
    auto       emit   = [&](PortId port) {
        if (has_port(port)) {
            effects.push_back(Effect{Effect::Kind::Transmit, port, packet, DropReason::Action});
        } else {
            effects.push_back(Effect{Effect::Kind::Dropped, port, packet, DropReason::BadPort});
        }
    };
    for (const auto &action : actions) {
        switch (action.kind) {
        case FlowAction::Kind::Output: emit(action.port); break;
        case FlowAction::Kind::Group:
            for (auto port : action.ports) {
                emit(port);
            }
            break;
        case FlowAction::Kind::SetDscp: packet.dscp = action.dscp; break;
        case FlowAction::Kind::ToController: effects.push_back(Effect{Effect::Kind::ToController, 0, packet, DropReason::Action}); break;
        case FlowAction::Kind::Drop: effects.push_back(Effect{Effect::Kind::Dropped, 0, packet, DropReason::Action}); return;
        }
    }
    if (effects.size() == before) {
        // An action list without any output drops the packet.
        effects.push_back(Effect{Effect::Kind::Dropped, 0, std::move(packet), DropReason::Action});
    }
}

std::vector<Effect> Switch::process_packet(PortId in_port, const Packet &packet, sim::SimTime now) {
    ++_counters.rx_packets;
    _counters.rx_bytes += packet.size_bytes;

    std::vector<Effect> effects;
    const FlowEntry    *hit = lookup(packet, in_port);
    if (_observer != nullptr) {
        _observer->on_lookup(*this, in_port, packet, hit, now);
    }
    if (hit != nullptr) {
        auto &entry = const_cast<FlowEntry &>(*hit);
        entry.packet_count += 1;
        entry.byte_count += packet.size_bytes;
        entry.last_hit = now;
        run_actions(entry.actions, packet, effects);
        for (auto &effect : effects) {
            if (effect.kind == Effect::Kind::ToController) {
                effect.port = in_port;
            }
        }
    } else if (_miss == MissBehavior::ToController) {
        effects.push_back(Effect{Effect::Kind::ToController, in_port, packet, DropReason::Action});
    } else {
        effects.push_back(Effect{Effect::Kind::Dropped, in_port, packet, DropReason::TableMiss});
    }

    bool transmitted = false;
    bool controller  = false;
    for (const auto &effect : effects) {
        transmitted |= effect.kind == Effect::Kind::Transmit;
        controller |= effect.kind == Effect::Kind::ToController;
        if (effect.kind == Effect::Kind::Transmit) {
            ++_counters.transmissions;
        }
        if (effect.kind == Effect::Kind::Dropped && effect.reason == DropReason::BadPort) {
            ++_counters.bad_port_drops;
        }
    }
    if (transmitted) {
        ++_counters.forwarded;
    } else if (controller) {
        ++_counters.to_controller;
    } else {
        ++_counters.dropped;
    }
    return effects;
}

std::vector<Effect> Switch::execute_actions(const std::vector<FlowAction> &actions, Packet packet) const {
    std::vector<Effect> effects;
    run_actions(actions, std::move(packet), effects);
    return effects;
}

ModResult Switch::apply_flow_mod(const FlowMod &mod, sim::SimTime now, MutationOrigin origin, std::string_view app_id) {
    const bool allowed = !_sealed || origin == MutationOrigin::Mediation;
    if (!allowed) {
        ++_counters.guard_violations;
        throw Error(ErrorCode::InvalidOperation, "switch '" + _id + "' accepts flow mods only through the mediation layer");
    }

    auto      same_key = [&](const FlowEntry &e) { return e.priority == mod.priority && e.match == mod.match; };
    ModResult result   = ModResult::Ok;
    switch (mod.command) {
    case FlowCommand::Add:
    case FlowCommand::Modify: {
        const bool actions_ok = !mod.actions.empty() && std::all_of(mod.actions.begin(), mod.actions.end(), [](const FlowAction &a) { return a.valid(); });
        if (!actions_ok) {
            result = ModResult::InvalidMod;
            break;
        }
        auto it = std::find_if(_table.begin(), _table.end(), same_key);
        if (mod.command == FlowCommand::Add) {
            if (it != _table.end()) {
                result = ModResult::DuplicateEntry;
                break;
            }
            FlowEntry entry;
            entry.priority     = mod.priority;
            entry.match        = mod.match;
            entry.actions      = mod.actions;
            entry.install_seq  = _next_install_seq++;
            entry.idle_timeout = mod.idle_timeout;
            entry.last_hit     = now;
            _table.push_back(std::move(entry));
        } else {
            if (it == _table.end()) {
                result = ModResult::NoSuchEntry;
                break;
            }
            it->actions = mod.actions;
            if (mod.idle_timeout) {
                it->idle_timeout = mod.idle_timeout;
            }
        }
        break;
    }
    case FlowCommand::Delete:
        std::erase_if(_table, [&](const FlowEntry &e) { return e.match == mod.match; });
        break;
    }
    if (_observer != nullptr) {
        _observer->on_mutation(*this, mod, result, now, app_id);
    }
    return result;
}

std::vector<FlowStats> Switch::query_stats(const std::optional<FlowMatch> &match) const {
    std::vector<FlowStats> out;
    for (const auto &entry : _table) {
        if (!match || entry.match == *match) {
            out.push_back(FlowStats{entry.priority, entry.match, entry.packet_count, entry.byte_count});
        }
    }
    return out;
}

std::size_t Switch::expire_idle(sim::SimTime now) {
    std::size_t removed = 0;
    for (auto it = _table.begin(); it != _table.end();) {
        if (it->idle_timeout && now - it->last_hit >= *it->idle_timeout) {
            if (_observer != nullptr) {
                _observer->on_expire(*this, *it, now);
            }
            it = _table.erase(it);
            ++removed;
        } else {
            ++it;
        }
    }
    return removed;
}

void Gateway::upsert_object(ObjectInfo info) {
    auto it = std::find_if(_objects.begin(), _objects.end(), [&](const ObjectInfo &o) { return o.object_id == info.object_id; });
    if (it != _objects.end()) {
        *it = std::move(info);
    } else {
        _objects.push_back(std::move(info));
    }
}

bool Gateway::remove_object(std::string_view object_id) {
    return std::erase_if(_objects, [&](const ObjectInfo &o) { return o.object_id == object_id; }) > 0;
}

std::string Gateway::format_object_list() const {
    std::string out;
    for (const auto &o : _objects) {
        out += o.object_id + ';' + o.location + ';' + o.description + ';';
        for (std::size_t i = 0; i < o.addresses.size(); ++i) {
            if (i != 0) {
                out += ',';
            }
            out += o.addresses[i];
        }
        out += '\n';
    }
    return out;
}

} // namespace psdn::dataplane

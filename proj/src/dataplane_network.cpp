#include "psdn/dataplane/network.hpp"

#include "psdn/error.hpp"

namespace psdn::dataplane {

std::string_view to_string(DropCause cause) noexcept {
    switch (cause) {
    case DropCause::LinkDown: return "link-down";
    case DropCause::LinkLossy: return "link-lossy";
    case DropCause::NoLink: return "no-link";
    case DropCause::SwitchDrop: return "switch-drop";
    case DropCause::BadPort: return "bad-port";
    case DropCause::NotForHost: return "not-for-host";
    case DropCause::Stale: return "stale";
    }
    return "unknown";
}

Device::Device(Network &network, std::string id, std::string address)
    : _network(network), _id(std::move(id)), _address(std::move(address)) {}

void Device::send(Packet packet) { _network.inject(*this, std::move(packet)); }

Network::Network(sim::Kernel &kernel) : _kernel(kernel) {}

Network::~Network() {
    for (auto &[id, node] : _switches) {
        _kernel.set_handler(node.entity, {});
    }
    for (auto &[id, device] : _devices) {
        _kernel.set_handler(device->_entity, {});
    }
    if (_idle_entity.valid()) {
        _kernel.set_handler(_idle_entity, {});
    }
}

Switch &Network::add_switch(std::unique_ptr<Switch> sw) {
    const auto id = sw->id();
    if (_switches.contains(id) || _devices.contains(id)) {
        throw Error(ErrorCode::DuplicateEntity, "node '" + id + "'");
    }
    SwitchNode node;
    node.sw     = std::move(sw);
    auto &slot  = _switches.emplace(id, std::move(node)).first->second;
    slot.entity = _kernel.register_entity("switch:" + id, [this, &slot](const sim::Event &e) {
        if (const auto *arrival = std::any_cast<Arrival>(&e.payload)) {
            on_switch_arrival(slot, *arrival);
        }
    });
    return *slot.sw;
}

void Network::claim_port(const PortRef &end, std::size_t link) {
    auto it = _switches.find(end.node);
    if (it == _switches.end()) {
        throw Error(ErrorCode::UnknownEntity, "switch '" + end.node + "'");
    }
    auto &node = it->second;
    if (!node.sw->has_port(end.port)) {
        throw Error(ErrorCode::InvalidOperation, "switch '" + end.node + "' has no port " + std::to_string(end.port));
    }
    if (node.port_links.contains(end.port)) {
        throw Error(ErrorCode::InvalidOperation, "port " + end.node + ":" + std::to_string(end.port) + " is already connected");
    }
    node.port_links[end.port] = link;
    node.vacated.erase(end.port);
}

Device &Network::add_device(const std::string &id, const std::string &address, PortRef attachment, sim::Duration latency, sim::Duration jitter) {
    if (_switches.contains(id) || _devices.contains(id)) {
        throw Error(ErrorCode::DuplicateEntity, "node '" + id + "'");
    }
    if (device_by_address(address) != nullptr) {
        throw Error(ErrorCode::DuplicateEntity, "address '" + address + "'");
    }
    const auto link_idx = _links.size();
    claim_port(attachment, link_idx);

    Link link;
    link.config      = LinkConfig{"access:" + id, attachment, PortRef{id, 0}, latency, jitter, false};
    link.device_link = true;
    _links.push_back(std::move(link));

    auto  device    = std::make_unique<Device>(*this, id, address);
    auto &ref       = *device;
    ref._link       = link_idx;
    ref._entity     = _kernel.register_entity("device:" + id, [this, &ref](const sim::Event &e) {
        if (const auto *arrival = std::any_cast<Arrival>(&e.payload)) {
            on_device_arrival(ref, *arrival);
        }
    });
    _devices.emplace(id, std::move(device));
    return ref;
}

void Network::add_link(const LinkConfig &config) {
    for (const auto &link : _links) {
        if (link.config.id == config.id) {
            throw Error(ErrorCode::DuplicateEntity, "link '" + config.id + "'");
        }
    }
    const auto idx = _links.size();
    claim_port(config.a, idx);
    try {
        claim_port(config.b, idx);
    } catch (...) {
        _switches.find(config.a.node)->second.port_links.erase(config.a.port);
        throw;
    }
    Link link;
    link.config = config;
    _links.push_back(std::move(link));
}

Switch &Network::switch_at(std::string_view id) {
    auto it = _switches.find(id);
    if (it == _switches.end()) {
        throw Error(ErrorCode::UnknownEntity, "switch '" + std::string(id) + "'");
    }
    return *it->second.sw;
}

const Switch &Network::switch_at(std::string_view id) const { return const_cast<Network *>(this)->switch_at(id); }

Device &Network::device(std::string_view id) {
    auto it = _devices.find(id);
    if (it == _devices.end()) {
        throw Error(ErrorCode::UnknownEntity, "device '" + std::string(id) + "'");
    }
    return *it->second;
}

const Device &Network::device(std::string_view id) const { return const_cast<Network *>(this)->device(id); }

Device *Network::device_by_address(std::string_view address) {
    for (auto &[id, device] : _devices) {
        if (device->address() == address) {
            return device.get();
        }
    }
    return nullptr;
}

std::vector<const Switch *> Network::switches() const {
    std::vector<const Switch *> out;
    for (const auto &[id, node] : _switches) out.push_back(node.sw.get());
    return out;
}

std::vector<const Device *> Network::devices() const {
    std::vector<const Device *> out;
    for (const auto &[id, device] : _devices) out.push_back(device.get());
    return out;
}

PortRef Network::attachment(std::string_view device_id) const { return _links[device(device_id)._link].config.a; }

std::size_t Network::link_index(std::string_view id) const {
    for (std::size_t i = 0; i < _links.size(); ++i) {
        if (_links[i].config.id == id) {
            return i;
        }
    }
    throw Error(ErrorCode::UnknownEntity, "link '" + std::string(id) + "'");
}

void Network::set_link_up(std::string_view link_id, bool up) { _links[link_index(link_id)].up = up; }
void Network::set_link_drop(std::string_view link_id, bool drop) { _links[link_index(link_id)].config.drop = drop; }
const LinkCounters &Network::link_counters(std::string_view link_id) const { return _links[link_index(link_id)].counters; }
const LinkConfig   &Network::link_config(std::string_view link_id) const { return _links[link_index(link_id)].config; }

std::vector<std::string> Network::link_ids() const {
    std::vector<std::string> out;
    for (const auto &link : _links) out.push_back(link.config.id);
    return out;
}

std::optional<PortRef> Network::peer(const PortRef &port) const {
    auto it = _switches.find(port.node);
    if (it == _switches.end()) {
        return std::nullopt;
    }
    auto pl = it->second.port_links.find(port.port);
    if (pl == it->second.port_links.end()) {
        return std::nullopt;
    }
    const auto &cfg = _links[pl->second].config;
    return cfg.a == port ? cfg.b : cfg.a;
}

void Network::move_device(std::string_view device_id, std::string_view new_switch, PortId new_port) {
    auto      &dev  = device(device_id);
    auto      &link = _links[dev._link];
    const auto old  = link.config.a;
    if (old.node == new_switch && old.port == new_port) {
        return;
    }
    claim_port(PortRef{std::string(new_switch), new_port}, dev._link);
    auto &old_node = _switches.find(old.node)->second;
    old_node.port_links.erase(old.port);
    old_node.vacated[old.port] = dev.id();
    link.config.a              = PortRef{std::string(new_switch), new_port};
    ++link.epoch;

    auto *old_gw = dynamic_cast<Gateway *>(old_node.sw.get());
    auto *new_gw = dynamic_cast<Gateway *>(_switches.find(new_switch)->second.sw.get());
    if (old_gw != nullptr && new_gw != nullptr) {
        for (const auto &object : old_gw->object_list()) {
            if (object.object_id == dev.id()) {
                auto moved = object;
                old_gw->remove_object(dev.id());
                new_gw->upsert_object(std::move(moved));
                break;
            }
        }
    }
}

sim::EntityId Network::entity_of(const PortRef &end) const {
    if (auto it = _switches.find(end.node); it != _switches.end()) {
        return it->second.entity;
    }
    return device(end.node)._entity;
}

void Network::notify_drop(std::string_view where, const Packet &packet, DropCause cause) {
    for (auto *observer : _observers) {
        observer->on_drop(where, packet, cause, _kernel.now());
    }
}

void Network::inject(Device &device, Packet packet) {
    packet.id          = _next_packet_id++;
    packet.origin_time = _kernel.now();
    packet.origin      = device.id();
    ++_ledger.injected;
    for (auto *observer : _observers) {
        observer->on_inject(device, packet, _kernel.now());
    }
    transmit(device._link, PortRef{device.id(), 0}, std::move(packet));
}

void Network::transmit(std::size_t link_index, const PortRef &from, Packet packet) {
    auto &link = _links[link_index];
    if (!link.up) {
        ++link.counters.down_drops;
        ++_ledger.link_drops;
        notify_drop(link.config.id, packet, DropCause::LinkDown);
        return;
    }
    if (link.config.drop && !packet.reliable) {
        ++link.counters.lossy_drops;
        ++_ledger.link_drops;
        notify_drop(link.config.id, packet, DropCause::LinkLossy);
        return;
    }
    ++link.counters.tx_packets[packet.protocol];
    link.counters.tx_bytes += packet.size_bytes;
    const PortRef &to    = link.config.a == from ? link.config.b : link.config.a;
    const auto     delay = link.config.latency + _kernel.jitter(link.config.jitter);
    ++_ledger.in_flight;
    _kernel.schedule(entity_of(to), delay, sim::EventKind::PacketArrival, Arrival{to.port, std::move(packet), link_index, link.epoch});
}

void Network::on_switch_arrival(SwitchNode &node, const Arrival &arrival) {
    --_ledger.in_flight;
    ++_ledger.switch_arrivals;
    apply_effects(node, node.sw->process_packet(arrival.port, arrival.packet, _kernel.now()), false);
}

void Network::on_device_arrival(Device &device, const Arrival &arrival) {
    --_ledger.in_flight;
    if (arrival.epoch != _links[arrival.link].epoch) {
        ++_ledger.stale;
        notify_drop(device.id(), arrival.packet, DropCause::Stale);
        return;
    }
    const auto &packet = arrival.packet;
    if (packet.dst_addr != device.address() && !pubsub::is_multicast(packet.dst_addr)) {
        ++_ledger.not_for_host;
        notify_drop(device.id(), packet, DropCause::NotForHost);
        return;
    }
    ++_ledger.device_arrivals;
    ++device._received;
    for (auto *observer : _observers) {
        observer->on_device_receive(device, packet, _kernel.now());
    }
    if (device._participant != nullptr) {
        device._participant->on_packet(packet);
    }
}

void Network::apply_effects(SwitchNode &node, std::vector<Effect> effects, bool from_packet_out) {
    const auto &sw = *node.sw;
    for (auto &effect : effects) {
        switch (effect.kind) {
        case Effect::Kind::Transmit: {
            ++(from_packet_out ? _ledger.packet_out_transmits : _ledger.switch_transmits);
            auto link = node.port_links.find(effect.port);
            if (link != node.port_links.end()) {
                for (auto *observer : _observers) {
                    observer->on_egress(sw, effect.port, effect.packet, _kernel.now(), false);
                }
                transmit(link->second, PortRef{sw.id(), effect.port}, std::move(effect.packet));
            } else if (node.vacated.contains(effect.port)) {
                ++_ledger.stale;
                for (auto *observer : _observers) {
                    observer->on_egress(sw, effect.port, effect.packet, _kernel.now(), true);
                }
                notify_drop(sw.id(), effect.packet, DropCause::Stale);
            } else {
                ++_ledger.no_link_drops;
                notify_drop(sw.id(), effect.packet, DropCause::NoLink);
            }
            break;
        }
        case Effect::Kind::ToController:
            for (auto *observer : _observers) {
                observer->on_packet_in(sw, effect.port, effect.packet, _kernel.now());
            }
            if (_packet_in_sink) {
                _packet_in_sink(sw, effect.port, effect.packet);
            }
            break;
        case Effect::Kind::Dropped:
            notify_drop(sw.id(), effect.packet, effect.reason == DropReason::BadPort ? DropCause::BadPort : DropCause::SwitchDrop);
            break;
        }
    }
}

void Network::packet_out(std::string_view switch_id, const std::vector<FlowAction> &actions, Packet packet) {
    auto it = _switches.find(switch_id);
    if (it == _switches.end()) {
        throw Error(ErrorCode::UnknownEntity, "switch '" + std::string(switch_id) + "'");
    }
    apply_effects(it->second, it->second.sw->execute_actions(actions, std::move(packet)), true);
}

void Network::enable_idle_checks(sim::Duration period) {
    if (period <= 0 || _idle_entity.valid()) {
        return;
    }
    _idle_period = period;
    _idle_entity = _kernel.register_entity("idle-sweeper", [this](const sim::Event &) {
        for (auto &[id, node] : _switches) {
            node.sw->expire_idle(_kernel.now());
        }
        _kernel.schedule(_idle_entity, _idle_period, sim::EventKind::StatsTick);
    });
    _kernel.schedule(_idle_entity, _idle_period, sim::EventKind::StatsTick);
}

} // namespace psdn::dataplane

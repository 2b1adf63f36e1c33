#include "psdn/controller/mediation.hpp"

#include "psdn/controller/codec.hpp"
#include "psdn/error.hpp"

namespace psdn::controller {

using pubsub::DataSample;
using pubsub::Topic;

std::vector<Topic> mediation_topics() {
    constexpr auto S = FieldKind::String;
    constexpr auto I = FieldKind::Integer;
    return {
        Topic{topics::kPacketIn, "PacketIn", {{"switch_id", S}, {"in_port", I}, {"packet", S}}},
        Topic{topics::kPacketOut, "PacketOut", {{"switch_id", S}, {"actions", S}, {"packet", S}}},
        Topic{topics::kFlowMod,
              "FlowMod",
              {{"switch_id", S},
               {"app_id", S},
               {"correlation_id", I},
               {"command", S},
               {"priority", I},
               {"match", S},
               {"actions", S},
               {"idle_timeout_us", I}}},
        Topic{topics::kFlowModReply, "FlowModReply", {{"switch_id", S}, {"correlation_id", I}, {"result", S}}},
        Topic{topics::kStatsRequest, "StatsRequest", {{"switch_id", S}, {"correlation_id", I}, {"match", S}}},
        Topic{topics::kStatsReply, "StatsReply", {{"switch_id", S}, {"correlation_id", I}, {"stats", S}}},
    };
}

std::string filter_literal(std::string_view text) {
    std::string out = "'";
    for (char c : text) {
        out.push_back(c);
        if (c == '\'') out.push_back('\'');
    }
    out.push_back('\'');
    return out;
}

// ---- ControlBus ----------------------------------------------------------

class ControlBus::Station : public pubsub::Transport {
public:
    Station(ControlBus &bus, std::string address) : _bus(bus), _address(std::move(address)) {}

    void               send(dataplane::Packet packet) override { _bus.send(*this, std::move(packet)); }
    const std::string &address() const override { return _address; }

    pubsub::DomainParticipant *participant = nullptr;

private:
    ControlBus &_bus;
    std::string _address;
};

ControlBus::ControlBus(sim::Kernel &kernel, sim::Duration latency) : _kernel(kernel), _latency(latency) {
    _entity = kernel.register_entity("control-bus", [this](const sim::Event &e) {
        const auto &d = std::any_cast<const Delivery &>(e.payload);
        if (d.to->participant != nullptr) {
            d.to->participant->on_packet(d.packet);
        }
    });
}

ControlBus::~ControlBus() { _kernel.set_handler(_entity, {}); }

pubsub::Transport &ControlBus::attach(const std::string &address) {
    auto &slot = _stations[address];
    if (slot) {
        throw Error(ErrorCode::DuplicateEntity, "control address '" + address + "'");
    }
    slot = std::make_unique<Station>(*this, address);
    return *slot;
}

void ControlBus::bind(const std::string &address, pubsub::DomainParticipant *participant) {
    auto it = _stations.find(address);
    if (it == _stations.end()) {
        throw Error(ErrorCode::UnknownEntity, "control address '" + address + "'");
    }
    it->second->participant = participant;
}

void ControlBus::send(Station &from, dataplane::Packet packet) {
    ++_messages;
    if (pubsub::is_multicast(packet.dst_addr)) {
        for (auto &[addr, station] : _stations) {
            if (station.get() != &from) {
                _kernel.schedule(_entity, _latency, sim::EventKind::PacketArrival, Delivery{station.get(), packet});
            }
        }
        return;
    }
    if (auto it = _stations.find(packet.dst_addr); it != _stations.end()) {
        _kernel.schedule(_entity, _latency, sim::EventKind::PacketArrival, Delivery{it->second.get(), std::move(packet)});
    }
}

// ---- SwitchAgent ---------------------------------------------------------

SwitchAgent::SwitchAgent(sim::Kernel &kernel, ControlBus &bus, dataplane::Network &network, const std::string &switch_id,
                         pubsub::DomainId control_domain)
    : _kernel(kernel), _network(network), _switch_id(switch_id) {
    const auto address = "ctl:" + switch_id;
    auto      &port    = bus.attach(address);
    pubsub::ParticipantConfig config{control_domain, "agent:" + switch_id, 0, &bus.directory(), dataplane::Protocol::Control};
    _participant = std::make_unique<pubsub::DomainParticipant>(kernel, port, config);
    bus.bind(address, _participant.get());
    for (auto &t : mediation_topics()) _participant->register_topic(std::move(t));

    const auto mine = filter::FilterExpression::parse("switch_id = " + filter_literal(switch_id));
    _packet_in_writer   = _participant->create_writer(topics::kPacketIn, {});
    _mod_reply_writer   = _participant->create_writer(topics::kFlowModReply, {});
    _stats_reply_writer = _participant->create_writer(topics::kStatsReply, {});
    _participant->create_reader(topics::kPacketOut, mine, {}, [this](const DataSample &s, const auto &) { on_packet_out(s); });
    _participant->create_reader(topics::kFlowMod, mine, {}, [this](const DataSample &s, const auto &) { on_flow_mod(s); });
    _participant->create_reader(topics::kStatsRequest, mine, {}, [this](const DataSample &s, const auto &) { on_stats_request(s); });
}

void SwitchAgent::publish_packet_in(dataplane::PortId in_port, const dataplane::Packet &packet) {
    _participant->write(_packet_in_writer, {{"switch_id", _switch_id},
                                            {"in_port", static_cast<std::int64_t>(in_port)},
                                            {"packet", codec::to_json(packet).dump()}});
}

namespace {
const std::string &str(const DataSample &s, const char *name) { return std::get<std::string>(s.fields.at(name)); }
std::int64_t       num(const DataSample &s, const char *name) { return std::get<std::int64_t>(s.fields.at(name)); }
} // namespace

void SwitchAgent::on_packet_out(const DataSample &s) {
    try {
        auto actions = codec::actions_from_json(codec::parse(str(s, "actions")));
        auto packet  = codec::packet_from_json(codec::parse(str(s, "packet")));
        _network.packet_out(_switch_id, actions, std::move(packet));
    } catch (const ValidationError &) {
        ++_malformed;
    }
}

void SwitchAgent::on_flow_mod(const DataSample &s) {
    dataplane::ModResult result = dataplane::ModResult::InvalidMod;
    try {
        dataplane::FlowMod mod;
        mod.command  = dataplane::parse_flow_command(str(s, "command"));
        mod.priority = static_cast<int>(num(s, "priority"));
        mod.match    = codec::match_from_json(codec::parse(str(s, "match")));
        mod.actions  = codec::actions_from_json(codec::parse(str(s, "actions")));
        if (const auto idle = num(s, "idle_timeout_us"); idle > 0) {
            mod.idle_timeout = idle;
        }
        result = _network.switch_at(_switch_id).apply_flow_mod(mod, _kernel.now(), dataplane::MutationOrigin::Mediation, str(s, "app_id"));
    } catch (const ValidationError &) {
        ++_malformed;
    }
    _participant->write(_mod_reply_writer, {{"switch_id", _switch_id},
                                            {"correlation_id", num(s, "correlation_id")},
                                            {"result", std::string(to_string(result))}});
}

void SwitchAgent::on_stats_request(const DataSample &s) {
    std::optional<dataplane::FlowMatch> match;
    try {
        if (const auto &text = str(s, "match"); !text.empty()) {
            match = codec::match_from_json(codec::parse(text));
        }
    } catch (const ValidationError &) {
        ++_malformed;
        return;
    }
    const auto stats = _network.switch_at(_switch_id).query_stats(match);
    _participant->write(_stats_reply_writer, {{"switch_id", _switch_id},
                                              {"correlation_id", num(s, "correlation_id")},
                                              {"stats", codec::to_json(stats).dump()}});
}

} // namespace psdn::controller

#include "psdn/controller/codec.hpp"

#include "psdn/error.hpp"
#include "psdn/pubsub/wire.hpp"

namespace psdn::controller::codec {
namespace {

using dataplane::FlowAction;
using dataplane::FlowMatch;

[[noreturn]] void bad(const std::string &what) { throw ValidationError("", what); }

const Json &field(const Json &j, const char *name) {
    if (!j.is_object() || !j.contains(name)) {
        bad(std::string("missing '") + name + "'");
    }
    return j.at(name);
}

template <class T> T get(const Json &j, const char *name) {
    try {
        return field(j, name).get<T>();
    } catch (const nlohmann::json::exception &) {
        bad(std::string("bad type for '") + name + "'");
    }
}

std::string to_hex(std::string_view bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string           out;
    out.reserve(bytes.size() * 2);
    for (unsigned char c : bytes) {
        out.push_back(digits[c >> 4]);
        out.push_back(digits[c & 0xF]);
    }
    return out;
}

std::string from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) {
        bad("odd-length hex payload");
    }
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        bad("bad hex digit");
    };
    std::string out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        out.push_back(static_cast<char>(nibble(hex[i]) << 4 | nibble(hex[i + 1])));
    }
    return out;
}

std::string as_string(const std::vector<std::byte> &bytes) {
    return {reinterpret_cast<const char *>(bytes.data()), bytes.size()};
}

std::span<const std::byte> as_bytes(const std::string &s) { return {reinterpret_cast<const std::byte *>(s.data()), s.size()}; }

std::uint8_t dscp_from(const Json &j) {
    if (!j.is_number_integer() || j.get<std::int64_t>() < 0 || j.get<std::int64_t>() > 63) {
        bad("dscp must be an integer in 0..63");
    }
    return static_cast<std::uint8_t>(j.get<int>());
}

dataplane::PortId port_from(const Json &j) {
    if (!j.is_number_integer() || j.get<std::int64_t>() < 0) {
        bad("port must be a non-negative integer");
    }
    return j.get<dataplane::PortId>();
}

} // namespace

Json value_to_json(const Value &v) {
    return std::visit([](const auto &x) { return Json(x); }, v);
}

Value value_from_json(const Json &j) {
    if (j.is_number_integer()) return j.get<std::int64_t>();
    if (j.is_number_float()) return j.get<double>();
    if (j.is_string()) return j.get<std::string>();
    bad("value must be an integer, decimal, or string");
}

Json to_json(const FlowMatch &m) {
    Json j = Json::object();
    if (m.in_port) j["in_port"] = *m.in_port;
    if (m.src_addr) j["src_addr"] = *m.src_addr;
    if (m.dst_addr) j["dst_addr"] = *m.dst_addr;
    if (m.protocol) j["protocol"] = std::string(to_string(*m.protocol));
    if (m.dscp) j["dscp"] = *m.dscp;
    if (m.payload_keyword) {
        j["payload_keyword"] = Json{{"field", m.payload_keyword->field_path}, {"value", value_to_json(m.payload_keyword->value)}};
    }
    return j;
}

FlowMatch match_from_json(const Json &j) {
    if (!j.is_object()) {
        bad("match must be an object");
    }
    FlowMatch m;
    for (const auto &[key, v] : j.items()) {
        if (key == "in_port") {
            m.in_port = port_from(v);
        } else if (key == "src_addr") {
            m.src_addr = get<std::string>(j, "src_addr");
        } else if (key == "dst_addr") {
            m.dst_addr = get<std::string>(j, "dst_addr");
        } else if (key == "protocol") {
            m.protocol = dataplane::parse_protocol(get<std::string>(j, "protocol"));
        } else if (key == "dscp") {
            m.dscp = dscp_from(v);
        } else if (key == "payload_keyword") {
            m.payload_keyword = dataplane::KeywordMatch{get<std::string>(v, "field"), value_from_json(field(v, "value"))};
        } else {
            bad("unknown match field '" + key + "'");
        }
    }
    return m;
}

Json to_json(const FlowAction &a) {
    switch (a.kind) {
    case FlowAction::Kind::Output: return Json{{"output", a.port}};
    case FlowAction::Kind::ToController: return Json("to_controller");
    case FlowAction::Kind::Drop: return Json("drop");
    case FlowAction::Kind::SetDscp: return Json{{"set_dscp", a.dscp}};
    case FlowAction::Kind::Group: return Json{{"group", a.ports}};
    }
    return Json();
}

FlowAction action_from_json(const Json &j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "to_controller") return FlowAction::to_controller();
        if (s == "drop") return FlowAction::drop();
        bad("unknown action '" + s + "'");
    }
    if (!j.is_object() || j.size() != 1) {
        bad("action must be a string or a single-key object");
    }
    const auto &[key, v] = *j.items().begin();
    if (key == "output") return FlowAction::output(port_from(v));
    if (key == "set_dscp") return FlowAction::set_dscp(dscp_from(v));
    if (key == "group") {
        if (!v.is_array()) bad("group must list ports");
        std::vector<dataplane::PortId> ports;
        for (const auto &p : v) ports.push_back(port_from(p));
        return FlowAction::group(std::move(ports));
    }
    bad("unknown action '" + key + "'");
}

Json to_json(const std::vector<FlowAction> &actions) {
    Json j = Json::array();
    for (const auto &a : actions) j.push_back(to_json(a));
    return j;
}

std::vector<FlowAction> actions_from_json(const Json &j) {
    if (!j.is_array()) {
        bad("actions must be an array");
    }
    std::vector<FlowAction> out;
    for (const auto &a : j) out.push_back(action_from_json(a));
    return out;
}

Json to_json(const std::vector<dataplane::FlowStats> &stats) {
    Json j = Json::array();
    for (const auto &s : stats) {
        j.push_back(Json{{"priority", s.priority}, {"match", to_json(s.match)}, {"packet_count", s.packet_count}, {"byte_count", s.byte_count}});
    }
    return j;
}

std::vector<dataplane::FlowStats> stats_from_json(const Json &j) {
    if (!j.is_array()) {
        bad("stats must be an array");
    }
    std::vector<dataplane::FlowStats> out;
    for (const auto &s : j) {
        out.push_back({get<int>(s, "priority"), match_from_json(field(s, "match")), get<std::uint64_t>(s, "packet_count"),
                       get<std::uint64_t>(s, "byte_count")});
    }
    return out;
}

Json to_json(const dataplane::Packet &p) {
    Json payload;
    if (const auto *o = std::get_if<dataplane::OpaqueBytes>(&p.payload)) {
        payload = Json{{"kind", "opaque"}, {"hex", to_hex(o->bytes)}};
    } else if (const auto *b = std::get_if<pubsub::SampleBatch>(&p.payload)) {
        payload = Json{{"kind", "batch"}, {"hex", to_hex(as_string(pubsub::encode(*b)))}};
    } else {
        payload = Json{{"kind", "announcement"}, {"hex", to_hex(as_string(pubsub::encode(std::get<pubsub::Announcement>(p.payload))))}};
    }
    return Json{{"src", p.src_addr},       {"dst", p.dst_addr}, {"protocol", std::string(to_string(p.protocol))},
                {"dscp", p.dscp},          {"reliable", p.reliable}, {"payload", payload},
                {"id", p.id},              {"origin_time", p.origin_time}, {"origin", p.origin}};
}

dataplane::Packet packet_from_json(const Json &j) {
    const auto &payload = field(j, "payload");
    const auto  kind    = get<std::string>(payload, "kind");
    const auto  raw     = from_hex(get<std::string>(payload, "hex"));
    dataplane::Payload body;
    try {
        if (kind == "opaque") {
            body = dataplane::OpaqueBytes{raw};
        } else if (kind == "batch") {
            body = pubsub::decode_batch(as_bytes(raw));
        } else if (kind == "announcement") {
            body = pubsub::decode_announcement(as_bytes(raw));
        } else {
            bad("unknown payload kind '" + kind + "'");
        }
    } catch (const ValidationError &) {
        throw;
    } catch (const Error &e) {
        bad(e.what());
    }
    dataplane::Packet p(get<std::string>(j, "src"), get<std::string>(j, "dst"), dataplane::parse_protocol(get<std::string>(j, "protocol")),
                        dscp_from(field(j, "dscp")), std::move(body), get<bool>(j, "reliable"));
    p.id          = get<std::uint64_t>(j, "id");
    p.origin_time = get<sim::SimTime>(j, "origin_time");
    p.origin      = get<std::string>(j, "origin");
    return p;
}

Json parse(const std::string &text) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        bad(e.what());
    }
}

} // namespace psdn::controller::codec

#include "psdn/dataplane/flow.hpp"

#include "psdn/error.hpp"

#include <algorithm>

namespace psdn::dataplane {

bool keyword_present(const Packet &packet, const KeywordMatch &keyword) {
    const auto *batch = std::get_if<pubsub::SampleBatch>(&packet.payload);
    if (batch == nullptr) {
        return false;
    }
    return std::any_of(batch->samples.begin(), batch->samples.end(), [&](const pubsub::DataSample &s) {
        auto it = s.fields.find(keyword.field_path);
        return it != s.fields.end() && values_equal(it->second, keyword.value);
    });
}

bool FlowMatch::matches(const Packet &packet, PortId arrival_port) const {
    if (in_port && *in_port != arrival_port) return false;
    if (src_addr && *src_addr != packet.src_addr) return false;
    if (dst_addr && *dst_addr != packet.dst_addr) return false;
    if (protocol && *protocol != packet.protocol) return false;
    if (dscp && *dscp != packet.dscp) return false;
    if (payload_keyword && !keyword_present(packet, *payload_keyword)) return false;
    return true;
}

bool FlowMatch::is_wildcard_all() const noexcept {
    return !in_port && !src_addr && !dst_addr && !protocol && !dscp && !payload_keyword;
}

bool FlowMatch::subsumes(const FlowMatch &narrower) const noexcept {
    auto covers = [](const auto &mine, const auto &theirs) { return !mine || mine == theirs; };
    return covers(in_port, narrower.in_port) && covers(src_addr, narrower.src_addr) && covers(dst_addr, narrower.dst_addr) &&
           covers(protocol, narrower.protocol) && covers(dscp, narrower.dscp) && covers(payload_keyword, narrower.payload_keyword);
}

bool FlowAction::valid() const noexcept {
    switch (kind) {
    case Kind::SetDscp: return dscp <= 63;
    case Kind::Group: return !ports.empty();
    default: return true;
    }
}

std::string_view to_string(FlowCommand c) noexcept {
    switch (c) {
    case FlowCommand::Add: return "add";
    case FlowCommand::Modify: return "modify";
    case FlowCommand::Delete: return "delete";
    }
    return "unknown";
}

FlowCommand parse_flow_command(std::string_view text) {
    if (text == "add") return FlowCommand::Add;
    if (text == "modify") return FlowCommand::Modify;
    if (text == "delete") return FlowCommand::Delete;
    throw ValidationError("command", "unknown flow command '" + std::string(text) + "'");
}

std::string_view to_string(ModResult r) noexcept {
    switch (r) {
    case ModResult::Ok: return "ok";
    case ModResult::NoSuchEntry: return "NoSuchEntry";
    case ModResult::DuplicateEntry: return "DuplicateEntry";
    case ModResult::SliceViolation: return "SliceViolation";
    case ModResult::InvalidMod: return "InvalidMod";
    }
    return "unknown";
}

ModResult parse_mod_result(std::string_view text) {
    for (auto r : {ModResult::Ok, ModResult::NoSuchEntry, ModResult::DuplicateEntry, ModResult::SliceViolation, ModResult::InvalidMod}) {
        if (to_string(r) == text) {
            return r;
        }
    }
    throw ValidationError("result", "unknown mod result '" + std::string(text) + "'");
}

} // namespace psdn::dataplane

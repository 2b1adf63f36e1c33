#include "psdn/dataplane/packet.hpp"

#include "psdn/error.hpp"
#include "psdn/pubsub/wire.hpp"

namespace psdn::dataplane {

std::string_view to_string(Protocol p) noexcept {
    switch (p) {
    case Protocol::Data: return "data";
    case Protocol::Discovery: return "discovery";
    case Protocol::Control: return "control";
    }
    return "unknown";
}

Protocol parse_protocol(std::string_view text) {
    if (text == "data") return Protocol::Data;
    if (text == "discovery") return Protocol::Discovery;
    if (text == "control") return Protocol::Control;
    throw ValidationError("protocol", "unknown protocol '" + std::string(text) + "'");
}

std::size_t payload_bytes(const Payload &payload) {
    if (const auto *opaque = std::get_if<OpaqueBytes>(&payload)) {
        return opaque->bytes.size();
    }
    if (const auto *batch = std::get_if<pubsub::SampleBatch>(&payload)) {
        return pubsub::encode(*batch).size();
    }
    return pubsub::encode(std::get<pubsub::Announcement>(payload)).size();
}

Packet::Packet(std::string src, std::string dst, Protocol protocol_, std::uint8_t dscp_, Payload payload_, bool reliable_)
    : src_addr(std::move(src)), dst_addr(std::move(dst)), protocol(protocol_), dscp(dscp_), reliable(reliable_), payload(std::move(payload_)) {
    if (dscp > 63) {
        throw Error(ErrorCode::InvalidOperation, "dscp out of range");
    }
    size_bytes = kHeaderBytes + payload_bytes(payload);
}

} // namespace psdn::dataplane

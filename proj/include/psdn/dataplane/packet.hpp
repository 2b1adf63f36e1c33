#pragma once

#include "psdn/pubsub/types.hpp"
#include "psdn/sim/kernel.hpp"

#include <cstdint>
#include <string>
#include <variant>

namespace psdn::dataplane {

using PortId = std::uint32_t;

enum class Protocol : std::uint8_t { Data, Discovery, Control };

std::string_view to_string(Protocol p) noexcept;
Protocol         parse_protocol(std::string_view text); // throws ValidationError

struct OpaqueBytes {
    std::string bytes;

    bool operator==(const OpaqueBytes &) const = default;
};

using Payload = std::variant<OpaqueBytes, pubsub::SampleBatch, pubsub::Announcement>;

inline constexpr std::size_t kHeaderBytes = 32;

/// Serialized payload length in bytes.
std::size_t payload_bytes(const Payload &payload);

/// Simulated datagram. `size_bytes` is fixed at construction from the
/// serialized payload plus a 32-byte header; the payload is never modified
/// afterwards. `id`, `origin_time`, and `origin` are simulation metadata for
/// audits and do not count towards the size.
struct Packet {
    Packet() = default;
    Packet(std::string src, std::string dst, Protocol protocol, std::uint8_t dscp, Payload payload, bool reliable = true);

    std::string  src_addr;
    std::string  dst_addr;
    Protocol     protocol = Protocol::Data;
    std::uint8_t dscp     = 0;
    bool         reliable = true;
    Payload      payload;
    std::size_t  size_bytes = kHeaderBytes;

    std::uint64_t id          = 0;
    sim::SimTime  origin_time = 0;
    std::string   origin;

    bool operator==(const Packet &) const = default;
};

} // namespace psdn::dataplane

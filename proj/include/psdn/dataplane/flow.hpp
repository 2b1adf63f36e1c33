#pragma once

#include "psdn/dataplane/packet.hpp"

#include <optional>
#include <string>
#include <vector>

namespace psdn::dataplane {

/// Exact-equality content match on one sample field.
struct KeywordMatch {
    std::string field_path;
    Value       value;

    bool operator==(const KeywordMatch &) const = default;
};

/// Absent fields are wildcards.
struct FlowMatch {
    std::optional<PortId>       in_port;
    std::optional<std::string>  src_addr;
    std::optional<std::string>  dst_addr;
    std::optional<Protocol>     protocol;
    std::optional<std::uint8_t> dscp;
    std::optional<KeywordMatch> payload_keyword;

    bool matches(const Packet &packet, PortId arrival_port) const;
    bool is_wildcard_all() const noexcept;
    /// true iff every field constrained here is constrained identically in
    /// `narrower`.
    bool subsumes(const FlowMatch &narrower) const noexcept;

    bool operator==(const FlowMatch &) const = default;
};

/// payload_keyword semantics: the packet carries a sample batch with at least
/// one sample whose field equals the value. Opaque payloads never match.
bool keyword_present(const Packet &packet, const KeywordMatch &keyword);

struct FlowAction {
    enum class Kind : std::uint8_t { Output, ToController, Drop, SetDscp, Group };

    Kind                kind = Kind::Drop;
    PortId              port = 0;
    std::uint8_t        dscp = 0;
    std::vector<PortId> ports;

    static FlowAction output(PortId port) { return {Kind::Output, port, 0, {}}; }
    static FlowAction to_controller() { return {Kind::ToController, 0, 0, {}}; }
    static FlowAction drop() { return {Kind::Drop, 0, 0, {}}; }
    static FlowAction set_dscp(std::uint8_t value) { return {Kind::SetDscp, 0, value, {}}; }
    static FlowAction group(std::vector<PortId> ports) { return {Kind::Group, 0, 0, std::move(ports)}; }

    bool valid() const noexcept;

    bool operator==(const FlowAction &) const = default;
};

struct FlowEntry {
    int                          priority = 0;
    FlowMatch                    match;
    std::vector<FlowAction>      actions;
    std::uint64_t                packet_count = 0;
    std::uint64_t                byte_count   = 0;
    std::uint64_t                install_seq  = 0;
    std::optional<sim::Duration> idle_timeout;
    sim::SimTime                 last_hit = 0;
};

enum class FlowCommand : std::uint8_t { Add, Modify, Delete };

std::string_view to_string(FlowCommand c) noexcept;
FlowCommand      parse_flow_command(std::string_view text);

struct FlowMod {
    FlowCommand                  command  = FlowCommand::Add;
    int                          priority = 0;
    FlowMatch                    match;
    std::vector<FlowAction>      actions;
    std::optional<sim::Duration> idle_timeout;

    bool operator==(const FlowMod &) const = default;
};

enum class ModResult : std::uint8_t { Ok, NoSuchEntry, DuplicateEntry, SliceViolation, InvalidMod };

std::string_view to_string(ModResult r) noexcept;
ModResult        parse_mod_result(std::string_view text);

struct FlowStats {
    int           priority = 0;
    FlowMatch     match;
    std::uint64_t packet_count = 0;
    std::uint64_t byte_count   = 0;

    bool operator==(const FlowStats &) const = default;
};

} // namespace psdn::dataplane

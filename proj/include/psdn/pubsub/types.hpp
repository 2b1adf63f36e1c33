#pragma once

#include "psdn/filter/expression.hpp"
#include "psdn/sim/kernel.hpp"
#include "psdn/value.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace psdn::pubsub {

using DomainId      = std::uint32_t;
using ParticipantId = std::string;
using EndpointId    = std::string;

/// Multicast group addresses live in their own namespace.
inline constexpr std::string_view kMulticastPrefix = "mc:";

inline bool is_multicast(std::string_view address) noexcept { return address.starts_with(kMulticastPrefix); }

/// Group that carries announcement frames for one domain.
std::string discovery_group(DomainId domain);

struct Topic {
    std::string                      name;
    std::string                      type_name;
    std::map<std::string, FieldKind> schema; // dotted field path -> kind

    /// Throws Error(SchemaMismatch) unless every schema field is present with
    /// its declared kind and no other field is present.
    void check_conforms(const FieldMap &fields) const;
    /// Throws Error(SchemaMismatch) if the filter references a field outside
    /// the schema.
    void check_filter(const filter::FilterExpression &expr) const;
};

struct DataSample {
    std::string   topic_name;
    FieldMap      fields;
    std::uint64_t publication_seq = 0;
    EndpointId    source_writer;

    bool operator==(const DataSample &) const = default;
};

enum class Reliability : std::uint8_t { BestEffort, Reliable };

struct Batching {
    std::size_t   max_samples = 1;
    sim::Duration max_delay   = 0;

    bool operator==(const Batching &) const = default;
};

struct QosProfile {
    std::set<std::string>       partitions; // empty = default partition
    Reliability                 reliability   = Reliability::Reliable;
    std::size_t                 history_depth = 1;
    std::optional<Batching>     batching;
    std::optional<std::uint8_t> dscp;

    /// Throws Error(InvalidOperation) on history_depth 0, batching
    /// max_samples 0, negative max_delay, or dscp > 63.
    void validate() const;

    bool operator==(const QosProfile &) const = default;
};

enum class EndpointKind : std::uint8_t { Writer, Reader };

/// What discovery knows about a remote (or local) writer or reader.
struct EndpointRecord {
    EndpointId                              endpoint_id;
    ParticipantId                           participant_id;
    DomainId                                domain_id = 0;
    EndpointKind                            kind      = EndpointKind::Writer;
    std::string                             topic_name;
    std::string                             type_name;
    std::set<std::string>                   partitions;
    std::optional<filter::FilterExpression> filter; // readers only
    std::string                             location; // host address
    Reliability                             reliability = Reliability::Reliable;

    bool operator==(const EndpointRecord &) const = default;
};

/// true iff writer and reader are in the same domain, carry the same topic
/// and type, and their partition sets intersect. An empty set stands for the
/// default partition "".
bool match_endpoints(const EndpointRecord &writer, const EndpointRecord &reader) noexcept;

struct Channel {
    filter::FilterExpression filter;
    std::string              multicast_address;
};

/// Samples from one writer travelling in a single network packet.
struct SampleBatch {
    EndpointId              writer_id;
    DomainId                domain_id = 0;
    std::string             topic_name;
    std::string             type_name;
    std::set<std::string>   partitions;
    Reliability             reliability = Reliability::Reliable;
    std::vector<DataSample> samples;

    bool operator==(const SampleBatch &) const = default;
};

/// Discovery frame: the full endpoint set of one participant, or its dispose.
struct Announcement {
    DomainId                    domain_id = 0;
    ParticipantId               participant_id;
    std::string                 address;
    bool                        disposed = false;
    std::vector<EndpointRecord> endpoints;

    bool operator==(const Announcement &) const = default;
};

} // namespace psdn::pubsub

#include "psdn/error.hpp"
#include "psdn/pubsub/types.hpp"

#include <algorithm>

namespace psdn::pubsub {

std::string discovery_group(DomainId domain) { return std::string(kMulticastPrefix) + "discovery." + std::to_string(domain); }

void Topic::check_conforms(const FieldMap &fields) const {
    for (const auto &[path, kind] : schema) {
        auto it = fields.find(path);
        if (it == fields.end()) {
            throw Error(ErrorCode::SchemaMismatch, "topic '" + name + "': sample lacks field '" + path + "'");
        }
        if (kind_of(it->second) != kind) {
            throw Error(ErrorCode::SchemaMismatch, "topic '" + name + "': field '" + path + "' should be " + std::string(to_string(kind)) +
                                                       ", got " + std::string(to_string(kind_of(it->second))));
        }
    }
    for (const auto &[path, value] : fields) {
        if (!schema.contains(path)) {
            throw Error(ErrorCode::SchemaMismatch, "topic '" + name + "': unexpected field '" + path + "'");
        }
    }
}

void Topic::check_filter(const filter::FilterExpression &expr) const {
    for (const auto &field : filter::referenced_fields(expr)) {
        if (!schema.contains(field.str())) {
            throw Error(ErrorCode::SchemaMismatch, "topic '" + name + "': filter references unknown field '" + field.str() + "'");
        }
    }
}

void QosProfile::validate() const {
    if (history_depth < 1) {
        throw Error(ErrorCode::InvalidOperation, "history_depth must be >= 1");
    }
    if (batching && batching->max_samples < 1) {
        throw Error(ErrorCode::InvalidOperation, "batching max_samples must be >= 1");
    }
    if (batching && batching->max_delay < 0) {
        throw Error(ErrorCode::InvalidOperation, "batching max_delay must be >= 0");
    }
    if (dscp && *dscp > 63) {
        throw Error(ErrorCode::InvalidOperation, "dscp out of range");
    }
}

bool match_endpoints(const EndpointRecord &writer, const EndpointRecord &reader) noexcept {
    if (writer.kind != EndpointKind::Writer || reader.kind != EndpointKind::Reader) {
        return false;
    }
    if (writer.domain_id != reader.domain_id || writer.topic_name != reader.topic_name || writer.type_name != reader.type_name) {
        return false;
    }
    static const std::set<std::string> kDefault{""};
    const auto &w = writer.partitions.empty() ? kDefault : writer.partitions;
    const auto &r = reader.partitions.empty() ? kDefault : reader.partitions;
    return std::any_of(w.begin(), w.end(), [&r](const std::string &p) { return r.contains(p); });
}

} // namespace psdn::pubsub

#pragma once

#include "psdn/dataplane/flow.hpp"
#include "psdn/dataplane/packet.hpp"

#include <json.hpp>

#include <string>
#include <vector>

// JSON forms of data-plane objects. Mediation samples carry these as string
// fields; topology files reuse the match and action forms.
//
// Decoders throw Error(ValidationError) on malformed input.
namespace psdn::controller::codec {

using Json = nlohmann::json;

Json                                to_json(const dataplane::FlowMatch &match);
dataplane::FlowMatch                match_from_json(const Json &j);
Json                                to_json(const dataplane::FlowAction &action);
dataplane::FlowAction               action_from_json(const Json &j);
Json                                to_json(const std::vector<dataplane::FlowAction> &actions);
std::vector<dataplane::FlowAction>  actions_from_json(const Json &j);
Json                                to_json(const std::vector<dataplane::FlowStats> &stats);
std::vector<dataplane::FlowStats>   stats_from_json(const Json &j);
Json                                to_json(const dataplane::Packet &packet);
dataplane::Packet                   packet_from_json(const Json &j);

Json  value_to_json(const Value &v);
Value value_from_json(const Json &j);

/// Parses text as JSON, mapping syntax errors to ValidationError.
Json parse(const std::string &text);

} // namespace psdn::controller::codec

#pragma once

#include "psdn/controller/apps.hpp"
#include "psdn/pubsub/types.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace psdn::harness {

using Json = nlohmann::json;

struct Settings {
    sim::Duration    control_latency_us       = 50;
    sim::Duration    discovery_period_us      = 0; // 0: triggered announcements only
    bool             proactive_routes         = false;
    bool             learning                 = true;
    sim::Duration    idle_check_period_us     = 0;
    sim::Duration    learning_idle_timeout_us = 0;
    pubsub::DomainId control_domain           = 250;
    sim::Duration    settle_time_us           = 10'000;
    std::uint64_t    event_budget             = 20'000'000;

    bool operator==(const Settings &) const = default;
};

struct PortDoc {
    std::string       node;
    dataplane::PortId port = 0;

    bool operator==(const PortDoc &) const = default;
};

struct SwitchDoc {
    std::string                    id;
    bool                           gateway = false;
    std::vector<dataplane::PortId> ports;
    dataplane::MissBehavior        miss_behavior     = dataplane::MissBehavior::ToController;
    bool                           multicast_capable = false;

    bool operator==(const SwitchDoc &) const = default;
};

struct LinkDoc {
    std::string   id;
    PortDoc       a;
    PortDoc       b;
    sim::Duration latency_us = 100;
    sim::Duration jitter_us  = 0;
    bool          drop       = false;

    bool operator==(const LinkDoc &) const = default;
};

struct DeviceDoc {
    std::string                     id;
    std::string                     address;
    PortDoc                         attach;
    sim::Duration                   latency_us = 10;
    sim::Duration                   jitter_us  = 0;
    std::optional<pubsub::DomainId> domain_id; // present: the device runs a participant
    std::string                     location;
    std::string                     description;

    bool operator==(const DeviceDoc &) const = default;
};

struct TopicDoc {
    std::string                      name;
    std::string                      type_name;
    std::map<std::string, FieldKind> schema;

    bool operator==(const TopicDoc &) const = default;
};

struct ChannelDoc {
    std::string filter;
    std::string address;

    bool operator==(const ChannelDoc &) const = default;
};

struct EndpointDoc {
    std::string                id;
    pubsub::EndpointKind       kind = pubsub::EndpointKind::Writer;
    std::string                device;
    std::string                topic;
    pubsub::QosProfile         qos;
    std::optional<std::string> filter;
    std::vector<ChannelDoc>    channels;

    bool operator==(const EndpointDoc &) const = default;
};

struct AppDoc {
    std::string                       id;
    std::vector<dataplane::FlowMatch> slice;

    bool operator==(const AppDoc &) const = default;
};

struct FloodDoc {
    sim::Duration window_us           = 100'000;
    std::uint64_t rate_threshold      = 100;
    int           mitigation_priority = 1000;
    bool          mitigate            = true;

    bool operator==(const FloodDoc &) const = default;
};

struct TopologyDoc {
    Settings                 settings;
    std::vector<SwitchDoc>   switches;
    std::vector<LinkDoc>     links;
    std::vector<DeviceDoc>   devices;
    std::vector<TopicDoc>    topics;
    std::vector<EndpointDoc> endpoints;
    std::vector<AppDoc>      apps;
    std::optional<FloodDoc>  flood_policy;

    const SwitchDoc   *find_switch(std::string_view id) const;
    const DeviceDoc   *find_device(std::string_view id) const;
    const TopicDoc    *find_topic(std::string_view name) const;
    const EndpointDoc *find_endpoint(std::string_view id) const;
    const LinkDoc     *find_link(std::string_view id) const;

    bool operator==(const TopologyDoc &) const = default;
};

enum class ActionKind : std::uint8_t { Publish, Flush, Announce, Mobility, LinkSet, Probe, Burst, FlowMod, RunUntil };

std::string_view to_string(ActionKind kind) noexcept;

struct Action {
    sim::SimTime at_us = 0;
    ActionKind   kind  = ActionKind::RunUntil;

    // publish / flush / announce
    std::string device;
    std::string writer;
    std::string topic;
    FieldMap    fields;
    // mobility
    std::string       to_switch;
    dataplane::PortId to_port = 0;
    // link_set
    std::string link;
    std::string state; // up | down | drop | nodrop
    // probe / burst
    std::string         src;
    std::string         dst;
    std::string         label;
    std::size_t         count       = 1;
    sim::Duration       interval_us = 0;
    std::size_t         size_bytes  = 64;
    dataplane::Protocol protocol    = dataplane::Protocol::Data;
    std::uint8_t        dscp        = 0;
    // flow_mod
    std::string        app;
    dataplane::FlowMod mod;

    bool operator==(const Action &) const = default;
};

struct ScenarioDoc {
    std::string         name;
    std::string         description;
    std::optional<sim::SimTime> end_us;
    std::vector<Action> actions;

    /// Time at which a run stops: the explicit end, the last run_until, or
    /// the last action plus the settle time.
    sim::SimTime end_time(const Settings &settings) const;

    bool operator==(const ScenarioDoc &) const = default;
};

/// Parsing checks shape and local constraints; ValidationError paths point
/// into the document (e.g. "links[2].a.switch").
TopologyDoc parse_topology(const Json &j);
ScenarioDoc parse_scenario(const Json &j, const TopologyDoc &topology);

Json to_json(const TopologyDoc &doc);
Json to_json(const ScenarioDoc &doc);

/// Cross-reference checks: ids resolve, ports free, link graph loop-free,
/// filters parse against schemas.
void validate(const TopologyDoc &doc);

/// Reads, parses and validates. Throws ValidationError (including for
/// unreadable files and JSON syntax errors).
TopologyDoc load_topology(const std::filesystem::path &path);
ScenarioDoc load_scenario(const std::filesystem::path &path, const TopologyDoc &topology);

/// A canned scenario: `<name>.topology.json` next to `<name>.scenario.json`.
struct CannedScenario {
    std::string           name;
    std::filesystem::path topology;
    std::filesystem::path scenario;
};

/// Directory the canned scenarios were installed to at build time.
std::filesystem::path default_scenario_dir();

/// Pairs found in `dir`, sorted by name.
std::vector<CannedScenario> canned_scenarios(const std::filesystem::path &dir);

} // namespace psdn::harness

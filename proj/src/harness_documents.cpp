#include "psdn/harness/documents.hpp"

#include "psdn/controller/codec.hpp"
#include "psdn/error.hpp"

#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace psdn::harness {

namespace codec = controller::codec;

namespace {

/// A JSON value plus its location in the document.
class Node {
public:
    Node(const Json &j, std::string path) : _j(j), _path(std::move(path)) {}

    const Json        &json() const noexcept { return _j; }
    const std::string &path() const noexcept { return _path; }

    [[noreturn]] void fail(const std::string &detail) const { throw ValidationError(_path, detail); }

    bool has(const char *key) const { return _j.is_object() && _j.contains(key); }

    Node at(const char *key) const {
        if (!_j.is_object()) fail("expected an object");
        if (!_j.contains(key)) fail(std::string("missing required field '") + key + "'");
        return {_j.at(key), child(key)};
    }

    std::optional<Node> opt(const char *key) const {
        if (!_j.is_object()) fail("expected an object");
        if (!_j.contains(key)) return std::nullopt;
        return Node(_j.at(key), child(key));
    }

    std::vector<Node> items() const {
        if (!_j.is_array()) fail("expected an array");
        std::vector<Node> out;
        for (std::size_t i = 0; i < _j.size(); ++i) out.emplace_back(_j[i], _path + "[" + std::to_string(i) + "]");
        return out;
    }

    void only(std::initializer_list<std::string_view> keys) const {
        if (!_j.is_object()) fail("expected an object");
        for (const auto &[k, v] : _j.items()) {
            if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
                Node(v, child(k)).fail("unknown field");
            }
        }
    }

    std::string text() const {
        if (!_j.is_string()) fail("expected a string");
        return _j.get<std::string>();
    }
    std::int64_t integer() const {
        if (!_j.is_number_integer()) fail("expected an integer");
        return _j.get<std::int64_t>();
    }
    std::int64_t non_negative() const {
        const auto v = integer();
        if (v < 0) fail("must not be negative");
        return v;
    }
    std::int64_t positive() const {
        const auto v = integer();
        if (v <= 0) fail("must be positive");
        return v;
    }
    bool boolean() const {
        if (!_j.is_boolean()) fail("expected a boolean");
        return _j.get<bool>();
    }

    template <class F> auto wrap(F &&fn) const -> decltype(fn()) {
        try {
            return fn();
        } catch (const ValidationError &e) {
            throw ValidationError(_path, e.detail());
        } catch (const Error &e) {
            fail(e.what());
        }
    }

private:
    std::string child(std::string_view key) const { return _path.empty() ? std::string(key) : _path + "." + std::string(key); }

    const Json &_j;
    std::string _path;
};

PortDoc parse_port(const Node &n) {
    n.only({"switch", "port"});
    const auto port = n.at("port").non_negative();
    return PortDoc{n.at("switch").text(), static_cast<dataplane::PortId>(port)};
}

Json port_json(const PortDoc &p) { return Json{{"switch", p.node}, {"port", p.port}}; }

dataplane::MissBehavior parse_miss(const Node &n) {
    const auto s = n.text();
    if (s == "to_controller") return dataplane::MissBehavior::ToController;
    if (s == "drop") return dataplane::MissBehavior::Drop;
    n.fail("expected 'to_controller' or 'drop'");
}

pubsub::QosProfile parse_qos(const Node &n) {
    n.only({"partitions", "reliability", "history_depth", "batching", "dscp"});
    pubsub::QosProfile q;
    if (auto p = n.opt("partitions")) {
        for (const auto &item : p->items()) q.partitions.insert(item.text());
    }
    if (auto r = n.opt("reliability")) {
        const auto s = r->text();
        if (s == "reliable") q.reliability = pubsub::Reliability::Reliable;
        else if (s == "best_effort") q.reliability = pubsub::Reliability::BestEffort;
        else r->fail("expected 'reliable' or 'best_effort'");
    }
    if (auto h = n.opt("history_depth")) q.history_depth = static_cast<std::size_t>(h->positive());
    if (auto b = n.opt("batching")) {
        b->only({"max_samples", "max_delay_us"});
        q.batching = pubsub::Batching{static_cast<std::size_t>(b->at("max_samples").positive()), b->at("max_delay_us").non_negative()};
    }
    if (auto d = n.opt("dscp")) {
        const auto v = d->non_negative();
        if (v > 63) d->fail("dscp must be in 0..63");
        q.dscp = static_cast<std::uint8_t>(v);
    }
    return q;
}

Json qos_json(const pubsub::QosProfile &q) {
    Json j{{"partitions", q.partitions},
           {"reliability", q.reliability == pubsub::Reliability::Reliable ? "reliable" : "best_effort"},
           {"history_depth", q.history_depth}};
    if (q.batching) j["batching"] = Json{{"max_samples", q.batching->max_samples}, {"max_delay_us", q.batching->max_delay}};
    if (q.dscp) j["dscp"] = *q.dscp;
    return j;
}

Settings parse_settings(const Node &n) {
    n.only({"control_latency_us", "discovery_period_us", "proactive_routes", "learning", "idle_check_period_us",
            "learning_idle_timeout_us", "control_domain", "settle_time_us", "event_budget"});
    Settings s;
    if (auto v = n.opt("control_latency_us")) s.control_latency_us = v->non_negative();
    if (auto v = n.opt("discovery_period_us")) s.discovery_period_us = v->non_negative();
    if (auto v = n.opt("proactive_routes")) s.proactive_routes = v->boolean();
    if (auto v = n.opt("learning")) s.learning = v->boolean();
    if (auto v = n.opt("idle_check_period_us")) s.idle_check_period_us = v->non_negative();
    if (auto v = n.opt("learning_idle_timeout_us")) s.learning_idle_timeout_us = v->non_negative();
    if (auto v = n.opt("control_domain")) s.control_domain = static_cast<pubsub::DomainId>(v->non_negative());
    if (auto v = n.opt("settle_time_us")) s.settle_time_us = v->non_negative();
    if (auto v = n.opt("event_budget")) s.event_budget = static_cast<std::uint64_t>(v->positive());
    return s;
}

Json settings_json(const Settings &s) {
    return Json{{"control_latency_us", s.control_latency_us},
                {"discovery_period_us", s.discovery_period_us},
                {"proactive_routes", s.proactive_routes},
                {"learning", s.learning},
                {"idle_check_period_us", s.idle_check_period_us},
                {"learning_idle_timeout_us", s.learning_idle_timeout_us},
                {"control_domain", s.control_domain},
                {"settle_time_us", s.settle_time_us},
                {"event_budget", s.event_budget}};
}

Value coerce(const Node &n, FieldKind kind) {
    const auto &j = n.json();
    switch (kind) {
    case FieldKind::Integer:
        if (!j.is_number_integer()) n.fail("expected an integer");
        return j.get<std::int64_t>();
    case FieldKind::Decimal:
        if (!j.is_number()) n.fail("expected a number");
        return j.get<double>();
    case FieldKind::String:
        if (!j.is_string()) n.fail("expected a string");
        return j.get<std::string>();
    }
    n.fail("bad field kind");
}

const std::set<std::string> kBuiltinApps = {"learning-forwarder", "discovery-proxy", "mobility-manager", "flood-monitor", "proactive-router"};

} // namespace

// ---- TopologyDoc ---------------------------------------------------------

template <class T> static const T *find_by_id(const std::vector<T> &items, std::string_view id) {
    for (const auto &item : items) {
        if (item.id == id) return &item;
    }
    return nullptr;
}

const SwitchDoc   *TopologyDoc::find_switch(std::string_view id) const { return find_by_id(switches, id); }
const DeviceDoc   *TopologyDoc::find_device(std::string_view id) const { return find_by_id(devices, id); }
const EndpointDoc *TopologyDoc::find_endpoint(std::string_view id) const { return find_by_id(endpoints, id); }
const LinkDoc     *TopologyDoc::find_link(std::string_view id) const { return find_by_id(links, id); }

const TopicDoc *TopologyDoc::find_topic(std::string_view name) const {
    for (const auto &t : topics) {
        if (t.name == name) return &t;
    }
    return nullptr;
}

TopologyDoc parse_topology(const Json &j) {
    const Node root(j, "");
    root.only({"settings", "switches", "links", "devices", "topics", "endpoints", "apps", "flood_policy"});
    TopologyDoc doc;
    if (auto s = root.opt("settings")) doc.settings = parse_settings(*s);

    for (const auto &n : root.at("switches").items()) {
        n.only({"id", "kind", "ports", "miss_behavior", "multicast_capable"});
        SwitchDoc sw;
        sw.id = n.at("id").text();
        if (auto k = n.opt("kind")) {
            const auto kind = k->text();
            if (kind != "gateway" && kind != "switch") k->fail("expected 'gateway' or 'switch'");
            sw.gateway = kind == "gateway";
        }
        for (const auto &p : n.at("ports").items()) sw.ports.push_back(static_cast<dataplane::PortId>(p.non_negative()));
        if (auto m = n.opt("miss_behavior")) sw.miss_behavior = parse_miss(*m);
        if (auto m = n.opt("multicast_capable")) sw.multicast_capable = m->boolean();
        doc.switches.push_back(std::move(sw));
    }
    if (auto links = root.opt("links")) {
        for (const auto &n : links->items()) {
            n.only({"id", "a", "b", "latency_us", "jitter_us", "drop"});
            LinkDoc l;
            l.id = n.at("id").text();
            l.a  = parse_port(n.at("a"));
            l.b  = parse_port(n.at("b"));
            if (auto v = n.opt("latency_us")) l.latency_us = v->non_negative();
            if (auto v = n.opt("jitter_us")) l.jitter_us = v->non_negative();
            if (auto v = n.opt("drop")) l.drop = v->boolean();
            doc.links.push_back(std::move(l));
        }
    }
    if (auto devices = root.opt("devices")) {
        for (const auto &n : devices->items()) {
            n.only({"id", "address", "attach", "latency_us", "jitter_us", "domain_id", "location", "description"});
            DeviceDoc d;
            d.id      = n.at("id").text();
            d.address = n.at("address").text();
            d.attach  = parse_port(n.at("attach"));
            if (auto v = n.opt("latency_us")) d.latency_us = v->non_negative();
            if (auto v = n.opt("jitter_us")) d.jitter_us = v->non_negative();
            if (auto v = n.opt("domain_id")) d.domain_id = static_cast<pubsub::DomainId>(v->non_negative());
            if (auto v = n.opt("location")) d.location = v->text();
            if (auto v = n.opt("description")) d.description = v->text();
            doc.devices.push_back(std::move(d));
        }
    }
    if (auto topics = root.opt("topics")) {
        for (const auto &n : topics->items()) {
            n.only({"name", "type_name", "schema"});
            TopicDoc t;
            t.name      = n.at("name").text();
            t.type_name = n.has("type_name") ? n.at("type_name").text() : t.name;
            const auto schema = n.at("schema");
            if (!schema.json().is_object()) schema.fail("expected an object");
            for (const auto &[field, kind] : schema.json().items()) {
                const Node k(kind, schema.path() + "." + field);
                t.schema[field] = k.wrap([&] { return parse_field_kind(k.text()); });
            }
            doc.topics.push_back(std::move(t));
        }
    }
    if (auto endpoints = root.opt("endpoints")) {
        for (const auto &n : endpoints->items()) {
            n.only({"id", "kind", "device", "topic", "qos", "filter", "channels"});
            EndpointDoc e;
            e.id          = n.at("id").text();
            const auto k  = n.at("kind");
            const auto ks = k.text();
            if (ks != "writer" && ks != "reader") k.fail("expected 'writer' or 'reader'");
            e.kind   = ks == "writer" ? pubsub::EndpointKind::Writer : pubsub::EndpointKind::Reader;
            e.device = n.at("device").text();
            e.topic  = n.at("topic").text();
            if (auto q = n.opt("qos")) e.qos = parse_qos(*q);
            if (auto f = n.opt("filter")) e.filter = f->text();
            if (auto c = n.opt("channels")) {
                for (const auto &ch : c->items()) {
                    ch.only({"filter", "address"});
                    e.channels.push_back(ChannelDoc{ch.at("filter").text(), ch.at("address").text()});
                }
            }
            doc.endpoints.push_back(std::move(e));
        }
    }
    if (auto apps = root.opt("apps")) {
        for (const auto &n : apps->items()) {
            n.only({"id", "slice"});
            AppDoc a;
            a.id = n.at("id").text();
            for (const auto &m : n.at("slice").items()) a.slice.push_back(m.wrap([&] { return codec::match_from_json(m.json()); }));
            doc.apps.push_back(std::move(a));
        }
    }
    if (auto f = root.opt("flood_policy")) {
        f->only({"window_us", "rate_threshold", "mitigation_priority", "mitigate"});
        FloodDoc fd;
        fd.window_us      = f->at("window_us").positive();
        fd.rate_threshold = static_cast<std::uint64_t>(f->at("rate_threshold").positive());
        if (auto v = f->opt("mitigation_priority")) fd.mitigation_priority = static_cast<int>(v->integer());
        if (auto v = f->opt("mitigate")) fd.mitigate = v->boolean();
        doc.flood_policy = fd;
    }
    validate(doc);
    return doc;
}

Json to_json(const TopologyDoc &doc) {
    Json j;
    j["settings"] = settings_json(doc.settings);
    j["switches"] = Json::array();
    for (const auto &s : doc.switches) {
        j["switches"].push_back(Json{{"id", s.id},
                                     {"kind", s.gateway ? "gateway" : "switch"},
                                     {"ports", s.ports},
                                     {"miss_behavior", s.miss_behavior == dataplane::MissBehavior::ToController ? "to_controller" : "drop"},
                                     {"multicast_capable", s.multicast_capable}});
    }
    j["links"] = Json::array();
    for (const auto &l : doc.links) {
        j["links"].push_back(Json{{"id", l.id}, {"a", port_json(l.a)}, {"b", port_json(l.b)}, {"latency_us", l.latency_us}, {"jitter_us", l.jitter_us}, {"drop", l.drop}});
    }
    j["devices"] = Json::array();
    for (const auto &d : doc.devices) {
        Json dj{{"id", d.id}, {"address", d.address}, {"attach", port_json(d.attach)}, {"latency_us", d.latency_us},
                {"jitter_us", d.jitter_us}, {"location", d.location}, {"description", d.description}};
        if (d.domain_id) dj["domain_id"] = *d.domain_id;
        j["devices"].push_back(std::move(dj));
    }
    j["topics"] = Json::array();
    for (const auto &t : doc.topics) {
        Json schema = Json::object();
        for (const auto &[f, k] : t.schema) schema[f] = std::string(to_string(k));
        j["topics"].push_back(Json{{"name", t.name}, {"type_name", t.type_name}, {"schema", schema}});
    }
    j["endpoints"] = Json::array();
    for (const auto &e : doc.endpoints) {
        Json ej{{"id", e.id}, {"kind", e.kind == pubsub::EndpointKind::Writer ? "writer" : "reader"}, {"device", e.device}, {"topic", e.topic}, {"qos", qos_json(e.qos)}};
        if (e.filter) ej["filter"] = *e.filter;
        if (!e.channels.empty()) {
            ej["channels"] = Json::array();
            for (const auto &c : e.channels) ej["channels"].push_back(Json{{"filter", c.filter}, {"address", c.address}});
        }
        j["endpoints"].push_back(std::move(ej));
    }
    j["apps"] = Json::array();
    for (const auto &a : doc.apps) {
        Json slice = Json::array();
        for (const auto &m : a.slice) slice.push_back(codec::to_json(m));
        j["apps"].push_back(Json{{"id", a.id}, {"slice", slice}});
    }
    if (doc.flood_policy) {
        const auto &f     = *doc.flood_policy;
        j["flood_policy"] = Json{{"window_us", f.window_us}, {"rate_threshold", f.rate_threshold}, {"mitigation_priority", f.mitigation_priority}, {"mitigate", f.mitigate}};
    }
    return j;
}

void validate(const TopologyDoc &doc) {
    auto fail = [](const std::string &path, const std::string &detail) { throw ValidationError(path, detail); };
    auto at   = [](const char *section, std::size_t i) { return std::string(section) + "[" + std::to_string(i) + "]"; };

    if (doc.switches.empty()) fail("switches", "at least one switch is required");

    std::set<std::string>                         node_ids;
    std::map<std::string, std::set<dataplane::PortId>> free_ports;
    for (std::size_t i = 0; i < doc.switches.size(); ++i) {
        const auto &s = doc.switches[i];
        if (s.id.empty()) fail(at("switches", i) + ".id", "must not be empty");
        if (!node_ids.insert(s.id).second) fail(at("switches", i) + ".id", "duplicate id '" + s.id + "'");
        if (s.ports.empty()) fail(at("switches", i) + ".ports", "at least one port is required");
        auto &ports = free_ports[s.id];
        for (auto p : s.ports) {
            if (!ports.insert(p).second) fail(at("switches", i) + ".ports", "duplicate port " + std::to_string(p));
        }
    }

    auto claim = [&](const PortDoc &p, const std::string &path) {
        if (!doc.find_switch(p.node)) fail(path + ".switch", "unknown switch '" + p.node + "'");
        auto &ports = free_ports[p.node];
        const auto *sw = doc.find_switch(p.node);
        if (std::find(sw->ports.begin(), sw->ports.end(), p.port) == sw->ports.end()) {
            fail(path + ".port", "switch '" + p.node + "' has no port " + std::to_string(p.port));
        }
        if (!ports.erase(p.port)) fail(path + ".port", "port " + p.node + ":" + std::to_string(p.port) + " is already connected");
    };

    // Union-find over switches to reject cycles.
    std::map<std::string, std::string> parent;
    for (const auto &s : doc.switches) parent[s.id] = s.id;
    std::function<std::string(const std::string &)> root = [&](const std::string &x) {
        return parent[x] == x ? x : parent[x] = root(parent[x]);
    };

    std::set<std::string> link_ids;
    for (std::size_t i = 0; i < doc.links.size(); ++i) {
        const auto &l    = doc.links[i];
        const auto  path = at("links", i);
        if (l.id.empty()) fail(path + ".id", "must not be empty");
        if (!link_ids.insert(l.id).second) fail(path + ".id", "duplicate link id '" + l.id + "'");
        claim(l.a, path + ".a");
        claim(l.b, path + ".b");
        const auto ra = root(l.a.node);
        const auto rb = root(l.b.node);
        if (ra == rb) fail(path, "link '" + l.id + "' closes a loop");
        parent[ra] = rb;
    }

    std::set<std::string> addresses;
    for (std::size_t i = 0; i < doc.devices.size(); ++i) {
        const auto &d    = doc.devices[i];
        const auto  path = at("devices", i);
        if (d.id.empty()) fail(path + ".id", "must not be empty");
        if (!node_ids.insert(d.id).second) fail(path + ".id", "duplicate id '" + d.id + "'");
        if (d.address.empty() || pubsub::is_multicast(d.address) || d.address.starts_with("ctl:")) {
            fail(path + ".address", "address must be a non-empty unicast address");
        }
        if (!addresses.insert(d.address).second) fail(path + ".address", "duplicate address '" + d.address + "'");
        if (link_ids.contains("access:" + d.id)) fail(path + ".id", "clashes with link 'access:" + d.id + "'");
        claim(d.attach, path + ".attach");
        if (d.domain_id && *d.domain_id == doc.settings.control_domain) {
            fail(path + ".domain_id", "domain " + std::to_string(*d.domain_id) + " is reserved for the controller");
        }
    }

    std::set<std::string> topic_names;
    for (std::size_t i = 0; i < doc.topics.size(); ++i) {
        const auto &t = doc.topics[i];
        if (t.name.empty()) fail(at("topics", i) + ".name", "must not be empty");
        if (!topic_names.insert(t.name).second) fail(at("topics", i) + ".name", "duplicate topic '" + t.name + "'");
        if (t.schema.empty()) fail(at("topics", i) + ".schema", "schema must not be empty");
    }

    std::set<std::string> endpoint_ids;
    for (std::size_t i = 0; i < doc.endpoints.size(); ++i) {
        const auto &e    = doc.endpoints[i];
        const auto  path = at("endpoints", i);
        if (e.id.empty()) fail(path + ".id", "must not be empty");
        if (!endpoint_ids.insert(e.id).second) fail(path + ".id", "duplicate endpoint id '" + e.id + "'");
        const auto *dev = doc.find_device(e.device);
        if (!dev) fail(path + ".device", "unknown device '" + e.device + "'");
        if (!dev->domain_id) fail(path + ".device", "device '" + e.device + "' has no domain_id");
        const auto *topic = doc.find_topic(e.topic);
        if (!topic) fail(path + ".topic", "unknown topic '" + e.topic + "'");
        const pubsub::Topic t{topic->name, topic->type_name, topic->schema};
        try {
            e.qos.validate();
        } catch (const Error &err) {
            fail(path + ".qos", err.what());
        }
        auto check_filter = [&](const std::string &text, const std::string &fpath) {
            try {
                t.check_filter(filter::FilterExpression::parse(text));
            } catch (const Error &err) {
                fail(fpath, err.what());
            }
        };
        if (e.filter) {
            if (e.kind != pubsub::EndpointKind::Reader) fail(path + ".filter", "only readers take a filter");
            check_filter(*e.filter, path + ".filter");
        }
        if (!e.channels.empty()) {
            if (e.kind != pubsub::EndpointKind::Writer) fail(path + ".channels", "only writers take channels");
            if (e.qos.batching) fail(path + ".channels", "multichannel writers cannot batch");
            std::set<std::string> seen;
            for (std::size_t c = 0; c < e.channels.size(); ++c) {
                const auto cpath = path + ".channels[" + std::to_string(c) + "]";
                check_filter(e.channels[c].filter, cpath + ".filter");
                if (!pubsub::is_multicast(e.channels[c].address)) fail(cpath + ".address", "channel address must start with 'mc:'");
                if (!seen.insert(e.channels[c].address).second) fail(cpath + ".address", "duplicate channel address");
            }
        }
    }

    std::set<std::string> app_ids;
    for (std::size_t i = 0; i < doc.apps.size(); ++i) {
        const auto &a = doc.apps[i];
        if (a.id.empty()) fail(at("apps", i) + ".id", "must not be empty");
        if (kBuiltinApps.contains(a.id)) fail(at("apps", i) + ".id", "'" + a.id + "' is a built-in app");
        if (!app_ids.insert(a.id).second) fail(at("apps", i) + ".id", "duplicate app '" + a.id + "'");
        if (a.slice.empty()) fail(at("apps", i) + ".slice", "slice needs at least one template");
    }
}

// ---- ScenarioDoc ---------------------------------------------------------

std::string_view to_string(ActionKind kind) noexcept {
    switch (kind) {
    case ActionKind::Publish: return "publish";
    case ActionKind::Flush: return "flush";
    case ActionKind::Announce: return "announce";
    case ActionKind::Mobility: return "mobility";
    case ActionKind::LinkSet: return "link_set";
    case ActionKind::Probe: return "probe";
    case ActionKind::Burst: return "burst";
    case ActionKind::FlowMod: return "flow_mod";
    case ActionKind::RunUntil: return "run_until";
    }
    return "unknown";
}

sim::SimTime ScenarioDoc::end_time(const Settings &settings) const {
    if (end_us) return *end_us;
    sim::SimTime end = 0;
    bool         explicit_end = false;
    for (const auto &a : actions) {
        if (a.kind == ActionKind::RunUntil) {
            end          = std::max(end, a.at_us);
            explicit_end = true;
        }
    }
    if (explicit_end) return end;
    sim::SimTime last = 0;
    for (const auto &a : actions) {
        last = std::max(last, a.kind == ActionKind::Burst ? a.at_us + a.interval_us * static_cast<sim::Duration>(a.count - 1) : a.at_us);
    }
    return last + settings.settle_time_us;
}

ScenarioDoc parse_scenario(const Json &j, const TopologyDoc &topo) {
    const Node root(j, "");
    root.only({"name", "description", "end_us", "actions"});
    ScenarioDoc doc;
    if (auto v = root.opt("name")) doc.name = v->text();
    if (auto v = root.opt("description")) doc.description = v->text();
    if (auto v = root.opt("end_us")) doc.end_us = v->non_negative();

    const auto actions = root.opt("actions");
    sim::SimTime previous = 0;
    for (const auto &n : actions ? actions->items() : std::vector<Node>{}) {
        Action a;
        a.at_us = n.at("at_us").non_negative();
        if (a.at_us < previous) n.at("at_us").fail("action times must be nondecreasing (previous " + std::to_string(previous) + ")");
        previous = a.at_us;

        const auto kind = n.at("action");
        const auto name = kind.text();
        auto device_ref = [&](const char *key) {
            const auto f  = n.at(key);
            const auto id = f.text();
            if (!topo.find_device(id)) f.fail("unknown device '" + id + "'");
            return id;
        };

        if (name == "publish") {
            a.kind = ActionKind::Publish;
            n.only({"at_us", "action", "device", "topic", "writer", "fields"});
            const EndpointDoc *writer = nullptr;
            if (auto w = n.opt("writer")) {
                a.writer = w->text();
                writer   = topo.find_endpoint(a.writer);
                if (!writer || writer->kind != pubsub::EndpointKind::Writer) w->fail("unknown writer '" + a.writer + "'");
            } else {
                a.device = device_ref("device");
                a.topic  = n.at("topic").text();
                for (const auto &e : topo.endpoints) {
                    if (e.kind == pubsub::EndpointKind::Writer && e.device == a.device && e.topic == a.topic) {
                        writer = &e;
                        break;
                    }
                }
                if (!writer) n.fail("device '" + a.device + "' has no writer on topic '" + a.topic + "'");
                a.writer = writer->id;
            }
            a.device = writer->device;
            a.topic  = writer->topic;
            const auto *topic  = topo.find_topic(a.topic);
            const auto  fields = n.at("fields");
            if (!fields.json().is_object()) fields.fail("expected an object");
            for (const auto &[field, value] : fields.json().items()) {
                const Node v(value, fields.path() + "." + field);
                auto       it = topic->schema.find(field);
                if (it == topic->schema.end()) v.fail("field not in topic '" + a.topic + "' schema");
                a.fields[field] = coerce(v, it->second);
            }
            for (const auto &[field, k] : topic->schema) {
                if (!a.fields.contains(field)) fields.fail("missing field '" + field + "'");
            }
        } else if (name == "flush" || name == "announce") {
            a.kind = name == "flush" ? ActionKind::Flush : ActionKind::Announce;
            if (a.kind == ActionKind::Flush) {
                n.only({"at_us", "action", "writer"});
                a.writer       = n.at("writer").text();
                const auto *we = topo.find_endpoint(a.writer);
                if (!we || we->kind != pubsub::EndpointKind::Writer) n.at("writer").fail("unknown writer '" + a.writer + "'");
                if (!we->qos.batching) n.at("writer").fail("writer '" + a.writer + "' does not batch");
                a.device = we->device;
            } else {
                n.only({"at_us", "action", "device"});
                a.device = device_ref("device");
                if (!topo.find_device(a.device)->domain_id) n.at("device").fail("device '" + a.device + "' has no participant");
            }
        } else if (name == "mobility") {
            a.kind = ActionKind::Mobility;
            n.only({"at_us", "action", "device", "switch", "port"});
            a.device    = device_ref("device");
            a.to_switch = n.at("switch").text();
            const auto *sw = topo.find_switch(a.to_switch);
            if (!sw) n.at("switch").fail("unknown switch '" + a.to_switch + "'");
            a.to_port = static_cast<dataplane::PortId>(n.at("port").non_negative());
            if (std::find(sw->ports.begin(), sw->ports.end(), a.to_port) == sw->ports.end()) {
                n.at("port").fail("switch '" + a.to_switch + "' has no port " + std::to_string(a.to_port));
            }
        } else if (name == "link_set") {
            a.kind = ActionKind::LinkSet;
            n.only({"at_us", "action", "link", "state"});
            a.link = n.at("link").text();
            const bool access = a.link.starts_with("access:") && topo.find_device(a.link.substr(7));
            if (!topo.find_link(a.link) && !access) n.at("link").fail("unknown link '" + a.link + "'");
            a.state = n.at("state").text();
            if (a.state != "up" && a.state != "down" && a.state != "drop" && a.state != "nodrop") {
                n.at("state").fail("expected 'up', 'down', 'drop' or 'nodrop'");
            }
        } else if (name == "probe" || name == "burst") {
            a.kind = name == "probe" ? ActionKind::Probe : ActionKind::Burst;
            if (a.kind == ActionKind::Probe) n.only({"at_us", "action", "src", "dst", "label", "size_bytes", "dscp"});
            else n.only({"at_us", "action", "src", "dst", "label", "size_bytes", "dscp", "count", "interval_us", "protocol"});
            a.src = device_ref("src");
            a.dst = device_ref("dst");
            if (auto v = n.opt("label")) a.label = v->text();
            if (auto v = n.opt("size_bytes")) {
                const auto size = v->non_negative();
                if (size < static_cast<std::int64_t>(dataplane::kHeaderBytes)) v->fail("size must be at least the 32-byte header");
                a.size_bytes = static_cast<std::size_t>(size);
            }
            if (auto v = n.opt("dscp")) {
                const auto d = v->non_negative();
                if (d > 63) v->fail("dscp must be in 0..63");
                a.dscp = static_cast<std::uint8_t>(d);
            }
            if (auto v = n.opt("count")) a.count = static_cast<std::size_t>(v->positive());
            if (auto v = n.opt("interval_us")) a.interval_us = v->non_negative();
            if (auto v = n.opt("protocol")) a.protocol = v->wrap([&] { return dataplane::parse_protocol(v->text()); });
        } else if (name == "flow_mod") {
            a.kind = ActionKind::FlowMod;
            n.only({"at_us", "action", "app", "switch", "command", "priority", "match", "actions", "idle_timeout_us"});
            a.app = n.at("app").text();
            if (!find_by_id(topo.apps, a.app)) n.at("app").fail("unknown app '" + a.app + "'");
            a.to_switch = n.at("switch").text();
            if (!topo.find_switch(a.to_switch)) n.at("switch").fail("unknown switch '" + a.to_switch + "'");
            const auto cmd = n.at("command");
            a.mod.command  = cmd.wrap([&] { return dataplane::parse_flow_command(cmd.text()); });
            if (auto v = n.opt("priority")) a.mod.priority = static_cast<int>(v->integer());
            if (auto v = n.opt("match")) a.mod.match = v->wrap([&] { return codec::match_from_json(v->json()); });
            if (auto v = n.opt("actions")) a.mod.actions = v->wrap([&] { return codec::actions_from_json(v->json()); });
            if (auto v = n.opt("idle_timeout_us")) {
                if (const auto t = v->non_negative(); t > 0) a.mod.idle_timeout = t;
            }
        } else if (name == "run_until") {
            a.kind = ActionKind::RunUntil;
            n.only({"at_us", "action"});
        } else {
            kind.fail("unknown action '" + name + "'");
        }
        doc.actions.push_back(std::move(a));
    }
    if (doc.end_us && !doc.actions.empty() && *doc.end_us < doc.actions.back().at_us) {
        root.at("end_us").fail("end precedes the last action");
    }
    return doc;
}

Json to_json(const ScenarioDoc &doc) {
    Json j{{"name", doc.name}, {"description", doc.description}, {"actions", Json::array()}};
    if (doc.end_us) j["end_us"] = *doc.end_us;
    for (const auto &a : doc.actions) {
        Json aj{{"at_us", a.at_us}, {"action", std::string(to_string(a.kind))}};
        switch (a.kind) {
        case ActionKind::Publish: {
            aj["writer"] = a.writer;
            Json fields  = Json::object();
            for (const auto &[k, v] : a.fields) fields[k] = codec::value_to_json(v);
            aj["fields"] = fields;
            break;
        }
        case ActionKind::Flush: aj["writer"] = a.writer; break;
        case ActionKind::Announce: aj["device"] = a.device; break;
        case ActionKind::Mobility:
            aj["device"] = a.device;
            aj["switch"] = a.to_switch;
            aj["port"]   = a.to_port;
            break;
        case ActionKind::LinkSet:
            aj["link"]  = a.link;
            aj["state"] = a.state;
            break;
        case ActionKind::Probe:
        case ActionKind::Burst:
            aj["src"]        = a.src;
            aj["dst"]        = a.dst;
            aj["label"]      = a.label;
            aj["size_bytes"] = a.size_bytes;
            aj["dscp"]       = a.dscp;
            if (a.kind == ActionKind::Burst) {
                aj["count"]       = a.count;
                aj["interval_us"] = a.interval_us;
                aj["protocol"]    = std::string(to_string(a.protocol));
            }
            break;
        case ActionKind::FlowMod:
            aj["app"]             = a.app;
            aj["switch"]          = a.to_switch;
            aj["command"]         = std::string(to_string(a.mod.command));
            aj["priority"]        = a.mod.priority;
            aj["match"]           = codec::to_json(a.mod.match);
            aj["actions"]         = codec::to_json(a.mod.actions);
            aj["idle_timeout_us"] = a.mod.idle_timeout.value_or(0);
            break;
        case ActionKind::RunUntil: break;
        }
        j["actions"].push_back(std::move(aj));
    }
    return j;
}

namespace {
Json read_json(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path.string(), "cannot open file");
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return Json::parse(buf.str());
    } catch (const nlohmann::json::parse_error &e) {
        throw ValidationError(path.string(), e.what());
    }
}
} // namespace

TopologyDoc load_topology(const std::filesystem::path &path) { return parse_topology(read_json(path)); }

ScenarioDoc load_scenario(const std::filesystem::path &path, const TopologyDoc &topology) {
    auto doc = parse_scenario(read_json(path), topology);
    if (doc.name.empty()) doc.name = path.stem().string();
    return doc;
}

std::filesystem::path default_scenario_dir() { return PSDN_SCENARIO_DIR; }

std::vector<CannedScenario> canned_scenarios(const std::filesystem::path &dir) {
    constexpr std::string_view kSuffix = ".scenario.json";
    std::vector<CannedScenario> out;
    std::error_code             ec;
    for (const auto &entry : std::filesystem::directory_iterator(dir, ec)) {
        const auto file = entry.path().filename().string();
        if (!file.ends_with(kSuffix)) continue;
        const auto name     = file.substr(0, file.size() - kSuffix.size());
        const auto topology = dir / (name + ".topology.json");
        if (std::filesystem::exists(topology)) out.push_back(CannedScenario{name, topology, entry.path()});
    }
    std::sort(out.begin(), out.end(), [](const auto &a, const auto &b) { return a.name < b.name; });
    return out;
}

} // namespace psdn::harness

// Acceptance checks: one line per criterion, non-zero exit if any fails.

#include "psdn/error.hpp"
#include "psdn/harness/report.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

namespace {

using namespace psdn;
using namespace psdn::harness;
using dataplane::FlowAction;
using dataplane::FlowMatch;
using dataplane::FlowMod;
using dataplane::ModResult;
using dataplane::Packet;
using dataplane::PortId;
using dataplane::Protocol;

struct Outcome {
    bool        pass = true;
    std::string detail;
};

/// Collects failures; the first few are kept for the report line.
class Check {
public:
    void expect(bool ok, const std::string &what) {
        if (ok) return;
        ++_failures;
        if (_failures <= 3) _messages.push_back(what);
    }
    void note(const std::string &info) { _notes.push_back(info); }

    Outcome outcome() const {
        std::string detail;
        const auto &parts = _failures ? _messages : _notes;
        for (const auto &p : parts) detail += (detail.empty() ? "" : "; ") + p;
        if (_failures > 3) detail += "; +" + std::to_string(_failures - 3) + " more";
        return {_failures == 0, detail};
    }

private:
    std::size_t              _failures = 0;
    std::vector<std::string> _messages;
    std::vector<std::string> _notes;
};

std::pair<TopologyDoc, ScenarioDoc> canned(const std::string &name) {
    const auto dir  = default_scenario_dir();
    auto       topo = load_topology(dir / (name + ".topology.json"));
    auto       scen = load_scenario(dir / (name + ".scenario.json"), topo);
    return {std::move(topo), std::move(scen)};
}

std::string str(const Value &v) {
    std::ostringstream out;
    std::visit([&](const auto &x) { out << x; }, v);
    return out.str();
}

std::int64_t temperature(const FieldMap &fields) { return std::get<std::int64_t>(fields.at("temperature")); }

/// Publication order of one writer's publish actions; seq i+1 is the i-th.
std::vector<FieldMap> published(const ScenarioDoc &scen, const std::string &writer) {
    std::vector<FieldMap> out;
    for (const auto &a : scen.actions) {
        if (a.kind == ActionKind::Publish && a.writer == writer) out.push_back(a.fields);
    }
    return out;
}

std::multiset<std::string> field_multiset(const std::vector<DeliveryRecord> &records) {
    std::multiset<std::string> out;
    for (const auto &r : records) {
        std::string key;
        for (const auto &[k, v] : r.fields) key += k + "=" + str(v) + ";";
        out.insert(key);
    }
    return out;
}

// ---- independent data-plane oracles --------------------------------------

bool oracle_matches(const FlowMatch &m, const Packet &p, PortId in_port) {
    if (m.in_port && *m.in_port != in_port) return false;
    if (m.src_addr && *m.src_addr != p.src_addr) return false;
    if (m.dst_addr && *m.dst_addr != p.dst_addr) return false;
    if (m.protocol && *m.protocol != p.protocol) return false;
    if (m.dscp && *m.dscp != p.dscp) return false;
    if (m.payload_keyword) {
        const auto *batch = std::get_if<pubsub::SampleBatch>(&p.payload);
        if (!batch) return false;
        bool any = false;
        for (const auto &s : batch->samples) {
            auto it = s.fields.find(m.payload_keyword->field_path);
            any |= it != s.fields.end() && it->second == m.payload_keyword->value;
        }
        if (!any) return false;
    }
    return true;
}

bool oracle_subsumes(const FlowMatch &t, const FlowMatch &m) {
    auto same = [](const auto &a, const auto &b) { return !a || a == b; };
    return same(t.in_port, m.in_port) && same(t.src_addr, m.src_addr) && same(t.dst_addr, m.dst_addr) && same(t.protocol, m.protocol) &&
           same(t.dscp, m.dscp) && same(t.payload_keyword, m.payload_keyword);
}

struct ShadowEntry {
    int                     priority = 0;
    FlowMatch               match;
    std::vector<FlowAction> actions;
    std::uint64_t           order   = 0;
    std::uint64_t           packets = 0;
    std::uint64_t           bytes   = 0;
};

/// Brute force: every entry, highest priority first, earliest install first.
ShadowEntry *brute_force(std::vector<ShadowEntry> &table, const Packet &p, PortId in_port) {
    std::vector<ShadowEntry *> sorted;
    for (auto &e : table) sorted.push_back(&e);
    std::sort(sorted.begin(), sorted.end(), [](const auto *a, const auto *b) {
        return a->priority != b->priority ? a->priority > b->priority : a->order < b->order;
    });
    for (auto *e : sorted) {
        if (oracle_matches(e->match, p, in_port)) return e;
    }
    return nullptr;
}

/// Replays every table mutation and lookup into shadow tables and counts
/// hits there, independently of the switch's own counters.
class ReplayOracle : public dataplane::SwitchObserver {
public:
    explicit ReplayOracle(const dataplane::Network &network) {
        for (const auto *sw : network.switches()) {
            auto &shadow = _tables[sw->id()];
            for (const auto &e : sw->flow_table()) shadow.push_back({e.priority, e.match, e.actions, _order++, e.packet_count, e.byte_count});
        }
    }

    void on_lookup(const dataplane::Switch &sw, PortId in_port, const Packet &p, const dataplane::FlowEntry *hit, sim::SimTime) override {
        auto *e = brute_force(_tables[sw.id()], p, in_port);
        const bool agree = (e == nullptr) == (hit == nullptr) && (!e || (e->priority == hit->priority && e->match == hit->match));
        _disagreements += !agree;
        if (e) {
            ++e->packets;
            e->bytes += p.size_bytes;
        }
    }

    void on_mutation(const dataplane::Switch &sw, const FlowMod &mod, ModResult result, sim::SimTime, std::string_view) override {
        auto &t   = _tables[sw.id()];
        auto  key = [&](const ShadowEntry &e) { return e.priority == mod.priority && e.match == mod.match; };
        if (mod.command == dataplane::FlowCommand::Delete) {
            std::erase_if(t, [&](const ShadowEntry &e) { return e.match == mod.match; });
        } else if (result == ModResult::Ok && mod.command == dataplane::FlowCommand::Add) {
            t.push_back({mod.priority, mod.match, mod.actions, _order++, 0, 0});
        } else if (result == ModResult::Ok) {
            for (auto &e : t) {
                if (key(e)) e.actions = mod.actions;
            }
        }
    }

    void on_expire(const dataplane::Switch &sw, const dataplane::FlowEntry &entry, sim::SimTime) override {
        std::erase_if(_tables[sw.id()], [&](const ShadowEntry &e) { return e.priority == entry.priority && e.match == entry.match; });
    }

    /// Mismatches between shadow and real counters, as messages.
    std::vector<std::string> compare(const dataplane::Network &network) {
        std::vector<std::string> out;
        if (_disagreements) out.push_back(std::to_string(_disagreements) + " lookup disagreements");
        for (const auto *sw : network.switches()) {
            auto &shadow = _tables[sw->id()];
            if (shadow.size() != sw->flow_table().size()) out.push_back(sw->id() + ": table size differs");
            for (const auto &e : sw->flow_table()) {
                auto it = std::find_if(shadow.begin(), shadow.end(), [&](const auto &s) { return s.priority == e.priority && s.match == e.match; });
                if (it == shadow.end()) {
                    out.push_back(sw->id() + ": entry missing from replay");
                } else if (it->packets != e.packet_count || it->bytes != e.byte_count) {
                    out.push_back(sw->id() + ": counters " + std::to_string(e.packet_count) + "/" + std::to_string(e.byte_count) + " vs replay " +
                                  std::to_string(it->packets) + "/" + std::to_string(it->bytes));
                }
            }
        }
        return out;
    }

    std::uint64_t entries_checked() const {
        std::uint64_t n = 0;
        for (const auto &[k, v] : _tables) n += v.size();
        return n;
    }

private:
    std::map<std::string, std::vector<ShadowEntry>> _tables;
    std::uint64_t                                   _order         = 0;
    std::uint64_t                                   _disagreements = 0;
};

/// Generic network event log.
struct NetLog : dataplane::NetworkObserver {
    struct Rec {
        std::string       node;
        PortId            port = 0;
        Packet            packet;
        sim::SimTime      time  = 0;
        bool              stale = false;
    };
    std::vector<Rec> injects, egress, receives, drops, packet_ins;

    void on_inject(const dataplane::Device &d, const Packet &p, sim::SimTime t) override { injects.push_back({d.id(), 0, p, t, false}); }
    void on_egress(const dataplane::Switch &s, PortId port, const Packet &p, sim::SimTime t, bool stale) override {
        egress.push_back({s.id(), port, p, t, stale});
    }
    void on_device_receive(const dataplane::Device &d, const Packet &p, sim::SimTime t) override { receives.push_back({d.id(), 0, p, t, false}); }
    void on_drop(std::string_view where, const Packet &p, dataplane::DropCause, sim::SimTime t) override {
        drops.push_back({std::string(where), 0, p, t, false});
    }
    void on_packet_in(const dataplane::Switch &s, PortId port, const Packet &p, sim::SimTime t) override {
        packet_ins.push_back({s.id(), port, p, t, false});
    }
};

struct MutationLog : dataplane::SwitchObserver {
    struct Rec {
        std::string  switch_id;
        FlowMod      mod;
        ModResult    result;
        sim::SimTime time;
        std::string  app;
    };
    std::vector<Rec>           mutations;
    std::map<std::string, sim::SimTime> first_lookup; // switch -> first lookup of a tracked source
    std::string                tracked_src;

    void on_mutation(const dataplane::Switch &sw, const FlowMod &mod, ModResult result, sim::SimTime t, std::string_view app) override {
        mutations.push_back({sw.id(), mod, result, t, std::string(app)});
    }
    void on_lookup(const dataplane::Switch &sw, PortId, const Packet &p, const dataplane::FlowEntry *, sim::SimTime t) override {
        if (!tracked_src.empty() && p.src_addr == tracked_src) first_lookup.try_emplace(sw.id(), t);
    }
};

std::optional<std::size_t> probe_index(const Packet &p) {
    const auto *o = std::get_if<dataplane::OpaqueBytes>(&p.payload);
    if (!o || !o->bytes.starts_with("probe#")) return std::nullopt;
    return std::stoull(o->bytes.substr(6, o->bytes.find(';') - 6));
}

// ---- criteria -------------------------------------------------------------

Outcome content_filter() {
    Check c;
    auto [topo, scen] = canned("content-filter");
    const auto samples = published(scen, "sensor.temp");
    c.expect(samples.size() == 200, "expected 200 publications");
    std::set<std::int64_t> values;
    for (const auto &s : samples) values.insert(temperature(s));
    c.expect(values.size() == 101 && *values.begin() == 0 && *values.rbegin() == 100, "published values do not cover 0..100");

    Simulation sim(topo, scen, 0);
    sim.run();
    c.expect(sim.ok(), "run failed: " + sim.error());
    for (const auto &[reader, threshold] : std::vector<std::pair<std::string, std::int64_t>>{{"hot0", 0}, {"hot50", 50}, {"hot99", 99}}) {
        c.expect(topo.find_endpoint(reader)->filter == "temperature > " + std::to_string(threshold), reader + ": unexpected filter");
        std::vector<std::uint64_t> expected;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (temperature(samples[i]) > threshold) expected.push_back(i + 1);
        }
        std::vector<std::uint64_t> got;
        for (const auto &d : sim.deliveries(reader)) {
            got.push_back(d.seq);
            c.expect(d.fields == samples.at(d.seq - 1), reader + ": fields differ at seq " + std::to_string(d.seq));
        }
        c.expect(got == expected, reader + ": got " + std::to_string(got.size()) + " samples, oracle " + std::to_string(expected.size()));
        c.note("T=" + std::to_string(threshold) + ":" + std::to_string(got.size()));
    }
    return c.outcome();
}

Outcome batching() {
    Check c;
    auto [topo, scen] = canned("batching");
    Simulation on(topo, scen, 0);
    on.run();
    const auto data_packets = [](const Simulation &s) {
        const auto &tx = s.network().link_counters("access:sensor").tx_packets;
        auto        it = tx.find(Protocol::Data);
        return it == tx.end() ? 0u : it->second;
    };
    const auto expected_packets = (published(scen, "sensor.temp").size() + 3) / 4;
    c.expect(expected_packets == 3, "scenario should publish 10 samples");
    c.expect(data_packets(on) == expected_packets, "batched run sent " + std::to_string(data_packets(on)) + " packets");
    c.expect(on.deliveries("sink.temp").size() == 10, "batched run delivered " + std::to_string(on.deliveries("sink.temp").size()));

    auto plain_topo = topo;
    for (auto &e : plain_topo.endpoints) e.qos.batching.reset();
    auto plain_scen = scen;
    std::erase_if(plain_scen.actions, [](const Action &a) { return a.kind == ActionKind::Flush; });
    Simulation off(plain_topo, plain_scen, 0);
    off.run();
    c.expect(data_packets(off) == 10, "unbatched run sent " + std::to_string(data_packets(off)) + " packets");
    c.expect(field_multiset(on.deliveries("sink.temp")) == field_multiset(off.deliveries("sink.temp")), "sample multisets differ");
    c.note("packets " + std::to_string(data_packets(on)) + " vs " + std::to_string(data_packets(off)) + ", 10 samples each");
    return c.outcome();
}

Outcome multichannel() {
    Check c;
    auto [topo, scen] = canned("multichannel");
    const auto samples = published(scen, "sensor.temp");
    Simulation sim(topo, scen, 0);
    sim.run();

    std::map<std::string, std::set<std::uint64_t>> oracle, got;
    for (std::size_t i = 0; i < samples.size(); ++i) oracle[temperature(samples[i]) < 50 ? "mc:temp.low" : "mc:temp.high"].insert(i + 1);
    for (const auto &d : sim.deliveries("monitor.temp")) got[d.via].insert(d.seq);
    c.expect(got == oracle, "monitor per-channel partition differs from oracle");
    c.expect(sim.deliveries("monitor.temp").size() == samples.size(), "monitor saw duplicates or losses");
    std::set<std::uint64_t> hot;
    for (const auto &d : sim.deliveries("archive.hot")) hot.insert(d.seq);
    c.expect(hot == oracle["mc:temp.high"], "archive.hot differs from the high channel");

    auto single = topo;
    for (auto &e : single.endpoints) e.channels.clear();
    Simulation base(single, scen, 0);
    base.run();
    c.expect(field_multiset(sim.deliveries("monitor.temp")) == field_multiset(base.deliveries("monitor.temp")), "union differs from single-channel baseline");
    c.expect(field_multiset(sim.deliveries("archive.hot")) == field_multiset(base.deliveries("archive.hot")), "filtered reader differs from baseline");
    c.note("low " + std::to_string(got["mc:temp.low"].size()) + ", high " + std::to_string(got["mc:temp.high"].size()));
    return c.outcome();
}

Outcome lookup_oracle() {
    Check           c;
    std::mt19937_64 rng(2024);
    const std::vector<std::string> addrs{"A", "B", "C"};
    std::size_t                    hits = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        dataplane::Switch        sw("s", {1, 2, 3}, dataplane::MissBehavior::Drop);
        std::vector<ShadowEntry> shadow;
        const auto               n = rng() % 33;
        for (std::uint64_t i = 0; i < n; ++i) {
            FlowMatch m;
            if (rng() % 3 == 0) m.in_port = static_cast<PortId>(1 + rng() % 3);
            if (rng() % 3 == 0) m.src_addr = addrs[rng() % 3];
            if (rng() % 2 == 0) m.dst_addr = addrs[rng() % 3];
            if (rng() % 4 == 0) m.protocol = static_cast<Protocol>(rng() % 3);
            if (rng() % 4 == 0) m.dscp = rng() % 2 ? 46 : 0;
            if (rng() % 4 == 0) m.payload_keyword = dataplane::KeywordMatch{"k", Value(static_cast<std::int64_t>(rng() % 3))};
            const int  priority = static_cast<int>(rng() % 6);
            const auto r = sw.apply_flow_mod(FlowMod{dataplane::FlowCommand::Add, priority, m, {FlowAction::output(1)}, std::nullopt});
            if (r == ModResult::Ok) shadow.push_back({priority, m, {}, i, 0, 0});
        }
        const auto   in_port = static_cast<PortId>(1 + rng() % 3);
        Packet       p;
        if (rng() % 2) {
            pubsub::SampleBatch batch;
            batch.topic_name = "t";
            for (auto k = rng() % 3; k > 0; --k) batch.samples.push_back({"t", {{"k", static_cast<std::int64_t>(rng() % 3)}}, k, "w"});
            p = Packet(addrs[rng() % 3], addrs[rng() % 3], static_cast<Protocol>(rng() % 3), rng() % 2 ? 46 : 0, batch);
        } else {
            p = Packet(addrs[rng() % 3], addrs[rng() % 3], static_cast<Protocol>(rng() % 3), rng() % 2 ? 46 : 0, dataplane::OpaqueBytes{"x"});
        }
        const auto *real   = sw.lookup(p, in_port);
        const auto *expect = brute_force(shadow, p, in_port);
        const bool  same   = (real == nullptr) == (expect == nullptr) &&
                          (!real || (real->priority == expect->priority && real->match == expect->match));
        c.expect(same, "trial " + std::to_string(trial) + " disagrees");
        hits += real != nullptr;
    }
    c.note("1000 instances, " + std::to_string(hits) + " hits");
    return c.outcome();
}

std::vector<std::string> canned_names() {
    std::vector<std::string> out;
    for (const auto &c : canned_scenarios(default_scenario_dir())) out.push_back(c.name);
    return out;
}

Outcome counter_replay() {
    Check         c;
    std::uint64_t entries = 0;
    const auto    names   = canned_names();
    for (const auto &name : names) {
        auto [topo, scen] = canned(name);
        Simulation   sim(topo, scen, 0);
        ReplayOracle oracle(sim.network());
        sim.add_switch_observer(&oracle);
        sim.run();
        c.expect(sim.ok(), name + ": run failed");
        for (const auto &m : oracle.compare(sim.network())) c.expect(false, name + ": " + m);
        entries += oracle.entries_checked();
    }
    c.note(std::to_string(names.size()) + " scenarios, " + std::to_string(entries) + " entries");
    return c.outcome();
}

Outcome learning() {
    Check c;
    auto [topo, scen] = canned("learning");
    Simulation sim(topo, scen, 0);
    NetLog     log;
    sim.add_network_observer(&log);
    sim.run();

    std::size_t data_ins = 0, late_ins = 0;
    for (const auto &pi : log.packet_ins) {
        data_ins += pi.packet.protocol == Protocol::Data;
        if (auto i = probe_index(pi.packet); i && *i >= 2) ++late_ins;
    }
    c.expect(sim.probes().size() == 20, "expected 20 packets");
    c.expect(data_ins <= 2, std::to_string(data_ins) + " data PACKET_INs");
    c.expect(late_ins == 0, std::to_string(late_ins) + " PACKET_INs for packets 3..20");
    c.expect(sim.controller().stats().packet_outs == data_ins, "packet-outs beyond the initial misses");
    for (const auto &p : sim.probes()) {
        c.expect(p.received.size() == 1 && p.received[0].node == p.dst, p.label + " not delivered once to " + p.dst);
    }
    c.note(std::to_string(data_ins) + " PACKET_INs, 0 for packets 3..20");
    return c.outcome();
}

Outcome handover() {
    Check c;
    auto [topo, scen] = canned("handover");
    Simulation sim(topo, scen, 0);
    NetLog     log;
    sim.add_network_observer(&log);
    sim.run();

    const auto mobility = sim.mobility();
    c.expect(mobility.size() == 1 && mobility[0].completion_time, "mobility event did not complete");
    if (mobility.empty() || !mobility[0].completion_time) return c.outcome();
    const auto done    = *mobility[0].completion_time;
    const auto vehicle = topo.find_device("vehicle")->address;

    std::size_t late_at_old = 0, stale_egress = 0;
    std::set<std::uint64_t> at_new;
    for (const auto &e : log.egress) {
        if (e.node == "gw1" && e.port == 2) {
            late_at_old += e.packet.origin_time >= done;
            stale_egress += e.stale;
        }
        if (e.node == "gw2" && e.port == 2) at_new.insert(e.packet.id);
    }
    c.expect(late_at_old == 0, std::to_string(late_at_old) + " post-completion packets at gw1's device port");

    std::size_t after = 0;
    for (const auto &i : log.injects) {
        if (i.packet.dst_addr != vehicle || i.time < done) continue;
        ++after;
        c.expect(at_new.contains(i.packet.id), "packet " + std::to_string(i.packet.id) + " sent after completion missed gw2");
    }
    const auto &probes = sim.probes();
    c.expect(probes.size() == 1 && probes[0].sent >= done, "expected one post-event probe");
    if (!probes.empty()) {
        const auto &p       = probes[0];
        const bool  via_gw2 = std::any_of(p.egress.begin(), p.egress.end(), [](const Hop &h) { return h.node == "gw2" && h.port == 2; });
        c.expect(via_gw2 && p.received.size() == 1 && p.received[0].node == "vehicle", "probe not delivered through gw2:2");
    }
    const auto &burst = sim.bursts().at(0);
    const auto  stale = sim.network().ledger().stale;
    c.expect(burst.delivered + stale == burst.sent, "downlink losses not all accounted as stale");
    c.note("completion " + std::to_string(done - mobility[0].trigger_time) + " us after trigger, " + std::to_string(after) +
           " later packets via gw2, " + std::to_string(stale) + " stale in flight");
    return c.outcome();
}

Outcome discovery_redirect() {
    Check c;
    auto [topo, scen] = canned("discovery-redirect");
    Simulation sim(topo, scen, 0);
    NetLog     log;
    sim.add_network_observer(&log);
    sim.run();

    std::uint64_t total = 0;
    for (const auto &[p, n] : sim.controller().stats().packet_ins) total += n;
    c.expect(total == 1, std::to_string(total) + " PACKET_INs");

    std::vector<const Packet *> frames;
    for (const auto &i : log.injects) {
        if (i.node == "camera" && i.packet.protocol == Protocol::Discovery) frames.push_back(&i.packet);
    }
    c.expect(frames.size() == 2, std::to_string(frames.size()) + " discovery frames sent");
    if (frames.size() == 2) c.expect(frames[0]->payload == frames[1]->payload, "frames differ");

    std::map<std::string, int> got;
    for (const auto &r : log.receives) {
        if (r.packet.protocol == Protocol::Discovery) ++got[r.node];
    }
    c.expect(got == std::map<std::string, int>{{"h2", 2}, {"h3", 2}, {"h4", 2}}, "frames did not reach every other port twice");
    c.note("1 PACKET_IN, 2 frames at each of 3 ports");
    return c.outcome();
}

Outcome partition_isolation() {
    Check                                  c;
    const std::vector<std::string>         names{"", "siteA", "siteB"};
    std::vector<std::set<std::string>>     subsets;
    for (int mask = 0; mask < 8; ++mask) {
        std::set<std::string> s;
        for (int b = 0; b < 3; ++b) {
            if (mask & (1 << b)) s.insert(names[b]);
        }
        subsets.push_back(s);
    }
    auto effective = [](const std::set<std::string> &s) { return s.empty() ? std::set<std::string>{""} : s; };

    const auto base = parse_topology(Json::parse(R"({
      "settings": {"proactive_routes": true},
      "switches": [{"id": "gw1", "kind": "gateway", "ports": [1, 2]}],
      "devices": [{"id": "w", "address": "10.0.0.1", "attach": {"switch": "gw1", "port": 1}, "domain_id": 1},
                  {"id": "r", "address": "10.0.0.2", "attach": {"switch": "gw1", "port": 2}, "domain_id": 1}],
      "topics": [{"name": "temp", "schema": {"temperature": "integer"}}],
      "endpoints": [{"id": "pub", "kind": "writer", "device": "w", "topic": "temp"},
                    {"id": "sub", "kind": "reader", "device": "r", "topic": "temp"}]})"));
    int delivered = 0;
    for (const auto &p : subsets) {
        for (const auto &q : subsets) {
            auto topo                   = base;
            topo.endpoints[0].qos.partitions = p;
            topo.endpoints[1].qos.partitions = q;
            const auto scen = parse_scenario(Json::parse(R"({"actions": [{"at_us": 2000, "action": "publish", "writer": "pub",
                                                                           "fields": {"temperature": 1}}]})"),
                                             topo);
            Simulation sim(topo, scen, 0);
            sim.run();

            const auto ep = effective(p), eq = effective(q);
            const bool oracle = std::any_of(ep.begin(), ep.end(), [&](const auto &x) { return eq.contains(x); });
            pubsub::EndpointRecord wr{"pub", "w", 1, pubsub::EndpointKind::Writer, "temp", "temp", p, std::nullopt, "10.0.0.1", pubsub::Reliability::Reliable};
            pubsub::EndpointRecord rr{"sub", "r", 1, pubsub::EndpointKind::Reader, "temp", "temp", q, std::nullopt, "10.0.0.2", pubsub::Reliability::Reliable};
            const bool got = !sim.deliveries("sub").empty();
            c.expect(got == oracle && pubsub::match_endpoints(wr, rr) == oracle, "mismatch for a partition pair");
            delivered += got;
        }
    }
    c.note("64 pairs, " + std::to_string(delivered) + " delivering");
    return c.outcome();
}

Outcome slice_soundness() {
    Check c;
    auto [topo, scen] = canned("keyword-slice");
    const std::string app      = "site-a-qos";
    const auto        template_match = topo.apps.at(0).slice.at(0);

    std::mt19937_64          rng(77);
    std::vector<bool>        in_slice(50);
    for (std::size_t i = 0; i < 50; ++i) in_slice[i] = i < 25;
    std::shuffle(in_slice.begin(), in_slice.end(), rng);

    ScenarioDoc mods{"slice-audit", "", 20'000, {}};
    for (std::size_t i = 0; i < 50; ++i) {
        FlowMatch m;
        if (rng() % 2) m.dst_addr = "10.0.0." + std::to_string(1 + rng() % 3);
        if (rng() % 2) m.dscp = static_cast<std::uint8_t>(rng() % 64);
        if (rng() % 2) m.in_port = static_cast<PortId>(1 + rng() % 3);
        if (in_slice[i]) {
            m.payload_keyword = template_match.payload_keyword;
        } else {
            switch (rng() % 3) {
            case 0: break; // keyword unconstrained
            case 1: m.payload_keyword = dataplane::KeywordMatch{"site", std::string("B")}; break;
            default: m.payload_keyword = dataplane::KeywordMatch{"region", std::string("A")}; break;
            }
        }
        Action a;
        a.at_us     = 1000 + static_cast<sim::SimTime>(i) * 10;
        a.kind      = ActionKind::FlowMod;
        a.app       = app;
        a.to_switch = "gw1";
        a.mod       = FlowMod{dataplane::FlowCommand::Add, 300 + static_cast<int>(i), m,
                              {rng() % 2 ? FlowAction::drop() : FlowAction::set_dscp(46), FlowAction::output(3)}, std::nullopt};
        if (a.mod.actions[0].kind == FlowAction::Kind::Drop) a.mod.actions.pop_back();
        mods.actions.push_back(a);
    }
    // Round-trip through the document format so the run sees exactly what a file would hold.
    mods = parse_scenario(to_json(mods), topo);

    Simulation  sim(topo, mods, 0);
    MutationLog log;
    sim.add_switch_observer(&log);
    sim.run();

    std::size_t rejected = 0, accepted = 0;
    for (std::size_t i = 0; i < 50; ++i) {
        const auto &rec = sim.flow_mods().at(i);
        c.expect(oracle_subsumes(template_match, rec.mod.match) == in_slice[i], "generator produced a mislabelled mod");
        if (in_slice[i]) {
            accepted += rec.result == ModResult::Ok;
            c.expect(rec.result == ModResult::Ok, "in-slice mod " + std::to_string(i) + " not applied");
        } else {
            rejected += rec.result == ModResult::SliceViolation;
            c.expect(rec.result == ModResult::SliceViolation, "out-of-slice mod " + std::to_string(i) + " not rejected");
            for (const auto &e : sim.network().switch_at("gw1").flow_table()) {
                c.expect(!(e.priority == rec.mod.priority && e.match == rec.mod.match), "out-of-slice rule present in table");
            }
        }
    }
    std::size_t tagged = 0;
    for (const auto &m : log.mutations) {
        if (m.app != app) continue;
        ++tagged;
        c.expect(oracle_subsumes(template_match, m.mod.match), "trace holds an out-of-slice mutation");
    }
    c.expect(tagged == 25, std::to_string(tagged) + " mutations tagged with the sliced app");
    c.expect(sim.controller().stats().slice_violations == 25, "slice violation counter off");
    c.note(std::to_string(accepted) + " applied, " + std::to_string(rejected) + " rejected, audit clean");
    return c.outcome();
}

Outcome flood() {
    Check c;
    auto [topo, scen] = canned("flood");
    Simulation  sim(topo, scen, 0);
    NetLog      net;
    MutationLog mut;
    const auto  bot = topo.find_device("bot")->address;
    mut.tracked_src = bot;
    sim.add_network_observer(&net);
    sim.add_switch_observer(&mut);
    sim.run();

    const auto &policy  = *topo.flood_policy;
    const auto  latency = topo.settings.control_latency_us;
    const auto *flood   = [&]() -> const Action * {
        for (const auto &a : scen.actions) {
            if (a.kind == ActionKind::Burst && a.src == "bot") return &a;
        }
        return nullptr;
    }();
    c.expect(flood && policy.window_us / flood->interval_us >= 10 * static_cast<sim::Duration>(policy.rate_threshold), "flood below 10x threshold");

    const auto alerts = sim.alerts();
    c.expect(!alerts.empty(), "no alert");
    for (std::size_t i = 0; i < alerts.size(); ++i) {
        const auto &a = alerts[i];
        for (std::size_t j = 0; j < i; ++j) {
            c.expect(!(alerts[j].switch_id == a.switch_id && alerts[j].match == a.match), "repeated alert on " + a.switch_id);
        }
        auto first = mut.first_lookup.find(a.switch_id);
        c.expect(first != mut.first_lookup.end(), "alert on a switch the flood never reached");
        if (first != mut.first_lookup.end()) {
            c.expect(a.time - first->second <= policy.window_us + 2 * latency,
                     a.switch_id + ": alert " + std::to_string(a.time - first->second) + " us after the flood arrived");
        }
    }

    std::map<std::string, sim::SimTime> installed;
    for (const auto &m : mut.mutations) {
        if (m.app == "flood-monitor" && m.mod.priority == policy.mitigation_priority && m.result == ModResult::Ok) installed.try_emplace(m.switch_id, m.time);
    }
    c.expect(installed.size() == alerts.size(), "not every alert led to a drop rule");

    auto offending = [&](const Packet &p) { return p.src_addr == bot; };
    auto in_flight = [&](sim::SimTime t) {
        std::int64_t n = 0;
        for (const auto &i : net.injects) n += offending(i.packet) && i.time <= t;
        for (const auto &r : net.receives) n -= offending(r.packet) && r.time <= t;
        for (const auto &d : net.drops) n -= offending(d.packet) && d.time <= t;
        return n;
    };
    sim::SimTime earliest = std::numeric_limits<sim::SimTime>::max();
    std::string  bounds;
    for (const auto &[sw, t] : installed) {
        earliest = std::min(earliest, t);
        std::int64_t beyond = 0;
        for (const auto &e : net.egress) beyond += e.node == sw && offending(e.packet) && e.time > t;
        const auto bound = in_flight(t);
        c.expect(beyond <= bound, sw + ": " + std::to_string(beyond) + " forwarded after install, bound " + std::to_string(bound));
        bounds += (bounds.empty() ? "" : ", ") + sw + " " + std::to_string(beyond) + "<=" + std::to_string(bound);
    }
    if (!installed.empty()) {
        std::int64_t late = 0;
        for (const auto &r : net.receives) late += offending(r.packet) && r.time > earliest;
        const auto bound = in_flight(earliest);
        c.expect(late <= bound, std::to_string(late) + " victim deliveries after mitigation, bound " + std::to_string(bound));
    }
    c.note(std::to_string(alerts.size()) + " alerts; forwarded after install " + bounds);
    return c.outcome();
}

Outcome determinism() {
    Check      c;
    const auto names = canned_names();
    for (const auto &name : names) {
        std::string   reports[2];
        std::uint64_t hashes[2];
        for (int i = 0; i < 2; ++i) {
            auto [topo, scen] = canned(name);
            Simulation sim(std::move(topo), std::move(scen), 0);
            std::uint64_t trace = sim::fnv1a("");
            sim.set_trace_sink([&trace](const sim::TraceRecord &r) { trace = sim::fnv1a(sim::to_ndjson(r), trace); });
            sim.run();
            reports[i] = emit_report(collect(sim), ReportFormat::Json);
            hashes[i]  = sim.kernel().trace_hash() ^ trace;
        }
        c.expect(reports[0] == reports[1], name + ": reports differ");
        c.expect(hashes[0] == hashes[1], name + ": trace hashes differ");
    }
    c.note(std::to_string(names.size()) + " scenarios byte-identical");
    return c.outcome();
}

struct Criterion {
    int                      id;
    std::string              name;
    double                   budget_s;
    std::function<Outcome()> run;
};

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "content-filter correctness", 1, content_filter},
        {2, "batching ratio", 1, batching},
        {3, "multichannel routing", 1, multichannel},
        {4, "flow lookup oracle", 5, lookup_oracle},
        {5, "counter replay", 5, counter_replay},
        {6, "reactive learning convergence", 1, learning},
        {7, "handover", 1, handover},
        {8, "discovery redirect", 1, discovery_redirect},
        {9, "partition isolation", 1, partition_isolation},
        {10, "slice soundness", 1, slice_soundness},
        {11, "flood mitigation", 2, flood},
        {12, "determinism", 10, determinism},
    };
    int failed = 0;
    for (const auto &cr : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome    out;
        try {
            out = cr.run();
        } catch (const std::exception &e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > cr.budget_s) {
            out.pass = false;
            out.detail += (out.detail.empty() ? "" : "; ") + std::string("over time budget");
        }
        failed += !out.pass;
        std::printf("%s %2d %-30s %7.3fs  %s\n", out.pass ? "PASS" : "FAIL", cr.id, cr.name.c_str(), secs, out.detail.c_str());
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}

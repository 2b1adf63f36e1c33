#include "psdn/harness/report.hpp"

#include "psdn/controller/codec.hpp"
#include "psdn/error.hpp"

#include <cstdio>
#include <sstream>

namespace psdn::harness {

namespace codec = controller::codec;

bool MetricsReport::conserved() const noexcept {
    if (ledger.born() != ledger.died()) return false;
    for (const auto &s : switches) {
        if (s.counters.rx_packets != s.counters.forwarded + s.counters.to_controller + s.counters.dropped) return false;
    }
    return true;
}

MetricsReport collect(const Simulation &sim) {
    MetricsReport r;
    r.scenario   = sim.scenario().name;
    r.seed       = sim.seed();
    r.end_time   = sim.kernel().now();
    r.events     = sim.kernel().dispatched();
    r.trace_hash = sim.kernel().trace_hash();
    r.status     = sim.status();
    r.error      = sim.error();

    for (const auto &e : sim.topology().endpoints) {
        const auto *participant = sim.participant(e.device);
        if (e.kind == pubsub::EndpointKind::Reader) {
            ReaderMetrics m{e.id, e.device, e.topic, 0, {}, {}};
            for (const auto &d : sim.deliveries(e.id)) {
                m.sequence.emplace_back(d.writer, d.seq);
                ++m.via[d.via];
            }
            m.delivered = m.sequence.size();
            r.readers.push_back(std::move(m));
        } else {
            r.writers.push_back(WriterMetrics{e.id, e.device, e.topic, participant->stats().samples_sent, participant->stats().data_packets_sent});
        }
    }
    for (const auto *sw : sim.network().switches()) r.switches.push_back(SwitchMetrics{sw->id(), sw->counters(), sw->flow_table()});
    for (const auto &id : sim.network().link_ids()) r.links.push_back(LinkMetrics{id, sim.network().link_counters(id)});

    r.controller       = sim.controller().stats();
    r.packet_ins       = r.controller.packet_ins;
    r.control_messages = sim.control_bus().messages();
    r.ledger           = sim.network().ledger();
    r.stale_deliveries = r.ledger.stale;
    r.network_packets  = r.ledger.injected;
    r.alerts           = sim.alerts();
    r.mobility         = sim.mobility();
    r.probes           = sim.probes();
    r.bursts           = sim.bursts();
    r.flow_mods        = sim.flow_mods();
    return r;
}

ReportFormat parse_report_format(std::string_view text) {
    if (text == "json") return ReportFormat::Json;
    if (text == "csv") return ReportFormat::Csv;
    throw ValidationError("format", "expected 'json' or 'csv'");
}

namespace {

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

Json protocol_counts(const std::map<dataplane::Protocol, std::uint64_t> &counts) {
    Json j = Json::object();
    for (auto p : {dataplane::Protocol::Data, dataplane::Protocol::Discovery, dataplane::Protocol::Control}) {
        auto it                           = counts.find(p);
        j[std::string(to_string(p))] = it == counts.end() ? 0 : it->second;
    }
    return j;
}

Json hops_json(const std::vector<Hop> &hops) {
    Json j = Json::array();
    for (const auto &h : hops) j.push_back(Json{{"node", h.node}, {"port", h.port}, {"time", h.time}, {"stale", h.stale}});
    return j;
}

Json counters_json(const dataplane::SwitchCounters &c) {
    return Json{{"rx_packets", c.rx_packets},         {"rx_bytes", c.rx_bytes},           {"forwarded", c.forwarded},
                {"to_controller", c.to_controller},   {"dropped", c.dropped},             {"transmissions", c.transmissions},
                {"bad_port_drops", c.bad_port_drops}, {"guard_violations", c.guard_violations}};
}

Json ledger_json(const dataplane::CopyLedger &l) {
    return Json{{"injected", l.injected},
                {"switch_transmits", l.switch_transmits},
                {"packet_out_transmits", l.packet_out_transmits},
                {"switch_arrivals", l.switch_arrivals},
                {"device_arrivals", l.device_arrivals},
                {"not_for_host", l.not_for_host},
                {"link_drops", l.link_drops},
                {"no_link_drops", l.no_link_drops},
                {"stale", l.stale},
                {"in_flight", l.in_flight},
                {"born", l.born()},
                {"died", l.died()}};
}

} // namespace

Json to_json(const MetricsReport &r) {
    Json j;
    j["scenario"]   = r.scenario;
    j["seed"]       = r.seed;
    j["end_time"]   = r.end_time;
    j["events"]     = r.events;
    j["trace_hash"] = hex64(r.trace_hash);
    j["status"]     = r.status;
    if (!r.error.empty()) j["error"] = r.error;

    j["readers"] = Json::array();
    for (const auto &m : r.readers) {
        Json seq = Json::array();
        for (const auto &[w, s] : m.sequence) seq.push_back(Json::array({w, s}));
        j["readers"].push_back(Json{{"id", m.id}, {"device", m.device}, {"topic", m.topic}, {"delivered", m.delivered}, {"sequence", seq}, {"via", m.via}});
    }
    j["writers"] = Json::array();
    for (const auto &w : r.writers) {
        j["writers"].push_back(Json{{"id", w.id}, {"device", w.device}, {"topic", w.topic}, {"samples_sent", w.samples_sent}, {"data_packets_sent", w.data_packets_sent}});
    }
    j["switches"] = Json::array();
    for (const auto &s : r.switches) {
        Json table = Json::array();
        for (const auto &e : s.flow_table) {
            table.push_back(Json{{"priority", e.priority},
                                 {"match", codec::to_json(e.match)},
                                 {"actions", codec::to_json(e.actions)},
                                 {"packet_count", e.packet_count},
                                 {"byte_count", e.byte_count},
                                 {"install_seq", e.install_seq}});
        }
        j["switches"].push_back(Json{{"id", s.id}, {"counters", counters_json(s.counters)}, {"flow_table", table}});
    }
    j["links"] = Json::array();
    for (const auto &l : r.links) {
        j["links"].push_back(Json{{"id", l.id},
                                  {"tx_packets", protocol_counts(l.counters.tx_packets)},
                                  {"tx_bytes", l.counters.tx_bytes},
                                  {"down_drops", l.counters.down_drops},
                                  {"lossy_drops", l.counters.lossy_drops}});
    }

    j["packet_ins"] = protocol_counts(r.packet_ins);
    Json results    = Json::object();
    for (const auto &[k, v] : r.controller.mod_results) results[std::string(to_string(k))] = v;
    j["controller"] = Json{{"claims", r.controller.claims},
                           {"unclaimed", r.controller.unclaimed},
                           {"malformed", r.controller.malformed},
                           {"packet_outs", r.controller.packet_outs},
                           {"flow_mods_sent", r.controller.flow_mods_sent},
                           {"slice_violations", r.controller.slice_violations},
                           {"stats_requests", r.controller.stats_requests},
                           {"stats_replies", r.controller.stats_replies},
                           {"mod_results", results},
                           {"control_messages", r.control_messages}};
    j["stale_deliveries"] = r.stale_deliveries;
    j["network_packets"]  = r.network_packets;

    j["alerts"] = Json::array();
    for (const auto &a : r.alerts) j["alerts"].push_back(Json::parse(a.to_ndjson()));
    j["mobility"] = Json::array();
    for (const auto &m : r.mobility) {
        Json mj{{"address", m.address}, {"deleted", m.deleted},         {"installed", m.installed},
                {"trigger_time", m.trigger_time}, {"outstanding", m.outstanding}, {"failures", m.failures}};
        mj["completion_time"] = m.completion_time ? Json(*m.completion_time) : Json(nullptr);
        j["mobility"].push_back(std::move(mj));
    }
    j["probes"] = Json::array();
    for (const auto &p : r.probes) {
        j["probes"].push_back(Json{{"label", p.label}, {"src", p.src}, {"dst", p.dst}, {"sent", p.sent}, {"egress", hops_json(p.egress)}, {"received", hops_json(p.received)}});
    }
    j["bursts"] = Json::array();
    for (const auto &b : r.bursts) {
        j["bursts"].push_back(Json{{"label", b.label}, {"src", b.src}, {"dst", b.dst}, {"sent", b.sent}, {"delivered", b.delivered}});
    }
    j["flow_mods"] = Json::array();
    for (const auto &f : r.flow_mods) {
        j["flow_mods"].push_back(Json{{"time", f.time},
                                      {"app", f.app},
                                      {"switch", f.switch_id},
                                      {"command", std::string(to_string(f.mod.command))},
                                      {"priority", f.mod.priority},
                                      {"match", codec::to_json(f.mod.match)},
                                      {"authorized", f.authorized},
                                      {"result", f.result ? Json(std::string(to_string(*f.result))) : Json(nullptr)}});
    }

    Json balance = Json::object();
    for (const auto &s : r.switches) {
        balance[s.id] = s.counters.rx_packets == s.counters.forwarded + s.counters.to_controller + s.counters.dropped;
    }
    j["conservation"] = Json{{"ledger", ledger_json(r.ledger)}, {"switch_balance", balance}, {"holds", r.conserved()}};
    return j;
}

namespace {

std::string csv_field(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

} // namespace

std::string emit_report(const MetricsReport &r, ReportFormat format) {
    if (format == ReportFormat::Json) return to_json(r).dump(2) + "\n";

    std::ostringstream out;
    out << "# summary\nkey,value\n";
    out << "scenario," << csv_field(r.scenario) << "\n";
    out << "seed," << r.seed << "\n";
    out << "end_time," << r.end_time << "\n";
    out << "events," << r.events << "\n";
    out << "trace_hash," << hex64(r.trace_hash) << "\n";
    out << "status," << r.status << "\n";
    out << "network_packets," << r.network_packets << "\n";
    out << "stale_deliveries," << r.stale_deliveries << "\n";
    for (auto p : {dataplane::Protocol::Data, dataplane::Protocol::Discovery, dataplane::Protocol::Control}) {
        auto it = r.packet_ins.find(p);
        out << "packet_ins_" << to_string(p) << "," << (it == r.packet_ins.end() ? 0 : it->second) << "\n";
    }
    out << "alerts," << r.alerts.size() << "\n";
    out << "conserved," << (r.conserved() ? "true" : "false") << "\n";

    out << "\n# readers\nreader,device,topic,delivered\n";
    for (const auto &m : r.readers) out << csv_field(m.id) << "," << csv_field(m.device) << "," << csv_field(m.topic) << "," << m.delivered << "\n";

    out << "\n# switches\nswitch,rx_packets,rx_bytes,forwarded,to_controller,dropped,transmissions,bad_port_drops,flow_entries\n";
    for (const auto &s : r.switches) {
        const auto &c = s.counters;
        out << csv_field(s.id) << "," << c.rx_packets << "," << c.rx_bytes << "," << c.forwarded << "," << c.to_controller << "," << c.dropped
            << "," << c.transmissions << "," << c.bad_port_drops << "," << s.flow_table.size() << "\n";
    }
    return out.str();
}

} // namespace psdn::harness

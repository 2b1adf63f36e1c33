#pragma once

#include "psdn/harness/simulation.hpp"

#include <string>
#include <vector>

namespace psdn::harness {

struct ReaderMetrics {
    std::string                                       id;
    std::string                                       device;
    std::string                                       topic;
    std::uint64_t                                     delivered = 0;
    std::vector<std::pair<std::string, std::uint64_t>> sequence; // (writer, publication seq) in delivery order
    std::map<std::string, std::uint64_t>              via;      // carrying address -> samples
};

struct WriterMetrics {
    std::string   id;
    std::string   device;
    std::string   topic;
    std::uint64_t samples_sent      = 0; // per participant
    std::uint64_t data_packets_sent = 0; // per participant
};

struct SwitchMetrics {
    std::string                       id;
    dataplane::SwitchCounters         counters;
    std::vector<dataplane::FlowEntry> flow_table;
};

struct LinkMetrics {
    std::string             id;
    dataplane::LinkCounters counters;
};

struct MetricsReport {
    std::string   scenario;
    std::uint64_t seed       = 0;
    sim::SimTime  end_time   = 0;
    std::uint64_t events     = 0;
    std::uint64_t trace_hash = 0;
    std::string   status     = "ok";
    std::string   error;

    std::vector<ReaderMetrics>                   readers;
    std::vector<WriterMetrics>                   writers;
    std::vector<SwitchMetrics>                   switches;
    std::vector<LinkMetrics>                     links;
    std::map<dataplane::Protocol, std::uint64_t> packet_ins;
    controller::ControllerStats                  controller;
    std::uint64_t                                control_messages = 0;
    std::uint64_t                                stale_deliveries = 0;
    std::uint64_t                                network_packets  = 0; // packets injected by devices
    dataplane::CopyLedger                        ledger;
    std::vector<controller::Alert>               alerts;
    std::vector<controller::MobilitySummary>     mobility;
    std::vector<ProbeRecord>                     probes;
    std::vector<BurstRecord>                     bursts;
    std::vector<FlowModRecord>                   flow_mods;

    /// Every packet copy accounted for, and every switch's rx split into
    /// forwarded, to-controller and dropped.
    bool conserved() const noexcept;
};

MetricsReport collect(const Simulation &sim);

enum class ReportFormat { Json, Csv };

ReportFormat parse_report_format(std::string_view text); // ValidationError

Json        to_json(const MetricsReport &report);
std::string emit_report(const MetricsReport &report, ReportFormat format);

} // namespace psdn::harness

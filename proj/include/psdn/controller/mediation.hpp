#pragma once

#include "psdn/dataplane/network.hpp"
#include "psdn/pubsub/participant.hpp"

#include <map>
#include <memory>
#include <string>

namespace psdn::controller {

namespace topics {
inline constexpr const char *kPacketIn      = "sdn.packet_in";
inline constexpr const char *kPacketOut     = "sdn.packet_out";
inline constexpr const char *kFlowMod       = "sdn.flow_mod";
inline constexpr const char *kFlowModReply  = "sdn.flow_mod_reply";
inline constexpr const char *kStatsRequest  = "sdn.stats_request";
inline constexpr const char *kStatsReply    = "sdn.stats_reply";
} // namespace topics

/// Schemas of the six mediation topics. Packets, matches, action lists and
/// stats travel as JSON text in string fields.
std::vector<pubsub::Topic> mediation_topics();

/// Out-of-band control network: every attached station reaches every other
/// after a fixed latency. Discovery on the control domain goes through the
/// bus directory instead of frames.
class ControlBus {
public:
    ControlBus(sim::Kernel &kernel, sim::Duration latency);
    ~ControlBus();

    ControlBus(const ControlBus &)            = delete;
    ControlBus &operator=(const ControlBus &) = delete;

    /// Throws Error(DuplicateEntity) for a taken address.
    pubsub::Transport &attach(const std::string &address);
    void               bind(const std::string &address, pubsub::DomainParticipant *participant);

    pubsub::StaticDirectory &directory() noexcept { return _directory; }
    sim::Duration            latency() const noexcept { return _latency; }
    std::uint64_t            messages() const noexcept { return _messages; }

private:
    class Station;
    struct Delivery {
        Station          *to;
        dataplane::Packet packet;
    };

    void send(Station &from, dataplane::Packet packet);

    sim::Kernel                                     &_kernel;
    sim::Duration                                    _latency;
    sim::EntityId                                    _entity;
    pubsub::StaticDirectory                          _directory;
    std::map<std::string, std::unique_ptr<Station>>  _stations;
    std::uint64_t                                    _messages = 0;
};

/// Switch-side end of the mediation layer: turns PACKET_INs into samples and
/// applies packet-out, flow-mod and stats-request samples addressed to its
/// switch. The only path through which a sealed switch changes.
class SwitchAgent {
public:
    SwitchAgent(sim::Kernel &kernel, ControlBus &bus, dataplane::Network &network, const std::string &switch_id, pubsub::DomainId control_domain);

    SwitchAgent(const SwitchAgent &)            = delete;
    SwitchAgent &operator=(const SwitchAgent &) = delete;

    void publish_packet_in(dataplane::PortId in_port, const dataplane::Packet &packet);

    const std::string &switch_id() const noexcept { return _switch_id; }
    std::uint64_t      malformed() const noexcept { return _malformed; }

private:
    void on_packet_out(const pubsub::DataSample &sample);
    void on_flow_mod(const pubsub::DataSample &sample);
    void on_stats_request(const pubsub::DataSample &sample);

    sim::Kernel                                &_kernel;
    dataplane::Network                         &_network;
    std::string                                 _switch_id;
    std::unique_ptr<pubsub::DomainParticipant>  _participant;
    pubsub::EndpointId                          _packet_in_writer;
    pubsub::EndpointId                          _mod_reply_writer;
    pubsub::EndpointId                          _stats_reply_writer;
    std::uint64_t                               _malformed = 0;
};

/// Quote-escapes a string for use as a filter literal.
std::string filter_literal(std::string_view text);

} // namespace psdn::controller

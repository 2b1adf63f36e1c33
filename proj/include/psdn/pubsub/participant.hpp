#pragma once

#include "psdn/dataplane/packet.hpp"
#include "psdn/pubsub/types.hpp"
#include "psdn/sim/kernel.hpp"

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace psdn::pubsub {

/// Host side of a participant: where its frames leave and which address it
/// answers to.
class Transport {
public:
    virtual ~Transport() = default;

    virtual void               send(dataplane::Packet packet) = 0;
    virtual const std::string &address() const               = 0;
};

class DomainParticipant;

/// Registry-based endpoint discovery: every attached participant learns about
/// endpoint changes of its same-domain peers synchronously, without frames.
class StaticDirectory {
public:
    void attach(DomainParticipant &participant);
    void detach(DomainParticipant &participant);
    void publish(const DomainParticipant &origin, const Announcement &announcement);

private:
    std::vector<DomainParticipant *>      _members;
    std::map<ParticipantId, Announcement> _latest;
};

struct ParticipantConfig {
    DomainId      domain_id = 0;
    ParticipantId participant_id;
    /// Period of unsolicited announcements; 0 disables them (triggered
    /// announcements on entity creation/deletion are always sent).
    sim::Duration announce_period = 1'000'000;
    /// Non-null selects static discovery through this directory.
    StaticDirectory *directory = nullptr;
    /// Protocol tag on outgoing sample packets.
    dataplane::Protocol data_protocol = dataplane::Protocol::Data;
};

struct DeliveryInfo {
    EndpointId   reader_id;
    std::string  via; // destination address of the carrying packet, or "local"
    sim::SimTime time = 0;
};

using SampleListener = std::function<void(const DataSample &, const DeliveryInfo &)>;

struct WriteStatus {
    std::uint64_t publication_seq = 0;
    std::size_t   packets_sent    = 0; // network packets emitted by this call
    bool          buffered        = false;
};

struct DbDelta {
    std::vector<EndpointId> added;
    std::vector<EndpointId> removed;

    bool empty() const noexcept { return added.empty() && removed.empty(); }
};

struct ParticipantStats {
    std::uint64_t data_packets_sent    = 0;
    std::uint64_t samples_sent         = 0;
    std::uint64_t announcements_sent   = 0;
    std::uint64_t samples_delivered    = 0;
    std::uint64_t duplicates_discarded = 0;
    std::uint64_t history_overflows    = 0;
    std::uint64_t filter_errors        = 0;
};

/// Miniature DDS domain participant.
///
/// Writers send to the readers found in the discovery database only: each
/// write is filtered writer-side against every matched reader's content
/// filter and travels as one packet per destination host. Readers re-check
/// matching and filters on arrival and discard duplicates by publication
/// sequence. Everything runs inside kernel event handlers.
class DomainParticipant {
public:
    DomainParticipant(sim::Kernel &kernel, Transport &transport, ParticipantConfig config);
    ~DomainParticipant();

    DomainParticipant(const DomainParticipant &)            = delete;
    DomainParticipant &operator=(const DomainParticipant &) = delete;

    const ParticipantId &id() const noexcept { return _config.participant_id; }
    DomainId             domain_id() const noexcept { return _config.domain_id; }
    const std::string   &address() const { return _transport.address(); }

    /// Throws Error(DuplicateEntity) for a second topic with the same name.
    void         register_topic(Topic topic);
    const Topic &topic(std::string_view name) const; // UnknownTopic

    /// Throws UnknownTopic, InvalidOperation (bad QoS, duplicate channel
    /// address, batching combined with channels), DuplicateEntity.
    EndpointId create_writer(const std::string &topic_name, QosProfile qos, std::vector<Channel> channels = {}, EndpointId id = {});

    /// Throws UnknownTopic, SchemaMismatch (filter names a field outside the
    /// schema), InvalidOperation, DuplicateEntity.
    EndpointId create_reader(const std::string &topic_name, std::optional<filter::FilterExpression> filter, QosProfile qos,
                             SampleListener listener = {}, EndpointId id = {});

    void delete_endpoint(const EndpointId &id); // UnknownEntity

    /// Throws SchemaMismatch for a nonconforming sample, UnknownEntity for an
    /// unknown or deleted writer.
    WriteStatus write(const EndpointId &writer_id, FieldMap fields);

    /// Emits the pending batch as one packet per destination. Throws
    /// InvalidOperation when the writer does not batch.
    std::size_t flush(const EndpointId &writer_id);

    /// Channel addresses whose filter accepts `sample`, in channel order.
    /// Filter evaluation errors surface as SchemaMismatch.
    std::vector<std::string> route_multichannel(const EndpointId &writer_id, const DataSample &sample) const;

    /// Sends this participant's announcement now.
    void announce();
    /// Merges a received announcement into the discovery database.
    DbDelta merge_announcement(const Announcement &announcement);
    /// Sends a dispose announcement and stops all timers.
    void close();

    /// Inbound frame from the host.
    void on_packet(const dataplane::Packet &packet);

    /// Drains a reader's history queue (bounded by history_depth).
    std::vector<DataSample> take(const EndpointId &reader_id);

    const std::map<EndpointId, EndpointRecord> &discovery_db() const noexcept { return _db; }
    const EndpointRecord                       &endpoint(const EndpointId &id) const; // local endpoint record
    std::vector<EndpointRecord>                 local_endpoints() const;
    std::size_t                                 pending_batch(const EndpointId &writer_id) const;
    const ParticipantStats                     &stats() const noexcept { return _stats; }
    bool                                        closed() const noexcept { return _closed; }

    /// Invoked for every merge that changed the database.
    void set_discovery_listener(std::function<void(const DbDelta &)> listener) { _discovery_listener = std::move(listener); }

private:
    struct WriterState {
        EndpointRecord          record;
        QosProfile              qos;
        std::vector<Channel>    channels;
        std::uint64_t           next_seq = 1;
        std::vector<DataSample> batch;
        std::uint64_t           batch_generation = 0;
    };

    struct ReaderState {
        EndpointRecord                           record;
        QosProfile                               qos;
        SampleListener                           listener;
        std::deque<DataSample>                   history;
        std::map<EndpointId, std::uint64_t>      last_seq;
    };

    struct FlushTimer {
        EndpointId    writer;
        std::uint64_t generation;
    };
    struct AnnounceTimer {
        bool periodic;
    };
    struct LocalDelivery {
        SampleBatch batch;
    };

    void        handle(const sim::Event &event);
    std::size_t emit(WriterState &writer, std::vector<DataSample> samples);
    void        deliver(const SampleBatch &batch, const std::string &via);
    void        schedule_announcement();
    Announcement make_announcement() const;
    SampleBatch make_batch(const WriterState &writer, std::vector<DataSample> samples) const;
    dataplane::Packet make_packet(const WriterState &writer, const std::string &dst, SampleBatch batch) const;
    EndpointId  next_endpoint_id(char kind);
    void        check_new_endpoint_id(const EndpointId &id) const;

    sim::Kernel                                 &_kernel;
    Transport                                   &_transport;
    ParticipantConfig                            _config;
    sim::EntityId                                _entity;
    std::map<std::string, Topic, std::less<>>    _topics;
    std::map<EndpointId, WriterState>            _writers;
    std::map<EndpointId, ReaderState>            _readers;
    std::map<EndpointId, EndpointRecord>         _db; // remote endpoints
    std::map<ParticipantId, std::vector<EndpointId>> _remote_participants;
    std::function<void(const DbDelta &)>         _discovery_listener;
    ParticipantStats                             _stats;
    std::uint64_t                                _endpoint_counter = 0;
    bool                                         _announce_pending = false;
    bool                                         _closed           = false;
};

/// Creates participants and keeps participant ids unique.
class ParticipantFactory {
public:
    explicit ParticipantFactory(sim::Kernel &kernel) : _kernel(kernel) {}

    /// Throws Error(DuplicateEntity) if the id is taken and
    /// Error(InvalidOperation) for an empty id.
    DomainParticipant &create_participant(Transport &transport, ParticipantConfig config);
    DomainParticipant *find(std::string_view id) const;
    /// Closes and destroys the participant.
    void delete_participant(std::string_view id);

    std::vector<DomainParticipant *> participants() const;

private:
    sim::Kernel                                                         &_kernel;
    std::map<ParticipantId, std::unique_ptr<DomainParticipant>, std::less<>> _participants;
};

} // namespace psdn::pubsub

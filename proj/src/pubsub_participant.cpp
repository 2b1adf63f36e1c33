#include "psdn/pubsub/participant.hpp"

#include "psdn/error.hpp"

#include <algorithm>
#include <set>

namespace psdn::pubsub {

// ---- StaticDirectory -----------------------------------------------------

void StaticDirectory::attach(DomainParticipant &participant) {
    _members.push_back(&participant);
    for (const auto &[pid, announcement] : _latest) {
        if (pid != participant.id()) {
            participant.merge_announcement(announcement);
        }
    }
}

void StaticDirectory::detach(DomainParticipant &participant) { std::erase(_members, &participant); }

void StaticDirectory::publish(const DomainParticipant &origin, const Announcement &announcement) {
    if (announcement.disposed) {
        _latest.erase(announcement.participant_id);
    } else {
        _latest[announcement.participant_id] = announcement;
    }
    // Copy: a merge may attach or detach members.
    const auto members = _members;
    for (auto *member : members) {
        if (member != &origin) {
            member->merge_announcement(announcement);
        }
    }
}

// ---- DomainParticipant ---------------------------------------------------

DomainParticipant::DomainParticipant(sim::Kernel &kernel, Transport &transport, ParticipantConfig config)
    : _kernel(kernel), _transport(transport), _config(std::move(config)) {
    _entity = _kernel.register_entity("participant:" + _config.participant_id, [this](const sim::Event &e) { handle(e); });
    if (_config.directory != nullptr) {
        _config.directory->attach(*this);
        schedule_announcement();
        return;
    }
    schedule_announcement();
    if (_config.announce_period > 0) {
        _kernel.schedule(_entity, _config.announce_period, sim::EventKind::TimerFired, AnnounceTimer{true});
    }
}

DomainParticipant::~DomainParticipant() {
    _kernel.set_handler(_entity, {});
    if (_config.directory != nullptr) {
        _config.directory->detach(*this);
    }
}

void DomainParticipant::register_topic(Topic topic) {
    if (topic.schema.empty()) {
        throw Error(ErrorCode::InvalidOperation, "topic '" + topic.name + "' has an empty schema");
    }
    if (_topics.contains(topic.name)) {
        throw Error(ErrorCode::DuplicateEntity, "topic '" + topic.name + "' already registered");
    }
    auto name = topic.name;
    _topics.emplace(std::move(name), std::move(topic));
}

const Topic &DomainParticipant::topic(std::string_view name) const {
    auto it = _topics.find(name);
    if (it == _topics.end()) {
        throw Error(ErrorCode::UnknownTopic, "topic '" + std::string(name) + "' is not registered in participant '" + id() + "'");
    }
    return it->second;
}

EndpointId DomainParticipant::next_endpoint_id(char kind) {
    return id() + "/" + kind + std::to_string(_endpoint_counter++);
}

void DomainParticipant::check_new_endpoint_id(const EndpointId &eid) const {
    if (_writers.contains(eid) || _readers.contains(eid)) {
        throw Error(ErrorCode::DuplicateEntity, "endpoint '" + eid + "' already exists");
    }
}

EndpointId DomainParticipant::create_writer(const std::string &topic_name, QosProfile qos, std::vector<Channel> channels, EndpointId eid) {
    const auto &t = topic(topic_name);
    qos.validate();
    if (!channels.empty()) {
        if (qos.batching) {
            throw Error(ErrorCode::InvalidOperation, "multichannel writers do not batch");
        }
        std::set<std::string> seen;
        for (const auto &channel : channels) {
            if (!is_multicast(channel.multicast_address)) {
                throw Error(ErrorCode::InvalidOperation, "channel address '" + channel.multicast_address + "' is not a multicast group");
            }
            if (!seen.insert(channel.multicast_address).second) {
                throw Error(ErrorCode::InvalidOperation, "duplicate channel address '" + channel.multicast_address + "'");
            }
            t.check_filter(channel.filter);
        }
    }
    if (eid.empty()) {
        eid = next_endpoint_id('w');
    }
    check_new_endpoint_id(eid);

    WriterState w;
    w.record = EndpointRecord{eid, id(), domain_id(), EndpointKind::Writer, t.name, t.type_name, qos.partitions, std::nullopt, address(), qos.reliability};
    w.qos      = std::move(qos);
    w.channels = std::move(channels);
    _writers.emplace(eid, std::move(w));
    schedule_announcement();
    return eid;
}

EndpointId DomainParticipant::create_reader(const std::string &topic_name, std::optional<filter::FilterExpression> filter, QosProfile qos,
                                            SampleListener listener, EndpointId eid) {
    const auto &t = topic(topic_name);
    qos.validate();
    if (filter) {
        t.check_filter(*filter);
    }
    if (eid.empty()) {
        eid = next_endpoint_id('r');
    }
    check_new_endpoint_id(eid);

    ReaderState r;
    r.record   = EndpointRecord{eid, id(), domain_id(), EndpointKind::Reader, t.name, t.type_name, qos.partitions, std::move(filter), address(), qos.reliability};
    r.qos      = std::move(qos);
    r.listener = std::move(listener);
    _readers.emplace(eid, std::move(r));
    schedule_announcement();
    return eid;
}

void DomainParticipant::delete_endpoint(const EndpointId &eid) {
    if (_writers.erase(eid) == 0 && _readers.erase(eid) == 0) {
        throw Error(ErrorCode::UnknownEntity, "endpoint '" + eid + "'");
    }
    schedule_announcement();
}

const EndpointRecord &DomainParticipant::endpoint(const EndpointId &eid) const {
    if (auto it = _writers.find(eid); it != _writers.end()) return it->second.record;
    if (auto it = _readers.find(eid); it != _readers.end()) return it->second.record;
    throw Error(ErrorCode::UnknownEntity, "endpoint '" + eid + "'");
}

std::vector<EndpointRecord> DomainParticipant::local_endpoints() const {
    std::vector<EndpointRecord> out;
    for (const auto &[eid, w] : _writers) out.push_back(w.record);
    for (const auto &[eid, r] : _readers) out.push_back(r.record);
    std::sort(out.begin(), out.end(), [](const EndpointRecord &a, const EndpointRecord &b) { return a.endpoint_id < b.endpoint_id; });
    return out;
}

std::size_t DomainParticipant::pending_batch(const EndpointId &writer_id) const {
    auto it = _writers.find(writer_id);
    if (it == _writers.end()) {
        throw Error(ErrorCode::UnknownEntity, "writer '" + writer_id + "'");
    }
    return it->second.batch.size();
}

SampleBatch DomainParticipant::make_batch(const WriterState &writer, std::vector<DataSample> samples) const {
    SampleBatch batch;
    batch.writer_id   = writer.record.endpoint_id;
    batch.domain_id   = domain_id();
    batch.topic_name  = writer.record.topic_name;
    batch.type_name   = writer.record.type_name;
    batch.partitions  = writer.record.partitions;
    batch.reliability = writer.record.reliability;
    batch.samples     = std::move(samples);
    return batch;
}

dataplane::Packet DomainParticipant::make_packet(const WriterState &writer, const std::string &dst, SampleBatch batch) const {
    return dataplane::Packet(address(), dst, _config.data_protocol, writer.qos.dscp.value_or(0), std::move(batch),
                             writer.qos.reliability == Reliability::Reliable);
}

WriteStatus DomainParticipant::write(const EndpointId &writer_id, FieldMap fields) {
    auto it = _writers.find(writer_id);
    if (it == _writers.end() || _closed) {
        throw Error(ErrorCode::UnknownEntity, "writer '" + writer_id + "'");
    }
    auto &writer = it->second;
    topic(writer.record.topic_name).check_conforms(fields);

    DataSample sample;
    sample.topic_name      = writer.record.topic_name;
    sample.fields          = std::move(fields);
    sample.publication_seq = writer.next_seq++;
    sample.source_writer   = writer_id;

    WriteStatus status;
    status.publication_seq = sample.publication_seq;

    if (!writer.channels.empty()) {
        const auto addresses = route_multichannel(writer_id, sample);
        for (const auto &addr : addresses) {
            _transport.send(make_packet(writer, addr, make_batch(writer, {sample})));
            ++status.packets_sent;
        }
        _stats.data_packets_sent += status.packets_sent;
        _stats.samples_sent += status.packets_sent;
        const bool local = std::any_of(_readers.begin(), _readers.end(), [&](const auto &r) { return match_endpoints(writer.record, r.second.record); });
        if (local) {
            _kernel.schedule(_entity, 0, sim::EventKind::TimerFired, LocalDelivery{make_batch(writer, {sample})});
        }
        return status;
    }

    if (writer.qos.batching) {
        status.buffered = true;
        writer.batch.push_back(std::move(sample));
        if (writer.batch.size() == 1) {
            _kernel.schedule(_entity, writer.qos.batching->max_delay, sim::EventKind::TimerFired, FlushTimer{writer_id, writer.batch_generation});
        }
        if (writer.batch.size() >= writer.qos.batching->max_samples) {
            const auto before = _stats.data_packets_sent;
            flush(writer_id);
            status.packets_sent = _stats.data_packets_sent - before;
        }
        return status;
    }

    status.packets_sent = emit(writer, {std::move(sample)});
    return status;
}

std::size_t DomainParticipant::flush(const EndpointId &writer_id) {
    auto it = _writers.find(writer_id);
    if (it == _writers.end()) {
        throw Error(ErrorCode::UnknownEntity, "writer '" + writer_id + "'");
    }
    auto &writer = it->second;
    if (!writer.qos.batching) {
        throw Error(ErrorCode::InvalidOperation, "writer '" + writer_id + "' does not batch");
    }
    auto samples = std::move(writer.batch);
    writer.batch.clear();
    ++writer.batch_generation;
    const auto count = samples.size();
    if (count > 0) {
        emit(writer, std::move(samples));
    }
    return count;
}

std::size_t DomainParticipant::emit(WriterState &writer, std::vector<DataSample> samples) {
    std::map<std::string, std::vector<const EndpointRecord *>> by_location;
    for (const auto &[eid, record] : _db) {
        if (record.kind == EndpointKind::Reader && match_endpoints(writer.record, record) && record.location != address()) {
            by_location[record.location].push_back(&record);
        }
    }

    std::size_t packets = 0;
    for (const auto &[location, readers] : by_location) {
        std::vector<DataSample> selected;
        for (const auto &sample : samples) {
            const bool wanted = std::any_of(readers.begin(), readers.end(), [&](const EndpointRecord *reader) {
                if (!reader->filter) {
                    return true;
                }
                try {
                    return filter::evaluate(*reader->filter, sample.fields);
                } catch (const Error &) {
                    ++_stats.filter_errors;
                    return false;
                }
            });
            if (wanted) {
                selected.push_back(sample);
            }
        }
        if (selected.empty()) {
            continue;
        }
        _stats.samples_sent += selected.size();
        _transport.send(make_packet(writer, location, make_batch(writer, std::move(selected))));
        ++packets;
    }
    _stats.data_packets_sent += packets;

    const bool local = std::any_of(_readers.begin(), _readers.end(), [&](const auto &r) { return match_endpoints(writer.record, r.second.record); });
    if (local) {
        _kernel.schedule(_entity, 0, sim::EventKind::TimerFired, LocalDelivery{make_batch(writer, std::move(samples))});
    }
    return packets;
}

std::vector<std::string> DomainParticipant::route_multichannel(const EndpointId &writer_id, const DataSample &sample) const {
    auto it = _writers.find(writer_id);
    if (it == _writers.end()) {
        throw Error(ErrorCode::UnknownEntity, "writer '" + writer_id + "'");
    }
    std::vector<std::string> out;
    for (const auto &channel : it->second.channels) {
        bool pass = false;
        try {
            pass = filter::evaluate(channel.filter, sample.fields);
        } catch (const Error &e) {
            throw Error(ErrorCode::SchemaMismatch, std::string("channel ") + channel.multicast_address + ": " + e.what());
        }
        if (pass) {
            out.push_back(channel.multicast_address);
        }
    }
    return out;
}

void DomainParticipant::deliver(const SampleBatch &batch, const std::string &via) {
    if (batch.domain_id != domain_id()) {
        return;
    }
    EndpointRecord writer;
    writer.endpoint_id = batch.writer_id;
    writer.domain_id   = batch.domain_id;
    writer.kind        = EndpointKind::Writer;
    writer.topic_name  = batch.topic_name;
    writer.type_name   = batch.type_name;
    writer.partitions  = batch.partitions;

    for (auto &[rid, reader] : _readers) {
        if (!match_endpoints(writer, reader.record)) {
            continue;
        }
        for (const auto &sample : batch.samples) {
            auto &last = reader.last_seq[batch.writer_id];
            if (sample.publication_seq <= last) {
                ++_stats.duplicates_discarded;
                continue;
            }
            if (reader.record.filter) {
                bool pass = false;
                try {
                    pass = filter::evaluate(*reader.record.filter, sample.fields);
                } catch (const Error &) {
                    ++_stats.filter_errors;
                }
                if (!pass) {
                    continue;
                }
            }
            last = sample.publication_seq;
            reader.history.push_back(sample);
            if (reader.history.size() > reader.qos.history_depth) {
                reader.history.pop_front();
                ++_stats.history_overflows;
            }
            ++_stats.samples_delivered;
            if (reader.listener) {
                reader.listener(sample, DeliveryInfo{rid, via, _kernel.now()});
            }
        }
    }
}

std::vector<DataSample> DomainParticipant::take(const EndpointId &reader_id) {
    auto it = _readers.find(reader_id);
    if (it == _readers.end()) {
        throw Error(ErrorCode::UnknownEntity, "reader '" + reader_id + "'");
    }
    std::vector<DataSample> out(it->second.history.begin(), it->second.history.end());
    it->second.history.clear();
    return out;
}

Announcement DomainParticipant::make_announcement() const {
    Announcement a;
    a.domain_id      = domain_id();
    a.participant_id = id();
    a.address        = address();
    a.disposed       = _closed;
    if (!_closed) {
        a.endpoints = local_endpoints();
    }
    return a;
}

void DomainParticipant::schedule_announcement() {
    if (_closed) {
        return;
    }
    if (_config.directory != nullptr) {
        _config.directory->publish(*this, make_announcement());
        return;
    }
    if (!_announce_pending) {
        _announce_pending = true;
        _kernel.schedule(_entity, 0, sim::EventKind::TimerFired, AnnounceTimer{false});
    }
}

void DomainParticipant::announce() {
    if (_config.directory != nullptr) {
        _config.directory->publish(*this, make_announcement());
        return;
    }
    ++_stats.announcements_sent;
    _transport.send(dataplane::Packet(address(), discovery_group(domain_id()), dataplane::Protocol::Discovery, 0, make_announcement(), true));
}

void DomainParticipant::close() {
    if (_closed) {
        return;
    }
    _closed = true;
    announce();
    if (_config.directory != nullptr) {
        _config.directory->detach(*this);
    }
}

DbDelta DomainParticipant::merge_announcement(const Announcement &a) {
    DbDelta delta;
    if (a.domain_id != domain_id() || a.participant_id == id()) {
        return delta;
    }
    const bool is_new = !_remote_participants.contains(a.participant_id);
    auto      &known  = _remote_participants[a.participant_id];

    std::set<EndpointId> incoming;
    if (!a.disposed) {
        for (const auto &record : a.endpoints) {
            if (record.domain_id != domain_id()) {
                continue;
            }
            incoming.insert(record.endpoint_id);
            auto it = _db.find(record.endpoint_id);
            if (it == _db.end() || !(it->second == record)) {
                _db[record.endpoint_id] = record;
                delta.added.push_back(record.endpoint_id);
            }
        }
    }
    for (const auto &eid : known) {
        if (!incoming.contains(eid)) {
            _db.erase(eid);
            delta.removed.push_back(eid);
        }
    }
    if (a.disposed) {
        _remote_participants.erase(a.participant_id);
    } else {
        known.assign(incoming.begin(), incoming.end());
        if (is_new) {
            // Let the newcomer learn about us without waiting for a period.
            schedule_announcement();
        }
    }
    if (!delta.empty() && _discovery_listener) {
        _discovery_listener(delta);
    }
    return delta;
}

void DomainParticipant::on_packet(const dataplane::Packet &packet) {
    if (_closed) {
        return;
    }
    if (const auto *announcement = std::get_if<Announcement>(&packet.payload)) {
        merge_announcement(*announcement);
    } else if (const auto *batch = std::get_if<SampleBatch>(&packet.payload)) {
        deliver(*batch, packet.dst_addr);
    }
}

void DomainParticipant::handle(const sim::Event &event) {
    if (const auto *timer = std::any_cast<FlushTimer>(&event.payload)) {
        auto it = _writers.find(timer->writer);
        if (it != _writers.end() && it->second.batch_generation == timer->generation && !it->second.batch.empty()) {
            flush(timer->writer);
        }
    } else if (const auto *announce_timer = std::any_cast<AnnounceTimer>(&event.payload)) {
        if (_closed) {
            return;
        }
        if (announce_timer->periodic) {
            announce();
            _kernel.schedule(_entity, _config.announce_period, sim::EventKind::TimerFired, AnnounceTimer{true});
        } else {
            _announce_pending = false;
            announce();
        }
    } else if (const auto *local = std::any_cast<LocalDelivery>(&event.payload)) {
        deliver(local->batch, "local");
    }
}

// ---- ParticipantFactory --------------------------------------------------

DomainParticipant &ParticipantFactory::create_participant(Transport &transport, ParticipantConfig config) {
    if (config.participant_id.empty()) {
        throw Error(ErrorCode::InvalidOperation, "participant id must not be empty");
    }
    if (_participants.contains(config.participant_id)) {
        throw Error(ErrorCode::DuplicateEntity, "participant '" + config.participant_id + "'");
    }
    auto pid  = config.participant_id;
    auto node = std::make_unique<DomainParticipant>(_kernel, transport, std::move(config));
    auto &ref = *node;
    _participants.emplace(std::move(pid), std::move(node));
    return ref;
}

DomainParticipant *ParticipantFactory::find(std::string_view pid) const {
    auto it = _participants.find(pid);
    return it == _participants.end() ? nullptr : it->second.get();
}

void ParticipantFactory::delete_participant(std::string_view pid) {
    auto it = _participants.find(pid);
    if (it == _participants.end()) {
        throw Error(ErrorCode::UnknownEntity, "participant '" + std::string(pid) + "'");
    }
    it->second->close();
    _participants.erase(it);
}

std::vector<DomainParticipant *> ParticipantFactory::participants() const {
    std::vector<DomainParticipant *> out;
    for (const auto &[pid, p] : _participants) out.push_back(p.get());
    return out;
}

} // namespace psdn::pubsub

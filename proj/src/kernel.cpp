#include "psdn/sim/kernel.hpp"

#include "psdn/error.hpp"

#include <json.hpp>

#include <algorithm>

namespace psdn::sim {

namespace {
// Min-heap on (time, seq): std heap algorithms build a max-heap, so invert.
bool later(const Event &a, const Event &b) noexcept {
    if (a.time != b.time) {
        return a.time > b.time;
    }
    return a.seq > b.seq;
}
} // namespace

std::string_view to_string(EventKind kind) noexcept {
    switch (kind) {
    case EventKind::PacketArrival: return "packet-arrival";
    case EventKind::TimerFired: return "timer-fired";
    case EventKind::MobilityTrigger: return "mobility-trigger";
    case EventKind::StatsTick: return "stats-tick";
    case EventKind::ScenarioAction: return "scenario-action";
    }
    return "unknown";
}

std::string to_ndjson(const TraceRecord &record) {
    nlohmann::json line;
    line["time"]   = record.time;
    line["seq"]    = record.seq;
    line["target"] = std::string(record.target);
    line["kind"]   = std::string(to_string(record.kind));
    return line.dump();
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t state) noexcept {
    for (unsigned char c : bytes) {
        state ^= c;
        state *= 0x100000001b3ULL;
    }
    return state;
}

Kernel::Kernel(std::uint64_t seed) : _seed(seed), _rng(seed), _trace_hash(fnv1a({})) {}

EntityId Kernel::register_entity(std::string name, Handler handler) {
    _entities.push_back(Entity{std::move(name), std::move(handler)});
    return EntityId{static_cast<std::uint32_t>(_entities.size() - 1)};
}

void Kernel::set_handler(EntityId id, Handler handler) {
    if (!has_entity(id)) {
        throw Error(ErrorCode::UnknownEntity, "entity #" + std::to_string(id.value));
    }
    _entities[id.value].handler = std::move(handler);
}

const std::string &Kernel::entity_name(EntityId id) const {
    if (!has_entity(id)) {
        throw Error(ErrorCode::UnknownEntity, "entity #" + std::to_string(id.value));
    }
    return _entities[id.value].name;
}

EventId Kernel::schedule(EntityId target, Duration delay, EventKind kind, std::any payload) {
    if (!has_entity(target)) {
        throw Error(ErrorCode::UnknownEntity, "schedule target #" + std::to_string(target.value));
    }
    if (delay < 0) {
        throw Error(ErrorCode::InvalidOperation, "negative delay " + std::to_string(delay));
    }
    const auto seq = _next_seq++;
    _queue.push_back(Event{_now + delay, seq, target, kind, std::move(payload)});
    std::push_heap(_queue.begin(), _queue.end(), later);
    return seq;
}

void Kernel::dispatch_one() {
    if (_dispatched >= _budget) {
        throw Error(ErrorCode::BudgetExceeded, "event budget of " + std::to_string(_budget) + " exhausted");
    }
    std::pop_heap(_queue.begin(), _queue.end(), later);
    Event event = std::move(_queue.back());
    _queue.pop_back();
    _now = event.time;
    ++_dispatched;

    const TraceRecord record{event.time, event.seq, _entities[event.target.value].name, event.kind};
    const auto        line = to_ndjson(record);
    _trace_hash            = fnv1a(line, _trace_hash);
    _trace_hash            = fnv1a("\n", _trace_hash);
    if (_trace_sink) {
        _trace_sink(record);
    }
    if (const auto &handler = _entities[event.target.value].handler) {
        handler(event);
    }
}

std::size_t Kernel::run_until(SimTime t) {
    if (t < _now) {
        throw Error(ErrorCode::InvalidOperation, "run_until(" + std::to_string(t) + ") is before now=" + std::to_string(_now));
    }
    std::size_t count = 0;
    while (!_queue.empty() && _queue.front().time <= t) {
        dispatch_one();
        ++count;
    }
    _now = t;
    return count;
}

std::size_t Kernel::run_to_quiescence(std::size_t max_events) {
    if (max_events == 0) {
        throw Error(ErrorCode::InvalidOperation, "run_to_quiescence needs a positive budget");
    }
    std::size_t count = 0;
    while (!_queue.empty()) {
        if (count == max_events) {
            throw Error(ErrorCode::BudgetExceeded, std::to_string(max_events) + " events dispatched, " + std::to_string(_queue.size()) + " still queued");
        }
        dispatch_one();
        ++count;
    }
    return count;
}

Duration Kernel::jitter(Duration max) {
    if (max <= 0) {
        return 0;
    }
    std::uniform_int_distribution<Duration> dist(0, max);
    return dist(_rng);
}

} // namespace psdn::sim

#pragma once

#include <any>
#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace psdn::sim {

/// Logical time in integer microseconds.
using SimTime  = std::int64_t;
using Duration = std::int64_t;
using EventId  = std::uint64_t;

struct EntityId {
    std::uint32_t value = std::numeric_limits<std::uint32_t>::max();

    constexpr bool valid() const noexcept { return value != std::numeric_limits<std::uint32_t>::max(); }
    auto           operator<=>(const EntityId &) const = default;
};

enum class EventKind : std::uint8_t {
    PacketArrival,
    TimerFired,
    MobilityTrigger,
    StatsTick,
    ScenarioAction,
};

std::string_view to_string(EventKind kind) noexcept;

struct Event {
    SimTime       time = 0;
    std::uint64_t seq  = 0;
    EntityId      target;
    EventKind     kind = EventKind::TimerFired;
    std::any      payload;
};

using Handler = std::function<void(const Event &)>;

/// One line of the dispatch trace.
struct TraceRecord {
    SimTime          time;
    std::uint64_t    seq;
    std::string_view target;
    EventKind        kind;
};

std::string to_ndjson(const TraceRecord &record);

/// Deterministic discrete-event scheduler.
///
/// Events are ordered by (time, seq); seq is assigned at schedule time from a
/// single counter, so equal-time events dispatch in insertion order. Every
/// dispatched event is folded into a running FNV-1a hash of its NDJSON trace
/// line, which makes two runs comparable without keeping the trace around.
///
/// Single-threaded: handlers run synchronously inside run_until/run_to_quiescence
/// and may schedule further events.
class Kernel {
public:
    explicit Kernel(std::uint64_t seed = 0);

    Kernel(const Kernel &)            = delete;
    Kernel &operator=(const Kernel &) = delete;

    EntityId           register_entity(std::string name, Handler handler);
    void               set_handler(EntityId id, Handler handler);
    const std::string &entity_name(EntityId id) const;
    bool               has_entity(EntityId id) const noexcept { return id.valid() && id.value < _entities.size(); }

    /// Throws Error(UnknownEntity) for an unregistered target and
    /// Error(InvalidOperation) for a negative delay.
    EventId schedule(EntityId target, Duration delay, EventKind kind, std::any payload = {});

    /// Dispatches every event with time <= t, then sets now = t.
    std::size_t run_until(SimTime t);

    /// Dispatches until the queue drains. Throws Error(BudgetExceeded) if
    /// max_events were dispatched and work remains.
    std::size_t run_to_quiescence(std::size_t max_events);

    SimTime     now() const noexcept { return _now; }
    std::size_t pending() const noexcept { return _queue.size(); }
    std::size_t dispatched() const noexcept { return _dispatched; }

    std::uint64_t  seed() const noexcept { return _seed; }
    std::mt19937_64 &rng() noexcept { return _rng; }
    /// Uniform draw in [0, max]; zero when max <= 0 (no RNG draw is consumed).
    Duration jitter(Duration max);

    std::uint64_t trace_hash() const noexcept { return _trace_hash; }
    void          set_trace_sink(std::function<void(const TraceRecord &)> sink) { _trace_sink = std::move(sink); }

    /// Upper bound on total dispatched events across all run calls; exceeding
    /// it raises BudgetExceeded from run_until as well.
    void set_event_budget(std::size_t budget) noexcept { _budget = budget; }

private:
    struct Entity {
        std::string name;
        Handler     handler;
    };

    void dispatch_one();

    std::vector<Entity>  _entities;
    std::vector<Event>   _queue; // min-heap on (time, seq)
    SimTime              _now = 0;
    std::uint64_t        _next_seq = 0;
    std::size_t          _dispatched = 0;
    std::size_t          _budget = std::numeric_limits<std::size_t>::max();
    std::uint64_t        _seed;
    std::mt19937_64      _rng;
    std::uint64_t        _trace_hash;
    std::function<void(const TraceRecord &)> _trace_sink;
};

/// FNV-1a 64-bit, used for trace and report hashing.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t state = 0xcbf29ce484222325ULL) noexcept;

} // namespace psdn::sim

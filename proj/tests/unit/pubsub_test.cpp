#include "psdn/error.hpp"
#include "psdn/pubsub/participant.hpp"
#include "psdn/pubsub/wire.hpp"
#include "test_bus.hpp"

#include <gtest/gtest.h>

#include <functional>
#include <random>
#include <set>

namespace psdn::pubsub {
namespace {

using filter::FilterExpression;
using testing::TestBus;

Topic temp_topic() { return Topic{"temp", "Temp", {{"temperature", FieldKind::Integer}, {"site", FieldKind::String}}}; }

FieldMap reading(std::int64_t t, std::string site = "a") { return {{"temperature", t}, {"site", std::move(site)}}; }

template <class E> ErrorCode code_of(E &&fn) {
    try {
        fn();
    } catch (const Error &e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::ValidationError;
}

struct World {
    explicit World(std::uint64_t seed = 1) : kernel(seed), bus(kernel), factory(kernel) {}

    DomainParticipant &make(const std::string &pid, DomainId domain = 0, bool with_topic = true) {
        auto &port = bus.port("h-" + pid);
        auto &p    = factory.create_participant(port, ParticipantConfig{domain, pid, 0});
        port.participant = &p;
        if (with_topic) {
            p.register_topic(temp_topic());
        }
        return p;
    }

    void settle() { kernel.run_to_quiescence(1'000'000); }

    sim::Kernel        kernel;
    TestBus            bus;
    ParticipantFactory factory;
};

struct Collected {
    std::vector<DataSample> samples;
    SampleListener          listener() {
        return [this](const DataSample &s, const DeliveryInfo &) { samples.push_back(s); };
    }
    std::vector<std::int64_t> temps() const {
        std::vector<std::int64_t> out;
        for (const auto &s : samples) out.push_back(std::get<std::int64_t>(s.fields.at("temperature")));
        return out;
    }
};

EndpointRecord record(EndpointKind kind, std::set<std::string> partitions, DomainId domain = 0, std::string topic = "temp") {
    EndpointRecord r;
    r.endpoint_id = kind == EndpointKind::Writer ? "w" : "r";
    r.kind        = kind;
    r.domain_id   = domain;
    r.topic_name  = std::move(topic);
    r.type_name   = "Temp";
    r.partitions  = std::move(partitions);
    return r;
}

TEST(MatchEndpoints, DefaultPartitionsMatch) {
    EXPECT_TRUE(match_endpoints(record(EndpointKind::Writer, {}), record(EndpointKind::Reader, {})));
}

TEST(MatchEndpoints, DisjointPartitionsDoNotMatch) {
    EXPECT_FALSE(match_endpoints(record(EndpointKind::Writer, {"siteA"}), record(EndpointKind::Reader, {"siteB"})));
}

TEST(MatchEndpoints, IntersectingPartitionsMatch) {
    EXPECT_TRUE(match_endpoints(record(EndpointKind::Writer, {"siteA", "ops"}), record(EndpointKind::Reader, {"ops"})));
}

TEST(MatchEndpoints, DomainAndTopicMustAgree) {
    EXPECT_FALSE(match_endpoints(record(EndpointKind::Writer, {}, 0), record(EndpointKind::Reader, {}, 1)));
    EXPECT_FALSE(match_endpoints(record(EndpointKind::Writer, {}, 0, "temp"), record(EndpointKind::Reader, {}, 0, "hum")));
    auto reader      = record(EndpointKind::Reader, {});
    reader.type_name = "Other";
    EXPECT_FALSE(match_endpoints(record(EndpointKind::Writer, {}), reader));
}

TEST(Participant, FirstParticipantHasEmptyDb) {
    World w;
    auto &p = w.make("p1");
    p.create_writer("temp", {});
    w.settle();
    EXPECT_TRUE(p.discovery_db().empty());
}

TEST(Participant, SameDomainParticipantsLearnEachOther) {
    World w;
    auto &a  = w.make("a");
    auto &b  = w.make("b");
    auto  wa = a.create_writer("temp", {});
    auto  rb = b.create_reader("temp", std::nullopt, {});
    w.settle();
    ASSERT_EQ(a.discovery_db().size(), 1u);
    EXPECT_TRUE(a.discovery_db().contains(rb));
    ASSERT_EQ(b.discovery_db().size(), 1u);
    EXPECT_TRUE(b.discovery_db().contains(wa));
}

TEST(Participant, DomainsAreIsolated) {
    World w;
    auto &a = w.make("a", 0);
    auto &b = w.make("b", 1);
    a.create_writer("temp", {});
    b.create_reader("temp", std::nullopt, {});
    w.settle();
    EXPECT_TRUE(a.discovery_db().empty());
    EXPECT_TRUE(b.discovery_db().empty());
}

TEST(Participant, DuplicateParticipantIdRejected) {
    World w;
    w.make("a");
    EXPECT_EQ(code_of([&] { w.make("a"); }), ErrorCode::DuplicateEntity);
}

TEST(Participant, WriterDefaults) {
    World w;
    auto &p  = w.make("a");
    auto  id = p.create_writer("temp", {});
    EXPECT_TRUE(p.endpoint(id).partitions.empty());
    QosProfile q;
    q.batching = Batching{4, 1000};
    auto bid   = p.create_writer("temp", q);
    EXPECT_EQ(p.pending_batch(bid), 0u);
}

TEST(Participant, WriterOnUnknownTopic) {
    World w;
    auto &p = w.make("a");
    EXPECT_EQ(code_of([&] { p.create_writer("nope", {}); }), ErrorCode::UnknownTopic);
}

TEST(Participant, ReaderFilterChecksSchema) {
    World w;
    auto &p = w.make("a");
    EXPECT_NO_THROW(p.create_reader("temp", FilterExpression::parse("temperature > 50"), {}));
    EXPECT_EQ(code_of([&] { p.create_reader("temp", FilterExpression::parse("humidity > 1"), {}); }), ErrorCode::SchemaMismatch);
}

TEST(Participant, ReaderFilterIsAnnounced) {
    World w;
    auto &a = w.make("a");
    auto &b = w.make("b");
    auto  r = b.create_reader("temp", FilterExpression::parse("temperature > 50"), {});
    w.settle();
    ASSERT_TRUE(a.discovery_db().at(r).filter.has_value());
    EXPECT_EQ(filter::print_canonical(*a.discovery_db().at(r).filter), "(temperature > 50)");
}

TEST(Participant, WriteWithoutReadersSendsNothing) {
    World w;
    auto &a      = w.make("a");
    auto  writer = a.create_writer("temp", {});
    w.settle();
    auto status = a.write(writer, reading(20));
    EXPECT_EQ(status.publication_seq, 1u);
    EXPECT_EQ(status.packets_sent, 0u);
    EXPECT_EQ(a.stats().data_packets_sent, 0u);
}

TEST(Participant, FilterRejectsSample) {
    World     w;
    auto     &a = w.make("a");
    auto     &b = w.make("b");
    Collected got;
    b.create_reader("temp", FilterExpression::parse("temperature > 50"), {}, got.listener());
    auto writer = a.create_writer("temp", {});
    w.settle();
    a.write(writer, reading(30));
    a.write(writer, reading(70));
    w.settle();
    EXPECT_EQ(got.temps(), std::vector<std::int64_t>{70});
}

TEST(Participant, ReaderWithoutFilterGetsEverything) {
    World     w;
    auto     &a = w.make("a");
    auto     &b = w.make("b");
    Collected got;
    b.create_reader("temp", std::nullopt, {}, got.listener());
    auto writer = a.create_writer("temp", {});
    w.settle();
    for (int t : {1, 2, 3}) a.write(writer, reading(t));
    w.settle();
    EXPECT_EQ(got.temps(), (std::vector<std::int64_t>{1, 2, 3}));
}

TEST(Participant, SchemaViolationOnWrite) {
    World w;
    auto &a      = w.make("a");
    auto  writer = a.create_writer("temp", {});
    EXPECT_EQ(code_of([&] { a.write(writer, {{"temperature", std::int64_t{1}}}); }), ErrorCode::SchemaMismatch);
    EXPECT_EQ(code_of([&] { a.write(writer, {{"temperature", 1.5}, {"site", std::string("x")}}); }), ErrorCode::SchemaMismatch);
    EXPECT_EQ(code_of([&] {
                  auto f = reading(1);
                  f.emplace("extra", std::int64_t{0});
                  a.write(writer, f);
              }),
              ErrorCode::SchemaMismatch);
}

TEST(Participant, WriteOnDeletedWriter) {
    World w;
    auto &a      = w.make("a");
    auto  writer = a.create_writer("temp", {});
    a.delete_endpoint(writer);
    EXPECT_EQ(code_of([&] { a.write(writer, reading(1)); }), ErrorCode::UnknownEntity);
}

TEST(Participant, BatchingTenSamplesGivesThreePackets) {
    World     w;
    auto     &a = w.make("a");
    auto     &b = w.make("b");
    Collected got;
    QosProfile rq;
    rq.history_depth = 100;
    b.create_reader("temp", std::nullopt, rq, got.listener());
    QosProfile q;
    q.batching  = Batching{4, 1'000'000};
    auto writer = a.create_writer("temp", q);
    w.settle();
    const auto before = a.stats().data_packets_sent;
    for (int i = 0; i < 10; ++i) a.write(writer, reading(i));
    EXPECT_EQ(a.flush(writer), 2u);
    EXPECT_EQ(a.stats().data_packets_sent - before, 3u);
    w.settle();
    EXPECT_EQ(got.samples.size(), 10u);

    std::vector<std::size_t> sizes;
    for (const auto &pkt : w.bus.port("h-a").sent) {
        if (const auto *batch = std::get_if<SampleBatch>(&pkt.payload)) sizes.push_back(batch->samples.size());
    }
    EXPECT_EQ(sizes, (std::vector<std::size_t>{4, 4, 2}));
}

TEST(Participant, FlushSemantics) {
    World w;
    auto &a = w.make("a");
    w.make("b").create_reader("temp", std::nullopt, {});
    QosProfile q;
    q.batching  = Batching{10, 1'000'000};
    auto writer = a.create_writer("temp", q);
    w.settle();
    a.write(writer, reading(1));
    a.write(writer, reading(2));
    const auto before = a.stats().data_packets_sent;
    EXPECT_EQ(a.flush(writer), 2u);
    EXPECT_EQ(a.stats().data_packets_sent - before, 1u);
    EXPECT_EQ(a.flush(writer), 0u);
    EXPECT_EQ(a.stats().data_packets_sent - before, 1u);
}

TEST(Participant, FlushOnNonBatchingWriter) {
    World w;
    auto &a      = w.make("a");
    auto  writer = a.create_writer("temp", {});
    EXPECT_EQ(code_of([&] { a.flush(writer); }), ErrorCode::InvalidOperation);
}

TEST(Participant, BatchTimerFlushes) {
    World w;
    auto &a = w.make("a");
    auto &b = w.make("b");
    auto  r = b.create_reader("temp", std::nullopt, QosProfile{{}, Reliability::Reliable, 10, {}, {}});
    QosProfile q;
    q.batching  = Batching{8, 500};
    auto writer = a.create_writer("temp", q);
    w.settle();
    const auto t0 = w.kernel.now();
    a.write(writer, reading(1));
    w.kernel.run_until(t0 + 499);
    EXPECT_EQ(a.pending_batch(writer), 1u);
    w.kernel.run_until(t0 + 500);
    EXPECT_EQ(a.pending_batch(writer), 0u);
    w.settle();
    EXPECT_EQ(b.take(r).size(), 1u);
}

TEST(Participant, HistoryDepthDropsOldest) {
    World w;
    auto &a = w.make("a");
    auto &b = w.make("b");
    auto  r = b.create_reader("temp", std::nullopt, QosProfile{{}, Reliability::Reliable, 2, {}, {}});
    auto  writer = a.create_writer("temp", {});
    w.settle();
    for (int i = 1; i <= 5; ++i) a.write(writer, reading(i));
    w.settle();
    auto kept = b.take(r);
    ASSERT_EQ(kept.size(), 2u);
    EXPECT_EQ(kept[0].publication_seq, 4u);
    EXPECT_EQ(kept[1].publication_seq, 5u);
    EXPECT_EQ(b.stats().history_overflows, 3u);
    EXPECT_TRUE(b.take(r).empty());
}

TEST(Participant, DisposeRemovesEndpoints) {
    World w;
    auto &a = w.make("a");
    auto &b = w.make("b");
    b.create_reader("temp", std::nullopt, {});
    b.create_writer("temp", {});
    w.settle();
    EXPECT_EQ(a.discovery_db().size(), 2u);
    w.factory.delete_participant("b");
    w.settle();
    EXPECT_TRUE(a.discovery_db().empty());
}

TEST(Participant, DeletedEndpointDisappears) {
    World w;
    auto &a = w.make("a");
    auto &b = w.make("b");
    auto  r = b.create_reader("temp", std::nullopt, {});
    w.settle();
    EXPECT_TRUE(a.discovery_db().contains(r));
    b.delete_endpoint(r);
    w.settle();
    EXPECT_FALSE(a.discovery_db().contains(r));
}

TEST(Participant, PeriodicAnnouncementsRepeat) {
    sim::Kernel        kernel(3);
    TestBus            bus(kernel);
    ParticipantFactory factory(kernel);
    auto              &port = bus.port("h");
    auto              &p    = factory.create_participant(port, ParticipantConfig{0, "p", 1'000'000});
    port.participant        = &p;
    kernel.run_until(3'500'000);
    EXPECT_GE(p.stats().announcements_sent, 3u);
    EXPECT_LE(p.stats().announcements_sent, 5u);
}

TEST(Multichannel, RoutesByChannelFilter) {
    World w;
    auto &a      = w.make("a");
    auto  writer = a.create_writer("temp", {},
                                  {Channel{FilterExpression::parse("temperature < 50"), "mc:A"},
                                   Channel{FilterExpression::parse("temperature >= 50"), "mc:B"}});
    DataSample s{"temp", reading(60), 1, writer};
    EXPECT_EQ(a.route_multichannel(writer, s), std::vector<std::string>{"mc:B"});
    s.fields = reading(10);
    EXPECT_EQ(a.route_multichannel(writer, s), std::vector<std::string>{"mc:A"});
}

TEST(Multichannel, OverlappingChannelsInOrder) {
    World w;
    auto &a      = w.make("a");
    auto  writer = a.create_writer("temp", {},
                                  {Channel{FilterExpression::parse("temperature > 0"), "mc:A"},
                                   Channel{FilterExpression::parse("temperature > 50"), "mc:B"}});
    DataSample s{"temp", reading(60), 1, writer};
    EXPECT_EQ(a.route_multichannel(writer, s), (std::vector<std::string>{"mc:A", "mc:B"}));
}

TEST(Multichannel, RejectsBadChannelLists) {
    World w;
    auto &a = w.make("a");
    EXPECT_EQ(code_of([&] {
                  a.create_writer("temp", {},
                                  {Channel{FilterExpression::parse("temperature > 0"), "mc:A"},
                                   Channel{FilterExpression::parse("temperature > 1"), "mc:A"}});
              }),
              ErrorCode::InvalidOperation);
    QosProfile q;
    q.batching = Batching{2, 10};
    EXPECT_EQ(code_of([&] { a.create_writer("temp", q, {Channel{FilterExpression::parse("temperature > 0"), "mc:A"}}); }),
              ErrorCode::InvalidOperation);
}

TEST(Multichannel, EvaluationErrorIsSchemaMismatch) {
    World w;
    auto &a      = w.make("a");
    auto  writer = a.create_writer("temp", {}, {Channel{FilterExpression::parse("site > 3"), "mc:A"}});
    DataSample s{"temp", reading(1), 1, writer};
    EXPECT_EQ(code_of([&] { a.route_multichannel(writer, s); }), ErrorCode::SchemaMismatch);
}

TEST(Topic, ConformanceRules) {
    auto t = temp_topic();
    EXPECT_NO_THROW(t.check_conforms(reading(1)));
    EXPECT_EQ(code_of([&] { t.check_conforms({{"temperature", std::int64_t{1}}}); }), ErrorCode::SchemaMismatch);
    EXPECT_EQ(code_of([&] { t.check_conforms({{"temperature", std::string("x")}, {"site", std::string("a")}}); }),
              ErrorCode::SchemaMismatch);
}

TEST(QosProfile, Validation) {
    QosProfile q;
    q.history_depth = 0;
    EXPECT_EQ(code_of([&] { q.validate(); }), ErrorCode::InvalidOperation);
    q.history_depth = 1;
    q.batching      = Batching{0, 0};
    EXPECT_EQ(code_of([&] { q.validate(); }), ErrorCode::InvalidOperation);
    q.batching = std::nullopt;
    q.dscp     = 64;
    EXPECT_EQ(code_of([&] { q.validate(); }), ErrorCode::InvalidOperation);
}

// ---- properties -----------------------------------------------------------

/// A filter over temperature/site with an independent evaluator.
struct GeneratedFilter {
    std::string                              text;
    std::function<bool(std::int64_t, const std::string &)> eval;
};

GeneratedFilter gen_filter(std::mt19937_64 &rng, int depth = 0) {
    std::uniform_int_distribution<int> pick(0, depth >= 2 ? 1 : 4);
    std::uniform_int_distribution<int> num(0, 100);
    const int                          k = pick(rng);
    if (k == 0) {
        const int  t  = num(rng);
        const int  op = static_cast<int>(rng() % 6);
        const char *ops[] = {"=", "<>", "<", "<=", ">", ">="};
        return {"temperature " + std::string(ops[op]) + " " + std::to_string(t), [t, op](std::int64_t v, const std::string &) {
                    switch (op) {
                    case 0: return v == t;
                    case 1: return v != t;
                    case 2: return v < t;
                    case 3: return v <= t;
                    case 4: return v > t;
                    default: return v >= t;
                    }
                }};
    }
    if (k == 1) {
        const std::string site = (rng() % 2) ? "a" : "b";
        const bool        eq   = rng() % 2;
        return {"site " + std::string(eq ? "=" : "<>") + " '" + site + "'",
                [site, eq](std::int64_t, const std::string &s) { return (s == site) == eq; }};
    }
    if (k == 2) {
        auto inner = gen_filter(rng, depth + 1);
        return {"NOT (" + inner.text + ")", [inner](std::int64_t v, const std::string &s) { return !inner.eval(v, s); }};
    }
    auto       l   = gen_filter(rng, depth + 1);
    auto       r   = gen_filter(rng, depth + 1);
    const bool and_ = k == 3;
    return {"(" + l.text + (and_ ? ") AND (" : ") OR (") + r.text + ")", [l, r, and_](std::int64_t v, const std::string &s) {
                return and_ ? (l.eval(v, s) && r.eval(v, s)) : (l.eval(v, s) || r.eval(v, s));
            }};
}

TEST(PubsubProperty, FilteredDeliveryMatchesReplayOracle) {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 60; ++trial) {
        World     w(trial);
        auto     &a = w.make("a");
        auto     &b = w.make("b");
        auto      f = gen_filter(rng);
        Collected got;
        b.create_reader("temp", FilterExpression::parse(f.text), QosProfile{{}, Reliability::Reliable, 1000, {}, {}}, got.listener());
        auto writer = a.create_writer("temp", {});
        w.settle();

        std::vector<std::uint64_t> expected;
        const int                  n = 1 + static_cast<int>(rng() % 40);
        for (int i = 0; i < n; ++i) {
            const auto        t    = static_cast<std::int64_t>(rng() % 101);
            const std::string site = (rng() % 2) ? "a" : "b";
            const auto        seq  = a.write(writer, reading(t, site)).publication_seq;
            if (f.eval(t, site)) expected.push_back(seq);
        }
        w.settle();
        std::vector<std::uint64_t> delivered;
        for (const auto &s : got.samples) delivered.push_back(s.publication_seq);
        ASSERT_EQ(delivered, expected) << f.text;
    }
}

TEST(PubsubProperty, PartitionIsolationExhaustive) {
    const std::vector<std::set<std::string>> sets = {{}, {"x"}, {"y"}, {"x", "y"}, {""}, {"", "x"}};
    auto effective = [](const std::set<std::string> &s) { return s.empty() ? std::set<std::string>{""} : s; };
    for (const auto &wp : sets) {
        for (const auto &rp : sets) {
            World      w;
            auto      &a = w.make("a");
            auto      &b = w.make("b");
            Collected  got;
            QosProfile rq;
            rq.partitions = rp;
            b.create_reader("temp", std::nullopt, rq, got.listener());
            QosProfile wq;
            wq.partitions = wp;
            auto writer   = a.create_writer("temp", wq);
            w.settle();
            a.write(writer, reading(1));
            w.settle();

            bool overlap = false;
            for (const auto &p : effective(wp)) overlap |= effective(rp).contains(p);
            EXPECT_EQ(got.samples.size(), overlap ? 1u : 0u);
            if (!wp.empty() && !rp.empty()) {
                bool disjoint = true;
                for (const auto &p : wp) disjoint &= !rp.contains(p);
                if (disjoint) EXPECT_TRUE(got.samples.empty());
            }
        }
    }
}

TEST(PubsubProperty, BatchingConservesSamples) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n   = 1 + rng() % 30;
        const std::size_t max = 1 + rng() % 6;
        std::vector<std::int64_t> temps;
        for (std::size_t i = 0; i < n; ++i) temps.push_back(static_cast<std::int64_t>(rng() % 100));
        const auto f = gen_filter(rng);

        auto run = [&](bool batching, std::size_t &packets) {
            World     w(trial);
            auto     &a = w.make("a");
            auto     &b = w.make("b");
            Collected got;
            b.create_reader("temp", FilterExpression::parse(f.text), QosProfile{{}, Reliability::Reliable, 1000, {}, {}}, got.listener());
            QosProfile q;
            if (batching) q.batching = Batching{max, 1'000'000'000};
            auto writer = a.create_writer("temp", q);
            w.settle();
            const auto before = a.stats().data_packets_sent;
            for (auto t : temps) a.write(writer, reading(t));
            if (batching) a.flush(writer);
            packets = a.stats().data_packets_sent - before;
            w.settle();
            return got.temps();
        };
        std::size_t unbatched_packets = 0;
        std::size_t batched_packets   = 0;
        const auto  plain             = run(false, unbatched_packets);
        const auto  batched           = run(true, batched_packets);
        ASSERT_EQ(plain, batched);
        std::size_t wanted_chunks = 0;
        for (std::size_t i = 0; i < n; i += max) {
            bool any = false;
            for (std::size_t j = i; j < std::min(n, i + max); ++j) any |= f.eval(temps[j], "a");
            wanted_chunks += any;
        }
        EXPECT_EQ(batched_packets, wanted_chunks);
        if (std::all_of(temps.begin(), temps.end(), [&](auto t) { return f.eval(t, "a"); })) {
            EXPECT_EQ(batched_packets, (n + max - 1) / max);
        }
    }
}

TEST(PubsubProperty, MultichannelUnionEqualsDisjunction) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        const int                    channels = 1 + static_cast<int>(rng() % 3);
        std::vector<GeneratedFilter> filters;
        for (int c = 0; c < channels; ++c) filters.push_back(gen_filter(rng));
        std::vector<std::pair<std::int64_t, std::string>> writes;
        for (int i = 0; i < 25; ++i) writes.emplace_back(static_cast<std::int64_t>(rng() % 101), (rng() % 2) ? "a" : "b");

        auto run = [&](bool multichannel) {
            World     w(trial);
            auto     &a = w.make("a");
            auto     &b = w.make("b");
            Collected got;
            b.create_reader("temp", std::nullopt, QosProfile{{}, Reliability::Reliable, 1000, {}, {}}, got.listener());
            EndpointId writer;
            if (multichannel) {
                std::vector<Channel> list;
                for (int c = 0; c < channels; ++c) list.push_back({FilterExpression::parse(filters[c].text), "mc:ch" + std::to_string(c)});
                writer = a.create_writer("temp", {}, list);
            } else {
                auto any = FilterExpression::parse(filters[0].text);
                for (int c = 1; c < channels; ++c) any = FilterExpression::disjunction(any, FilterExpression::parse(filters[c].text));
                writer = a.create_writer("temp", {}, {Channel{any, "mc:all"}});
            }
            w.settle();
            for (const auto &[t, s] : writes) a.write(writer, reading(t, s));
            w.settle();
            std::vector<std::uint64_t> seqs;
            for (const auto &s : got.samples) seqs.push_back(s.publication_seq);
            return seqs;
        };
        const auto union_seqs = run(true);
        ASSERT_EQ(union_seqs, run(false));
        std::vector<std::uint64_t> oracle;
        for (std::size_t i = 0; i < writes.size(); ++i) {
            bool any = false;
            for (const auto &f : filters) any |= f.eval(writes[i].first, writes[i].second);
            if (any) oracle.push_back(i + 1);
        }
        EXPECT_EQ(union_seqs, oracle);
    }
}

TEST(PubsubProperty, DiscoveryConvergesToOmniscientView) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        World                                   w(trial);
        std::vector<DomainParticipant *>        all;
        const int                               n = 2 + static_cast<int>(rng() % 5);
        for (int i = 0; i < n; ++i) all.push_back(&w.make("p" + std::to_string(i), static_cast<DomainId>(rng() % 2)));
        for (int step = 0; step < 12; ++step) {
            auto &p = *all[rng() % all.size()];
            if (rng() % 2) p.create_writer("temp", {});
            else p.create_reader("temp", std::nullopt, {});
            if (rng() % 3 == 0) w.kernel.run_until(w.kernel.now() + static_cast<sim::Duration>(rng() % 20));
        }
        if (rng() % 2) {
            auto victim = all.back();
            all.pop_back();
            w.settle();
            w.factory.delete_participant(victim->id());
        }
        w.settle();
        for (auto *p : all) {
            std::set<EndpointId> oracle;
            for (auto *q : all) {
                if (q == p || q->domain_id() != p->domain_id()) continue;
                for (const auto &e : q->local_endpoints()) oracle.insert(e.endpoint_id);
            }
            std::set<EndpointId> db;
            for (const auto &[id, rec] : p->discovery_db()) {
                db.insert(id);
                EXPECT_EQ(rec.domain_id, p->domain_id());
            }
            ASSERT_EQ(db, oracle) << "trial " << trial << " participant " << p->id();
        }
    }
}

TEST(Wire, RoundTripProperty) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        SampleBatch batch;
        batch.writer_id   = "w" + std::to_string(rng() % 100);
        batch.domain_id   = static_cast<DomainId>(rng() % 4);
        batch.topic_name  = "t";
        batch.type_name   = "T";
        batch.reliability = (rng() % 2) ? Reliability::Reliable : Reliability::BestEffort;
        if (rng() % 2) batch.partitions = {"x", "y"};
        const int n = static_cast<int>(rng() % 5);
        for (int i = 0; i < n; ++i) {
            DataSample s;
            s.topic_name      = "t";
            s.publication_seq = rng() % 1000;
            s.source_writer   = batch.writer_id;
            s.fields["i"]     = static_cast<std::int64_t>(rng()) ;
            s.fields["d"]     = static_cast<double>(rng() % 1000) / 8.0;
            s.fields["s"]     = std::string(rng() % 6, 'q');
            batch.samples.push_back(s);
        }
        const auto bytes = encode(batch);
        ASSERT_EQ(decode_batch(bytes), batch);
        if (!bytes.empty()) {
            EXPECT_EQ(code_of([&] { decode_batch(std::span(bytes).first(bytes.size() - 1)); }), ErrorCode::InvalidOperation);
        }
        dataplane::Packet pkt("a", "b", dataplane::Protocol::Data, 0, batch);
        EXPECT_EQ(pkt.size_bytes, 32 + bytes.size());

        Announcement ann;
        ann.domain_id      = batch.domain_id;
        ann.participant_id = "p";
        ann.address        = "h";
        ann.disposed       = rng() % 2;
        auto rec           = record(EndpointKind::Reader, batch.partitions, batch.domain_id);
        rec.location       = "h";
        if (rng() % 2) rec.filter = FilterExpression::parse("temperature > 3 AND NOT site = 'x'");
        ann.endpoints.push_back(rec);
        const auto abytes  = encode(ann);
        const auto decoded = decode_announcement(abytes);
        ASSERT_EQ(decoded.endpoints.size(), 1u);
        EXPECT_EQ(decoded, ann);
    }
}

} // namespace
} // namespace psdn::pubsub

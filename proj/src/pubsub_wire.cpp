#include "psdn/pubsub/wire.hpp"

#include "psdn/error.hpp"

#include <bit>
#include <cstring>

namespace psdn::pubsub {

namespace {

class Writer {
public:
    template<typename T>
    void integral(T v) {
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            _out.push_back(static_cast<std::byte>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
        }
    }

    void str(std::string_view s) {
        integral<std::uint16_t>(static_cast<std::uint16_t>(s.size()));
        for (char c : s) {
            _out.push_back(static_cast<std::byte>(c));
        }
    }

    void value(const Value &v) {
        integral<std::uint8_t>(static_cast<std::uint8_t>(v.index()));
        switch (kind_of(v)) {
        case FieldKind::Integer: integral<std::uint64_t>(static_cast<std::uint64_t>(std::get<std::int64_t>(v))); break;
        case FieldKind::Decimal: integral<std::uint64_t>(std::bit_cast<std::uint64_t>(std::get<double>(v))); break;
        case FieldKind::String: str(std::get<std::string>(v)); break;
        }
    }

    void strings(const std::set<std::string> &set) {
        integral<std::uint16_t>(static_cast<std::uint16_t>(set.size()));
        for (const auto &s : set) {
            str(s);
        }
    }

    std::vector<std::byte> take() { return std::move(_out); }

private:
    std::vector<std::byte> _out;
};

class Reader {
public:
    explicit Reader(std::span<const std::byte> in) : _in(in) {}

    template<typename T>
    T integral() {
        need(sizeof(T));
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            v |= static_cast<std::uint64_t>(_in[_pos + i]) << (8 * i);
        }
        _pos += sizeof(T);
        return static_cast<T>(v);
    }

    std::string str() {
        const auto  n = integral<std::uint16_t>();
        need(n);
        std::string out(n, '\0');
        std::memcpy(out.data(), _in.data() + _pos, n);
        _pos += n;
        return out;
    }

    Value value() {
        switch (integral<std::uint8_t>()) {
        case 0: return static_cast<std::int64_t>(integral<std::uint64_t>());
        case 1: return std::bit_cast<double>(integral<std::uint64_t>());
        case 2: return str();
        default: throw Error(ErrorCode::InvalidOperation, "bad value tag");
        }
    }

    std::set<std::string> strings() {
        std::set<std::string> out;
        const auto            n = integral<std::uint16_t>();
        for (std::uint16_t i = 0; i < n; ++i) {
            out.insert(str());
        }
        return out;
    }

    void finish() const {
        if (_pos != _in.size()) {
            throw Error(ErrorCode::InvalidOperation, "trailing bytes in payload");
        }
    }

private:
    void need(std::size_t n) const {
        if (_pos + n > _in.size()) {
            throw Error(ErrorCode::InvalidOperation, "truncated payload");
        }
    }

    std::span<const std::byte> _in;
    std::size_t                _pos = 0;
};

void put_sample(Writer &w, const DataSample &s) {
    w.str(s.topic_name);
    w.str(s.source_writer);
    w.integral<std::uint64_t>(s.publication_seq);
    w.integral<std::uint16_t>(static_cast<std::uint16_t>(s.fields.size()));
    for (const auto &[path, value] : s.fields) {
        w.str(path);
        w.value(value);
    }
}

DataSample get_sample(Reader &r) {
    DataSample s;
    s.topic_name      = r.str();
    s.source_writer   = r.str();
    s.publication_seq = r.integral<std::uint64_t>();
    const auto n      = r.integral<std::uint16_t>();
    for (std::uint16_t i = 0; i < n; ++i) {
        auto path      = r.str();
        s.fields[path] = r.value();
    }
    return s;
}

void put_endpoint(Writer &w, const EndpointRecord &e) {
    w.str(e.endpoint_id);
    w.str(e.participant_id);
    w.integral<std::uint32_t>(e.domain_id);
    w.integral<std::uint8_t>(static_cast<std::uint8_t>(e.kind));
    w.str(e.topic_name);
    w.str(e.type_name);
    w.strings(e.partitions);
    w.str(e.filter ? filter::print_canonical(*e.filter) : std::string());
    w.str(e.location);
    w.integral<std::uint8_t>(static_cast<std::uint8_t>(e.reliability));
}

EndpointRecord get_endpoint(Reader &r) {
    EndpointRecord e;
    e.endpoint_id    = r.str();
    e.participant_id = r.str();
    e.domain_id      = r.integral<std::uint32_t>();
    e.kind           = static_cast<EndpointKind>(r.integral<std::uint8_t>());
    e.topic_name     = r.str();
    e.type_name      = r.str();
    e.partitions     = r.strings();
    if (auto text = r.str(); !text.empty()) {
        e.filter = filter::FilterExpression::parse(text);
    }
    e.location    = r.str();
    e.reliability = static_cast<Reliability>(r.integral<std::uint8_t>());
    return e;
}

} // namespace

std::vector<std::byte> encode(const SampleBatch &batch) {
    Writer w;
    w.str(batch.writer_id);
    w.integral<std::uint32_t>(batch.domain_id);
    w.str(batch.topic_name);
    w.str(batch.type_name);
    w.strings(batch.partitions);
    w.integral<std::uint8_t>(static_cast<std::uint8_t>(batch.reliability));
    w.integral<std::uint16_t>(static_cast<std::uint16_t>(batch.samples.size()));
    for (const auto &s : batch.samples) {
        put_sample(w, s);
    }
    return w.take();
}

std::vector<std::byte> encode(const Announcement &a) {
    Writer w;
    w.integral<std::uint32_t>(a.domain_id);
    w.str(a.participant_id);
    w.str(a.address);
    w.integral<std::uint8_t>(a.disposed ? 1 : 0);
    w.integral<std::uint16_t>(static_cast<std::uint16_t>(a.endpoints.size()));
    for (const auto &e : a.endpoints) {
        put_endpoint(w, e);
    }
    return w.take();
}

SampleBatch decode_batch(std::span<const std::byte> bytes) {
    Reader      r(bytes);
    SampleBatch b;
    b.writer_id   = r.str();
    b.domain_id   = r.integral<std::uint32_t>();
    b.topic_name  = r.str();
    b.type_name   = r.str();
    b.partitions  = r.strings();
    b.reliability = static_cast<Reliability>(r.integral<std::uint8_t>());
    const auto n  = r.integral<std::uint16_t>();
    for (std::uint16_t i = 0; i < n; ++i) {
        b.samples.push_back(get_sample(r));
    }
    r.finish();
    return b;
}

Announcement decode_announcement(std::span<const std::byte> bytes) {
    Reader       r(bytes);
    Announcement a;
    a.domain_id      = r.integral<std::uint32_t>();
    a.participant_id = r.str();
    a.address        = r.str();
    a.disposed       = r.integral<std::uint8_t>() != 0;
    const auto n     = r.integral<std::uint16_t>();
    for (std::uint16_t i = 0; i < n; ++i) {
        a.endpoints.push_back(get_endpoint(r));
    }
    r.finish();
    return a;
}

} // namespace psdn::pubsub

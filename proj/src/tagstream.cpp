#include "biphoton/tagstream.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <ostream>
#include <queue>

namespace biphoton {

namespace {

const char kMagic[4] = {'B', 'P', 'T', 'S'};

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

std::uint16_t get_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (std::uint16_t(p[1]) << 8));
}

std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

std::string kind_message(TagStreamError::Kind kind, std::size_t offset) {
    const char* what = "tag stream error";
    switch (kind) {
        case TagStreamError::Kind::bad_magic: what = "bad magic"; break;
        case TagStreamError::Kind::bad_version: what = "unsupported version"; break;
        case TagStreamError::Kind::truncated_header: what = "truncated header"; break;
        case TagStreamError::Kind::truncated_record: what = "truncated record"; break;
        case TagStreamError::Kind::non_monotone: what = "non-monotone timestamps"; break;
        case TagStreamError::Kind::misaligned_tick: what = "timestamp not a tick multiple"; break;
        case TagStreamError::Kind::out_of_range: what = "timestamp beyond stream duration"; break;
        case TagStreamError::Kind::tick_mismatch: what = "tick mismatch between streams"; break;
    }
    return std::string(what) + " at byte offset " + std::to_string(offset);
}

}  // namespace

TagStreamError::TagStreamError(Kind kind, std::size_t byte_offset, const std::string& what)
    : std::runtime_error(what), kind_(kind), offset_(byte_offset) {}

void TagStream::validate() const {
    if (header.tick_ps == 0)
        throw TagStreamError(TagStreamError::Kind::misaligned_tick, 0, "tick_ps must be nonzero");
    std::uint64_t prev_time = 0;
    std::uint16_t prev_channel = 0;
    bool first = true;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const std::size_t offset = kTagStreamHeaderSize + i * kTagRecordSize;
        const TimeTag& tag = records[i];
        if (!first && (tag.time_ps < prev_time ||
                       (tag.time_ps == prev_time && tag.channel < prev_channel)))
            throw TagStreamError(TagStreamError::Kind::non_monotone, offset,
                                 kind_message(TagStreamError::Kind::non_monotone, offset));
        if (tag.time_ps % header.tick_ps != 0)
            throw TagStreamError(TagStreamError::Kind::misaligned_tick, offset,
                                 kind_message(TagStreamError::Kind::misaligned_tick, offset));
        if (tag.time_ps > header.duration_ps)
            throw TagStreamError(TagStreamError::Kind::out_of_range, offset,
                                 kind_message(TagStreamError::Kind::out_of_range, offset));
        prev_time = tag.time_ps;
        prev_channel = tag.channel;
        first = false;
    }
}

std::vector<std::uint8_t> encode(const TagStream& stream) {
    stream.validate();
    std::vector<std::uint8_t> out;
    out.reserve(kTagStreamHeaderSize + stream.records.size() * kTagRecordSize);
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u16(out, stream.header.version);
    put_u16(out, 0);  // reserved
    put_u64(out, stream.header.tick_ps);
    put_u64(out, stream.header.duration_ps);
    put_u16(out, stream.header.channel_count);
    for (int i = 0; i < 6; ++i) out.push_back(0);
    for (const TimeTag& tag : stream.records) {
        put_u64(out, tag.time_ps);
        put_u16(out, tag.channel);
        put_u16(out, tag.flags);
    }
    return out;
}

TagStream decode(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kTagStreamHeaderSize)
        throw TagStreamError(TagStreamError::Kind::truncated_header, bytes.size(),
                             kind_message(TagStreamError::Kind::truncated_header, bytes.size()));
    if (std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw TagStreamError(TagStreamError::Kind::bad_magic, 0,
                             kind_message(TagStreamError::Kind::bad_magic, 0));
    TagStream stream;
    stream.header.version = get_u16(bytes.data() + 4);
    if (stream.header.version != 1)
        throw TagStreamError(TagStreamError::Kind::bad_version, 4,
                             kind_message(TagStreamError::Kind::bad_version, 4));
    stream.header.tick_ps = get_u64(bytes.data() + 8);
    stream.header.duration_ps = get_u64(bytes.data() + 16);
    stream.header.channel_count = get_u16(bytes.data() + 24);

    const std::size_t payload = bytes.size() - kTagStreamHeaderSize;
    if (payload % kTagRecordSize != 0) {
        const std::size_t offset = bytes.size() - payload % kTagRecordSize;
        throw TagStreamError(TagStreamError::Kind::truncated_record, offset,
                             kind_message(TagStreamError::Kind::truncated_record, offset));
    }
    const std::size_t count = payload / kTagRecordSize;
    stream.records.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint8_t* p = bytes.data() + kTagStreamHeaderSize + i * kTagRecordSize;
        stream.records[i].time_ps = get_u64(p);
        stream.records[i].channel = get_u16(p + 8);
        stream.records[i].flags = get_u16(p + 10);
    }
    stream.validate();
    return stream;
}

TagStream merge(std::span<const TagStream> streams) {
    if (streams.empty()) return {};
    TagStream out;
    out.header = streams.front().header;
    std::size_t total = 0;
    for (std::size_t s = 0; s < streams.size(); ++s) {
        if (streams[s].header.tick_ps != out.header.tick_ps)
            throw TagStreamError(TagStreamError::Kind::tick_mismatch, 8,
                                 kind_message(TagStreamError::Kind::tick_mismatch, 8));
        out.header.duration_ps = std::max(out.header.duration_ps, streams[s].header.duration_ps);
        out.header.channel_count =
            std::max(out.header.channel_count, streams[s].header.channel_count);
        total += streams[s].records.size();
    }

    struct Cursor {
        std::uint64_t time;
        std::uint16_t channel;
        std::size_t stream_index;
        std::size_t record_index;
        bool operator>(const Cursor& o) const {
            if (time != o.time) return time > o.time;
            if (channel != o.channel) return channel > o.channel;
            return stream_index > o.stream_index;
        }
    };

    std::priority_queue<Cursor, std::vector<Cursor>, std::greater<>> heap;
    for (std::size_t s = 0; s < streams.size(); ++s) {
        if (!streams[s].records.empty()) {
            const TimeTag& t = streams[s].records.front();
            heap.push({t.time_ps, t.channel, s, 0});
        }
    }

    out.records.reserve(total);
    while (!heap.empty()) {
        Cursor c = heap.top();
        heap.pop();
        out.records.push_back(streams[c.stream_index].records[c.record_index]);
        const std::size_t next = c.record_index + 1;
        if (next < streams[c.stream_index].records.size()) {
            const TimeTag& t = streams[c.stream_index].records[next];
            heap.push({t.time_ps, t.channel, c.stream_index, next});
        }
    }
    return out;
}

void write_bpts(const TagStream& stream, const std::filesystem::path& path) {
    const auto bytes = encode(stream);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
    os.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

TagStream read_bpts(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                    std::istreambuf_iterator<char>());
    return decode(bytes);
}

void write_tags_csv(const TagStream& stream, std::ostream& os) {
    os << "time_ps,channel,flags\n";
    for (const TimeTag& tag : stream.records)
        os << tag.time_ps << ',' << tag.channel << ',' << tag.flags << '\n';
}

std::vector<std::uint64_t> channel_times(const TagStream& stream, std::uint16_t channel) {
    std::vector<std::uint64_t> times;
    for (const TimeTag& tag : stream.records)
        if (tag.channel == channel) times.push_back(tag.time_ps);
    return times;
}

}  // namespace biphoton

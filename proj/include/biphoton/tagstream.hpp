#pragma once

// Canonical time-tag record and the .bpts container.
//
// Binary layout (little-endian), bit-exact:
//   header, 32 bytes: magic "BPTS", u16 version=1, u16 reserved=0,
//                     u64 tick_ps, u64 duration_ps, u16 channel_count,
//                     6 bytes zero padding
//   record, 12 bytes: u64 time_ps, u16 channel, u16 flags
//
// Records are nondecreasing in time with ties broken by channel; every time
// is a multiple of tick_ps and <= duration_ps.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace biphoton {

struct TimeTag {
    std::uint64_t time_ps = 0;
    std::uint16_t channel = 0;
    std::uint16_t flags = 0;  // bit 0: dark-count marker (simulation provenance)

    friend bool operator==(const TimeTag&, const TimeTag&) = default;
};

inline constexpr std::uint16_t kTagFlagDark = 1u << 0;

struct TagStreamHeader {
    std::uint16_t version = 1;
    std::uint64_t tick_ps = 84;
    std::uint64_t duration_ps = 0;
    std::uint16_t channel_count = 1;

    friend bool operator==(const TagStreamHeader&, const TagStreamHeader&) = default;
};

struct TagStream {
    TagStreamHeader header;
    std::vector<TimeTag> records;

    void validate() const;  // throws TagStreamError on invariant violations
    double duration_s() const { return static_cast<double>(header.duration_ps) * 1e-12; }

    friend bool operator==(const TagStream&, const TagStream&) = default;
};

class TagStreamError : public std::runtime_error {
public:
    enum class Kind {
        bad_magic,
        bad_version,
        truncated_header,
        truncated_record,
        non_monotone,
        misaligned_tick,
        out_of_range,
        tick_mismatch,
    };

    TagStreamError(Kind kind, std::size_t byte_offset, const std::string& what);

    Kind kind() const { return kind_; }
    std::size_t byte_offset() const { return offset_; }

private:
    Kind kind_;
    std::size_t offset_;
};

inline constexpr std::size_t kTagStreamHeaderSize = 32;
inline constexpr std::size_t kTagRecordSize = 12;

std::vector<std::uint8_t> encode(const TagStream& stream);
TagStream decode(std::span<const std::uint8_t> bytes);

// k-way merge; inputs must share tick_ps.  Stable tie-break by
// (time, channel, input index); output duration/channel_count cover all inputs.
TagStream merge(std::span<const TagStream> streams);

void write_bpts(const TagStream& stream, const std::filesystem::path& path);
TagStream read_bpts(const std::filesystem::path& path);

// CSV alternative: header `time_ps,channel,flags`.
void write_tags_csv(const TagStream& stream, std::ostream& os);

// Times of all records on `channel`, in stream order.
std::vector<std::uint64_t> channel_times(const TagStream& stream, std::uint16_t channel);

}  // namespace biphoton

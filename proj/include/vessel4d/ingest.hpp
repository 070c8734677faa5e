#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "vessel4d/types.hpp"

namespace vessel4d {

struct Primitive {
  std::int64_t id = 0;
  Vec3 position = Vec3::Zero();
  Vec3 color = Vec3::Zero();
  double radius = 0.0;
  double opacity = 0.0;

  bool operator==(const Primitive&) const = default;
};

/// One time step. `primitives[n]` belongs to track `PrimitiveSequence::ids[n]`.
struct Frame {
  std::vector<Primitive> primitives;
  /// Per-track observation flag; empty means every track is observed. The
  /// loader always produces fully observed frames, but in-memory producers
  /// (tests, degraders) may drop observations.
  std::vector<std::uint8_t> observed;

  bool is_observed(std::size_t n) const { return observed.empty() || observed[n] != 0; }
  bool operator==(const Frame&) const = default;
};

/// Tracked primitives over T frames. Track order is ascending id.
struct PrimitiveSequence {
  std::vector<std::int64_t> ids;
  std::vector<Frame> frames;
  double frame_rate_hz = 0.0;  // metadata only, not serialized

  std::size_t frame_count() const { return frames.size(); }
  std::size_t track_count() const { return ids.size(); }

  /// Frame-0 positions in track order.
  PointCloud positions(std::size_t frame) const;

  bool same_tracks(const PrimitiveSequence& other) const {
    return ids == other.ids && frames == other.frames;
  }
};

enum class SequenceFormat { csv, jsonl };

SequenceFormat format_from_path(const std::filesystem::path& path);
SequenceFormat parse_sequence_format(std::string_view name);

/// Checks the tracked-primitive and attribute invariants; throws InvariantError.
void validate_sequence(const PrimitiveSequence& seq);

/// Reads `frame,id,x,y,z,r,g,b,radius,opacity` rows. Column order is free,
/// extra columns are ignored. `source` is used in error messages only.
PrimitiveSequence read_sequence(std::istream& in, SequenceFormat format,
                                std::string_view source = "<stream>");
PrimitiveSequence load_sequence(const std::filesystem::path& path, SequenceFormat format);
PrimitiveSequence load_sequence(const std::filesystem::path& path);

/// Shortest round-trip decimal output; unobserved track slots are omitted.
void write_sequence(std::ostream& out, const PrimitiveSequence& seq, SequenceFormat format);
void write_sequence(const std::filesystem::path& path, const PrimitiveSequence& seq,
                    SequenceFormat format);
void write_sequence(const std::filesystem::path& path, const PrimitiveSequence& seq);

struct FilterThresholds {
  double min_radius_mm = 0.07;
  double min_opacity = 0.05;
  double min_rgb_std = 0.05;
};

/// Population standard deviation of the three color channels.
double rgb_std(const Vec3& color);

/// Drops whole tracks whose frame-0 primitive has radius, opacity or RGB
/// spread below the thresholds. Survivor data is copied unchanged.
PrimitiveSequence filter_primitives(const PrimitiveSequence& seq, const FilterThresholds& thresholds);

}  // namespace vessel4d

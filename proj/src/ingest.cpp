#include "vessel4d/ingest.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>

#include "json.hpp"

#include "vessel4d/error.hpp"
#include "vessel4d/textio.hpp"

namespace vessel4d {
namespace {

constexpr std::array<std::string_view, 10> kColumns = {"frame", "id", "x", "y",      "z",
                                                      "r",     "g",  "b", "radius", "opacity"};

struct Row {
  long long frame = 0;
  Primitive prim;
  std::size_t line = 0;
};

std::string where(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line);
}

void check_row_values(const Row& row, std::string_view source) {
  const auto& p = row.prim;
  const std::string ctx = where(source, row.line) + " (frame " + std::to_string(row.frame) +
                          ", id " + std::to_string(p.id) + ")";
  if (!p.position.allFinite() || !p.color.allFinite() || !std::isfinite(p.radius) ||
      !std::isfinite(p.opacity)) {
    throw ParseError(ctx + ": non-finite value");
  }
  if (row.frame < 0) throw ParseError(ctx + ": negative frame index");
  if (p.radius < 0.0) throw InvariantError(ctx + ": radius must be >= 0");
  if (p.opacity < 0.0 || p.opacity > 1.0) throw InvariantError(ctx + ": opacity outside [0,1]");
  for (int c = 0; c < 3; ++c) {
    if (p.color[c] < 0.0 || p.color[c] > 1.0) throw InvariantError(ctx + ": color outside [0,1]");
  }
}

std::vector<Row> read_csv_rows(std::istream& in, std::string_view source) {
  std::string line;
  std::size_t lineno = 0;
  std::array<int, kColumns.size()> col{};
  col.fill(-1);
  std::size_t header_width = 0;
  bool have_header = false;
  std::vector<Row> rows;

  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = textio::trim(line);
    if (view.empty() || view.front() == '#') continue;
    auto fields = textio::split(view, ',');
    if (!have_header) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        const auto name = textio::trim(fields[i]);
        for (std::size_t c = 0; c < kColumns.size(); ++c) {
          if (name == kColumns[c]) col[c] = static_cast<int>(i);
        }
      }
      for (std::size_t c = 0; c < kColumns.size(); ++c) {
        if (col[c] < 0) {
          throw ParseError(where(source, lineno) + ": missing column '" + std::string(kColumns[c]) + "'");
        }
      }
      header_width = fields.size();
      have_header = true;
      continue;
    }
    if (fields.size() != header_width) {
      throw ParseError(where(source, lineno) + ": expected " + std::to_string(header_width) +
                       " fields, got " + std::to_string(fields.size()));
    }
    Row row;
    row.line = lineno;
    long long id = 0;
    if (!textio::parse_int64(fields[col[0]], row.frame)) {
      throw ParseError(where(source, lineno) + ": bad frame index");
    }
    if (!textio::parse_int64(fields[col[1]], id)) throw ParseError(where(source, lineno) + ": bad id");
    row.prim.id = id;
    std::array<double, 8> v{};
    for (std::size_t c = 2; c < kColumns.size(); ++c) {
      if (!textio::parse_double(fields[col[c]], v[c - 2])) {
        throw ParseError(where(source, lineno) + ": bad value in column '" + std::string(kColumns[c]) + "'");
      }
    }
    row.prim.position = Vec3(v[0], v[1], v[2]);
    row.prim.color = Vec3(v[3], v[4], v[5]);
    row.prim.radius = v[6];
    row.prim.opacity = v[7];
    rows.push_back(row);
  }
  if (!have_header) throw ParseError(std::string(source) + ": empty input (no header)");
  return rows;
}

std::vector<Row> read_jsonl_rows(std::istream& in, std::string_view source) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (textio::trim(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(where(source, lineno) + ": " + e.what());
    }
    if (!obj.is_object()) throw ParseError(where(source, lineno) + ": expected a JSON object");
    for (auto key : kColumns) {
      if (!obj.contains(key) || !obj[std::string(key)].is_number()) {
        throw ParseError(where(source, lineno) + ": missing or non-numeric key '" + std::string(key) + "'");
      }
    }
    Row row;
    row.line = lineno;
    if (!obj["frame"].is_number_integer() || !obj["id"].is_number_integer()) {
      throw ParseError(where(source, lineno) + ": frame and id must be integers");
    }
    row.frame = obj["frame"].get<long long>();
    row.prim.id = obj["id"].get<long long>();
    row.prim.position = Vec3(obj["x"].get<double>(), obj["y"].get<double>(), obj["z"].get<double>());
    row.prim.color = Vec3(obj["r"].get<double>(), obj["g"].get<double>(), obj["b"].get<double>());
    row.prim.radius = obj["radius"].get<double>();
    row.prim.opacity = obj["opacity"].get<double>();
    rows.push_back(row);
  }
  return rows;
}

PrimitiveSequence assemble(std::vector<Row> rows, std::string_view source) {
  if (rows.empty()) throw ParseError(std::string(source) + ": no primitive rows");
  for (const auto& row : rows) check_row_values(row, source);

  long long max_frame = 0;
  for (const auto& row : rows) max_frame = std::max(max_frame, row.frame);
  if (static_cast<std::size_t>(max_frame) >= rows.size()) {
    throw InvariantError(std::string(source) + ": frame index " + std::to_string(max_frame) +
                         " leaves gaps (frame indices must be 0..T-1)");
  }
  const auto frame_count = static_cast<std::size_t>(max_frame) + 1;

  std::vector<std::size_t> rows_per_frame(frame_count, 0);
  for (const auto& row : rows) ++rows_per_frame[static_cast<std::size_t>(row.frame)];
  for (std::size_t t = 0; t < frame_count; ++t) {
    if (rows_per_frame[t] == 0) {
      throw InvariantError(std::string(source) + ": frame " + std::to_string(t) +
                           " has no rows (frame indices must be 0..T-1)");
    }
  }

  PrimitiveSequence seq;
  std::map<std::int64_t, std::size_t> first_line;
  for (const auto& row : rows) {
    if (row.frame != 0) continue;
    auto [it, inserted] = first_line.emplace(row.prim.id, row.line);
    if (!inserted) {
      throw ParseError(where(source, row.line) + ": duplicate id " + std::to_string(row.prim.id) +
                       " in frame 0 (first at line " + std::to_string(it->second) + ")");
    }
  }
  seq.ids.reserve(first_line.size());
  for (const auto& [id, line] : first_line) seq.ids.push_back(id);
  std::unordered_map<std::int64_t, std::size_t> index;
  index.reserve(seq.ids.size());
  for (std::size_t n = 0; n < seq.ids.size(); ++n) index.emplace(seq.ids[n], n);

  seq.frames.resize(frame_count);
  std::vector<std::vector<std::size_t>> seen_line(frame_count, std::vector<std::size_t>(seq.ids.size(), 0));
  for (auto& frame : seq.frames) frame.primitives.resize(seq.ids.size());
  for (const auto& row : rows) {
    const auto t = static_cast<std::size_t>(row.frame);
    auto it = index.find(row.prim.id);
    if (it == index.end()) continue;  // not tracked from frame 0
    auto& seen = seen_line[t][it->second];
    if (seen != 0) {
      throw ParseError(where(source, row.line) + ": duplicate id " + std::to_string(row.prim.id) +
                       " in frame " + std::to_string(t) + " (first at line " + std::to_string(seen) + ")");
    }
    seen = row.line;
    seq.frames[t].primitives[it->second] = row.prim;
  }
  for (std::size_t t = 1; t < frame_count; ++t) {
    for (std::size_t n = 0; n < seq.ids.size(); ++n) {
      if (seen_line[t][n] == 0) {
        throw InvariantError(std::string(source) + ": id " + std::to_string(seq.ids[n]) +
                             " present in frame 0 is missing from frame " + std::to_string(t));
      }
    }
  }
  return seq;
}

}  // namespace

PointCloud PrimitiveSequence::positions(std::size_t frame) const {
  PointCloud out;
  out.reserve(ids.size());
  for (const auto& p : frames.at(frame).primitives) out.push_back(p.position);
  return out;
}

SequenceFormat format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".jsonl" || ext == ".ndjson") return SequenceFormat::jsonl;
  return SequenceFormat::csv;
}

SequenceFormat parse_sequence_format(std::string_view name) {
  if (name == "csv") return SequenceFormat::csv;
  if (name == "jsonl") return SequenceFormat::jsonl;
  throw ConfigError("unknown sequence format '" + std::string(name) + "' (expected csv or jsonl)");
}

void validate_sequence(const PrimitiveSequence& seq) {
  if (seq.frames.empty()) throw InvariantError("sequence has no frames");
  const std::size_t n_tracks = seq.ids.size();
  if (!std::is_sorted(seq.ids.begin(), seq.ids.end()) ||
      std::adjacent_find(seq.ids.begin(), seq.ids.end()) != seq.ids.end()) {
    throw InvariantError("track ids must be strictly ascending");
  }
  for (std::size_t t = 0; t < seq.frames.size(); ++t) {
    const auto& frame = seq.frames[t];
    if (frame.primitives.size() != n_tracks) {
      throw InvariantError("frame " + std::to_string(t) + " has " + std::to_string(frame.primitives.size()) +
                           " slots for " + std::to_string(n_tracks) + " tracks");
    }
    if (!frame.observed.empty() && frame.observed.size() != n_tracks) {
      throw InvariantError("frame " + std::to_string(t) + " observation mask has wrong length");
    }
    for (std::size_t n = 0; n < n_tracks; ++n) {
      if (t == 0 && !frame.is_observed(n)) {
        throw InvariantError("track " + std::to_string(seq.ids[n]) + " unobserved in frame 0");
      }
      if (!frame.is_observed(n)) continue;
      Row row{static_cast<long long>(t), frame.primitives[n], 0};
      if (row.prim.id != seq.ids[n]) {
        throw InvariantError("frame " + std::to_string(t) + " slot " + std::to_string(n) + " holds id " +
                             std::to_string(row.prim.id) + ", expected " + std::to_string(seq.ids[n]));
      }
      check_row_values(row, "<memory>");
    }
  }
}

PrimitiveSequence read_sequence(std::istream& in, SequenceFormat format, std::string_view source) {
  auto rows = format == SequenceFormat::csv ? read_csv_rows(in, source) : read_jsonl_rows(in, source);
  return assemble(std::move(rows), source);
}

PrimitiveSequence load_sequence(const std::filesystem::path& path, SequenceFormat format) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open sequence file '" + path.string() + "'");
  return read_sequence(in, format, path.string());
}

PrimitiveSequence load_sequence(const std::filesystem::path& path) {
  return load_sequence(path, format_from_path(path));
}

void write_sequence(std::ostream& out, const PrimitiveSequence& seq, SequenceFormat format) {
  std::string buf;
  if (format == SequenceFormat::csv) buf = "frame,id,x,y,z,r,g,b,radius,opacity\n";
  for (std::size_t t = 0; t < seq.frames.size(); ++t) {
    const auto& frame = seq.frames[t];
    for (std::size_t n = 0; n < frame.primitives.size(); ++n) {
      if (!frame.is_observed(n)) continue;
      const auto& p = frame.primitives[n];
      const std::array<double, 8> values = {p.position.x(), p.position.y(), p.position.z(), p.color.x(),
                                            p.color.y(),    p.color.z(),    p.radius,       p.opacity};
      if (format == SequenceFormat::csv) {
        buf += std::to_string(t);
        buf += ',';
        buf += std::to_string(p.id);
        for (double v : values) {
          buf += ',';
          textio::append_double(buf, v);
        }
        buf += '\n';
      } else {
        buf += "{\"frame\":" + std::to_string(t) + ",\"id\":" + std::to_string(p.id);
        for (std::size_t c = 0; c < values.size(); ++c) {
          buf += ",\"";
          buf += kColumns[c + 2];
          buf += "\":";
          textio::append_double(buf, values[c]);
        }
        buf += "}\n";
      }
      if (buf.size() > (1u << 20)) {
        out << buf;
        buf.clear();
      }
    }
  }
  out << buf;
}

void write_sequence(const std::filesystem::path& path, const PrimitiveSequence& seq, SequenceFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  write_sequence(out, seq, format);
}

void write_sequence(const std::filesystem::path& path, const PrimitiveSequence& seq) {
  write_sequence(path, seq, format_from_path(path));
}

double rgb_std(const Vec3& color) {
  const double mean = color.mean();
  return std::sqrt((color.array() - mean).square().sum() / 3.0);
}

PrimitiveSequence filter_primitives(const PrimitiveSequence& seq, const FilterThresholds& thresholds) {
  if (!(thresholds.min_radius_mm >= 0.0) || !(thresholds.min_opacity >= 0.0) ||
      !(thresholds.min_rgb_std >= 0.0)) {
    throw ConfigError("filter thresholds must be >= 0");
  }
  if (seq.frames.empty()) throw InvariantError("sequence has no frames");

  const auto& first = seq.frames.front().primitives;
  std::vector<std::size_t> keep;
  keep.reserve(first.size());
  for (std::size_t n = 0; n < first.size(); ++n) {
    const auto& p = first[n];
    if (p.radius < thresholds.min_radius_mm) continue;
    if (p.opacity < thresholds.min_opacity) continue;
    if (rgb_std(p.color) < thresholds.min_rgb_std) continue;
    keep.push_back(n);
  }
  if (keep.empty()) {
    throw EmptyResultError("filter_primitives removed all " + std::to_string(first.size()) + " primitives");
  }

  PrimitiveSequence out;
  out.frame_rate_hz = seq.frame_rate_hz;
  out.ids.reserve(keep.size());
  for (auto n : keep) out.ids.push_back(seq.ids[n]);
  out.frames.resize(seq.frames.size());
  for (std::size_t t = 0; t < seq.frames.size(); ++t) {
    const auto& src = seq.frames[t];
    auto& dst = out.frames[t];
    dst.primitives.reserve(keep.size());
    for (auto n : keep) dst.primitives.push_back(src.primitives[n]);
    if (!src.observed.empty()) {
      dst.observed.reserve(keep.size());
      for (auto n : keep) dst.observed.push_back(src.observed[n]);
    }
  }
  return out;
}

}  // namespace vessel4d

#include "vessel4d/field_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "vessel4d/error.hpp"
#include "vessel4d/textio.hpp"

namespace vessel4d {
namespace {

struct Table {
  std::vector<std::vector<double>> rows;
};

// Reads a header-checked numeric CSV; blank and '#' lines are skipped.
Table read_numeric_csv(std::string_view text, std::string_view header, std::string_view source) {
  Table table;
  const std::size_t columns = textio::split(header, ',').size();
  std::size_t line_no = 0;
  bool saw_header = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const auto line = textio::trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    if (!saw_header) {
      if (line != header) throw ParseError(where + ": expected header '" + std::string(header) + "'");
      saw_header = true;
      continue;
    }
    const auto cells = textio::split(line, ',');
    if (cells.size() != columns) throw ParseError(where + ": expected " + std::to_string(columns) + " columns");
    std::vector<double> row(columns);
    for (std::size_t c = 0; c < columns; ++c) {
      if (!textio::parse_double(textio::trim(cells[c]), row[c]) || !std::isfinite(row[c])) {
        throw ParseError(where + ": bad number '" + std::string(cells[c]) + "'");
      }
    }
    table.rows.push_back(std::move(row));
    if (end == text.size()) break;
  }
  if (!saw_header) throw ParseError(std::string(source) + ": missing header '" + std::string(header) + "'");
  return table;
}

std::size_t as_index(double v, std::string_view source, const char* what) {
  if (v < 0 || v != std::floor(v) || v > 1e9) throw ParseError(std::string(source) + ": bad " + what + " index");
  return static_cast<std::size_t>(v);
}

constexpr std::string_view kDisplacementHeader = "vertex,frame,ux,uy,uz";
constexpr std::string_view kStressHeader = "edge,i,j,frame,sigma_mpa";

}  // namespace

std::string format_displacement_csv(const DisplacementField& field) {
  std::string out(kDisplacementHeader);
  out += "\n";
  for (std::size_t k = 0; k < field.vertex_count; ++k) {
    for (std::size_t t = 0; t < field.frame_count; ++t) {
      const auto& u = field.at(k, t);
      out += std::to_string(k) + "," + std::to_string(t);
      for (int a = 0; a < 3; ++a) {
        out += ",";
        textio::append_double(out, u[a]);
      }
      out += "\n";
    }
  }
  return out;
}

DisplacementField parse_displacement_csv(std::string_view text, std::string_view source) {
  const auto table = read_numeric_csv(text, kDisplacementHeader, source);
  DisplacementField field;
  for (const auto& row : table.rows) {
    field.vertex_count = std::max(field.vertex_count, as_index(row[0], source, "vertex") + 1);
    field.frame_count = std::max(field.frame_count, as_index(row[1], source, "frame") + 1);
  }
  if (table.rows.size() != field.vertex_count * field.frame_count) {
    throw ParseError(std::string(source) + ": displacement table is not a complete vertex x frame grid");
  }
  field.u.assign(table.rows.size(), Vec3::Zero());
  std::vector<std::uint8_t> seen(table.rows.size(), 0);
  for (const auto& row : table.rows) {
    const std::size_t slot = static_cast<std::size_t>(row[1]) * field.vertex_count + static_cast<std::size_t>(row[0]);
    if (seen[slot]++) throw ParseError(std::string(source) + ": duplicate displacement row");
    field.u[slot] = Vec3(row[2], row[3], row[4]);
  }
  return field;
}

std::string format_stress_csv(const StressField& stress, std::span<const Edge> edges) {
  if (edges.size() != stress.edge_count) throw InvariantError("stress field does not match the edge list");
  std::string out(kStressHeader);
  out += "\n";
  for (std::size_t e = 0; e < stress.edge_count; ++e) {
    for (std::size_t t = 0; t < stress.frame_count; ++t) {
      out += std::to_string(e) + "," + std::to_string(edges[e].i) + "," + std::to_string(edges[e].j) + "," +
             std::to_string(t) + ",";
      textio::append_double(out, stress.at(e, t));
      out += "\n";
    }
  }
  return out;
}

StressField parse_stress_csv(std::string_view text, std::string_view source) {
  const auto table = read_numeric_csv(text, kStressHeader, source);
  StressField stress;
  for (const auto& row : table.rows) {
    stress.edge_count = std::max(stress.edge_count, as_index(row[0], source, "edge") + 1);
    stress.frame_count = std::max(stress.frame_count, as_index(row[3], source, "frame") + 1);
  }
  if (table.rows.size() != stress.edge_count * stress.frame_count) {
    throw ParseError(std::string(source) + ": stress table is not a complete edge x frame grid");
  }
  stress.sigma.assign(table.rows.size(), 0.0);
  std::vector<std::uint8_t> seen(table.rows.size(), 0);
  for (const auto& row : table.rows) {
    const std::size_t slot = static_cast<std::size_t>(row[3]) * stress.edge_count + static_cast<std::size_t>(row[0]);
    if (seen[slot]++) throw ParseError(std::string(source) + ": duplicate stress row");
    stress.sigma[slot] = row[4];
  }
  return stress;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace vessel4d

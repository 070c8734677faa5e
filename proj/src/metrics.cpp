#include "vessel4d/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "vessel4d/error.hpp"
#include "vessel4d/spatial.hpp"
#include "vessel4d/stats.hpp"
#include "vessel4d/textio.hpp"

namespace vessel4d {

void validate_material(const MaterialParams& material) {
  if (!(material.youngs_modulus_mpa > 0.0) || !std::isfinite(material.youngs_modulus_mpa)) {
    throw ConfigError("material.youngs_modulus_mpa must be > 0");
  }
  if (!(material.poisson_ratio >= 0.0 && material.poisson_ratio <= 0.5)) {
    throw ConfigError("material.poisson_ratio must be in [0, 0.5]");
  }
}

StressField edge_stress(std::span<const Edge> edges, std::span<const Vec3> positions, std::size_t vertex_count,
                        double mu) {
  if (vertex_count == 0 || positions.size() % vertex_count != 0) {
    throw InvariantError("edge_stress: position array is not a whole number of frames");
  }
  StressField out;
  out.edge_count = edges.size();
  out.frame_count = positions.size() / vertex_count;
  out.sigma.assign(out.edge_count * out.frame_count, 0.0);

  std::vector<double> rest(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (edges[e].i >= vertex_count || edges[e].j >= vertex_count) throw InvariantError("edge_stress: edge out of range");
    rest[e] = point_distance(positions[edges[e].i], positions[edges[e].j]);
    if (!(rest[e] > 0.0)) {
      throw GeometryError("edge (" + std::to_string(edges[e].i) + "," + std::to_string(edges[e].j) +
                          ") has zero length at frame 0");
    }
  }
  const auto edge_total = static_cast<std::int64_t>(edges.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t ei = 0; ei < edge_total; ++ei) {
    const auto e = static_cast<std::size_t>(ei);
    for (std::size_t t = 1; t < out.frame_count; ++t) {
      const Vec3* x = positions.data() + t * vertex_count;
      const double stretch = point_distance(x[edges[e].i], x[edges[e].j]) / rest[e];
      out.sigma[t * out.edge_count + e] = neo_hookean_stress(stretch, mu);
    }
  }
  return out;
}

StressField edge_stress(const EdgeGraph& graph, const DisplacementField& field, double mu) {
  const auto x = positions_from_displacement(graph, field);
  return edge_stress(graph.edges, x, graph.vertex_count(), mu);
}

Json roi_to_json(const RoiSpec& roi) {
  Json j;
  j["name"] = roi.name;
  if (roi.kind == RoiSpec::Kind::index_list) {
    j["kind"] = "index_list";
    j["indices"] = roi.vertex_ids;
  } else {
    j["kind"] = "sphere";
    j["center"] = Json::array({roi.center.x(), roi.center.y(), roi.center.z()});
    j["radius"] = roi.radius;
  }
  return j;
}

RoiSpec roi_from_json(const Json& j) {
  try {
    RoiSpec roi;
    roi.name = j.at("name").get<std::string>();
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "index_list") {
      roi.kind = RoiSpec::Kind::index_list;
      roi.vertex_ids = j.at("indices").get<std::vector<std::int64_t>>();
    } else if (kind == "sphere") {
      roi.kind = RoiSpec::Kind::sphere;
      const auto c = j.at("center").get<std::vector<double>>();
      if (c.size() != 3) throw ParseError("ROI '" + roi.name + "': center must have 3 components");
      roi.center = Vec3(c[0], c[1], c[2]);
      roi.radius = j.at("radius").get<double>();
      if (!(roi.radius > 0.0) || !std::isfinite(roi.radius)) throw ParseError("ROI '" + roi.name + "': radius must be > 0");
    } else {
      throw ParseError("ROI '" + roi.name + "': unknown kind '" + kind + "'");
    }
    return roi;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("ROI JSON: ") + e.what());
  }
}

std::vector<RoiSpec> rois_from_json(const Json& j) {
  const Json& list = j.is_object() && j.contains("rois") ? j.at("rois") : j;
  if (!list.is_array()) throw ParseError("ROI JSON: expected an array of ROIs");
  std::vector<RoiSpec> rois;
  for (const auto& item : list) rois.push_back(roi_from_json(item));
  return rois;
}

Json rois_to_json(std::span<const RoiSpec> rois) {
  Json list = Json::array();
  for (const auto& roi : rois) list.push_back(roi_to_json(roi));
  return Json{{"rois", std::move(list)}};
}

ResolvedRoi resolve_roi(const RoiSpec& roi, const EdgeGraph& graph) {
  ResolvedRoi out;
  out.name = roi.name;
  if (roi.kind == RoiSpec::Kind::index_list) {
    std::map<std::int64_t, std::uint32_t> index_of;
    for (std::size_t k = 0; k < graph.vertex_count(); ++k) index_of[graph.vertex_ids[k]] = static_cast<std::uint32_t>(k);
    for (auto id : roi.vertex_ids) {
      const auto it = index_of.find(id);
      if (it == index_of.end()) throw ConfigError("ROI '" + roi.name + "': vertex id " + std::to_string(id) + " not in graph");
      out.vertices.push_back(it->second);
    }
    std::sort(out.vertices.begin(), out.vertices.end());
    out.vertices.erase(std::unique(out.vertices.begin(), out.vertices.end()), out.vertices.end());
  } else {
    const auto x0 = graph.frame_positions(0);
    for (std::size_t k = 0; k < x0.size(); ++k) {
      if (point_distance(x0[k], roi.center) <= roi.radius) out.vertices.push_back(static_cast<std::uint32_t>(k));
    }
  }
  if (out.vertices.empty()) throw EmptyResultError("ROI '" + roi.name + "' contains no vertices");
  std::vector<std::uint8_t> inside(graph.vertex_count(), 0);
  for (auto k : out.vertices) inside[k] = 1;
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    if (inside[graph.edges[e].i] && inside[graph.edges[e].j]) out.edges.push_back(static_cast<std::uint32_t>(e));
  }
  return out;
}

std::vector<double> roi_displacement_series(const DisplacementField& field, const ResolvedRoi& roi) {
  if (roi.vertices.empty()) throw EmptyResultError("ROI '" + roi.name + "' contains no vertices");
  std::vector<double> series(field.frame_count);
  std::vector<double> mags(roi.vertices.size());
  for (std::size_t t = 0; t < field.frame_count; ++t) {
    for (std::size_t i = 0; i < roi.vertices.size(); ++i) mags[i] = field.at(roi.vertices[i], t).norm();
    series[t] = median(mags);
  }
  return series;
}

std::vector<double> roi_stress_series(const StressField& stress, const ResolvedRoi& roi) {
  if (roi.edges.empty()) throw EmptyResultError("ROI '" + roi.name + "' has no interior edges");
  std::vector<double> series(stress.frame_count);
  std::vector<double> mags(roi.edges.size());
  for (std::size_t t = 0; t < stress.frame_count; ++t) {
    for (std::size_t i = 0; i < roi.edges.size(); ++i) mags[i] = std::abs(stress.at(roi.edges[i], t));
    series[t] = median(mags);
  }
  return series;
}

double series_max(std::span<const double> series) {
  if (series.empty()) throw EmptyResultError("maximum of an empty series");
  return *std::max_element(series.begin(), series.end());
}

std::vector<RoiMetrics> compute_roi_metrics(const EdgeGraph& graph, const DisplacementField& field,
                                            const StressField& stress, std::span<const RoiSpec> rois) {
  std::vector<RoiMetrics> out;
  out.reserve(rois.size());
  for (const auto& spec : rois) {
    const auto roi = resolve_roi(spec, graph);
    RoiMetrics m;
    m.name = spec.name;
    m.displacement_med_mm = roi_displacement_series(field, roi);
    m.stress_med_mpa = roi_stress_series(stress, roi);
    m.displacement_max_mm = series_max(m.displacement_med_mm);
    m.stress_max_mpa = series_max(m.stress_med_mpa);
    out.push_back(std::move(m));
  }
  return out;
}

std::string format_metrics_csv(std::span<const RoiMetrics> metrics) {
  std::string out = "roi,frame,d_med_mm,stress_med_mpa\n";
  for (const auto& m : metrics) {
    for (std::size_t t = 0; t < m.displacement_med_mm.size(); ++t) {
      out += m.name + "," + std::to_string(t) + ",";
      textio::append_double(out, m.displacement_med_mm[t]);
      out += ",";
      textio::append_double(out, m.stress_med_mpa[t]);
      out += "\n";
    }
  }
  out += "\nroi,d_max_mm,stress_max_mpa\n";
  for (const auto& m : metrics) {
    out += m.name + ",";
    textio::append_double(out, m.displacement_max_mm);
    out += ",";
    textio::append_double(out, m.stress_max_mpa);
    out += "\n";
  }
  return out;
}

}  // namespace vessel4d

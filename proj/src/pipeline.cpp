#include "vessel4d/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "vessel4d/error.hpp"
#include "vessel4d/stats.hpp"
#include "vessel4d/textio.hpp"

namespace vessel4d {
namespace {

class StageClock {
 public:
  explicit StageClock(StageTimings& out) : out_(out) {}
  template <class F>
  auto run(const char* name, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    auto result = f();
    out_.emplace_back(name, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    return result;
  }

 private:
  StageTimings& out_;
};

// Every key of `overlay` must already exist in `base`.
void merge_strict(Json& base, const Json& overlay, const std::string& prefix) {
  if (!overlay.is_object()) throw ConfigError("config" + (prefix.empty() ? "" : " '" + prefix + "'") + ": expected an object");
  for (auto it = overlay.begin(); it != overlay.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("unknown config key '" + key + "'");
    if (base[it.key()].is_object()) {
      merge_strict(base[it.key()], it.value(), key);
    } else {
      base[it.key()] = it.value();
    }
  }
}

std::optional<double> aggregate(std::vector<double> values, RoiAggregate how) {
  if (values.empty()) return std::nullopt;
  switch (how) {
    case RoiAggregate::mean:
      return mean(values);
    case RoiAggregate::median:
      return median(values);
    case RoiAggregate::max:
      return series_max(values);
  }
  return std::nullopt;
}

std::optional<Agreement> try_agreement(const std::vector<double>& gt, const std::vector<double>& ours) {
  if (gt.size() < 3) return std::nullopt;
  try {
    return agreement(gt, ours);
  } catch (const InvariantError&) {
    return std::nullopt;
  }
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::string default_label(const SynthConfig& c) {
  if (c.condition == DeformationKind::bulk) return "bulk";
  char buf[64];
  std::snprintf(buf, sizeof buf, "pull_%gmm", c.pull_magnitude_mm);
  return buf;
}

}  // namespace

RoiAggregate parse_roi_aggregate(std::string_view name) {
  if (name == "mean") return RoiAggregate::mean;
  if (name == "median") return RoiAggregate::median;
  if (name == "max") return RoiAggregate::max;
  throw ConfigError("eval.roi_aggregate must be one of mean, median, max");
}

const char* to_string(RoiAggregate aggregate) {
  switch (aggregate) {
    case RoiAggregate::mean:
      return "mean";
    case RoiAggregate::median:
      return "median";
    case RoiAggregate::max:
      return "max";
  }
  return "mean";
}

void validate_config(const PipelineConfig& c) {
  const auto nonneg = [](double v, const char* key) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(std::string(key) + " must be >= 0");
  };
  nonneg(c.filter.min_radius_mm, "filter.min_radius_mm");
  nonneg(c.filter.min_opacity, "filter.min_opacity");
  nonneg(c.filter.min_rgb_std, "filter.min_rgb_std");
  if (c.cluster.color_groups < 1) throw ConfigError("cluster.color_groups must be >= 1");
  if (!(c.cluster.eps_mm > 0.0) || !std::isfinite(c.cluster.eps_mm)) throw ConfigError("cluster.eps_mm must be > 0");
  if (c.cluster.min_pts < 1) throw ConfigError("cluster.min_pts must be >= 1");
  if (!std::isfinite(c.gamma)) throw ConfigError("graph.gamma must be finite");
  validate_coherence_params(c.coherence);
  validate_material(c.material);
  if (c.tolerances_mm.empty()) throw ConfigError("eval.tolerances_mm must not be empty");
  for (double tau : c.tolerances_mm) {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("eval.tolerances_mm entries must be > 0");
  }
}

Json config_to_json(const PipelineConfig& c) {
  Json j;
  j["filter"] = {{"min_radius_mm", c.filter.min_radius_mm},
                 {"min_opacity", c.filter.min_opacity},
                 {"min_rgb_std", c.filter.min_rgb_std}};
  j["cluster"] = {{"color_groups", c.cluster.color_groups},
                  {"eps_mm", c.cluster.eps_mm},
                  {"min_pts", c.cluster.min_pts},
                  {"seed", c.cluster.seed}};
  j["graph"] = {{"gamma", c.gamma}};
  j["coherence"] = {{"enabled", c.coherence_enabled},    {"alpha", c.coherence.alpha},
                    {"kappa", c.coherence.kappa},        {"iterations", c.coherence.iterations},
                    {"epsilon", c.coherence.epsilon},    {"robust", c.coherence.robust}};
  j["material"] = {{"youngs_modulus_mpa", c.material.youngs_modulus_mpa},
                   {"poisson_ratio", c.material.poisson_ratio}};
  j["eval"] = {{"tolerances_mm", c.tolerances_mm}, {"roi_aggregate", to_string(c.roi_aggregate)}};
  return j;
}

PipelineConfig config_from_json(const Json& overlay) {
  Json j = config_to_json(PipelineConfig{});
  merge_strict(j, overlay, "");
  try {
    PipelineConfig c;
    c.filter.min_radius_mm = j["filter"]["min_radius_mm"].get<double>();
    c.filter.min_opacity = j["filter"]["min_opacity"].get<double>();
    c.filter.min_rgb_std = j["filter"]["min_rgb_std"].get<double>();
    c.cluster.color_groups = j["cluster"]["color_groups"].get<int>();
    c.cluster.eps_mm = j["cluster"]["eps_mm"].get<double>();
    c.cluster.min_pts = j["cluster"]["min_pts"].get<int>();
    c.cluster.seed = j["cluster"]["seed"].get<std::uint64_t>();
    c.gamma = j["graph"]["gamma"].get<double>();
    c.coherence_enabled = j["coherence"]["enabled"].get<bool>();
    c.coherence.alpha = j["coherence"]["alpha"].get<double>();
    c.coherence.kappa = j["coherence"]["kappa"].get<double>();
    c.coherence.iterations = j["coherence"]["iterations"].get<int>();
    c.coherence.epsilon = j["coherence"]["epsilon"].get<double>();
    c.coherence.robust = j["coherence"]["robust"].get<bool>();
    c.material.youngs_modulus_mpa = j["material"]["youngs_modulus_mpa"].get<double>();
    c.material.poisson_ratio = j["material"]["poisson_ratio"].get<double>();
    const auto& tol = j["eval"]["tolerances_mm"];
    c.tolerances_mm = tol.is_array() ? tol.get<std::vector<double>>() : std::vector<double>{tol.get<double>()};
    c.roi_aggregate = parse_roi_aggregate(j["eval"]["roi_aggregate"].get<std::string>());
    validate_config(c);
    return c;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

void apply_config_override(Json& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  const std::string path(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  Json value;
  try {
    value = Json::parse(text);
  } catch (const Json::parse_error&) {
    value = text;
  }
  const auto keys = textio::split(path, '.');
  Json overlay = std::move(value);
  for (auto it = keys.rbegin(); it != keys.rend(); ++it) {
    if (it->empty()) throw ConfigError("override '" + path + "' has an empty key");
    Json wrapped = Json::object();
    wrapped[std::string(*it)] = std::move(overlay);
    overlay = std::move(wrapped);
  }
  merge_strict(config, overlay, "");
}

PrimitiveSequence stage_filter(const PrimitiveSequence& seq, const PipelineConfig& config) {
  validate_sequence(seq);
  return filter_primitives(seq, config.filter);
}

ClusterAssignment stage_cluster(const PrimitiveSequence& filtered, const PipelineConfig& config) {
  return cluster_primitives(filtered, config.cluster);
}

EdgeGraph stage_graph(const PrimitiveSequence& filtered, const ClusterAssignment& assignment,
                      const PipelineConfig& config) {
  return build_graph(filtered, assignment, config.gamma);
}

DisplacementField stage_smooth(const EdgeGraph& graph, const PipelineConfig& config, SmoothStats* stats) {
  auto field = displacement_from_graph(graph);
  if (!config.coherence_enabled) {
    if (stats) *stats = SmoothStats{};
    return field;
  }
  return smooth_field(field, graph, config.coherence, stats);
}

StressField stage_stress(const EdgeGraph& graph, const DisplacementField& field, const PipelineConfig& config) {
  return edge_stress(graph, field, config.material.shear_modulus_mpa());
}

Analysis run_analysis(const PrimitiveSequence& seq, const PipelineConfig& config, const CurationEdit* edit) {
  validate_config(config);
  Analysis a;
  StageClock clock(a.timings);
  a.filtered = clock.run("filter", [&] { return stage_filter(seq, config); });
  a.assignment = clock.run("cluster", [&] { return stage_cluster(a.filtered, config); });
  a.graph = clock.run("graph", [&] { return stage_graph(a.filtered, a.assignment, config); });
  if (edit) {
    auto cur = clock.run("curate", [&] { return apply_curation(a.graph, *edit); });
    a.graph = std::move(cur.graph);
    a.old_to_new = std::move(cur.old_to_new);
  }
  a.field = clock.run("smooth", [&] { return stage_smooth(a.graph, config, &a.smooth_stats); });
  a.stress = clock.run("stress", [&] { return stage_stress(a.graph, a.field, config); });
  return a;
}

const PrimitiveSequence& bundle_prediction(const Bundle& bundle) {
  return bundle.observed ? *bundle.observed : bundle.sequence;
}

EvalReport evaluate(const Bundle& gt, const PrimitiveSequence& pred, const PipelineConfig& config,
                    const CurationEdit* edit, std::string label) {
  if (pred.frame_count() != gt.sequence.frame_count()) {
    throw InvariantError("evaluate: prediction has " + std::to_string(pred.frame_count()) + " frames, GT has " +
                         std::to_string(gt.sequence.frame_count()));
  }
  const auto analysis = run_analysis(pred, config, edit);
  EvalReport r;
  r.label = label.empty() ? default_label(gt.config) : std::move(label);
  r.coherence_enabled = config.coherence_enabled;
  r.frames = pred.frame_count();
  r.graph_vertices = analysis.graph.vertex_count();
  r.graph_edges = analysis.graph.edges.size();
  r.topology_sha256 = topology_hash(analysis.graph);

  const std::size_t last = r.frames - 1;
  std::vector<PointCloud> pred_frames(r.frames), gt_frames(r.frames);
  for (std::size_t t = 0; t < r.frames; ++t) {
    pred_frames[t] = analysis.filtered.positions(t);
    gt_frames[t] = gt.sequence.positions(t);
  }
  r.pred_points = pred_frames[last].size();
  r.gt_points = gt_frames[last].size();

  const auto p2g = nearest_distances(pred_frames[last], gt_frames[last]);
  const auto g2p = nearest_distances(gt_frames[last], pred_frames[last]);
  r.chamfer = chamfer(pred_frames[last], gt_frames[last]);
  r.gt_spacing_mm = median_nn_spacing(gt_frames[last]);
  if (!(r.gt_spacing_mm > 0.0)) throw GeometryError("GT spacing is zero (duplicate points)");
  r.cd_norm = r.chamfer.cd / r.gt_spacing_mm;
  if (r.frames >= 2) r.temporal = temporal_delta_cd(pred_frames, gt_frames);
  for (double tau : config.tolerances_mm) r.overlap.push_back(overlap_from_distances(p2g, g2p, tau));

  const auto ours = compute_roi_metrics(analysis.graph, analysis.field, analysis.stress, gt.rois);
  const auto truth = compute_roi_metrics(gt.graph, gt.displacement, gt.stress, gt.rois);
  std::vector<double> d_err, d_pct, s_err, d_gt, d_ours, s_gt, s_ours;
  for (std::size_t i = 0; i < ours.size(); ++i) {
    RoiComparison c;
    c.name = ours[i].name;
    c.displacement = roi_error(c.name, ours[i].displacement_max_mm, truth[i].displacement_max_mm);
    c.stress = roi_error(c.name, ours[i].stress_max_mpa, truth[i].stress_max_mpa);
    d_err.push_back(c.displacement.error);
    if (c.displacement.percent) d_pct.push_back(*c.displacement.percent);
    s_err.push_back(c.stress.error);
    d_gt.push_back(c.displacement.gt);
    d_ours.push_back(c.displacement.ours);
    s_gt.push_back(c.stress.gt);
    s_ours.push_back(c.stress.ours);
    r.rois.push_back(std::move(c));
  }
  r.roi_displacement_error_mm = aggregate(d_err, config.roi_aggregate);
  r.roi_displacement_error_pct = aggregate(d_pct, config.roi_aggregate);
  r.stress_bias_mpa = aggregate(s_err, config.roi_aggregate);
  r.displacement_agreement = try_agreement(d_gt, d_ours);
  r.stress_agreement = try_agreement(s_gt, s_ours);
  return r;
}

Json agreement_to_json(const std::optional<Agreement>& a) {
  if (!a) return nullptr;
  return Json{{"pairs", a->pairs},
              {"regression", {{"slope", a->regression.slope}, {"intercept", a->regression.intercept}, {"r2", a->regression.r2}}},
              {"bland_altman",
               {{"bias", a->bland_altman.bias},
                {"sd", a->bland_altman.sd},
                {"loa_lower", a->bland_altman.loa_lower},
                {"loa_upper", a->bland_altman.loa_upper}}}};
}

Json eval_report_to_json(const EvalReport& r) {
  Json j;
  j["condition"] = r.label;
  j["coherence_enabled"] = r.coherence_enabled;
  j["frames"] = r.frames;
  j["points"] = {{"pred", r.pred_points}, {"gt", r.gt_points}};
  j["graph"] = {{"vertices", r.graph_vertices}, {"edges", r.graph_edges}, {"topology_sha256", r.topology_sha256}};
  j["cd"] = {{"d_p2g_mm", r.chamfer.p2g},
             {"d_g2p_mm", r.chamfer.g2p},
             {"sym_mm", r.chamfer.cd},
             {"cd_norm", r.cd_norm},
             {"gt_spacing_mm", r.gt_spacing_mm}};
  j["delta_cd"] = {{"mm", r.temporal.delta_cd}, {"rel", optional_number(r.temporal.delta_cd_rel)}};
  Json overlap = Json::array();
  for (const auto& o : r.overlap) {
    overlap.push_back({{"tau_mm", o.tau}, {"precision", o.precision}, {"recall", o.recall}, {"fscore", o.fscore}});
  }
  j["overlap"] = std::move(overlap);
  Json rois = Json::array();
  for (const auto& c : r.rois) {
    rois.push_back({{"name", c.name},
                    {"d_max_mm", {{"ours", c.displacement.ours}, {"gt", c.displacement.gt}, {"error_mm", c.displacement.error},
                                  {"error_pct", optional_number(c.displacement.percent)}}},
                    {"stress_max_mpa", {{"ours", c.stress.ours}, {"gt", c.stress.gt}, {"bias_mpa", c.stress.error}}}});
  }
  j["rois"] = std::move(rois);
  j["roi_displacement_error_mm"] = optional_number(r.roi_displacement_error_mm);
  j["roi_displacement_error_pct"] = optional_number(r.roi_displacement_error_pct);
  j["stress_bias_mpa"] = optional_number(r.stress_bias_mpa);
  j["agreement"] = {{"displacement", agreement_to_json(r.displacement_agreement)},
                    {"stress", agreement_to_json(r.stress_agreement)}};
  return j;
}

std::optional<Agreement> pooled_displacement_agreement(std::span<const EvalReport> reports) {
  std::vector<double> gt, ours;
  for (const auto& r : reports) {
    for (const auto& c : r.rois) {
      gt.push_back(c.displacement.gt);
      ours.push_back(c.displacement.ours);
    }
  }
  return try_agreement(gt, ours);
}

std::optional<Agreement> pooled_stress_agreement(std::span<const EvalReport> reports) {
  std::vector<double> gt, ours;
  for (const auto& r : reports) {
    for (const auto& c : r.rois) {
      gt.push_back(c.stress.gt);
      ours.push_back(c.stress.ours);
    }
  }
  return try_agreement(gt, ours);
}

Json combined_report(std::span<const EvalReport> reports) {
  Json conditions = Json::array();
  for (const auto& r : reports) conditions.push_back(eval_report_to_json(r));
  return Json{{"conditions", std::move(conditions)},
              {"agreement",
               {{"displacement", agreement_to_json(pooled_displacement_agreement(reports))},
                {"stress", agreement_to_json(pooled_stress_agreement(reports))}}}};
}

AblationResult ablate_scf(std::span<const Bundle> bundles, const PipelineConfig& config) {
  AblationResult result;
  PipelineConfig on = config, off = config;
  on.coherence_enabled = true;
  off.coherence_enabled = false;
  for (const auto& b : bundles) {
    result.with_scf.push_back(evaluate(b, bundle_prediction(b), on));
    result.without_scf.push_back(evaluate(b, bundle_prediction(b), off));
  }
  return result;
}

Json ablation_to_json(const AblationResult& result) {
  const auto side = [](const std::vector<EvalReport>& reports) {
    return Json{{"displacement", agreement_to_json(pooled_displacement_agreement(reports))},
                {"stress", agreement_to_json(pooled_stress_agreement(reports))}};
  };
  Json conditions = Json::array();
  for (const auto& r : result.with_scf) conditions.push_back(r.label);
  return Json{{"conditions", std::move(conditions)},
              {"with_scf", side(result.with_scf)},
              {"without_scf", side(result.without_scf)}};
}

std::string format_ablation_table(const AblationResult& result) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-18s %-9s %8s %10s %7s %9s %10s %10s\n", "metric", "condition", "slope",
                "intercept", "R2", "BA_bias", "lower_LoA", "upper_LoA");
  out += line;
  const auto row = [&](const char* metric, const char* cond, const std::optional<Agreement>& a) {
    if (!a) {
      std::snprintf(line, sizeof line, "%-18s %-9s %s\n", metric, cond, "undefined (fewer than 3 pairs or no GT spread)");
    } else {
      std::snprintf(line, sizeof line, "%-18s %-9s %8.3f %10.3f %7.3f %9.3f %10.3f %10.3f\n", metric, cond,
                    a->regression.slope, a->regression.intercept, a->regression.r2, a->bland_altman.bias,
                    a->bland_altman.loa_lower, a->bland_altman.loa_upper);
    }
    out += line;
  };
  row("displacement_mm", "w/ SCF", pooled_displacement_agreement(result.with_scf));
  row("displacement_mm", "w/o SCF", pooled_displacement_agreement(result.without_scf));
  row("stress_proxy_mpa", "w/ SCF", pooled_stress_agreement(result.with_scf));
  row("stress_proxy_mpa", "w/o SCF", pooled_stress_agreement(result.without_scf));
  return out;
}

}  // namespace vessel4d

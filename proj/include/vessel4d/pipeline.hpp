#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vessel4d/cluster.hpp"
#include "vessel4d/coherence.hpp"
#include "vessel4d/eval.hpp"
#include "vessel4d/graph.hpp"
#include "vessel4d/graph_io.hpp"
#include "vessel4d/ingest.hpp"
#include "vessel4d/metrics.hpp"
#include "vessel4d/synth.hpp"

namespace vessel4d {

enum class RoiAggregate { mean, median, max };

RoiAggregate parse_roi_aggregate(std::string_view name);
const char* to_string(RoiAggregate aggregate);

struct PipelineConfig {
  FilterThresholds filter;
  ClusterParams cluster;
  double gamma = 0.25;
  bool coherence_enabled = true;
  CoherenceParams coherence;
  MaterialParams material;
  std::vector<double> tolerances_mm{1.0};
  RoiAggregate roi_aggregate = RoiAggregate::mean;
};

/// Throws ConfigError naming the first offending key.
void validate_config(const PipelineConfig& config);

Json config_to_json(const PipelineConfig& config);
/// Overlays `j` on the defaults. Unknown keys are rejected.
PipelineConfig config_from_json(const Json& j);
/// Applies `section.key=value`; the value is parsed as JSON, else taken as a string.
void apply_config_override(Json& config, std::string_view assignment);

using StageTimings = std::vector<std::pair<std::string, double>>;

PrimitiveSequence stage_filter(const PrimitiveSequence& seq, const PipelineConfig& config);
ClusterAssignment stage_cluster(const PrimitiveSequence& filtered, const PipelineConfig& config);
EdgeGraph stage_graph(const PrimitiveSequence& filtered, const ClusterAssignment& assignment,
                      const PipelineConfig& config);
/// Displacements relative to frame 0, smoothed when coherence is enabled.
DisplacementField stage_smooth(const EdgeGraph& graph, const PipelineConfig& config, SmoothStats* stats = nullptr);
StressField stage_stress(const EdgeGraph& graph, const DisplacementField& field, const PipelineConfig& config);

struct Analysis {
  PrimitiveSequence filtered;
  ClusterAssignment assignment;
  EdgeGraph graph;
  std::vector<std::int64_t> old_to_new;  // set when an edit was applied
  DisplacementField field;
  StressField stress;
  SmoothStats smooth_stats;
  StageTimings timings;
};

/// filter -> cluster -> graph -> [curate] -> smooth -> stress.
Analysis run_analysis(const PrimitiveSequence& seq, const PipelineConfig& config, const CurationEdit* edit = nullptr);

struct RoiComparison {
  std::string name;
  RoiError displacement;  // max-median displacement, mm
  RoiError stress;        // max-median |sigma|, MPa
};

struct EvalReport {
  std::string label;
  bool coherence_enabled = true;
  std::size_t pred_points = 0;
  std::size_t gt_points = 0;
  std::size_t frames = 0;
  std::size_t graph_vertices = 0;
  std::size_t graph_edges = 0;
  std::string topology_sha256;
  ChamferResult chamfer;
  double gt_spacing_mm = 0.0;
  double cd_norm = 0.0;
  TemporalCd temporal;
  std::vector<OverlapScore> overlap;
  std::vector<RoiComparison> rois;
  std::optional<double> roi_displacement_error_mm;
  std::optional<double> roi_displacement_error_pct;
  std::optional<double> stress_bias_mpa;
  std::optional<Agreement> displacement_agreement;
  std::optional<Agreement> stress_agreement;
};

/// Runs the analysis on `pred` and compares it with the bundle at the last
/// frame (Chamfer, overlap), across frames (temporal CD) and per ROI.
EvalReport evaluate(const Bundle& gt, const PrimitiveSequence& pred, const PipelineConfig& config,
                    const CurationEdit* edit = nullptr, std::string label = "");

Json eval_report_to_json(const EvalReport& report);
Json agreement_to_json(const std::optional<Agreement>& agreement);

/// Agreement over every ROI pair of every report; empty when undefined.
std::optional<Agreement> pooled_displacement_agreement(std::span<const EvalReport> reports);
std::optional<Agreement> pooled_stress_agreement(std::span<const EvalReport> reports);

/// Per-condition reports plus pooled agreement.
Json combined_report(std::span<const EvalReport> reports);

struct AblationResult {
  std::vector<EvalReport> with_scf;
  std::vector<EvalReport> without_scf;
};

/// Evaluates every bundle with coherence filtering on and off.
AblationResult ablate_scf(std::span<const Bundle> bundles, const PipelineConfig& config);
Json ablation_to_json(const AblationResult& result);
/// Fixed-width comparison table (slope, intercept, R2, bias, LoA).
std::string format_ablation_table(const AblationResult& result);

/// The bundle's observed sequence when present, else its clean sequence.
const PrimitiveSequence& bundle_prediction(const Bundle& bundle);

}  // namespace vessel4d

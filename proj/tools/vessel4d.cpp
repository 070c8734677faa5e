// vessel4d command-line driver.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "vessel4d/error.hpp"
#include "vessel4d/field_io.hpp"
#include "vessel4d/graph_io.hpp"
#include "vessel4d/manifest.hpp"
#include "vessel4d/parallel.hpp"
#include "vessel4d/pipeline.hpp"
#include "vessel4d/synth.hpp"
#include "vessel4d/textio.hpp"

namespace fs = std::filesystem;
using namespace vessel4d;

namespace {

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string manifest_path;
};

Json effective_config_json(const CommonOptions& opts) {
  Json j = config_to_json(PipelineConfig{});
  if (!opts.config_path.empty()) j = config_to_json(config_from_json(read_json_file(opts.config_path)));
  for (const auto& o : opts.overrides) apply_config_override(j, o);
  return config_to_json(config_from_json(j));
}

PipelineConfig effective_config(const CommonOptions& opts) { return config_from_json(effective_config_json(opts)); }

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "Pipeline config JSON (see --print-config)")->check(CLI::ExistingFile);
  cmd->add_option("--set", opts.overrides, "Override a config key, e.g. --set coherence.alpha=0.2");
  cmd->add_option("--manifest", opts.manifest_path, "Run manifest path (default: <output>.manifest.json)");
}

std::optional<SequenceFormat> format_option(const std::string& name) {
  if (name.empty()) return std::nullopt;
  return parse_sequence_format(name);
}

PrimitiveSequence load_input(const std::string& path, const std::string& format) {
  const auto fmt = format_option(format);
  return fmt ? load_sequence(path, *fmt) : load_sequence(path);
}

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_;
};

void finish(RunManifest& manifest, const CommonOptions& opts, const fs::path& primary_output) {
  const fs::path path = opts.manifest_path.empty() ? fs::path(primary_output.string() + ".manifest.json")
                                                   : fs::path(opts.manifest_path);
  write_json_file(path, manifest.to_json());
}

std::optional<CurationEdit> load_edit(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return edit_from_json(read_json_file(path));
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_limit_from_env();

  CLI::App app{"vessel4d: 4D vessel point-cloud graphs, displacement and stress-proxy metrics"};
  app.require_subcommand(0, 1);
  app.set_version_flag("--version", std::string("vessel4d ") + tool_version());
  CommonOptions root_opts;
  bool print_config = false;
  app.add_flag("--print-config", print_config, "Print the effective configuration and exit");
  app.add_option("--config", root_opts.config_path, "Config JSON used with --print-config")->check(CLI::ExistingFile);
  app.add_option("--set", root_opts.overrides, "Config override used with --print-config");

  // ingest
  CommonOptions ingest_opts;
  std::string ingest_in, ingest_out, ingest_format, ingest_out_format;
  bool ingest_no_filter = false;
  auto* ingest = app.add_subcommand("ingest", "Validate and filter a primitive sequence");
  ingest->add_option("-i,--input", ingest_in, "Sequence file (.csv or .jsonl)")->required()->check(CLI::ExistingFile);
  ingest->add_option("-o,--output", ingest_out, "Filtered sequence output")->required();
  ingest->add_option("--format", ingest_format, "Input format: csv or jsonl (default: by extension)");
  ingest->add_option("--output-format", ingest_out_format, "Output format (default: by extension)");
  ingest->add_flag("--no-filter", ingest_no_filter, "Validate only; keep every primitive");
  add_common(ingest, ingest_opts);

  // cluster
  CommonOptions cluster_opts;
  std::string cluster_in, cluster_out, cluster_format;
  auto* cluster = app.add_subcommand("cluster", "RGB k-means and per-group DBSCAN on frame 0");
  cluster->add_option("-i,--input", cluster_in, "Filtered sequence")->required()->check(CLI::ExistingFile);
  cluster->add_option("-o,--output", cluster_out, "Cluster assignment JSON")->required();
  cluster->add_option("--format", cluster_format, "Input format: csv or jsonl");
  add_common(cluster, cluster_opts);

  // graph
  CommonOptions graph_opts;
  std::string graph_in, graph_assignment, graph_out, graph_format;
  auto* graph = app.add_subcommand("graph", "Centroid tracks and the pruned Delaunay edge graph");
  graph->add_option("-i,--input", graph_in, "Filtered sequence")->required()->check(CLI::ExistingFile);
  graph->add_option("--assignment", graph_assignment, "Cluster assignment JSON (computed when omitted)")
      ->check(CLI::ExistingFile);
  graph->add_option("-o,--output", graph_out, "Graph JSON")->required();
  graph->add_option("--format", graph_format, "Input format: csv or jsonl");
  add_common(graph, graph_opts);

  // curate
  CommonOptions curate_opts;
  std::string curate_graph, curate_edit, curate_out, curate_map;
  auto* curate = app.add_subcommand("curate", "Apply a curation edit and lock the topology");
  curate->add_option("--graph", curate_graph, "Graph JSON")->required()->check(CLI::ExistingFile);
  curate->add_option("--edit", curate_edit, "Curation edit JSON")->required()->check(CLI::ExistingFile);
  curate->add_option("-o,--output", curate_out, "Curated graph JSON")->required();
  curate->add_option("--map", curate_map, "Write the old-to-new vertex map here");
  add_common(curate, curate_opts);

  // smooth
  CommonOptions smooth_opts;
  std::string smooth_graph, smooth_out;
  auto* smooth = app.add_subcommand("smooth", "Displacement field with spatial coherence filtering");
  smooth->add_option("--graph", smooth_graph, "Graph JSON")->required()->check(CLI::ExistingFile);
  smooth->add_option("-o,--output", smooth_out, "Displacement CSV")->required();
  add_common(smooth, smooth_opts);

  // metrics
  CommonOptions metrics_opts;
  std::string metrics_graph, metrics_disp, metrics_input, metrics_format, metrics_rois, metrics_out, metrics_stress,
      metrics_edit;
  auto* metrics = app.add_subcommand("metrics", "ROI displacement and stress-proxy summaries");
  metrics->add_option("--graph", metrics_graph, "Graph JSON (with --displacement)")->check(CLI::ExistingFile);
  metrics->add_option("--displacement", metrics_disp, "Displacement CSV from `smooth`")->check(CLI::ExistingFile);
  metrics->add_option("-i,--input", metrics_input, "Raw sequence: run every stage in one pass")->check(CLI::ExistingFile);
  metrics->add_option("--format", metrics_format, "Input format: csv or jsonl");
  metrics->add_option("--edit", metrics_edit, "Curation edit applied in one-pass mode")->check(CLI::ExistingFile);
  metrics->add_option("--rois", metrics_rois, "ROI JSON")->required()->check(CLI::ExistingFile);
  metrics->add_option("-o,--output", metrics_out, "Metric CSV")->required();
  metrics->add_option("--stress-output", metrics_stress, "Also write per-edge stress CSV");
  add_common(metrics, metrics_opts);

  // synth
  CommonOptions synth_opts;
  std::string synth_out, synth_cfg_path, synth_surface, synth_condition, synth_translation, synth_center;
  std::optional<double> synth_magnitude, synth_noise, synth_outlier_fraction, synth_outlier_magnitude, synth_falloff,
      synth_roi_radius;
  std::optional<std::size_t> synth_frames, synth_points;
  std::optional<std::uint64_t> synth_seed;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic ground-truth bundle");
  synth->add_option("-o,--output", synth_out, "Bundle directory")->required();
  synth->add_option("--synth-config", synth_cfg_path, "Generator config JSON")->check(CLI::ExistingFile);
  synth->add_option("--surface", synth_surface, "tube or y_bifurcation");
  synth->add_option("--condition", synth_condition, "bulk or pull");
  synth->add_option("--magnitude", synth_magnitude, "Pull magnitude, mm");
  synth->add_option("--translation", synth_translation, "Bulk translation x,y,z, mm");
  synth->add_option("--pull-center", synth_center, "Pull center x,y,z, mm");
  synth->add_option("--falloff", synth_falloff, "Pull falloff radius, mm");
  synth->add_option("--frames", synth_frames, "Frame count (>= 2)");
  synth->add_option("--points", synth_points, "Primitive count");
  synth->add_option("--roi-radius", synth_roi_radius, "Sphere ROI radius, mm");
  synth->add_option("--noise", synth_noise, "Observed-copy jitter sigma, mm");
  synth->add_option("--outlier-fraction", synth_outlier_fraction, "Fraction of spiked tracks");
  synth->add_option("--outlier-magnitude", synth_outlier_magnitude, "Spike magnitude, mm");
  synth->add_option("--seed", synth_seed, "Generator seed");
  add_common(synth, synth_opts);

  // eval
  CommonOptions eval_opts;
  std::string eval_gt, eval_pred, eval_out, eval_edit, eval_tolerances, eval_label, eval_format;
  auto* eval = app.add_subcommand("eval", "Run the pipeline on a prediction and score it against a GT bundle");
  eval->add_option("--gt", eval_gt, "GT bundle directory")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--pred", eval_pred, "Predicted sequence (default: bundle observed.csv, else sequence.csv)")
      ->check(CLI::ExistingFile);
  eval->add_option("--format", eval_format, "Prediction format: csv or jsonl");
  eval->add_option("--edit", eval_edit, "Curation edit for the predicted graph")->check(CLI::ExistingFile);
  eval->add_option("--tolerances", eval_tolerances, "Overlap tolerances in mm, e.g. 1,2,3");
  eval->add_option("--label", eval_label, "Condition label in the report");
  eval->add_option("-o,--output", eval_out, "Report JSON")->required();
  add_common(eval, eval_opts);

  // ablate-scf
  CommonOptions ablate_opts;
  std::vector<std::string> ablate_gt;
  std::string ablate_out;
  auto* ablate = app.add_subcommand("ablate-scf", "Agreement with and without spatial coherence filtering");
  ablate->add_option("--gt", ablate_gt, "GT bundle directories")->required()->check(CLI::ExistingDirectory);
  ablate->add_option("-o,--output", ablate_out, "Ablation JSON")->required();
  add_common(ablate, ablate_opts);

  // report
  CommonOptions report_opts;
  std::vector<std::string> report_gt;
  std::string report_out, report_tolerances;
  auto* report = app.add_subcommand("report", "Evaluate several bundles and pool their ROI agreement");
  report->add_option("--gt", report_gt, "GT bundle directories")->required()->check(CLI::ExistingDirectory);
  report->add_option("--tolerances", report_tolerances, "Overlap tolerances in mm, e.g. 1,2,3");
  report->add_option("-o,--output", report_out, "Report JSON")->required();
  add_common(report, report_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (print_config) {
      std::cout << effective_config_json(root_opts).dump(2) << "\n";
      return 0;
    }
    if (app.get_subcommands().empty()) {
      std::cerr << app.help();
      return 2;
    }

    if (*ingest) {
      const auto cfg = effective_config(ingest_opts);
      RunManifest m;
      m.subcommand = "ingest";
      m.config = config_to_json(cfg);
      m.add_input(ingest_in);
      Timer timer;
      auto seq = load_input(ingest_in, ingest_format);
      m.timings.emplace_back("load", timer.seconds());
      Timer ftimer;
      if (!ingest_no_filter) seq = stage_filter(seq, cfg);
      m.timings.emplace_back("filter", ftimer.seconds());
      const auto out_fmt = format_option(ingest_out_format);
      write_sequence(ingest_out, seq, out_fmt ? *out_fmt : format_from_path(ingest_out));
      m.add_output(ingest_out);
      finish(m, ingest_opts, ingest_out);
      std::cerr << "ingest: " << seq.track_count() << " tracks x " << seq.frame_count() << " frames\n";
    } else if (*cluster) {
      const auto cfg = effective_config(cluster_opts);
      RunManifest m;
      m.subcommand = "cluster";
      m.config = config_to_json(cfg);
      m.add_input(cluster_in);
      const auto seq = load_input(cluster_in, cluster_format);
      Timer timer;
      const auto assignment = stage_cluster(seq, cfg);
      m.timings.emplace_back("cluster", timer.seconds());
      write_json_file(cluster_out, assignment_to_json(assignment));
      m.add_output(cluster_out);
      finish(m, cluster_opts, cluster_out);
      std::cerr << "cluster: K=" << assignment.cluster_count << "\n";
    } else if (*graph) {
      const auto cfg = effective_config(graph_opts);
      RunManifest m;
      m.subcommand = "graph";
      m.config = config_to_json(cfg);
      m.add_input(graph_in);
      const auto seq = load_input(graph_in, graph_format);
      ClusterAssignment assignment;
      if (graph_assignment.empty()) {
        Timer timer;
        assignment = stage_cluster(seq, cfg);
        m.timings.emplace_back("cluster", timer.seconds());
      } else {
        m.add_input(graph_assignment);
        assignment = assignment_from_json(read_json_file(graph_assignment));
        if (assignment.track_ids != seq.ids) throw InvariantError("cluster assignment does not match the sequence's tracks");
      }
      Timer timer;
      const auto g = stage_graph(seq, assignment, cfg);
      m.timings.emplace_back("graph", timer.seconds());
      write_json_file(graph_out, graph_to_json(g));
      m.add_output(graph_out);
      finish(m, graph_opts, graph_out);
      std::cerr << "graph: " << g.vertex_count() << " vertices, " << g.edges.size() << " edges\n";
    } else if (*curate) {
      RunManifest m;
      m.subcommand = "curate";
      m.config = config_to_json(effective_config(curate_opts));
      m.add_input(curate_graph);
      m.add_input(curate_edit);
      const auto g = graph_from_json(read_json_file(curate_graph));
      const auto edit = edit_from_json(read_json_file(curate_edit));
      const auto result = apply_curation(g, edit);
      write_json_file(curate_out, graph_to_json(result.graph));
      m.add_output(curate_out);
      if (!curate_map.empty()) {
        write_json_file(curate_map, Json{{"old_to_new", result.old_to_new}});
        m.add_output(curate_map);
      }
      finish(m, curate_opts, curate_out);
      std::cerr << "curate: " << result.graph.vertex_count() << " vertices, " << result.graph.edges.size()
                << " edges (topology locked)\n";
    } else if (*smooth) {
      const auto cfg = effective_config(smooth_opts);
      RunManifest m;
      m.subcommand = "smooth";
      m.config = config_to_json(cfg);
      m.add_input(smooth_graph);
      const auto g = graph_from_json(read_json_file(smooth_graph));
      Timer timer;
      SmoothStats stats;
      const auto field = stage_smooth(g, cfg, &stats);
      m.timings.emplace_back("smooth", timer.seconds());
      write_text_file(smooth_out, format_displacement_csv(field));
      m.add_output(smooth_out);
      finish(m, smooth_opts, smooth_out);
      if (stats.isolated_vertices > 0) {
        std::cerr << "smooth: " << stats.isolated_vertices << " vertices without neighbors left unchanged\n";
      }
    } else if (*metrics) {
      const auto cfg = effective_config(metrics_opts);
      RunManifest m;
      m.subcommand = "metrics";
      m.config = config_to_json(cfg);
      EdgeGraph g;
      DisplacementField field;
      if (!metrics_input.empty()) {
        if (!metrics_graph.empty() || !metrics_disp.empty()) {
          throw ConfigError("metrics: use either --input or --graph with --displacement");
        }
        m.add_input(metrics_input);
        const auto edit = load_edit(metrics_edit);
        if (edit) m.add_input(metrics_edit);
        auto a = run_analysis(load_input(metrics_input, metrics_format), cfg, edit ? &*edit : nullptr);
        m.timings = a.timings;
        g = std::move(a.graph);
        field = std::move(a.field);
      } else {
        if (metrics_graph.empty() || metrics_disp.empty()) {
          throw ConfigError("metrics: --graph and --displacement are required without --input");
        }
        m.add_input(metrics_graph);
        m.add_input(metrics_disp);
        g = graph_from_json(read_json_file(metrics_graph));
        field = parse_displacement_csv(read_text_file(metrics_disp), metrics_disp);
      }
      m.add_input(metrics_rois);
      const auto rois = rois_from_json(read_json_file(metrics_rois));
      Timer timer;
      const auto stress = stage_stress(g, field, cfg);
      const auto roi_metrics = compute_roi_metrics(g, field, stress, rois);
      m.timings.emplace_back("metrics", timer.seconds());
      write_text_file(metrics_out, format_metrics_csv(roi_metrics));
      m.add_output(metrics_out);
      if (!metrics_stress.empty()) {
        write_text_file(metrics_stress, format_stress_csv(stress, g.edges));
        m.add_output(metrics_stress);
      }
      finish(m, metrics_opts, metrics_out);
    } else if (*synth) {
      SynthConfig sc;
      if (!synth_cfg_path.empty()) sc = synth_config_from_json(read_json_file(synth_cfg_path));
      if (!synth_surface.empty()) sc.surface = parse_surface_kind(synth_surface);
      if (!synth_condition.empty()) sc.condition = parse_deformation_kind(synth_condition);
      if (synth_magnitude) sc.pull_magnitude_mm = *synth_magnitude;
      const auto vec_arg = [](const std::string& text, const char* what) {
        const auto v = textio::parse_double_list(text);
        if (v.size() != 3) throw ConfigError(std::string(what) + " needs three comma separated values");
        return Vec3(v[0], v[1], v[2]);
      };
      if (!synth_translation.empty()) sc.translation_mm = vec_arg(synth_translation, "--translation");
      if (!synth_center.empty()) sc.pull_center = vec_arg(synth_center, "--pull-center");
      if (synth_falloff) sc.falloff_radius_mm = *synth_falloff;
      if (synth_frames) sc.frame_count = *synth_frames;
      if (synth_points) sc.point_count = *synth_points;
      if (synth_roi_radius) sc.roi_radius_mm = *synth_roi_radius;
      if (synth_noise) sc.noise_sigma_mm = *synth_noise;
      if (synth_outlier_fraction) sc.outlier_fraction = *synth_outlier_fraction;
      if (synth_outlier_magnitude) sc.outlier_magnitude_mm = *synth_outlier_magnitude;
      if (synth_seed) sc.seed = *synth_seed;
      RunManifest m;
      m.subcommand = "synth";
      m.config = synth_config_to_json(sc);
      Timer timer;
      const auto gt = generate(sc);
      m.timings.emplace_back("generate", timer.seconds());
      std::optional<Degraded> observed;
      if (degrades(sc)) {
        Timer dtimer;
        observed = degrade(gt.sequence, degrade_params(sc));
        m.timings.emplace_back("degrade", dtimer.seconds());
      }
      write_bundle(synth_out, gt, observed ? &observed->sequence : nullptr);
      for (const auto* name : {"sequence.csv", "observed.csv", "gt_graph.json", "gt_displacement.csv", "gt_stress.csv",
                               "rois.json", "config.json"}) {
        if (fs::exists(fs::path(synth_out) / name)) m.add_output(fs::path(synth_out) / name);
      }
      CommonOptions placed = synth_opts;
      if (placed.manifest_path.empty()) placed.manifest_path = (fs::path(synth_out) / "manifest.json").string();
      finish(m, placed, synth_out);
      std::cerr << "synth: " << gt.sequence.track_count() << " primitives, " << gt.graph.vertex_count() << " beads, "
                << gt.graph.edges.size() << " GT edges, " << gt.sequence.frame_count() << " frames\n";
    } else if (*eval) {
      auto cfg_json = effective_config_json(eval_opts);
      if (!eval_tolerances.empty()) cfg_json["eval"]["tolerances_mm"] = textio::parse_double_list(eval_tolerances);
      const auto cfg = config_from_json(cfg_json);
      RunManifest m;
      m.subcommand = "eval";
      m.config = config_to_json(cfg);
      m.add_input(eval_gt);
      const auto bundle = read_bundle(eval_gt);
      std::optional<PrimitiveSequence> pred;
      if (!eval_pred.empty()) {
        m.add_input(eval_pred);
        pred = load_input(eval_pred, eval_format);
      }
      const auto edit = load_edit(eval_edit);
      if (edit) m.add_input(eval_edit);
      Timer timer;
      const auto r = evaluate(bundle, pred ? *pred : bundle_prediction(bundle), cfg, edit ? &*edit : nullptr, eval_label);
      m.timings.emplace_back("evaluate", timer.seconds());
      write_json_file(eval_out, eval_report_to_json(r));
      m.add_output(eval_out);
      finish(m, eval_opts, eval_out);
    } else if (*ablate) {
      const auto cfg = effective_config(ablate_opts);
      RunManifest m;
      m.subcommand = "ablate-scf";
      m.config = config_to_json(cfg);
      std::vector<Bundle> bundles;
      for (const auto& dir : ablate_gt) {
        m.add_input(dir);
        bundles.push_back(read_bundle(dir));
      }
      Timer timer;
      const auto result = ablate_scf(bundles, cfg);
      m.timings.emplace_back("ablate", timer.seconds());
      write_json_file(ablate_out, ablation_to_json(result));
      m.add_output(ablate_out);
      finish(m, ablate_opts, ablate_out);
      std::cout << format_ablation_table(result);
    } else if (*report) {
      auto cfg_json = effective_config_json(report_opts);
      if (!report_tolerances.empty()) cfg_json["eval"]["tolerances_mm"] = textio::parse_double_list(report_tolerances);
      const auto cfg = config_from_json(cfg_json);
      RunManifest m;
      m.subcommand = "report";
      m.config = config_to_json(cfg);
      std::vector<EvalReport> reports;
      Timer timer;
      for (const auto& dir : report_gt) {
        m.add_input(dir);
        const auto bundle = read_bundle(dir);
        reports.push_back(evaluate(bundle, bundle_prediction(bundle), cfg));
      }
      m.timings.emplace_back("evaluate", timer.seconds());
      Json out = combined_report(reports);
      out["config"] = config_to_json(cfg);
      write_json_file(report_out, out);
      m.add_output(report_out);
      finish(m, report_opts, report_out);
    }
  } catch (const vessel4d::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "vessel4d/error.hpp"
#include "vessel4d/field_io.hpp"
#include "vessel4d/hash.hpp"
#include "vessel4d/manifest.hpp"
#include "vessel4d/pipeline.hpp"
#include "vessel4d/stats.hpp"
#include "vessel4d/synth.hpp"

using namespace vessel4d;
namespace fs = std::filesystem;

namespace {

SynthConfig small_pull(double magnitude = 3.0) {
  SynthConfig c;
  c.frame_count = 4;
  c.pull_magnitude_mm = magnitude;
  return c;
}

}  // namespace

TEST_CASE("config defaults are the published constants") {
  const PipelineConfig c;
  CHECK(c.filter.min_radius_mm == 0.07);
  CHECK(c.filter.min_opacity == 0.05);
  CHECK(c.filter.min_rgb_std == 0.05);
  CHECK(c.cluster.color_groups == 5);
  CHECK(c.cluster.eps_mm == 0.7);
  CHECK(c.cluster.min_pts == 3);
  CHECK(c.gamma == 0.25);
  CHECK(c.coherence.alpha == 0.1);
  CHECK(c.coherence.kappa == 2.5);
  CHECK(c.coherence.iterations == 1);
  CHECK(c.material.youngs_modulus_mpa == 1.15);
  CHECK(c.material.poisson_ratio == 0.5);
  CHECK(c.tolerances_mm == std::vector<double>{1.0});
  CHECK(c.coherence_enabled);
  CHECK(c.roi_aggregate == RoiAggregate::mean);
}

TEST_CASE("config json: round trip, partial overlay, strict keys") {
  const auto j = config_to_json(PipelineConfig{});
  CHECK(config_to_json(config_from_json(j)) == j);
  CHECK(j["coherence"]["alpha"] == 0.1);
  CHECK(j["eval"]["tolerances_mm"] == Json::array({1.0}));

  const auto partial = config_from_json(Json::parse(R"({"coherence":{"kappa":4},"graph":{"gamma":0.5}})"));
  CHECK(partial.coherence.kappa == 4.0);
  CHECK(partial.gamma == 0.5);
  CHECK(partial.coherence.alpha == 0.1);

  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"coherense":{}})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"coherence":{"alhpa":0.2}})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"coherence":{"alpha":"x"}})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"coherence":{"alpha":0}})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"eval":{"tolerances_mm":[]}})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"eval":{"roi_aggregate":"mode"}})")), ConfigError);
}

TEST_CASE("config overrides") {
  auto j = config_to_json(PipelineConfig{});
  apply_config_override(j, "coherence.alpha=0.2");
  apply_config_override(j, "coherence.enabled=false");
  apply_config_override(j, "eval.tolerances_mm=[1,2,3]");
  apply_config_override(j, "eval.roi_aggregate=max");
  const auto c = config_from_json(j);
  CHECK(c.coherence.alpha == 0.2);
  CHECK_FALSE(c.coherence_enabled);
  CHECK(c.tolerances_mm == std::vector<double>{1, 2, 3});
  CHECK(c.roi_aggregate == RoiAggregate::max);
  CHECK_THROWS_AS(apply_config_override(j, "coherence.beta=1"), ConfigError);
  CHECK_THROWS_AS(apply_config_override(j, "alpha"), ConfigError);
  CHECK_THROWS_AS(apply_config_override(j, "coherence..alpha=1"), ConfigError);
}

TEST_CASE("field csv round trip and errors") {
  std::mt19937_64 rng(1);
  const auto g = testgen::random_graph(rng, 12, 3, 0.4);
  const auto f = displacement_from_graph(g);
  const auto back = parse_displacement_csv(format_displacement_csv(f));
  CHECK(back.u == f.u);
  CHECK(back.vertex_count == 12);
  CHECK(back.frame_count == 3);

  const auto s = edge_stress(g, f, 0.38);
  const auto sb = parse_stress_csv(format_stress_csv(s, g.edges));
  CHECK(sb.sigma == s.sigma);

  CHECK_THROWS_AS(parse_displacement_csv("vertex,frame,ux,uy\n"), ParseError);
  CHECK_THROWS_AS(parse_displacement_csv("vertex,frame,ux,uy,uz\n0,0,0,0,0\n0,0,0,0,0\n"), ParseError);
  CHECK_THROWS_AS(parse_displacement_csv("vertex,frame,ux,uy,uz\n0,0,0,0,0\n1,1,0,0,0\n"), ParseError);
  CHECK(format_displacement_csv(f).rfind("vertex,frame,ux,uy,uz\n0,0,0,0,0\n0,1,", 0) == 0);
}

TEST_CASE("clean pipeline recovers the generator's beads") {
  const auto gt = generate(small_pull());
  const auto a = run_analysis(gt.sequence, PipelineConfig{});
  REQUIRE(a.graph.vertex_count() == gt.graph.vertex_count());
  for (std::size_t i = 0; i < gt.graph.centroids.size(); ++i) {
    REQUIRE((a.graph.centroids[i] - gt.graph.centroids[i]).norm() <= 1e-12);
  }
  CHECK(a.timings.size() == 5);
}

TEST_CASE("stage composability: separate stages with files equal the fused run") {
  const auto gt = generate(small_pull());
  const auto dir = fs::temp_directory_path() / "vessel4d_test_stages";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const PipelineConfig cfg;

  write_sequence(dir / "raw.csv", gt.sequence);
  const auto filtered = stage_filter(load_sequence(dir / "raw.csv"), cfg);
  write_sequence(dir / "filtered.csv", filtered);
  const auto assignment = stage_cluster(load_sequence(dir / "filtered.csv"), cfg);
  write_json_file(dir / "assignment.json", assignment_to_json(assignment));
  const auto graph = stage_graph(load_sequence(dir / "filtered.csv"),
                                 assignment_from_json(read_json_file(dir / "assignment.json")), cfg);
  write_json_file(dir / "graph.json", graph_to_json(graph));
  const auto g2 = graph_from_json(read_json_file(dir / "graph.json"));
  const auto field = stage_smooth(g2, cfg);
  write_text_file(dir / "disp.csv", format_displacement_csv(field));
  const auto f2 = parse_displacement_csv(read_text_file(dir / "disp.csv"));
  const auto stress = stage_stress(g2, f2, cfg);
  const auto staged = format_metrics_csv(compute_roi_metrics(g2, f2, stress, gt.rois));

  const auto fused = run_analysis(gt.sequence, cfg);
  const auto fused_csv = format_metrics_csv(compute_roi_metrics(fused.graph, fused.field, fused.stress, gt.rois));
  CHECK(sha256_hex(staged) == sha256_hex(fused_csv));
  CHECK(sha256_hex(format_displacement_csv(field)) == sha256_hex(format_displacement_csv(fused.field)));
  CHECK(topology_hash(g2) == topology_hash(fused.graph));
  fs::remove_all(dir);
}

TEST_CASE("curated topology survives every downstream stage") {
  const auto gt = generate(small_pull());
  CurationEdit edit;
  edit.removed_vertices = {3, 17};
  const auto a = run_analysis(gt.sequence, PipelineConfig{}, &edit);
  CHECK(a.graph.curated);
  CHECK(a.graph.vertex_count() == gt.graph.vertex_count() - 2);
  CHECK(a.stress.edge_count == a.graph.edges.size());
  CHECK(a.field.vertex_count == a.graph.vertex_count());
  CHECK(a.old_to_new[3] == kRemovedVertex);
  const auto hash = topology_hash(a.graph);
  const auto relocked = apply_curation(a.graph, CurationEdit{});
  CHECK(topology_hash(relocked.graph) == hash);
}

TEST_CASE("evaluate: clean bulk has zero stress and exact reconstruction") {
  auto c = small_pull();
  c.condition = DeformationKind::bulk;
  const auto gt = generate(c);
  Bundle b{c, gt.sequence, std::nullopt, gt.graph, gt.displacement, gt.stress, gt.rois};
  const auto r = evaluate(b, gt.sequence, PipelineConfig{});
  CHECK(r.label == "bulk");
  CHECK(r.chamfer.cd == 0.0);
  CHECK(r.temporal.delta_cd == 0.0);
  for (const auto& roi : r.rois) {
    CHECK(roi.stress.ours <= 1e-9);
    CHECK(roi.stress.gt <= 1e-12);
  }
  const auto j = eval_report_to_json(r);
  CHECK(j["condition"] == "bulk");
  CHECK(j["overlap"][0]["fscore"] == 1.0);
  CHECK_FALSE(j.contains("timings"));
}

TEST_CASE("evaluate: tolerance sweep and aggregates") {
  const auto gt = generate(small_pull());
  Bundle b{gt.config, gt.sequence, std::nullopt, gt.graph, gt.displacement, gt.stress, gt.rois};
  PipelineConfig cfg;
  cfg.tolerances_mm = {1, 2, 3};
  const auto r = evaluate(b, gt.sequence, cfg);
  REQUIRE(r.overlap.size() == 3);
  CHECK(r.overlap[2].tau == 3.0);
  CHECK(r.label == "pull_3mm");
  double sum = 0.0;
  for (const auto& roi : r.rois) sum += roi.displacement.error;
  CHECK(*r.roi_displacement_error_mm == doctest::Approx(sum / r.rois.size()).epsilon(1e-14));
  cfg.roi_aggregate = RoiAggregate::max;
  const auto rm = evaluate(b, gt.sequence, cfg);
  double mx = -1e300;
  for (const auto& roi : rm.rois) mx = std::max(mx, roi.displacement.error);
  CHECK(*rm.roi_displacement_error_mm == mx);
}

TEST_CASE("report json is deterministic") {
  const auto gt = generate(small_pull());
  Bundle b{gt.config, gt.sequence, std::nullopt, gt.graph, gt.displacement, gt.stress, gt.rois};
  const auto first = eval_report_to_json(evaluate(b, gt.sequence, PipelineConfig{})).dump(1);
  const auto second = eval_report_to_json(evaluate(b, gt.sequence, PipelineConfig{})).dump(1);
  CHECK(first == second);
}

TEST_CASE("manifest records hashes and timings") {
  const auto dir = fs::temp_directory_path() / "vessel4d_test_manifest";
  fs::remove_all(dir);
  fs::create_directories(dir / "in");
  std::ofstream(dir / "in" / "b.txt") << "b";
  std::ofstream(dir / "in" / "a.txt") << "a";
  RunManifest m;
  m.subcommand = "eval";
  m.add_input(dir / "in");
  m.add_output(dir / "in" / "a.txt");
  m.timings.emplace_back("stage", 0.5);
  const auto j = m.to_json();
  CHECK(j["version"] == tool_version());
  REQUIRE(j["inputs"].size() == 2);
  CHECK(j["inputs"][0]["path"].get<std::string>().find("a.txt") != std::string::npos);
  CHECK(j["inputs"][0]["sha256"] == sha256_hex("a"));
  CHECK(j["timings"][0]["seconds"] == 0.5);
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  fs::remove_all(dir);
}

TEST_CASE("property: coherence filtering lowers the 90th-percentile edge stress error under spikes") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    SynthConfig c;
    c.seed = seed;
    c.frame_count = 5;
    c.pull_magnitude_mm = static_cast<double>(seed);
    c.outlier_fraction = 0.05;
    c.outlier_magnitude_mm = 2.0;
    const auto gt = generate(c);
    const auto observed = degrade(gt.sequence, degrade_params(c)).sequence;
    PipelineConfig on, off;
    off.coherence_enabled = false;
    const auto a = run_analysis(observed, on);
    const auto b = run_analysis(observed, off);
    // Spikes start after frame 0, so the graph matches the generator's.
    REQUIRE(a.graph.edges == gt.graph.edges);
    REQUIRE(b.graph.edges == gt.graph.edges);
    std::vector<double> err_on, err_off;
    for (std::size_t i = 0; i < gt.stress.sigma.size(); ++i) {
      err_on.push_back(std::abs(a.stress.sigma[i] - gt.stress.sigma[i]));
      err_off.push_back(std::abs(b.stress.sigma[i] - gt.stress.sigma[i]));
    }
    CHECK(percentile(err_on, 90.0) < percentile(err_off, 90.0));
  }
}

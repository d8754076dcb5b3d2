#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xga/dre.hpp"
#include "xga/features.hpp"
#include "xga/metrics.hpp"
#include "xga/world.hpp"
#include "xga/xga.hpp"

namespace xga {

struct FeatureConfig {
  ExtractorKind kind = ExtractorKind::random_projection;
  int feature_dim = 16;
  int hidden_dim = 32;  // frozen-mlp only
  std::uint64_t seed = 7;

  void validate() const;
  Json to_json() const;
  static FeatureConfig from_json(const Json& j);
};

FeatureExtractor make_extractor(const FeatureConfig& cfg, int obs_dim);

struct ExperimentConfig {
  WorldConfig world;
  FeatureConfig features;
  DreConfig dre;
  XgaConfig xga;
  int n_common = 6;
  int n_novel = 2;
  int n_missing = 2;
  int eval_samples = 256;
  double c_scale = 100.0;
  bool missing_profiles_from_reference = true;
  std::string suite = "single-audit";
  std::vector<std::uint64_t> seeds;         // sweep world seeds
  std::vector<double> lambda_grid = {0.0, 0.1, 0.2, 0.5, 1.0, 5.0};
  std::vector<DreKind> sweep_losses = {DreKind::kliep, DreKind::log_loss};
  std::string output_dir;  // fallback when the CLI gives no --out

  void validate() const;
  Json to_json() const;
  /// Absent fields keep their defaults; absent world attribute lists mean
  /// "all attributes active"; absent dre/xga seeds are derived from the
  /// world seed.
  static ExperimentConfig from_json(const Json& j);

  /// 10,000 iterations with the 12/4/4 direction split.
  void apply_paper_scale();

  MetricsOptions metrics_options() const;
};

ExperimentConfig load_experiment_config(const std::string& path);

/// Stage seeds derived from the world seed when the config leaves them unset.
std::uint64_t derived_dre_seed(std::uint64_t world_seed);
std::uint64_t derived_xga_seed(std::uint64_t world_seed);

/// Same experiment rebased onto another world seed: dre/xga seeds are
/// re-derived, the extractor stays fixed.
ExperimentConfig with_world_seed(const ExperimentConfig& cfg,
                                 std::uint64_t world_seed);

/// world -> DRE fit -> direction training -> metrics. Artifacts: world.json,
/// dre_c.json, dre_r.json, bank_client.json, bank_reference.json, log.jsonl,
/// report.json, report.csv, manifest.json. A failing stage is recorded in the
/// manifest before the error propagates.
AuditReport run_audit(const ExperimentConfig& cfg, const std::string& out_dir);

/// Independent per-model training (lambda_a = lambda_b = 0) followed by
/// greedy post-hoc alignment; banks are reordered so the greedy pairs form
/// the common block.
AuditReport run_baseline(const ExperimentConfig& cfg,
                         const std::string& out_dir);

/// One audit per attribute, with that attribute removed from the client.
std::vector<AuditReport> run_leaveout_suite(const ExperimentConfig& cfg,
                                            const std::string& out_dir);

struct SweepCell {
  DreKind kind = DreKind::kliep;
  double lambda_b = 0.0;
  std::vector<double> r_scores;  // per seed
  double mean = 0.0;
  double stddev = 0.0;  // population
};

struct SweepResult {
  std::vector<SweepCell> cells;
};

/// R_score grid over lambda_b values and DRE loss kinds; worlds and DRE
/// pre-training are shared across the lambda axis.
SweepResult run_lambda_sweep(const ExperimentConfig& cfg,
                             const std::string& out_dir);

std::string sweep_to_csv(const SweepResult& result,
                         const std::vector<DreKind>& kinds,
                         const std::vector<double>& grid);

}  // namespace xga

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "xga/directions.hpp"
#include "xga/serial.hpp"
#include "xga/world.hpp"

namespace xga {

/// Oracle-prediction discrepancies for one direction: absolute change of
/// every attribute under the traversal, per sample and batch-averaged.
struct DiscrepancyProfile {
  Vec mean;        // K
  Mat per_sample;  // K x B, column i belongs to latent i
};

/// One profile per direction of the bank, evaluated at the latent columns.
std::vector<DiscrepancyProfile> discrepancy_profiles(
    const SyntheticGenerator& gen, const OracleClassifier& oracle,
    const DirectionBank& bank, const Mat& latents);

/// Mean cosine of the paired mean profiles; cosine with a zero vector is 0.
double alignment_score_pairs(
    const std::vector<DiscrepancyProfile>& client,
    const std::vector<DiscrepancyProfile>& reference,
    const std::vector<std::pair<int, int>>& pairs);

/// Identity pairing over the first n_common directions of both sides.
double alignment_score(const std::vector<DiscrepancyProfile>& client,
                       const std::vector<DiscrepancyProfile>& reference,
                       int n_common);

/// 1-based position of `attribute` when profile entries are sorted by
/// descending magnitude; equal values rank the lower attribute index first.
int discrepancy_rank(const Vec& profile, int attribute);

/// Mean reciprocal rank over the missing attributes, where each attribute
/// takes its best rank across the given unique-block profiles.
double recovery_score(const std::vector<DiscrepancyProfile>& unique_profiles,
                      const std::vector<int>& missing);

/// c_scale times the mean softmax entropy of per-sample discrepancy vectors,
/// pooled over directions and samples.
double entropy_score(const std::vector<DiscrepancyProfile>& profiles,
                     double c_scale = 100.0);

/// Per-direction mean oracle predictions at manipulated samples, K x N.
Mat mean_predictions(const SyntheticGenerator& gen,
                     const OracleClassifier& oracle, const DirectionBank& bank,
                     const Mat& latents);

/// Sum over attributes of the population variance of the per-direction means.
double deviation_score(const Mat& direction_means);

/// Repeatedly picks the unused (client, reference) pair with the highest
/// cosine between mean profiles; ties resolve to the lexicographically
/// smallest pair.
std::vector<std::pair<int, int>> greedy_align(
    const std::vector<DiscrepancyProfile>& client,
    const std::vector<DiscrepancyProfile>& reference, int count);

struct RankEntry {
  int attribute = 0;
  int direction = 0;  // global index in the reference bank
  int rank = 0;
};

struct AuditReport {
  double a_score = 0.0;
  bool has_r_score = false;
  double r_score = 0.0;
  double h_score_client = 0.0;
  double h_score_reference = 0.0;
  double d_score_client = 0.0;
  double d_score_reference = 0.0;
  std::vector<DiscrepancyProfile> client_profiles;
  std::vector<DiscrepancyProfile> reference_profiles;
  int n_common = 0;
  std::vector<int> missing_attrs;
  std::vector<int> novel_attrs;
  std::vector<RankEntry> ranks;
  std::vector<std::pair<int, int>> common_pairs;
  std::string alignment = "joint";  // or "posthoc"
  bool dre_client_trained = false;
  bool dre_reference_trained = false;
  Json config;  // resolved experiment config echo
  std::string world_hash;
};

struct MetricsOptions {
  int eval_samples = 256;
  std::uint64_t seed = 0;
  double c_scale = 100.0;
  /// Profiles for the missing block come from the reference generator; the
  /// alternative evaluates the same directions through the client generator.
  bool missing_profiles_from_reference = true;
};

/// Scores a trained bank pair against the world's ground truth. `pairs`
/// overrides the identity common-block pairing (post-hoc baseline);
/// config echo, world hash and DRE flags are left for the caller.
AuditReport compute_audit_report(
    const World& world, const DirectionBank& client_bank,
    const DirectionBank& ref_bank, const MetricsOptions& opts,
    const std::vector<std::pair<int, int>>* pairs = nullptr);

Json report_to_json(const AuditReport& report);

/// One row per direction of both banks: side, block, top-3 attributes by
/// mean discrepancy, profile norm.
std::string report_to_csv(const AuditReport& report);

}  // namespace xga

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "xga/adam.hpp"
#include "xga/directions.hpp"
#include "xga/dre.hpp"
#include "xga/features.hpp"
#include "xga/pipeline.hpp"
#include "xga/world.hpp"

namespace xga {

struct XgaConfig {
  double tau = 0.5;
  double lambda_a = 0.1;
  double lambda_b = 1.0;
  int iterations = 2000;
  int pair_size = 2;  // B, samples per generator per iteration
  int directions_per_step = 5;
  double alpha = 3.0;
  AdamConfig adam;
  std::uint64_t seed = 0;
  // Keep the printed j != i restriction on the numerator cross term even
  // though the two batches are from different generators.
  bool cross_pair_excludes_diagonal = true;

  void validate() const;
  Json to_json() const;
  static XgaConfig from_json(const Json& j);
};

/// g(a, b) = exp(cos(a, b) / tau); the cosine of a zero vector with anything
/// is defined as 0, so g is total.
double similarity(const Vec& a, const Vec& b, double tau);

/// Divergence vectors indexed [direction][sample]. An empty inner vector
/// marks a direction that does not exist on that side; every g involving it
/// contributes 0.
using DivergenceSet = std::vector<std::vector<Vec>>;

/// Contrastive alignment loss for direction n given divergences of all N
/// directions on both sides. Both sets must have N slots and equal batch
/// size B >= 2; N >= 2 is required for the denominator.
double xent_loss(const DivergenceSet& client_divs, const DivergenceSet& ref_divs,
                 int n, double lambda_a, double tau,
                 bool cross_pair_excludes_diagonal = true);

struct UniqueTerm {
  int direction = 0;
  // "novel": client-bank direction scored by gamma_r;
  // "missing": reference-bank direction scored by gamma_c.
  std::string block;
  double value = 0.0;
};

struct LossBreakdown {
  std::vector<int> directions;  // evaluated direction indices, ascending
  std::vector<double> xent;     // aligned with `directions`
  std::vector<UniqueTerm> unique;
  double lambda_b = 0.0;
  double total = 0.0;  // sum(xent) + lambda_b * sum(unique values)
};

struct LatentBatch {
  Mat client;     // latent_dim x B
  Mat reference;  // latent_dim x B
};

LatentBatch sample_latent_batch(Rng& rng, int latent_dim, int pair_size);

/// Full objective over every direction index of either bank. Estimator
/// pointers may be null only when lambda_b == 0 (unique terms skipped).
LossBreakdown total_loss(const DirectionBank& client_bank,
                         const DirectionBank& ref_bank, const World& world,
                         const FeatureExtractor& extractor,
                         const RatioEstimator* gamma_c,
                         const RatioEstimator* gamma_r,
                         const LatentBatch& batch, const XgaConfig& cfg);

/// Objective restricted to eval_set (empty means all). Gradients w.r.t. the
/// bank matrices accumulate into client_grads/ref_grads, but only for
/// directions in grad_set; both vectors are resized and zeroed here.
/// Divergences of directions outside grad_set still enter the loss as
/// constants, matching subset training semantics.
LossBreakdown total_loss_grad(const DirectionBank& client_bank,
                              const DirectionBank& ref_bank, const World& world,
                              const FeatureExtractor& extractor,
                              const RatioEstimator* gamma_c,
                              const RatioEstimator* gamma_r,
                              const LatentBatch& batch, const XgaConfig& cfg,
                              const std::vector<int>& eval_set,
                              const std::vector<int>& grad_set,
                              std::vector<Mat>& client_grads,
                              std::vector<Mat>& ref_grads);

struct TrainRecord {
  int iteration = 0;
  double total = 0.0;
  double xent_common_mean = 0.0;  // over sampled common-block directions
  double xent_unique_mean = 0.0;  // over sampled unique-block directions
  double unique_mean = 0.0;       // raw unique values, unweighted
};

struct TrainResult {
  DirectionBank client;
  DirectionBank reference;
  std::vector<TrainRecord> log;
};

/// Banks as train_directions would initialize them, before any step.
std::pair<DirectionBank, DirectionBank> initial_banks(int latent_dim,
                                                      int n_common, int n_novel,
                                                      int n_missing,
                                                      const XgaConfig& cfg);

/// Joint training loop: per iteration draw B latents per generator, sample a
/// direction subset without replacement, evaluate the loss restricted to the
/// subset and take one Adam step on the sampled bank matrices only.
/// Per-direction optimizer state advances only when that direction is
/// sampled. Deterministic in cfg.seed.
TrainResult train_directions(const World& world,
                             const FeatureExtractor& extractor,
                             const RatioEstimator* gamma_c,
                             const RatioEstimator* gamma_r, int n_common,
                             int n_novel, int n_missing, const XgaConfig& cfg);

/// Single-model ablation used by the post-hoc baseline: trains one bank on
/// its own contrastive terms (the other side absent, no unique losses).
DirectionBank train_single(const SyntheticGenerator& gen,
                           const FeatureExtractor& extractor, int n_directions,
                           const XgaConfig& cfg, std::uint64_t bank_tag,
                           std::vector<TrainRecord>* log = nullptr);

}  // namespace xga

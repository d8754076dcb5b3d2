#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "xga/adam.hpp"
#include "xga/directions.hpp"
#include "xga/features.hpp"
#include "xga/mlp.hpp"
#include "xga/world.hpp"

namespace xga {

enum class DreKind { kliep, log_loss };

std::string dre_kind_name(DreKind kind);
DreKind dre_kind_from_name(const std::string& name);

struct DreConfig {
  DreKind kind = DreKind::kliep;
  int hidden_dim = 64;
  int iterations = 1000;
  int batch_size = 32;
  AdamConfig adam;
  std::uint64_t seed = 0;

  void validate() const;
  Json to_json() const;
  static DreConfig from_json(const Json& j);
};

// Density-ratio estimator. The kliep kind maps the MLP output through a
// softplus (range >= 0); the log_loss kind through a sigmoid (range (0,1)).
struct RatioEstimator {
  DreKind kind = DreKind::kliep;
  Mlp2 net;
  bool trained = false;

  double ratio(const Vec& feature) const;
  // Columns of features are samples.
  Vec ratio_batch(const Mat& features) const;
  // d ratio / d feature at a single input.
  Vec input_gradient(const Vec& feature) const;

  Json to_json() const;
  static RatioEstimator from_json(const Json& j);
};

// Log arguments below 1e-12 are clamped; the counter records how often.
inline constexpr double kLogFloor = 1e-12;

struct DreLossStats {
  long clamped = 0;
};

// KLIEP-style objectives. The client loss penalizes mean ratio over
// reference features and rewards mean log-ratio over client features; the
// reference loss is the mirror image.
double kliep_loss_client(const RatioEstimator& model, const Mat& client_feats,
                         const Mat& ref_feats, DreLossStats* stats = nullptr);
double kliep_loss_ref(const RatioEstimator& model, const Mat& client_feats,
                      const Mat& ref_feats, DreLossStats* stats = nullptr);

enum class DreSide { client, reference };

// Binary cross-entropy for the log-loss variant: the named side's features
// carry label 1, the other side's label 0; the two per-side means are summed.
double log_loss(const RatioEstimator& model, const Mat& client_feats,
                const Mat& ref_feats, DreSide side,
                DreLossStats* stats = nullptr);

struct DreLossGrad {
  double loss = 0.0;
  Vec grad;  // in Mlp2 pack() order
  long clamped = 0;
};

DreLossGrad kliep_loss_client_grad(const RatioEstimator& model,
                                   const Mat& client_feats,
                                   const Mat& ref_feats);
DreLossGrad kliep_loss_ref_grad(const RatioEstimator& model,
                                const Mat& client_feats, const Mat& ref_feats);
DreLossGrad log_loss_grad(const RatioEstimator& model, const Mat& client_feats,
                          const Mat& ref_feats, DreSide side);

struct DreTrainRecord {
  int iteration = 0;
  double loss_c = 0.0;
  double loss_r = 0.0;
};

// Returns a feature_dim x count matrix of sampled features.
using FeatureSampler = std::function<Mat(Rng&, int)>;

// Trains gamma_c and gamma_r jointly on shared batches; both estimators are
// returned frozen (trained = true).
std::pair<RatioEstimator, RatioEstimator> train_dre_on(
    const FeatureSampler& client_sampler, const FeatureSampler& ref_sampler,
    Index feature_dim, const DreConfig& cfg,
    std::vector<DreTrainRecord>* trace = nullptr);

std::pair<RatioEstimator, RatioEstimator> train_dre(
    const World& world, const FeatureExtractor& extractor,
    const DreConfig& cfg, std::vector<DreTrainRecord>* trace = nullptr);

// Samples features of a generator at plain latents: F(G(z)).
FeatureSampler world_feature_sampler(const SyntheticGenerator& gen,
                                     const FeatureExtractor& extractor);

// Mean of gamma_other over manipulated features F(G(z + alpha delta_n)).
double unique_loss(const RatioEstimator& gamma_other,
                   const SyntheticGenerator& gen,
                   const FeatureExtractor& extractor, const DirectionBank& bank,
                   int n, const Mat& latents);

}  // namespace xga

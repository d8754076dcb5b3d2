#pragma once

#include <cstdint>
#include <string>

#include "xga/common.hpp"
#include "xga/directions.hpp"
#include "xga/serial.hpp"
#include "xga/world.hpp"

namespace xga {

enum class ExtractorKind { identity, random_projection, frozen_mlp };

std::string to_string(ExtractorKind kind);
ExtractorKind extractor_kind_from_string(const std::string& s);

/// Shared frozen map F from observation space to the feature space where all
/// divergences are compared. Parameters are fixed at construction and never
/// trained.
class FeatureExtractor {
 public:
  static FeatureExtractor identity(int obs_dim);
  /// Orthonormal-row projection obs_dim -> feature_dim.
  static FeatureExtractor random_projection(std::uint64_t seed, int obs_dim,
                                            int feature_dim);
  /// Fixed two-layer tanh network with zero biases.
  static FeatureExtractor frozen_mlp(std::uint64_t seed, int obs_dim,
                                     int feature_dim, int hidden = 32);

  Vec extract(const Vec& x) const;

  /// Reverse-mode step: dL/dx from dL/df at input x.
  Vec backprop(const Vec& x, const Vec& df) const;

  ExtractorKind kind() const { return kind_; }
  int obs_dim() const { return obs_dim_; }
  int feature_dim() const { return feature_dim_; }

  Json to_json() const;
  static FeatureExtractor from_json(const Json& j);

 private:
  FeatureExtractor() = default;

  ExtractorKind kind_ = ExtractorKind::identity;
  int obs_dim_ = 0;
  int feature_dim_ = 0;
  Mat projection_;  // feature_dim x obs_dim, orthonormal rows
  Mat w1_, w2_;     // frozen-mlp weights
};

/// Feature-space divergence induced by one traversal:
/// F(G(z + alpha * delta_n)) - F(G(z)).
Vec divergence(const SyntheticGenerator& gen, const FeatureExtractor& extractor,
               const DirectionBank& bank, int n, const Vec& z);

}  // namespace xga

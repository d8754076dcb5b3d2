#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "xga/common.hpp"
#include "xga/serial.hpp"

namespace xga {

/// Parameters of a controlled generator pair. Both generators share one
/// decoder and one set of per-attribute latent weights, so an attribute
/// active in both models is the same function of the latent on both sides.
struct WorldConfig {
  std::uint64_t seed = 1;
  int latent_dim = 8;       // L
  int attribute_count = 8;  // K
  int obs_dim = 32;         // must be >= K so the decoder is injective
  std::vector<int> reference_attrs;  // active attribute ids, each in [0, K)
  std::vector<int> client_attrs;
  /// Value an attribute is clamped to when inactive; one entry per attribute.
  /// Empty means -1 everywhere (the "absent" pole of tanh).
  Vec baseline;
  /// Strength of an optional per-generator observation shear emulating
  /// distribution shift. 0 keeps both observation maps identical.
  double shear_strength = 0.0;

  Vec resolved_baseline() const;
  void validate() const;
};

/// Deterministic latent -> observation map with a declared active set:
/// x = V U t(z) with t_k = tanh(w_k . z) for active k and the baseline value
/// otherwise. U has orthonormal columns; V is the optional shear.
class SyntheticGenerator {
 public:
  SyntheticGenerator(Mat decoder, Mat attr_weights, std::vector<int> active,
                     Vec baseline, std::optional<Mat> shear = std::nullopt);

  /// Attribute intensities t(z), a K-vector.
  Vec intensities(const Vec& z) const;

  Vec generate(const Vec& z) const;

  /// Reverse-mode step: dL/dz from dL/dx, given the intensities t at z.
  Vec backprop(const Vec& t, const Vec& dx) const;

  int latent_dim() const { return static_cast<int>(attr_weights_.cols()); }
  int obs_dim() const { return static_cast<int>(decoder_.rows()); }
  int attribute_count() const { return static_cast<int>(decoder_.cols()); }
  const std::vector<int>& active_set() const { return active_; }
  bool is_active(int attr) const { return active_mask_[static_cast<std::size_t>(attr)]; }
  const Mat& decoder() const { return decoder_; }
  const Mat& attr_weights() const { return attr_weights_; }
  const Vec& baseline() const { return baseline_; }
  const std::optional<Mat>& shear() const { return shear_; }

 private:
  Mat decoder_;       // D_obs x K, orthonormal columns
  Mat attr_weights_;  // K x L, row k is w_k
  std::vector<int> active_;
  std::vector<bool> active_mask_;
  Vec baseline_;  // K
  std::optional<Mat> shear_;  // D_obs x D_obs
};

/// Exact attribute read-out C(x) = U^T x; inverts the decoder on its range.
class OracleClassifier {
 public:
  explicit OracleClassifier(Mat decoder);

  Vec classify(const Vec& x) const;

  int attribute_count() const { return static_cast<int>(decoder_.cols()); }
  int obs_dim() const { return static_cast<int>(decoder_.rows()); }

 private:
  Mat decoder_;
};

struct World {
  WorldConfig config;
  SyntheticGenerator reference;
  SyntheticGenerator client;
  OracleClassifier oracle;

  /// Attributes active in the reference but not the client.
  std::vector<int> missing_attrs() const;
  /// Attributes active in the client but not the reference.
  std::vector<int> novel_attrs() const;
};

World make_world(const WorldConfig& config);

Json world_to_json(const World& world);
World world_from_json(const Json& j);

}  // namespace xga

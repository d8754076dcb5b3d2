#pragma once

#include <cstdint>
#include <vector>

#include "xga/common.hpp"
#include "xga/serial.hpp"

namespace xga {

/// A set of learnable input-conditioned latent directions for one generator.
/// Direction n maps a latent z to the unit vector M_n z / ||M_n z||; a
/// traversal step moves z by alpha along it. Indices [0, n_common) form the
/// common block shared with the partner bank; the rest is the unique block.
struct DirectionBank {
  std::vector<Mat> mats;  // each latent_dim x latent_dim
  int n_common = 0;
  double alpha = 3.0;

  int size() const { return static_cast<int>(mats.size()); }
  int latent_dim() const {
    return mats.empty() ? 0 : static_cast<int>(mats.front().rows());
  }
  bool is_common(int n) const { return n < n_common; }

  /// Unit direction M_n z / ||M_n z||. Throws NumericalError when
  /// ||M_n z|| <= kDegenerateNorm; degenerate directions are never clamped.
  Vec direction(int n, const Vec& z) const;

  /// z + alpha * direction(n, z).
  Vec apply(int n, const Vec& z) const;

  void validate() const;
};

/// Bank with i.i.d. Gaussian entries of scale 1/sqrt(latent_dim);
/// deterministic in the seed.
DirectionBank init_bank(std::uint64_t seed, int latent_dim, int n_common,
                        int n_unique, double alpha);

Json bank_to_json(const DirectionBank& bank);
DirectionBank bank_from_json(const Json& j);

}  // namespace xga

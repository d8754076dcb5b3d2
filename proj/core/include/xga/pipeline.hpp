#pragma once

#include "xga/common.hpp"
#include "xga/directions.hpp"
#include "xga/features.hpp"
#include "xga/world.hpp"

namespace xga {

/// Forward record of one traversed generation
///   f = F(G(z + alpha * M_n z / ||M_n z||)),
/// keeping every intermediate needed to push a feature-space gradient back
/// onto the direction matrix.
struct ManipulationTape {
  int direction = -1;
  Vec z;        // base latent
  Vec u;        // M_n z
  double u_norm = 0.0;
  Vec delta;    // u / ||u||
  Vec z_step;   // z + alpha * delta
  Vec t;        // attribute intensities at z_step
  Vec x;        // observation
  Vec f;        // features
};

ManipulationTape manipulate(const SyntheticGenerator& gen,
                            const FeatureExtractor& extractor,
                            const DirectionBank& bank, int n, const Vec& z);

/// Accumulates dL/dM_n into `grad` given dL/df on the tape. The chain is
///   df -> dx -> dz_step -> ddelta -> du -> dM,
/// with the unit-normalization Jacobian (I - delta delta^T) / ||u||.
void backprop_to_direction(const SyntheticGenerator& gen,
                           const FeatureExtractor& extractor,
                           const ManipulationTape& tape, const Vec& df,
                           double alpha, Mat& grad);

}  // namespace xga

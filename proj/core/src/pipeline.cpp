#include "xga/pipeline.hpp"

namespace xga {

ManipulationTape manipulate(const SyntheticGenerator& gen,
                            const FeatureExtractor& extractor,
                            const DirectionBank& bank, int n, const Vec& z) {
  require(n >= 0 && n < bank.size(), "direction index out of range");
  const Mat& m = bank.mats[static_cast<std::size_t>(n)];
  require(z.size() == m.cols(), "latent length must equal latent_dim");

  ManipulationTape tape;
  tape.direction = n;
  tape.z = z;
  tape.u = m * z;
  tape.u_norm = tape.u.norm();
  if (tape.u_norm <= kDegenerateNorm) {
    throw NumericalError("degenerate direction " + std::to_string(n) +
                         ": ||M z|| = " + std::to_string(tape.u_norm));
  }
  tape.delta = tape.u / tape.u_norm;
  tape.z_step = z + bank.alpha * tape.delta;
  tape.t = gen.intensities(tape.z_step);
  tape.x = gen.generate(tape.z_step);
  tape.f = extractor.extract(tape.x);
  return tape;
}

void backprop_to_direction(const SyntheticGenerator& gen,
                           const FeatureExtractor& extractor,
                           const ManipulationTape& tape, const Vec& df,
                           double alpha, Mat& grad) {
  const Vec dx = extractor.backprop(tape.x, df);
  const Vec dz_step = gen.backprop(tape.t, dx);
  const Vec ddelta = alpha * dz_step;
  const Vec du =
      (ddelta - tape.delta * tape.delta.dot(ddelta)) / tape.u_norm;
  grad.noalias() += du * tape.z.transpose();
}

}  // namespace xga

#include "xga/directions.hpp"

#include <cmath>

#include "xga/rng.hpp"

namespace xga {

Vec DirectionBank::direction(int n, const Vec& z) const {
  require(n >= 0 && n < size(), "direction index out of range");
  const Mat& m = mats[static_cast<std::size_t>(n)];
  require(z.size() == m.cols(), "latent length must equal latent_dim");
  const Vec u = m * z;
  const double norm = u.norm();
  if (norm <= kDegenerateNorm) {
    throw NumericalError("degenerate direction " + std::to_string(n) +
                         ": ||M z|| = " + std::to_string(norm));
  }
  return u / norm;
}

Vec DirectionBank::apply(int n, const Vec& z) const {
  return z + alpha * direction(n, z);
}

void DirectionBank::validate() const {
  require(n_common >= 0 && n_common <= size(),
          "n_common must lie within the bank");
  require(alpha > 0.0, "alpha must be positive");
  const int l = latent_dim();
  for (const Mat& m : mats)
    require(m.rows() == l && m.cols() == l, "direction matrices must be square and equally sized");
}

DirectionBank init_bank(std::uint64_t seed, int latent_dim, int n_common,
                        int n_unique, double alpha) {
  require(latent_dim > 0, "latent_dim must be positive");
  require(n_common >= 0 && n_unique >= 0 && n_common + n_unique > 0,
          "bank needs at least one direction");
  require(alpha > 0.0, "alpha must be positive");
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(latent_dim));
  DirectionBank bank;
  bank.n_common = n_common;
  bank.alpha = alpha;
  bank.mats.reserve(static_cast<std::size_t>(n_common + n_unique));
  for (int n = 0; n < n_common + n_unique; ++n)
    bank.mats.push_back(rng.normal_matrix(latent_dim, latent_dim) * scale);
  return bank;
}

Json bank_to_json(const DirectionBank& bank) {
  Json j;
  j["format_version"] = 1;
  j["kind"] = "xga-direction-bank";
  j["alpha"] = bank.alpha;
  j["n_common"] = bank.n_common;
  j["latent_dim"] = bank.latent_dim();
  Json mats = Json::array();
  for (const Mat& m : bank.mats) mats.push_back(matrix_to_json(m));
  j["matrices"] = std::move(mats);
  return j;
}

DirectionBank bank_from_json(const Json& j) {
  require(j.value("kind", "") == "xga-direction-bank",
          "not a direction bank document");
  require(j.value("format_version", 0) == 1,
          "unsupported bank format_version");
  DirectionBank bank;
  bank.alpha = j.at("alpha").get<double>();
  bank.n_common = j.at("n_common").get<int>();
  for (const Json& m : j.at("matrices")) bank.mats.push_back(matrix_from_json(m));
  bank.validate();
  return bank;
}

}  // namespace xga

#include "xga/features.hpp"

#include <cmath>

#include "xga/rng.hpp"

namespace xga {
namespace {

Mat orthonormal_rows(Rng rng, int rows, int cols) {
  // QR of a cols x rows Gaussian gives orthonormal columns; transpose.
  Mat a = rng.normal_matrix(cols, rows);
  Eigen::HouseholderQR<Mat> qr(a);
  Mat q = qr.householderQ() * Mat::Identity(cols, rows);
  const Mat& qrm = qr.matrixQR();
  for (Index c = 0; c < rows; ++c)
    if (qrm(c, c) < 0.0) q.col(c) = -q.col(c);
  return q.transpose();
}

}  // namespace

std::string to_string(ExtractorKind kind) {
  switch (kind) {
    case ExtractorKind::identity: return "identity";
    case ExtractorKind::random_projection: return "random-projection";
    case ExtractorKind::frozen_mlp: return "frozen-mlp";
  }
  return "unknown";
}

ExtractorKind extractor_kind_from_string(const std::string& s) {
  if (s == "identity") return ExtractorKind::identity;
  if (s == "random-projection") return ExtractorKind::random_projection;
  if (s == "frozen-mlp") return ExtractorKind::frozen_mlp;
  throw ConfigError("unknown extractor kind: " + s);
}

FeatureExtractor FeatureExtractor::identity(int obs_dim) {
  require(obs_dim > 0, "obs_dim must be positive");
  FeatureExtractor f;
  f.kind_ = ExtractorKind::identity;
  f.obs_dim_ = obs_dim;
  f.feature_dim_ = obs_dim;
  return f;
}

FeatureExtractor FeatureExtractor::random_projection(std::uint64_t seed,
                                                     int obs_dim,
                                                     int feature_dim) {
  require(obs_dim > 0 && feature_dim > 0, "dimensions must be positive");
  require(feature_dim <= obs_dim,
          "projection feature_dim cannot exceed obs_dim");
  FeatureExtractor f;
  f.kind_ = ExtractorKind::random_projection;
  f.obs_dim_ = obs_dim;
  f.feature_dim_ = feature_dim;
  f.projection_ = orthonormal_rows(Rng(seed), feature_dim, obs_dim);
  return f;
}

FeatureExtractor FeatureExtractor::frozen_mlp(std::uint64_t seed, int obs_dim,
                                              int feature_dim, int hidden) {
  require(obs_dim > 0 && feature_dim > 0 && hidden > 0,
          "dimensions must be positive");
  Rng rng(seed);
  FeatureExtractor f;
  f.kind_ = ExtractorKind::frozen_mlp;
  f.obs_dim_ = obs_dim;
  f.feature_dim_ = feature_dim;
  f.w1_ = rng.normal_matrix(hidden, obs_dim) /
          std::sqrt(static_cast<double>(obs_dim));
  f.w2_ = rng.normal_matrix(feature_dim, hidden) /
          std::sqrt(static_cast<double>(hidden));
  return f;
}

Vec FeatureExtractor::extract(const Vec& x) const {
  require(x.size() == obs_dim_, "observation length must equal obs_dim");
  switch (kind_) {
    case ExtractorKind::identity:
      return x;
    case ExtractorKind::random_projection:
      return projection_ * x;
    case ExtractorKind::frozen_mlp:
      return w2_ * (w1_ * x).array().tanh().matrix();
  }
  throw ConfigError("unreachable extractor kind");
}

Vec FeatureExtractor::backprop(const Vec& x, const Vec& df) const {
  require(df.size() == feature_dim_, "df length must equal feature_dim");
  switch (kind_) {
    case ExtractorKind::identity:
      return df;
    case ExtractorKind::random_projection:
      return projection_.transpose() * df;
    case ExtractorKind::frozen_mlp: {
      const Vec a = (w1_ * x).array().tanh().matrix();
      const Vec dpre =
          (w2_.transpose() * df).array() * (1.0 - a.array().square());
      return w1_.transpose() * dpre.matrix();
    }
  }
  throw ConfigError("unreachable extractor kind");
}

Json FeatureExtractor::to_json() const {
  Json j;
  j["kind"] = to_string(kind_);
  j["obs_dim"] = obs_dim_;
  j["feature_dim"] = feature_dim_;
  if (kind_ == ExtractorKind::random_projection)
    j["projection"] = matrix_to_json(projection_);
  if (kind_ == ExtractorKind::frozen_mlp) {
    j["w1"] = matrix_to_json(w1_);
    j["w2"] = matrix_to_json(w2_);
  }
  return j;
}

FeatureExtractor FeatureExtractor::from_json(const Json& j) {
  FeatureExtractor f;
  f.kind_ = extractor_kind_from_string(j.at("kind").get<std::string>());
  f.obs_dim_ = j.at("obs_dim").get<int>();
  f.feature_dim_ = j.at("feature_dim").get<int>();
  if (f.kind_ == ExtractorKind::random_projection) {
    f.projection_ = matrix_from_json(j.at("projection"));
    require(f.projection_.rows() == f.feature_dim_ &&
                f.projection_.cols() == f.obs_dim_,
            "projection dimensions disagree with extractor config");
  }
  if (f.kind_ == ExtractorKind::frozen_mlp) {
    f.w1_ = matrix_from_json(j.at("w1"));
    f.w2_ = matrix_from_json(j.at("w2"));
  }
  return f;
}

Vec divergence(const SyntheticGenerator& gen, const FeatureExtractor& extractor,
               const DirectionBank& bank, int n, const Vec& z) {
  return extractor.extract(gen.generate(bank.apply(n, z))) -
         extractor.extract(gen.generate(z));
}

}  // namespace xga

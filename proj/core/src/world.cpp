#include "xga/world.hpp"

#include <algorithm>
#include <cmath>

#include "xga/rng.hpp"

namespace xga {
namespace {

constexpr std::uint64_t kDecoderTag = 0xDEC0DE;
constexpr std::uint64_t kWeightsTag = 0x3E16475;
constexpr std::uint64_t kShearRefTag = 0x54EA42;
constexpr std::uint64_t kShearClientTag = 0x54EA4C;

bool valid_attr_subset(const std::vector<int>& attrs, int k) {
  std::vector<int> sorted = attrs;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    return false;
  return sorted.empty() || (sorted.front() >= 0 && sorted.back() < k);
}

/// Orthonormal columns via Householder QR, with column signs pinned so the
/// result is a deterministic function of the input matrix.
Mat orthonormal_columns(const Mat& a) {
  Eigen::HouseholderQR<Mat> qr(a);
  Mat q = qr.householderQ() * Mat::Identity(a.rows(), a.cols());
  const Mat& qrm = qr.matrixQR();
  for (Index c = 0; c < a.cols(); ++c) {
    if (qrm(c, c) < 0.0) q.col(c) = -q.col(c);
  }
  return q;
}

Mat make_shear(Rng rng, int dim, double strength) {
  return Mat::Identity(dim, dim) +
         strength / std::sqrt(static_cast<double>(dim)) *
             rng.normal_matrix(dim, dim);
}

}  // namespace

Vec WorldConfig::resolved_baseline() const {
  if (baseline.size() == 0) return Vec::Constant(attribute_count, -1.0);
  return baseline;
}

void WorldConfig::validate() const {
  require(latent_dim > 0, "latent_dim must be positive");
  require(attribute_count > 0, "attribute_count must be positive");
  require(obs_dim >= attribute_count,
          "obs_dim must be at least attribute_count");
  require(!reference_attrs.empty(), "reference_attrs must be nonempty");
  require(!client_attrs.empty(), "client_attrs must be nonempty");
  require(valid_attr_subset(reference_attrs, attribute_count),
          "reference_attrs must be a subset of [0, attribute_count)");
  require(valid_attr_subset(client_attrs, attribute_count),
          "client_attrs must be a subset of [0, attribute_count)");
  require(baseline.size() == 0 ||
              baseline.size() == static_cast<Index>(attribute_count),
          "baseline must have one entry per attribute");
  require(shear_strength >= 0.0, "shear_strength must be nonnegative");
}

SyntheticGenerator::SyntheticGenerator(Mat decoder, Mat attr_weights,
                                       std::vector<int> active, Vec baseline,
                                       std::optional<Mat> shear)
    : decoder_(std::move(decoder)),
      attr_weights_(std::move(attr_weights)),
      active_(std::move(active)),
      baseline_(std::move(baseline)),
      shear_(std::move(shear)) {
  require(!active_.empty(), "generator needs a nonempty active set");
  require(decoder_.cols() == attr_weights_.rows(),
          "decoder and attr_weights disagree on attribute count");
  require(baseline_.size() == decoder_.cols(),
          "baseline length must equal attribute count");
  if (shear_) {
    require(shear_->rows() == decoder_.rows() &&
                shear_->cols() == decoder_.rows(),
            "shear must be obs_dim x obs_dim");
  }
  std::sort(active_.begin(), active_.end());
  active_mask_.assign(static_cast<std::size_t>(decoder_.cols()), false);
  for (int k : active_) {
    require(k >= 0 && k < decoder_.cols(), "active attribute out of range");
    active_mask_[static_cast<std::size_t>(k)] = true;
  }
}

Vec SyntheticGenerator::intensities(const Vec& z) const {
  require(z.size() == attr_weights_.cols(),
          "latent length must equal latent_dim");
  Vec t = baseline_;
  for (int k : active_) t(k) = std::tanh(attr_weights_.row(k).dot(z));
  return t;
}

Vec SyntheticGenerator::generate(const Vec& z) const {
  Vec x = decoder_ * intensities(z);
  if (shear_) x = *shear_ * x;
  return x;
}

Vec SyntheticGenerator::backprop(const Vec& t, const Vec& dx) const {
  Vec g = shear_ ? Vec(shear_->transpose() * dx) : dx;
  const Vec s = decoder_.transpose() * g;
  Vec dz = Vec::Zero(attr_weights_.cols());
  // Inactive attributes are constants; only active rows carry gradient.
  for (int k : active_)
    dz += s(k) * (1.0 - t(k) * t(k)) * attr_weights_.row(k).transpose();
  return dz;
}

OracleClassifier::OracleClassifier(Mat decoder) : decoder_(std::move(decoder)) {}

Vec OracleClassifier::classify(const Vec& x) const {
  require(x.size() == decoder_.rows(),
          "observation length must equal obs_dim");
  return decoder_.transpose() * x;
}

std::vector<int> World::missing_attrs() const {
  std::vector<int> out;
  for (int k : reference.active_set())
    if (!client.is_active(k)) out.push_back(k);
  return out;
}

std::vector<int> World::novel_attrs() const {
  std::vector<int> out;
  for (int k : client.active_set())
    if (!reference.is_active(k)) out.push_back(k);
  return out;
}

World make_world(const WorldConfig& config) {
  config.validate();
  const Rng root(config.seed);

  const Mat decoder = orthonormal_columns(
      root.fork(kDecoderTag).normal_matrix(config.obs_dim,
                                           config.attribute_count));
  // One weight row per attribute id, drawn before the active sets are
  // consulted, so shared attributes are literally the same map in both
  // generators. Rows are orthonormalized (unit-normalized when K > L) so a
  // traversal along one attribute's weight axis leaves the others untouched
  // and single-attribute directions have concentrated oracle profiles.
  Mat weights = root.fork(kWeightsTag)
                    .normal_matrix(config.attribute_count, config.latent_dim);
  if (config.attribute_count <= config.latent_dim) {
    weights = orthonormal_columns(weights.transpose()).transpose();
  } else {
    weights.rowwise().normalize();
  }
  const Vec baseline = config.resolved_baseline();

  std::optional<Mat> shear_ref;
  std::optional<Mat> shear_client;
  if (config.shear_strength > 0.0) {
    shear_ref = make_shear(root.fork(kShearRefTag), config.obs_dim,
                           config.shear_strength);
    shear_client = make_shear(root.fork(kShearClientTag), config.obs_dim,
                              config.shear_strength);
  }

  return World{
      config,
      SyntheticGenerator(decoder, weights, config.reference_attrs, baseline,
                         shear_ref),
      SyntheticGenerator(decoder, weights, config.client_attrs, baseline,
                         shear_client),
      OracleClassifier(decoder),
  };
}

Json world_to_json(const World& world) {
  const WorldConfig& cfg = world.config;
  Json j;
  j["format_version"] = 1;
  j["kind"] = "xga-world";
  j["config"] = {
      {"seed", cfg.seed},
      {"latent_dim", cfg.latent_dim},
      {"attribute_count", cfg.attribute_count},
      {"obs_dim", cfg.obs_dim},
      {"reference_attrs", cfg.reference_attrs},
      {"client_attrs", cfg.client_attrs},
      {"baseline", vector_to_json(cfg.resolved_baseline())},
      {"shear_strength", cfg.shear_strength},
  };
  j["decoder"] = matrix_to_json(world.reference.decoder());
  j["attr_weights"] = matrix_to_json(world.reference.attr_weights());
  if (world.reference.shear())
    j["reference_shear"] = matrix_to_json(*world.reference.shear());
  if (world.client.shear())
    j["client_shear"] = matrix_to_json(*world.client.shear());
  return j;
}

World world_from_json(const Json& j) {
  require(j.value("kind", "") == "xga-world", "not a world document");
  require(j.value("format_version", 0) == 1,
          "unsupported world format_version");
  const Json& c = j.at("config");
  WorldConfig cfg;
  cfg.seed = c.at("seed").get<std::uint64_t>();
  cfg.latent_dim = c.at("latent_dim").get<int>();
  cfg.attribute_count = c.at("attribute_count").get<int>();
  cfg.obs_dim = c.at("obs_dim").get<int>();
  cfg.reference_attrs = c.at("reference_attrs").get<std::vector<int>>();
  cfg.client_attrs = c.at("client_attrs").get<std::vector<int>>();
  cfg.baseline = vector_from_json(c.at("baseline"));
  cfg.shear_strength = c.value("shear_strength", 0.0);
  cfg.validate();

  const Mat decoder = matrix_from_json(j.at("decoder"));
  const Mat weights = matrix_from_json(j.at("attr_weights"));
  require(decoder.rows() == cfg.obs_dim &&
              decoder.cols() == cfg.attribute_count,
          "decoder dimensions disagree with config");
  require(weights.rows() == cfg.attribute_count &&
              weights.cols() == cfg.latent_dim,
          "attr_weights dimensions disagree with config");

  std::optional<Mat> shear_ref;
  std::optional<Mat> shear_client;
  if (j.contains("reference_shear"))
    shear_ref = matrix_from_json(j.at("reference_shear"));
  if (j.contains("client_shear"))
    shear_client = matrix_from_json(j.at("client_shear"));

  const Vec baseline = cfg.resolved_baseline();
  return World{
      cfg,
      SyntheticGenerator(decoder, weights, cfg.reference_attrs, baseline,
                         shear_ref),
      SyntheticGenerator(decoder, weights, cfg.client_attrs, baseline,
                         shear_client),
      OracleClassifier(decoder),
  };
}

}  // namespace xga

#include "xga/dre.hpp"

#include <cmath>

namespace xga {
namespace {

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double apply_head(DreKind kind, double raw) {
  return kind == DreKind::kliep ? softplus(raw) : sigmoid(raw);
}

// Clamped log used by every loss term; counts when the floor fires.
double floored_log(double v, long& clamped) {
  if (v < kLogFloor) {
    ++clamped;
    return std::log(kLogFloor);
  }
  return std::log(v);
}

void check_batches(const RatioEstimator& model, const Mat& client_feats,
                   const Mat& ref_feats) {
  require(client_feats.cols() > 0 && ref_feats.cols() > 0,
          "dre loss needs nonempty batches");
  require(client_feats.rows() == model.net.input_dim() &&
              ref_feats.rows() == model.net.input_dim(),
          "dre feature dimension mismatch");
}

}  // namespace

std::string dre_kind_name(DreKind kind) {
  return kind == DreKind::kliep ? "kliep" : "log";
}

DreKind dre_kind_from_name(const std::string& name) {
  if (name == "kliep") return DreKind::kliep;
  if (name == "log") return DreKind::log_loss;
  throw ConfigError("unknown dre loss kind: " + name);
}

void DreConfig::validate() const {
  require(hidden_dim > 0, "dre hidden_dim must be positive");
  require(iterations >= 0, "dre iterations must be nonnegative");
  require(batch_size >= 1, "dre batch_size must be at least 1");
  require(adam.lr > 0.0, "dre learning rate must be positive");
}

Json DreConfig::to_json() const {
  Json j;
  j["loss"] = dre_kind_name(kind);
  j["hidden_dim"] = hidden_dim;
  j["iterations"] = iterations;
  j["batch_size"] = batch_size;
  j["lr"] = adam.lr;
  j["beta1"] = adam.beta1;
  j["beta2"] = adam.beta2;
  j["eps"] = adam.eps;
  j["seed"] = seed;
  return j;
}

DreConfig DreConfig::from_json(const Json& j) {
  DreConfig cfg;
  if (j.contains("loss")) cfg.kind = dre_kind_from_name(j.at("loss"));
  if (j.contains("hidden_dim")) cfg.hidden_dim = j.at("hidden_dim");
  if (j.contains("iterations")) cfg.iterations = j.at("iterations");
  if (j.contains("batch_size")) cfg.batch_size = j.at("batch_size");
  if (j.contains("lr")) cfg.adam.lr = j.at("lr");
  if (j.contains("beta1")) cfg.adam.beta1 = j.at("beta1");
  if (j.contains("beta2")) cfg.adam.beta2 = j.at("beta2");
  if (j.contains("eps")) cfg.adam.eps = j.at("eps");
  if (j.contains("seed")) cfg.seed = j.at("seed");
  cfg.validate();
  return cfg;
}

double RatioEstimator::ratio(const Vec& feature) const {
  return apply_head(kind, net.forward(feature));
}

Vec RatioEstimator::ratio_batch(const Mat& features) const {
  Vec raw = net.forward_batch(features);
  for (Index i = 0; i < raw.size(); ++i) raw(i) = apply_head(kind, raw(i));
  return raw;
}

Vec RatioEstimator::input_gradient(const Vec& feature) const {
  const double raw = net.forward(feature);
  const double s = sigmoid(raw);
  const double dy = kind == DreKind::kliep ? s : s * (1.0 - s);
  const Mlp2Grad g = mlp2_backward(net, feature, Vec::Constant(1, dy));
  return g.inputs.col(0);
}

Json RatioEstimator::to_json() const {
  Json j;
  j["format_version"] = 1;
  j["kind"] = "xga-dre";
  j["loss"] = dre_kind_name(kind);
  j["trained"] = trained;
  j["net"] = net.to_json();
  return j;
}

RatioEstimator RatioEstimator::from_json(const Json& j) {
  require(j.value("kind", "") == "xga-dre", "not a dre checkpoint");
  RatioEstimator model;
  model.kind = dre_kind_from_name(j.at("loss"));
  model.trained = j.at("trained").get<bool>();
  model.net = Mlp2::from_json(j.at("net"));
  return model;
}

double kliep_loss_client(const RatioEstimator& model, const Mat& client_feats,
                         const Mat& ref_feats, DreLossStats* stats) {
  require(model.kind == DreKind::kliep, "kliep loss needs a kliep estimator");
  check_batches(model, client_feats, ref_feats);
  long clamped = 0;
  const double mean_ratio = model.ratio_batch(ref_feats).mean();
  const Vec cl = model.ratio_batch(client_feats);
  double mean_log = 0.0;
  for (Index i = 0; i < cl.size(); ++i) mean_log += floored_log(cl(i), clamped);
  mean_log /= static_cast<double>(cl.size());
  if (stats) stats->clamped += clamped;
  return mean_ratio - mean_log;
}

double kliep_loss_ref(const RatioEstimator& model, const Mat& client_feats,
                      const Mat& ref_feats, DreLossStats* stats) {
  require(model.kind == DreKind::kliep, "kliep loss needs a kliep estimator");
  check_batches(model, client_feats, ref_feats);
  long clamped = 0;
  const double mean_ratio = model.ratio_batch(client_feats).mean();
  const Vec rf = model.ratio_batch(ref_feats);
  double mean_log = 0.0;
  for (Index i = 0; i < rf.size(); ++i) mean_log += floored_log(rf(i), clamped);
  mean_log /= static_cast<double>(rf.size());
  if (stats) stats->clamped += clamped;
  return mean_ratio - mean_log;
}

double log_loss(const RatioEstimator& model, const Mat& client_feats,
                const Mat& ref_feats, DreSide side, DreLossStats* stats) {
  require(model.kind == DreKind::log_loss, "log loss needs a log estimator");
  check_batches(model, client_feats, ref_feats);
  const Mat& pos = side == DreSide::client ? client_feats : ref_feats;
  const Mat& neg = side == DreSide::client ? ref_feats : client_feats;
  long clamped = 0;
  const Vec p_pos = model.ratio_batch(pos);
  const Vec p_neg = model.ratio_batch(neg);
  double pos_term = 0.0;
  for (Index i = 0; i < p_pos.size(); ++i) {
    pos_term -= floored_log(p_pos(i), clamped);
  }
  pos_term /= static_cast<double>(p_pos.size());
  double neg_term = 0.0;
  for (Index i = 0; i < p_neg.size(); ++i) {
    neg_term -= floored_log(1.0 - p_neg(i), clamped);
  }
  neg_term /= static_cast<double>(p_neg.size());
  if (stats) stats->clamped += clamped;
  return pos_term + neg_term;
}

namespace {

// Shared body for both KLIEP directions: mean ratio over `den_feats` minus
// mean log-ratio over `num_feats`.
DreLossGrad kliep_grad_impl(const RatioEstimator& model, const Mat& num_feats,
                            const Mat& den_feats) {
  check_batches(model, num_feats, den_feats);
  const Index t_num = num_feats.cols();
  const Index t_den = den_feats.cols();
  const Vec raw_den = model.net.forward_batch(den_feats);
  const Vec raw_num = model.net.forward_batch(num_feats);

  DreLossGrad out;
  Vec dy_den(t_den);
  for (Index j = 0; j < t_den; ++j) {
    out.loss += softplus(raw_den(j)) / static_cast<double>(t_den);
    dy_den(j) = sigmoid(raw_den(j)) / static_cast<double>(t_den);
  }
  Vec dy_num(t_num);
  for (Index i = 0; i < t_num; ++i) {
    const double g = softplus(raw_num(i));
    if (g < kLogFloor) {
      ++out.clamped;
      out.loss -= std::log(kLogFloor) / static_cast<double>(t_num);
      dy_num(i) = 0.0;
    } else {
      out.loss -= std::log(g) / static_cast<double>(t_num);
      dy_num(i) = -sigmoid(raw_num(i)) / (g * static_cast<double>(t_num));
    }
  }
  out.grad = mlp2_backward(model.net, den_feats, dy_den).params +
             mlp2_backward(model.net, num_feats, dy_num).params;
  return out;
}

}  // namespace

DreLossGrad kliep_loss_client_grad(const RatioEstimator& model,
                                   const Mat& client_feats,
                                   const Mat& ref_feats) {
  require(model.kind == DreKind::kliep, "kliep loss needs a kliep estimator");
  return kliep_grad_impl(model, client_feats, ref_feats);
}

DreLossGrad kliep_loss_ref_grad(const RatioEstimator& model,
                                const Mat& client_feats, const Mat& ref_feats) {
  require(model.kind == DreKind::kliep, "kliep loss needs a kliep estimator");
  return kliep_grad_impl(model, ref_feats, client_feats);
}

DreLossGrad log_loss_grad(const RatioEstimator& model, const Mat& client_feats,
                          const Mat& ref_feats, DreSide side) {
  require(model.kind == DreKind::log_loss, "log loss needs a log estimator");
  check_batches(model, client_feats, ref_feats);
  const Mat& pos = side == DreSide::client ? client_feats : ref_feats;
  const Mat& neg = side == DreSide::client ? ref_feats : client_feats;
  const Index t_pos = pos.cols();
  const Index t_neg = neg.cols();
  const Vec raw_pos = model.net.forward_batch(pos);
  const Vec raw_neg = model.net.forward_batch(neg);

  DreLossGrad out;
  Vec dy_pos(t_pos);
  for (Index i = 0; i < t_pos; ++i) {
    const double p = sigmoid(raw_pos(i));
    if (p < kLogFloor) {
      ++out.clamped;
      out.loss -= std::log(kLogFloor) / static_cast<double>(t_pos);
      dy_pos(i) = 0.0;
    } else {
      out.loss -= std::log(p) / static_cast<double>(t_pos);
      dy_pos(i) = (p - 1.0) / static_cast<double>(t_pos);
    }
  }
  Vec dy_neg(t_neg);
  for (Index j = 0; j < t_neg; ++j) {
    const double p = sigmoid(raw_neg(j));
    if (1.0 - p < kLogFloor) {
      ++out.clamped;
      out.loss -= std::log(kLogFloor) / static_cast<double>(t_neg);
      dy_neg(j) = 0.0;
    } else {
      out.loss -= std::log(1.0 - p) / static_cast<double>(t_neg);
      dy_neg(j) = p / static_cast<double>(t_neg);
    }
  }
  out.grad = mlp2_backward(model.net, pos, dy_pos).params +
             mlp2_backward(model.net, neg, dy_neg).params;
  return out;
}

std::pair<RatioEstimator, RatioEstimator> train_dre_on(
    const FeatureSampler& client_sampler, const FeatureSampler& ref_sampler,
    Index feature_dim, const DreConfig& cfg,
    std::vector<DreTrainRecord>* trace) {
  cfg.validate();
  require(feature_dim > 0, "dre feature dimension must be positive");

  const Rng root(cfg.seed);
  Rng rng_c = root.fork(1);
  Rng rng_r = root.fork(2);
  Rng rng_batch = root.fork(3);

  RatioEstimator c{cfg.kind, Mlp2::init(rng_c, feature_dim, cfg.hidden_dim),
                   false};
  RatioEstimator r{cfg.kind, Mlp2::init(rng_r, feature_dim, cfg.hidden_dim),
                   false};
  AdamState state_c(c.net.param_count());
  AdamState state_r(r.net.param_count());
  Vec params_c = c.net.pack();
  Vec params_r = r.net.pack();

  for (int it = 0; it < cfg.iterations; ++it) {
    const Mat cf = client_sampler(rng_batch, cfg.batch_size);
    const Mat rf = ref_sampler(rng_batch, cfg.batch_size);
    require(cf.rows() == feature_dim && rf.rows() == feature_dim,
            "feature sampler dimension mismatch");

    const DreLossGrad gc =
        cfg.kind == DreKind::kliep
            ? kliep_loss_client_grad(c, cf, rf)
            : log_loss_grad(c, cf, rf, DreSide::client);
    const DreLossGrad gr =
        cfg.kind == DreKind::kliep
            ? kliep_loss_ref_grad(r, cf, rf)
            : log_loss_grad(r, cf, rf, DreSide::reference);
    if (!std::isfinite(gc.loss) || !std::isfinite(gr.loss)) {
      throw NumericalError("dre loss non-finite at iteration " +
                           std::to_string(it));
    }

    state_c.update(cfg.adam, gc.grad, params_c);
    c.net.unpack(params_c);
    state_r.update(cfg.adam, gr.grad, params_r);
    r.net.unpack(params_r);

    if (trace) trace->push_back({it, gc.loss, gr.loss});
  }

  c.trained = true;
  r.trained = true;
  return {c, r};
}

std::pair<RatioEstimator, RatioEstimator> train_dre(
    const World& world, const FeatureExtractor& extractor,
    const DreConfig& cfg, std::vector<DreTrainRecord>* trace) {
  require(extractor.obs_dim() == world.config.obs_dim,
          "extractor does not match world observation dimension");
  return train_dre_on(world_feature_sampler(world.client, extractor),
                      world_feature_sampler(world.reference, extractor),
                      extractor.feature_dim(), cfg, trace);
}

FeatureSampler world_feature_sampler(const SyntheticGenerator& gen,
                                     const FeatureExtractor& extractor) {
  return [&gen, &extractor](Rng& rng, int count) {
    Mat out(extractor.feature_dim(), count);
    for (int i = 0; i < count; ++i) {
      const Vec z = rng.normal_vector(gen.latent_dim());
      out.col(i) = extractor.extract(gen.generate(z));
    }
    return out;
  };
}

double unique_loss(const RatioEstimator& gamma_other,
                   const SyntheticGenerator& gen,
                   const FeatureExtractor& extractor, const DirectionBank& bank,
                   int n, const Mat& latents) {
  require(latents.cols() > 0, "unique loss needs a nonempty batch");
  double total = 0.0;
  for (Index i = 0; i < latents.cols(); ++i) {
    const Vec z_step = bank.apply(n, latents.col(i));
    total += gamma_other.ratio(extractor.extract(gen.generate(z_step)));
  }
  return total / static_cast<double>(latents.cols());
}

}  // namespace xga

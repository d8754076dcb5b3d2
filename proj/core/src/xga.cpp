#include "xga/xga.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace xga {
namespace {

constexpr std::uint64_t kClientBankTag = 10;
constexpr std::uint64_t kRefBankTag = 11;
constexpr std::uint64_t kLatentTag = 12;
constexpr std::uint64_t kSubsetTag = 13;

bool present(const DivergenceSet& s, int l) {
  return !s[static_cast<std::size_t>(l)].empty();
}

// Adds w * dg/da and w * dg/db in place. Zero vectors sit in the constant
// region of the extended g, so they receive no gradient.
void similarity_accum(const Vec& a, const Vec& b, double tau, double w,
                      Vec& da, Vec& db) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na <= kTinyNorm || nb <= kTinyNorm) return;
  const double c = a.dot(b) / (na * nb);
  const double s = w * std::exp(c / tau) / tau;
  da += s * (b / (na * nb) - (c / (na * na)) * a);
  db += s * (a / (na * nb) - (c / (nb * nb)) * b);
}

struct XentTerms {
  double num = 0.0;
  double den = 0.0;
};

// Value pass over the printed sums. Absent directions make every g they
// appear in contribute 0.
XentTerms xent_terms(const DivergenceSet& c, const DivergenceSet& r, int n,
                     double lambda_a, double tau, bool nodiag, Index batch) {
  XentTerms t;
  const int total = static_cast<int>(c.size());
  const bool cn = present(c, n);
  const bool rn = present(r, n);
  for (Index i = 0; i < batch; ++i) {
    for (Index j = 0; j < batch; ++j) {
      if (i != j) {
        if (cn) t.num += similarity(c[n][i], c[n][j], tau);
        if (rn) t.num += similarity(r[n][i], r[n][j], tau);
      }
      if ((nodiag ? i != j : true) && cn && rn && lambda_a != 0.0) {
        t.num += lambda_a * similarity(r[n][i], c[n][j], tau);
      }
    }
  }
  for (Index i = 0; i < batch; ++i) {
    for (Index j = 0; j < batch; ++j) {
      for (int l = 0; l < total; ++l) {
        if (l == n) continue;
        if (present(c, l) && cn) t.den += similarity(c[l][i], c[n][j], tau);
        if (present(r, l) && rn) t.den += similarity(r[l][i], r[n][j], tau);
        if (present(r, l) && cn) t.den += similarity(r[l][i], c[n][j], tau);
      }
    }
  }
  return t;
}

// Gradient pass mirroring xent_terms; wnum = -1/num, wden = 1/den.
void xent_accum(const DivergenceSet& c, const DivergenceSet& r, int n,
                double lambda_a, double tau, bool nodiag, Index batch,
                double wnum, double wden, std::vector<std::vector<Vec>>& dc,
                std::vector<std::vector<Vec>>& dr) {
  const int total = static_cast<int>(c.size());
  const bool cn = present(c, n);
  const bool rn = present(r, n);
  for (Index i = 0; i < batch; ++i) {
    for (Index j = 0; j < batch; ++j) {
      if (i != j) {
        if (cn) similarity_accum(c[n][i], c[n][j], tau, wnum, dc[n][i], dc[n][j]);
        if (rn) similarity_accum(r[n][i], r[n][j], tau, wnum, dr[n][i], dr[n][j]);
      }
      if ((nodiag ? i != j : true) && cn && rn && lambda_a != 0.0) {
        similarity_accum(r[n][i], c[n][j], tau, lambda_a * wnum, dr[n][i],
                         dc[n][j]);
      }
    }
  }
  for (Index i = 0; i < batch; ++i) {
    for (Index j = 0; j < batch; ++j) {
      for (int l = 0; l < total; ++l) {
        if (l == n) continue;
        if (present(c, l) && cn) {
          similarity_accum(c[l][i], c[n][j], tau, wden, dc[l][i], dc[n][j]);
        }
        if (present(r, l) && rn) {
          similarity_accum(r[l][i], r[n][j], tau, wden, dr[l][i], dr[n][j]);
        }
        if (present(r, l) && cn) {
          similarity_accum(r[l][i], c[n][j], tau, wden, dr[l][i], dc[n][j]);
        }
      }
    }
  }
}

Index checked_batch(const DivergenceSet& c, const DivergenceSet& r) {
  Index batch = -1;
  for (const DivergenceSet* s : {&c, &r}) {
    for (const auto& slot : *s) {
      if (slot.empty()) continue;
      const Index b = static_cast<Index>(slot.size());
      if (batch < 0) {
        batch = b;
      } else {
        require(b == batch, "divergence slots disagree on batch size");
      }
    }
  }
  require(batch >= 2, "xent needs batch size >= 2");
  return batch;
}

struct Side {
  std::vector<Vec> base;
  std::vector<std::vector<ManipulationTape>> tapes;
  DivergenceSet divs;
  std::vector<std::vector<Vec>> df;
};

// Shared evaluation engine behind total_loss, total_loss_grad, and the
// training loops. Null generator/bank pointers mark an absent side.
LossBreakdown run_engine(const SyntheticGenerator* cgen,
                         const DirectionBank* cbank,
                         const SyntheticGenerator* rgen,
                         const DirectionBank* rbank,
                         const FeatureExtractor& extractor,
                         const RatioEstimator* gamma_c,
                         const RatioEstimator* gamma_r, const Mat* clat,
                         const Mat* rlat, const XgaConfig& cfg,
                         std::vector<int> eval_set,
                         std::vector<int> grad_set, std::vector<Mat>* cgrads,
                         std::vector<Mat>* rgrads) {
  cfg.validate();
  require((cgen != nullptr) == (cbank != nullptr) &&
              (cgen != nullptr) == (clat != nullptr),
          "client generator, bank and latents must come together");
  require((rgen != nullptr) == (rbank != nullptr) &&
              (rgen != nullptr) == (rlat != nullptr),
          "reference generator, bank and latents must come together");
  require(cgen || rgen, "at least one side required");

  const int c_count = cbank ? cbank->size() : 0;
  const int r_count = rbank ? rbank->size() : 0;
  const int total = std::max(c_count, r_count);
  require(total >= 2, "need at least 2 directions");

  int n_common = 0;
  if (cbank && rbank) {
    require(cbank->n_common == rbank->n_common,
            "banks disagree on common block size");
    n_common = cbank->n_common;
  } else {
    n_common = cbank ? cbank->n_common : rbank->n_common;
  }

  Index batch = 0;
  if (clat) batch = clat->cols();
  if (rlat) {
    if (batch > 0) {
      require(rlat->cols() == batch,
              "client and reference batches must have equal size");
    }
    batch = rlat->cols();
  }
  require(batch >= 2, "pair size must be at least 2");

  const bool want_grads = cgrads != nullptr || rgrads != nullptr;
  const Index feat_dim = extractor.feature_dim();

  auto build = [&](const SyntheticGenerator& gen, const DirectionBank& bank,
                   const Mat& lat, int count, Side& s) {
    bank.validate();
    require(extractor.obs_dim() == gen.obs_dim(),
            "extractor does not match generator observation dimension");
    require(lat.rows() == bank.latent_dim() &&
                bank.latent_dim() == gen.latent_dim(),
            "latent dimension mismatch");
    s.base.resize(static_cast<std::size_t>(batch));
    for (Index i = 0; i < batch; ++i) {
      s.base[static_cast<std::size_t>(i)] =
          extractor.extract(gen.generate(lat.col(i)));
    }
    s.tapes.assign(static_cast<std::size_t>(total), {});
    s.divs.assign(static_cast<std::size_t>(total), {});
    if (want_grads) s.df.assign(static_cast<std::size_t>(total), {});
    for (int n = 0; n < count; ++n) {
      auto& tn = s.tapes[static_cast<std::size_t>(n)];
      auto& dn = s.divs[static_cast<std::size_t>(n)];
      tn.reserve(static_cast<std::size_t>(batch));
      dn.reserve(static_cast<std::size_t>(batch));
      for (Index i = 0; i < batch; ++i) {
        tn.push_back(manipulate(gen, extractor, bank, n, lat.col(i)));
        dn.push_back(tn.back().f - s.base[static_cast<std::size_t>(i)]);
      }
      if (want_grads) {
        s.df[static_cast<std::size_t>(n)].assign(
            static_cast<std::size_t>(batch), Vec::Zero(feat_dim));
      }
    }
  };

  Side cs;
  Side rs;
  if (cgen) {
    build(*cgen, *cbank, *clat, c_count, cs);
  } else {
    cs.divs.assign(static_cast<std::size_t>(total), {});
  }
  if (rgen) {
    build(*rgen, *rbank, *rlat, r_count, rs);
  } else {
    rs.divs.assign(static_cast<std::size_t>(total), {});
  }

  if (eval_set.empty()) {
    eval_set.resize(static_cast<std::size_t>(total));
    std::iota(eval_set.begin(), eval_set.end(), 0);
  } else {
    std::sort(eval_set.begin(), eval_set.end());
    eval_set.erase(std::unique(eval_set.begin(), eval_set.end()),
                   eval_set.end());
    require(eval_set.front() >= 0 && eval_set.back() < total,
            "eval direction index out of range");
  }

  std::vector<char> in_grad_set(static_cast<std::size_t>(total), 0);
  if (want_grads) {
    if (grad_set.empty()) {
      std::fill(in_grad_set.begin(), in_grad_set.end(), 1);
    } else {
      for (int g : grad_set) {
        require(g >= 0 && g < total, "grad direction index out of range");
        in_grad_set[static_cast<std::size_t>(g)] = 1;
      }
    }
    if (cgrads) {
      cgrads->assign(static_cast<std::size_t>(c_count),
                     cbank ? Mat::Zero(cbank->latent_dim(), cbank->latent_dim())
                           : Mat());
    }
    if (rgrads) {
      rgrads->assign(static_cast<std::size_t>(r_count),
                     rbank ? Mat::Zero(rbank->latent_dim(), rbank->latent_dim())
                           : Mat());
    }
  }

  if (cfg.lambda_b != 0.0) {
    require(gamma_c != nullptr && gamma_r != nullptr,
            "lambda_b > 0 requires both ratio estimators");
  }
  if (gamma_c) {
    require(gamma_c->net.input_dim() == feat_dim,
            "gamma_c feature dimension mismatch");
  }
  if (gamma_r) {
    require(gamma_r->net.input_dim() == feat_dim,
            "gamma_r feature dimension mismatch");
  }

  LossBreakdown out;
  out.lambda_b = cfg.lambda_b;
  double xent_sum = 0.0;
  for (int n : eval_set) {
    require(present(cs.divs, n) || present(rs.divs, n),
            "direction absent on both sides");
    const double lam = n < n_common ? cfg.lambda_a : 0.0;
    const XentTerms t =
        xent_terms(cs.divs, rs.divs, n, lam, cfg.tau,
                   cfg.cross_pair_excludes_diagonal, batch);
    if (!(t.num > 0.0) || !(t.den > 0.0) || !std::isfinite(t.num) ||
        !std::isfinite(t.den)) {
      throw NumericalError("degenerate xent ratio for direction " +
                           std::to_string(n));
    }
    const double loss_n = std::log(t.den) - std::log(t.num);
    out.directions.push_back(n);
    out.xent.push_back(loss_n);
    xent_sum += loss_n;
    if (want_grads) {
      xent_accum(cs.divs, rs.divs, n, lam, cfg.tau,
                 cfg.cross_pair_excludes_diagonal, batch, -1.0 / t.num,
                 1.0 / t.den, cs.df, rs.df);
    }
  }

  double unique_sum = 0.0;
  if (gamma_r && cgen) {
    for (int n : eval_set) {
      if (n < n_common || n >= c_count) continue;
      double val = 0.0;
      for (Index i = 0; i < batch; ++i) {
        val += gamma_r->ratio(cs.tapes[static_cast<std::size_t>(n)]
                                  [static_cast<std::size_t>(i)].f);
      }
      val /= static_cast<double>(batch);
      out.unique.push_back({n, "novel", val});
      unique_sum += val;
      if (want_grads && in_grad_set[static_cast<std::size_t>(n)] &&
          cfg.lambda_b != 0.0 && cgrads) {
        for (Index i = 0; i < batch; ++i) {
          const auto& tape = cs.tapes[static_cast<std::size_t>(n)]
                                     [static_cast<std::size_t>(i)];
          cs.df[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] +=
              (cfg.lambda_b / static_cast<double>(batch)) *
              gamma_r->input_gradient(tape.f);
        }
      }
    }
  }
  if (gamma_c && rgen) {
    for (int n : eval_set) {
      if (n < n_common || n >= r_count) continue;
      double val = 0.0;
      for (Index i = 0; i < batch; ++i) {
        val += gamma_c->ratio(rs.tapes[static_cast<std::size_t>(n)]
                                  [static_cast<std::size_t>(i)].f);
      }
      val /= static_cast<double>(batch);
      out.unique.push_back({n, "missing", val});
      unique_sum += val;
      if (want_grads && in_grad_set[static_cast<std::size_t>(n)] &&
          cfg.lambda_b != 0.0 && rgrads) {
        for (Index i = 0; i < batch; ++i) {
          const auto& tape = rs.tapes[static_cast<std::size_t>(n)]
                                     [static_cast<std::size_t>(i)];
          rs.df[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] +=
              (cfg.lambda_b / static_cast<double>(batch)) *
              gamma_c->input_gradient(tape.f);
        }
      }
    }
  }
  out.total = xent_sum + cfg.lambda_b * unique_sum;

  if (want_grads) {
    auto flush = [&](const SyntheticGenerator& gen, const DirectionBank& bank,
                     Side& s, std::vector<Mat>& grads, int count) {
      for (int n = 0; n < count; ++n) {
        if (!in_grad_set[static_cast<std::size_t>(n)]) continue;
        for (Index i = 0; i < batch; ++i) {
          backprop_to_direction(
              gen, extractor,
              s.tapes[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)],
              s.df[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)],
              bank.alpha, grads[static_cast<std::size_t>(n)]);
        }
      }
    };
    if (cgrads && cgen) flush(*cgen, *cbank, cs, *cgrads, c_count);
    if (rgrads && rgen) flush(*rgen, *rbank, rs, *rgrads, r_count);
  }
  return out;
}

TrainRecord make_record(const LossBreakdown& bd, int n_common, int iteration) {
  TrainRecord rec;
  rec.iteration = iteration;
  rec.total = bd.total;
  double common_sum = 0.0;
  double unique_sum = 0.0;
  int common_n = 0;
  int unique_n = 0;
  for (std::size_t k = 0; k < bd.directions.size(); ++k) {
    if (bd.directions[k] < n_common) {
      common_sum += bd.xent[k];
      ++common_n;
    } else {
      unique_sum += bd.xent[k];
      ++unique_n;
    }
  }
  rec.xent_common_mean = common_n > 0 ? common_sum / common_n : 0.0;
  rec.xent_unique_mean = unique_n > 0 ? unique_sum / unique_n : 0.0;
  double uval = 0.0;
  for (const UniqueTerm& u : bd.unique) uval += u.value;
  rec.unique_mean =
      bd.unique.empty() ? 0.0 : uval / static_cast<double>(bd.unique.size());
  return rec;
}

void adam_step_matrix(AdamState& state, const AdamConfig& cfg, const Mat& grad,
                      Mat& params) {
  Vec p = Eigen::Map<const Vec>(params.data(), params.size());
  const Vec g = Eigen::Map<const Vec>(grad.data(), grad.size());
  state.update(cfg, g, p);
  Eigen::Map<Vec>(params.data(), params.size()) = p;
}

}  // namespace

void XgaConfig::validate() const {
  require(tau > 0.0, "tau must be positive");
  require(lambda_a >= 0.0, "lambda_a must be nonnegative");
  require(lambda_b >= 0.0, "lambda_b must be nonnegative");
  require(iterations >= 0, "iterations must be nonnegative");
  require(pair_size >= 2, "pair_size must be at least 2");
  require(directions_per_step >= 1, "directions_per_step must be at least 1");
  require(std::isfinite(alpha), "alpha must be finite");
  require(adam.lr > 0.0, "learning rate must be positive");
}

Json XgaConfig::to_json() const {
  Json j;
  j["tau"] = tau;
  j["lambda_a"] = lambda_a;
  j["lambda_b"] = lambda_b;
  j["iterations"] = iterations;
  j["pair_size"] = pair_size;
  j["directions_per_step"] = directions_per_step;
  j["alpha"] = alpha;
  j["lr"] = adam.lr;
  j["beta1"] = adam.beta1;
  j["beta2"] = adam.beta2;
  j["eps"] = adam.eps;
  j["seed"] = seed;
  j["cross_pair_excludes_diagonal"] = cross_pair_excludes_diagonal;
  return j;
}

XgaConfig XgaConfig::from_json(const Json& j) {
  XgaConfig cfg;
  if (j.contains("tau")) cfg.tau = j.at("tau");
  if (j.contains("lambda_a")) cfg.lambda_a = j.at("lambda_a");
  if (j.contains("lambda_b")) cfg.lambda_b = j.at("lambda_b");
  if (j.contains("iterations")) cfg.iterations = j.at("iterations");
  if (j.contains("pair_size")) cfg.pair_size = j.at("pair_size");
  if (j.contains("directions_per_step")) {
    cfg.directions_per_step = j.at("directions_per_step");
  }
  if (j.contains("alpha")) cfg.alpha = j.at("alpha");
  if (j.contains("lr")) cfg.adam.lr = j.at("lr");
  if (j.contains("beta1")) cfg.adam.beta1 = j.at("beta1");
  if (j.contains("beta2")) cfg.adam.beta2 = j.at("beta2");
  if (j.contains("eps")) cfg.adam.eps = j.at("eps");
  if (j.contains("seed")) cfg.seed = j.at("seed");
  if (j.contains("cross_pair_excludes_diagonal")) {
    cfg.cross_pair_excludes_diagonal = j.at("cross_pair_excludes_diagonal");
  }
  cfg.validate();
  return cfg;
}

double similarity(const Vec& a, const Vec& b, double tau) {
  require(tau > 0.0, "tau must be positive");
  require(a.size() == b.size(), "similarity needs equal-length vectors");
  const double na = a.norm();
  const double nb = b.norm();
  if (na <= kTinyNorm || nb <= kTinyNorm) return 1.0;
  return std::exp(a.dot(b) / (na * nb) / tau);
}

double xent_loss(const DivergenceSet& client_divs, const DivergenceSet& ref_divs,
                 int n, double lambda_a, double tau,
                 bool cross_pair_excludes_diagonal) {
  require(tau > 0.0, "tau must be positive");
  const int total = static_cast<int>(client_divs.size());
  require(static_cast<int>(ref_divs.size()) == total,
          "divergence sets must have equal direction counts");
  require(total >= 2, "xent needs at least 2 directions");
  require(n >= 0 && n < total, "direction index out of range");
  require(present(client_divs, n) || present(ref_divs, n),
          "direction absent on both sides");
  const Index batch = checked_batch(client_divs, ref_divs);
  const XentTerms t = xent_terms(client_divs, ref_divs, n, lambda_a, tau,
                                 cross_pair_excludes_diagonal, batch);
  if (!(t.num > 0.0) || !(t.den > 0.0)) {
    throw NumericalError("degenerate xent ratio for direction " +
                         std::to_string(n));
  }
  return std::log(t.den) - std::log(t.num);
}

LatentBatch sample_latent_batch(Rng& rng, int latent_dim, int pair_size) {
  require(latent_dim > 0, "latent_dim must be positive");
  require(pair_size >= 2, "pair_size must be at least 2");
  LatentBatch b;
  b.client = rng.normal_matrix(latent_dim, pair_size);
  b.reference = rng.normal_matrix(latent_dim, pair_size);
  return b;
}

LossBreakdown total_loss(const DirectionBank& client_bank,
                         const DirectionBank& ref_bank, const World& world,
                         const FeatureExtractor& extractor,
                         const RatioEstimator* gamma_c,
                         const RatioEstimator* gamma_r,
                         const LatentBatch& batch, const XgaConfig& cfg) {
  return run_engine(&world.client, &client_bank, &world.reference, &ref_bank,
                    extractor, gamma_c, gamma_r, &batch.client,
                    &batch.reference, cfg, {}, {}, nullptr, nullptr);
}

LossBreakdown total_loss_grad(const DirectionBank& client_bank,
                              const DirectionBank& ref_bank, const World& world,
                              const FeatureExtractor& extractor,
                              const RatioEstimator* gamma_c,
                              const RatioEstimator* gamma_r,
                              const LatentBatch& batch, const XgaConfig& cfg,
                              const std::vector<int>& eval_set,
                              const std::vector<int>& grad_set,
                              std::vector<Mat>& client_grads,
                              std::vector<Mat>& ref_grads) {
  return run_engine(&world.client, &client_bank, &world.reference, &ref_bank,
                    extractor, gamma_c, gamma_r, &batch.client,
                    &batch.reference, cfg, eval_set, grad_set, &client_grads,
                    &ref_grads);
}

std::pair<DirectionBank, DirectionBank> initial_banks(int latent_dim,
                                                      int n_common, int n_novel,
                                                      int n_missing,
                                                      const XgaConfig& cfg) {
  const Rng root(cfg.seed);
  DirectionBank client = init_bank(root.fork(kClientBankTag).seed(), latent_dim,
                                   n_common, n_novel, cfg.alpha);
  DirectionBank reference = init_bank(root.fork(kRefBankTag).seed(), latent_dim,
                                      n_common, n_missing, cfg.alpha);
  // A common index starts as the same matrix in both banks, so the paired
  // directions begin in one basin and the cross term only has to hold them
  // together rather than find each other.
  for (int n = 0; n < n_common; ++n) reference.mats[static_cast<std::size_t>(n)] =
      client.mats[static_cast<std::size_t>(n)];
  return {std::move(client), std::move(reference)};
}

TrainResult train_directions(const World& world,
                             const FeatureExtractor& extractor,
                             const RatioEstimator* gamma_c,
                             const RatioEstimator* gamma_r, int n_common,
                             int n_novel, int n_missing, const XgaConfig& cfg) {
  cfg.validate();
  require(n_common >= 1, "need at least one common direction");
  require(n_novel >= 0 && n_missing >= 0, "unique block sizes must be >= 0");
  if (cfg.lambda_b != 0.0) {
    require(gamma_c != nullptr && gamma_r != nullptr,
            "lambda_b > 0 requires both ratio estimators");
  }

  const int latent_dim = world.config.latent_dim;
  TrainResult out;
  std::tie(out.client, out.reference) =
      initial_banks(latent_dim, n_common, n_novel, n_missing, cfg);
  const int total = std::max(out.client.size(), out.reference.size());
  require(total >= 2, "need at least 2 directions");

  const Rng root(cfg.seed);
  Rng rng_lat = root.fork(kLatentTag);
  Rng rng_sub = root.fork(kSubsetTag);

  const Index flat = static_cast<Index>(latent_dim) * latent_dim;
  std::vector<AdamState> cstates(static_cast<std::size_t>(out.client.size()),
                                 AdamState(flat));
  std::vector<AdamState> rstates(
      static_cast<std::size_t>(out.reference.size()), AdamState(flat));

  const int per_step = std::min(cfg.directions_per_step, total);
  std::vector<Mat> cgrads;
  std::vector<Mat> rgrads;
  out.log.reserve(static_cast<std::size_t>(cfg.iterations));

  for (int it = 0; it < cfg.iterations; ++it) {
    const LatentBatch batch =
        sample_latent_batch(rng_lat, latent_dim, cfg.pair_size);
    const std::vector<int> subset =
        rng_sub.sample_without_replacement(total, per_step);
    const LossBreakdown bd =
        total_loss_grad(out.client, out.reference, world, extractor, gamma_c,
                        gamma_r, batch, cfg, subset, subset, cgrads, rgrads);
    if (!std::isfinite(bd.total)) {
      throw NumericalError("xga loss non-finite at iteration " +
                           std::to_string(it));
    }
    for (int n : subset) {
      if (n < out.client.size()) {
        adam_step_matrix(cstates[static_cast<std::size_t>(n)], cfg.adam,
                         cgrads[static_cast<std::size_t>(n)],
                         out.client.mats[static_cast<std::size_t>(n)]);
      }
      if (n < out.reference.size()) {
        adam_step_matrix(rstates[static_cast<std::size_t>(n)], cfg.adam,
                         rgrads[static_cast<std::size_t>(n)],
                         out.reference.mats[static_cast<std::size_t>(n)]);
      }
    }
    out.log.push_back(make_record(bd, n_common, it));
  }
  return out;
}

DirectionBank train_single(const SyntheticGenerator& gen,
                           const FeatureExtractor& extractor, int n_directions,
                           const XgaConfig& cfg, std::uint64_t bank_tag,
                           std::vector<TrainRecord>* log) {
  cfg.validate();
  require(n_directions >= 2, "single-model training needs >= 2 directions");

  XgaConfig local = cfg;
  local.lambda_a = 0.0;
  local.lambda_b = 0.0;

  const int latent_dim = gen.latent_dim();
  const Rng root(cfg.seed);
  const Rng branch = root.fork(bank_tag);
  DirectionBank bank = init_bank(branch.fork(kClientBankTag).seed(),
                                 latent_dim, n_directions, 0, cfg.alpha);
  Rng rng_lat = branch.fork(kLatentTag);
  Rng rng_sub = branch.fork(kSubsetTag);

  const Index flat = static_cast<Index>(latent_dim) * latent_dim;
  std::vector<AdamState> states(static_cast<std::size_t>(n_directions),
                                AdamState(flat));
  const int per_step = std::min(cfg.directions_per_step, n_directions);
  std::vector<Mat> grads;

  for (int it = 0; it < cfg.iterations; ++it) {
    const Mat lat = rng_lat.normal_matrix(latent_dim, cfg.pair_size);
    const std::vector<int> subset =
        rng_sub.sample_without_replacement(n_directions, per_step);
    const LossBreakdown bd =
        run_engine(&gen, &bank, nullptr, nullptr, extractor, nullptr, nullptr,
                   &lat, nullptr, local, subset, subset, &grads, nullptr);
    if (!std::isfinite(bd.total)) {
      throw NumericalError("single-model loss non-finite at iteration " +
                           std::to_string(it));
    }
    for (int n : subset) {
      adam_step_matrix(states[static_cast<std::size_t>(n)], cfg.adam,
                       grads[static_cast<std::size_t>(n)],
                       bank.mats[static_cast<std::size_t>(n)]);
    }
    if (log) log->push_back(make_record(bd, n_directions, it));
  }
  return bank;
}

}  // namespace xga

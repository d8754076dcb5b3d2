#include "xga/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "xga/rng.hpp"

namespace xga {
namespace {

double zero_safe_cosine(const Vec& a, const Vec& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na <= kTinyNorm || nb <= kTinyNorm) return 0.0;
  return a.dot(b) / (na * nb);
}

// Attribute indices ordered by descending profile value, ties by lower index.
std::vector<int> discrepancy_order(const Vec& profile) {
  std::vector<int> order(static_cast<std::size_t>(profile.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return profile(a) > profile(b);
  });
  return order;
}

}  // namespace

std::vector<DiscrepancyProfile> discrepancy_profiles(
    const SyntheticGenerator& gen, const OracleClassifier& oracle,
    const DirectionBank& bank, const Mat& latents) {
  require(latents.cols() > 0, "profiles need a nonempty batch");
  require(latents.rows() == bank.latent_dim() &&
              bank.latent_dim() == gen.latent_dim(),
          "latent dimension mismatch");
  require(oracle.obs_dim() == gen.obs_dim(),
          "oracle does not match generator observation dimension");
  const Index batch = latents.cols();
  const Index attrs = oracle.attribute_count();

  std::vector<Vec> base(static_cast<std::size_t>(batch));
  for (Index i = 0; i < batch; ++i) {
    base[static_cast<std::size_t>(i)] =
        oracle.classify(gen.generate(latents.col(i)));
  }

  std::vector<DiscrepancyProfile> out(static_cast<std::size_t>(bank.size()));
  for (int n = 0; n < bank.size(); ++n) {
    DiscrepancyProfile& p = out[static_cast<std::size_t>(n)];
    p.per_sample.resize(attrs, batch);
    for (Index i = 0; i < batch; ++i) {
      const Vec pred =
          oracle.classify(gen.generate(bank.apply(n, latents.col(i))));
      p.per_sample.col(i) =
          (pred - base[static_cast<std::size_t>(i)]).cwiseAbs();
    }
    p.mean = p.per_sample.rowwise().mean();
  }
  return out;
}

double alignment_score_pairs(
    const std::vector<DiscrepancyProfile>& client,
    const std::vector<DiscrepancyProfile>& reference,
    const std::vector<std::pair<int, int>>& pairs) {
  require(!pairs.empty(), "alignment needs at least one pair");
  double sum = 0.0;
  for (const auto& [i, j] : pairs) {
    require(i >= 0 && i < static_cast<int>(client.size()),
            "client profile index out of range");
    require(j >= 0 && j < static_cast<int>(reference.size()),
            "reference profile index out of range");
    sum += zero_safe_cosine(client[static_cast<std::size_t>(i)].mean,
                            reference[static_cast<std::size_t>(j)].mean);
  }
  return sum / static_cast<double>(pairs.size());
}

double alignment_score(const std::vector<DiscrepancyProfile>& client,
                       const std::vector<DiscrepancyProfile>& reference,
                       int n_common) {
  require(n_common >= 1, "alignment needs a nonempty common block");
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(n_common));
  for (int n = 0; n < n_common; ++n) pairs.emplace_back(n, n);
  return alignment_score_pairs(client, reference, pairs);
}

int discrepancy_rank(const Vec& profile, int attribute) {
  require(attribute >= 0 && attribute < profile.size(),
          "attribute index out of range");
  const double v = profile(attribute);
  int rank = 1;
  for (Index k = 0; k < profile.size(); ++k) {
    if (profile(k) > v || (profile(k) == v && k < attribute)) ++rank;
  }
  return rank;
}

double recovery_score(const std::vector<DiscrepancyProfile>& unique_profiles,
                      const std::vector<int>& missing) {
  require(!missing.empty(), "recovery needs a nonempty missing set");
  require(!unique_profiles.empty(), "recovery needs a nonempty unique block");
  double sum = 0.0;
  for (int m : missing) {
    int best = std::numeric_limits<int>::max();
    for (const DiscrepancyProfile& p : unique_profiles) {
      best = std::min(best, discrepancy_rank(p.mean, m));
    }
    sum += 1.0 / static_cast<double>(best);
  }
  return sum / static_cast<double>(missing.size());
}

double entropy_score(const std::vector<DiscrepancyProfile>& profiles,
                     double c_scale) {
  require(!profiles.empty(), "entropy needs at least one profile");
  double sum = 0.0;
  long count = 0;
  for (const DiscrepancyProfile& p : profiles) {
    require(p.per_sample.cols() > 0, "entropy needs per-sample discrepancies");
    for (Index i = 0; i < p.per_sample.cols(); ++i) {
      const Vec d = p.per_sample.col(i);
      const Vec e = (d.array() - d.maxCoeff()).exp();
      const double z = e.sum();
      double h = 0.0;
      for (Index k = 0; k < e.size(); ++k) {
        const double pk = e(k) / z;
        if (pk > 0.0) h -= pk * std::log(pk);
      }
      sum += h;
      ++count;
    }
  }
  return c_scale * sum / static_cast<double>(count);
}

Mat mean_predictions(const SyntheticGenerator& gen,
                     const OracleClassifier& oracle, const DirectionBank& bank,
                     const Mat& latents) {
  require(latents.cols() > 0, "mean predictions need a nonempty batch");
  require(latents.rows() == bank.latent_dim() &&
              bank.latent_dim() == gen.latent_dim(),
          "latent dimension mismatch");
  const Index batch = latents.cols();
  Mat out(oracle.attribute_count(), bank.size());
  for (int n = 0; n < bank.size(); ++n) {
    Vec acc = Vec::Zero(oracle.attribute_count());
    for (Index i = 0; i < batch; ++i) {
      acc += oracle.classify(gen.generate(bank.apply(n, latents.col(i))));
    }
    out.col(n) = acc / static_cast<double>(batch);
  }
  return out;
}

double deviation_score(const Mat& direction_means) {
  require(direction_means.cols() >= 2,
          "deviation needs at least 2 directions");
  const double n = static_cast<double>(direction_means.cols());
  double total = 0.0;
  for (Index k = 0; k < direction_means.rows(); ++k) {
    const double mean = direction_means.row(k).mean();
    total += (direction_means.row(k).array() - mean).square().sum() / n;
  }
  return total;
}

std::vector<std::pair<int, int>> greedy_align(
    const std::vector<DiscrepancyProfile>& client,
    const std::vector<DiscrepancyProfile>& reference, int count) {
  const int nc = static_cast<int>(client.size());
  const int nr = static_cast<int>(reference.size());
  require(count >= 0, "greedy count must be nonnegative");
  require(count <= std::min(nc, nr), "greedy count exceeds available pairs");

  Mat scores(nc, nr);
  for (int i = 0; i < nc; ++i) {
    for (int j = 0; j < nr; ++j) {
      scores(i, j) = zero_safe_cosine(client[static_cast<std::size_t>(i)].mean,
                                      reference[static_cast<std::size_t>(j)].mean);
    }
  }

  std::vector<char> used_c(static_cast<std::size_t>(nc), 0);
  std::vector<char> used_r(static_cast<std::size_t>(nr), 0);
  std::vector<std::pair<int, int>> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int round = 0; round < count; ++round) {
    int best_i = -1;
    int best_j = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < nc; ++i) {
      if (used_c[static_cast<std::size_t>(i)]) continue;
      for (int j = 0; j < nr; ++j) {
        if (used_r[static_cast<std::size_t>(j)]) continue;
        if (scores(i, j) > best) {
          best = scores(i, j);
          best_i = i;
          best_j = j;
        }
      }
    }
    used_c[static_cast<std::size_t>(best_i)] = 1;
    used_r[static_cast<std::size_t>(best_j)] = 1;
    out.emplace_back(best_i, best_j);
  }
  return out;
}

AuditReport compute_audit_report(
    const World& world, const DirectionBank& client_bank,
    const DirectionBank& ref_bank, const MetricsOptions& opts,
    const std::vector<std::pair<int, int>>* pairs) {
  require(opts.eval_samples >= 1, "eval_samples must be positive");
  require(client_bank.n_common == ref_bank.n_common,
          "banks disagree on common block size");

  const int latent_dim = world.config.latent_dim;
  const Rng root(opts.seed);
  Rng rng_c = root.fork(1);
  Rng rng_r = root.fork(2);
  const Mat clat = rng_c.normal_matrix(latent_dim, opts.eval_samples);
  const Mat rlat = rng_r.normal_matrix(latent_dim, opts.eval_samples);

  AuditReport rep;
  rep.n_common = client_bank.n_common;
  rep.client_profiles =
      discrepancy_profiles(world.client, world.oracle, client_bank, clat);
  rep.reference_profiles =
      discrepancy_profiles(world.reference, world.oracle, ref_bank, rlat);
  rep.missing_attrs = world.missing_attrs();
  rep.novel_attrs = world.novel_attrs();

  if (pairs) {
    rep.common_pairs = *pairs;
    rep.alignment = "posthoc";
  } else {
    for (int n = 0; n < rep.n_common; ++n) rep.common_pairs.emplace_back(n, n);
    rep.alignment = "joint";
  }
  rep.a_score = alignment_score_pairs(rep.client_profiles,
                                      rep.reference_profiles, rep.common_pairs);

  const int ref_unique = ref_bank.size() - ref_bank.n_common;
  if (!rep.missing_attrs.empty() && ref_unique > 0) {
    std::vector<DiscrepancyProfile> rec;
    if (opts.missing_profiles_from_reference) {
      rec.assign(rep.reference_profiles.begin() + ref_bank.n_common,
                 rep.reference_profiles.end());
    } else {
      DirectionBank sub;
      sub.alpha = ref_bank.alpha;
      sub.n_common = 0;
      sub.mats.assign(ref_bank.mats.begin() + ref_bank.n_common,
                      ref_bank.mats.end());
      rec = discrepancy_profiles(world.client, world.oracle, sub, clat);
    }
    rep.r_score = recovery_score(rec, rep.missing_attrs);
    rep.has_r_score = true;
    for (int m : rep.missing_attrs) {
      for (int u = 0; u < ref_unique; ++u) {
        rep.ranks.push_back(
            {m, ref_bank.n_common + u,
             discrepancy_rank(rec[static_cast<std::size_t>(u)].mean, m)});
      }
    }
  }

  rep.h_score_client = entropy_score(rep.client_profiles, opts.c_scale);
  rep.h_score_reference = entropy_score(rep.reference_profiles, opts.c_scale);
  rep.d_score_client = deviation_score(
      mean_predictions(world.client, world.oracle, client_bank, clat));
  rep.d_score_reference = deviation_score(
      mean_predictions(world.reference, world.oracle, ref_bank, rlat));
  return rep;
}

Json report_to_json(const AuditReport& rep) {
  Json j;
  j["format_version"] = 1;
  j["kind"] = "xga-report";
  j["alignment"] = rep.alignment;
  j["n_common"] = rep.n_common;
  j["missing_attrs"] = rep.missing_attrs;
  j["novel_attrs"] = rep.novel_attrs;

  Json scores;
  scores["a_score"] = rep.a_score;
  scores["r_score"] = rep.has_r_score ? Json(rep.r_score) : Json(nullptr);
  scores["h_score_client"] = rep.h_score_client;
  scores["h_score_reference"] = rep.h_score_reference;
  scores["d_score_client"] = rep.d_score_client;
  scores["d_score_reference"] = rep.d_score_reference;
  j["scores"] = scores;

  Json ranks = Json::array();
  for (const RankEntry& e : rep.ranks) {
    ranks.push_back(
        {{"attribute", e.attribute}, {"direction", e.direction}, {"rank", e.rank}});
  }
  j["ranks"] = ranks;

  Json pairs = Json::array();
  for (const auto& [a, b] : rep.common_pairs) pairs.push_back({a, b});
  j["common_pairs"] = pairs;

  auto profile_block = [&](const std::vector<DiscrepancyProfile>& profs,
                           bool client_side) {
    Json arr = Json::array();
    for (std::size_t n = 0; n < profs.size(); ++n) {
      Json p;
      p["direction"] = static_cast<int>(n);
      p["block"] = static_cast<int>(n) < rep.n_common
                       ? "common"
                       : (client_side ? "novel" : "missing");
      p["mean"] = vector_to_json(profs[n].mean);
      arr.push_back(p);
    }
    return arr;
  };
  j["profiles"]["client"] = profile_block(rep.client_profiles, true);
  j["profiles"]["reference"] = profile_block(rep.reference_profiles, false);

  j["dre_trained"]["client"] = rep.dre_client_trained;
  j["dre_trained"]["reference"] = rep.dre_reference_trained;
  j["config"] = rep.config.is_null() ? Json::object() : rep.config;
  j["world_hash"] = rep.world_hash;
  return j;
}

std::string report_to_csv(const AuditReport& rep) {
  std::ostringstream oss;
  oss << "side,direction,block,top1,top2,top3,profile_norm\n";
  oss << std::setprecision(17);
  auto emit = [&](const char* side, const std::vector<DiscrepancyProfile>& profs,
                  bool client_side) {
    for (std::size_t n = 0; n < profs.size(); ++n) {
      const char* block = static_cast<int>(n) < rep.n_common
                              ? "common"
                              : (client_side ? "novel" : "missing");
      const std::vector<int> order = discrepancy_order(profs[n].mean);
      oss << side << ',' << n << ',' << block;
      for (int k = 0; k < 3; ++k) {
        oss << ',';
        if (k < static_cast<int>(order.size())) {
          oss << order[static_cast<std::size_t>(k)];
        }
      }
      oss << ',' << profs[n].mean.norm() << '\n';
    }
  };
  emit("client", rep.client_profiles, true);
  emit("reference", rep.reference_profiles, false);
  return oss.str();
}

}  // namespace xga

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "test_util.hpp"
#include "xga/metrics.hpp"
#include "xga/rng.hpp"

using namespace xga;
using namespace xga::test;

namespace {

DiscrepancyProfile prof(std::vector<double> mean) {
  DiscrepancyProfile p;
  p.mean = Vec(static_cast<Index>(mean.size()));
  for (std::size_t k = 0; k < mean.size(); ++k) {
    p.mean(static_cast<Index>(k)) = mean[k];
  }
  p.per_sample = p.mean;
  return p;
}

DiscrepancyProfile prof_samples(const Mat& per_sample) {
  DiscrepancyProfile p;
  p.per_sample = per_sample;
  p.mean = per_sample.rowwise().mean();
  return p;
}

Vec angle2(double radians) {
  Vec v(2);
  v << std::cos(radians), std::sin(radians);
  return v;
}

// Rank by sorting (value desc, index asc) and reporting 1-based position.
int oracle_rank(const Vec& profile, int attribute) {
  std::vector<int> order(static_cast<std::size_t>(profile.size()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (profile(a) != profile(b)) return profile(a) > profile(b);
    return a < b;
  });
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    if (order[pos] == attribute) return static_cast<int>(pos) + 1;
  }
  return -1;
}

double oracle_recovery(const std::vector<DiscrepancyProfile>& unique_profiles,
                       const std::vector<int>& missing) {
  double sum = 0.0;
  for (int m : missing) {
    int best = 1 << 30;
    for (const auto& p : unique_profiles) {
      best = std::min(best, oracle_rank(p.mean, m));
    }
    sum += 1.0 / static_cast<double>(best);
  }
  return sum / static_cast<double>(missing.size());
}

double oracle_cosine(const Vec& a, const Vec& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na <= 0.0 || nb <= 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

// Each round rescans the whole score matrix for the best unused pair,
// breaking ties toward the smaller (client, reference) index pair.
std::vector<std::pair<int, int>> oracle_greedy(
    const std::vector<DiscrepancyProfile>& client,
    const std::vector<DiscrepancyProfile>& reference, int count) {
  std::vector<int> free_c(client.size()), free_r(reference.size());
  std::iota(free_c.begin(), free_c.end(), 0);
  std::iota(free_r.begin(), free_r.end(), 0);
  std::vector<std::pair<int, int>> out;
  for (int round = 0; round < count; ++round) {
    double best = -2.0;
    std::pair<int, int> pick{-1, -1};
    for (int i : free_c) {
      for (int j : free_r) {
        const double s = oracle_cosine(client[static_cast<std::size_t>(i)].mean,
                                       reference[static_cast<std::size_t>(j)].mean);
        if (s > best) {
          best = s;
          pick = {i, j};
        }
      }
    }
    out.push_back(pick);
    free_c.erase(std::find(free_c.begin(), free_c.end(), pick.first));
    free_r.erase(std::find(free_r.begin(), free_r.end(), pick.second));
  }
  return out;
}

}  // namespace

TEST(DiscrepancyProfiles, ConcentrateOnDrivenAttribute) {
  // Identity decoder and axis-aligned attribute weights: traversing along e1
  // moves only attribute 0, and a direction orthogonal to every weight row
  // moves nothing.
  const int latent_dim = 3;
  const int obs_dim = 4;
  Mat decoder = Mat::Zero(obs_dim, 2);
  decoder(0, 0) = 1.0;
  decoder(1, 1) = 1.0;
  Mat weights = Mat::Zero(2, latent_dim);
  weights(0, 0) = 1.0;
  weights(1, 1) = 1.0;
  Vec baseline = Vec::Constant(2, -1.0);
  const SyntheticGenerator gen(decoder, weights, {0, 1}, baseline);
  const OracleClassifier oracle(decoder);

  DirectionBank bank;
  bank.alpha = 0.8;
  bank.n_common = 1;
  Mat drive = Mat::Zero(latent_dim, latent_dim);
  drive(0, 0) = 1.0;  // direction +-e1
  Mat inert = Mat::Zero(latent_dim, latent_dim);
  inert(2, 2) = 1.0;  // +-e3, orthogonal to both weight rows
  bank.mats = {drive, inert};

  Rng rng(64);
  const Mat latents = rng.normal_matrix(latent_dim, 5);
  const auto profiles = discrepancy_profiles(gen, oracle, bank, latents);
  ASSERT_EQ(profiles.size(), 2u);
  EXPECT_EQ(profiles[0].per_sample.rows(), 2);
  EXPECT_EQ(profiles[0].per_sample.cols(), 5);
  EXPECT_GT(profiles[0].mean(0), 0.0);
  EXPECT_EQ(profiles[0].mean(1), 0.0);
  EXPECT_EQ(profiles[1].mean.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GE(profiles[0].per_sample.minCoeff(), 0.0);
}

TEST(DiscrepancyProfiles, ClampedAttributeNeverMoves) {
  const World world = small_world(71);
  DirectionBank bank = init_bank(72, 4, 2, 1, 3.0);
  Rng rng(73);
  const Mat latents = rng.normal_matrix(4, 6);
  const auto profiles =
      discrepancy_profiles(world.client, world.oracle, bank, latents);
  for (const auto& p : profiles) {
    // Attribute 2 is inactive on the client, so its oracle coordinate is
    // pinned at the baseline. The read-out goes through U^T U, which is the
    // identity only up to rounding, hence the epsilon-level bound.
    EXPECT_LE(p.per_sample.row(2).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(DiscrepancyProfiles, RejectsBadInputs) {
  const World world = small_world(74);
  DirectionBank bank = init_bank(75, 4, 2, 1, 3.0);
  EXPECT_THROW(
      discrepancy_profiles(world.client, world.oracle, bank, Mat(4, 0)),
      ConfigError);
  EXPECT_THROW(
      discrepancy_profiles(world.client, world.oracle, bank, Mat::Zero(3, 2)),
      ConfigError);
}

TEST(AlignmentScore, HandValues) {
  const auto c0 = prof({1.0, 0.0});
  const auto r_same = prof({2.0, 0.0});
  const auto r_orth = prof({0.0, 3.0});
  const auto r_sixty = prof({0.5, std::sqrt(3.0) / 2.0});

  EXPECT_NEAR(alignment_score_pairs({c0}, {r_same}, {{0, 0}}), 1.0, 1e-12);
  EXPECT_NEAR(alignment_score_pairs({c0}, {r_orth}, {{0, 0}}), 0.0, 1e-12);
  EXPECT_NEAR(alignment_score_pairs({c0, c0}, {r_same, r_sixty},
                                    {{0, 0}, {1, 1}}),
              0.75, 1e-12);
  EXPECT_DOUBLE_EQ(alignment_score_pairs({prof({0.0, 0.0})}, {r_same}, {{0, 0}}),
                   0.0);
  const auto anti = prof({-1.0, 0.0});
  EXPECT_NEAR(alignment_score_pairs({c0}, {anti}, {{0, 0}}), -1.0, 1e-12);
}

TEST(AlignmentScore, IdentityPairingShorthand) {
  const std::vector<DiscrepancyProfile> client{prof({1.0, 0.0}),
                                               prof({0.0, 1.0}),
                                               prof({1.0, 1.0})};
  const std::vector<DiscrepancyProfile> reference{prof({1.0, 1.0}),
                                                  prof({0.0, 2.0}),
                                                  prof({5.0, 0.0})};
  EXPECT_DOUBLE_EQ(
      alignment_score(client, reference, 2),
      alignment_score_pairs(client, reference, {{0, 0}, {1, 1}}));
  EXPECT_THROW(alignment_score(client, reference, 0), ConfigError);
  EXPECT_THROW(alignment_score_pairs(client, reference, {}), ConfigError);
  EXPECT_THROW(alignment_score_pairs(client, reference, {{0, 3}}), ConfigError);
  EXPECT_THROW(alignment_score_pairs(client, reference, {{-1, 0}}),
               ConfigError);
}

TEST(DiscrepancyRank, HandValues) {
  Vec p(3);
  p << 0.9, 0.5, 0.7;
  EXPECT_EQ(discrepancy_rank(p, 0), 1);
  EXPECT_EQ(discrepancy_rank(p, 2), 2);
  EXPECT_EQ(discrepancy_rank(p, 1), 3);

  Vec tie(2);
  tie << 0.5, 0.5;
  EXPECT_EQ(discrepancy_rank(tie, 0), 1);
  EXPECT_EQ(discrepancy_rank(tie, 1), 2);

  Vec flat = Vec::Ones(3);
  EXPECT_EQ(discrepancy_rank(flat, 0), 1);
  EXPECT_EQ(discrepancy_rank(flat, 1), 2);
  EXPECT_EQ(discrepancy_rank(flat, 2), 3);

  EXPECT_THROW(discrepancy_rank(p, 3), ConfigError);
  EXPECT_THROW(discrepancy_rank(p, -1), ConfigError);
}

TEST(RecoveryScore, HandValues) {
  const std::vector<DiscrepancyProfile> one{prof({0.1, 0.9})};
  EXPECT_DOUBLE_EQ(recovery_score(one, {1}), 1.0);
  EXPECT_DOUBLE_EQ(recovery_score(one, {0}), 0.5);
  EXPECT_DOUBLE_EQ(recovery_score(one, {0, 1}), 0.75);

  const std::vector<DiscrepancyProfile> two{prof({0.9, 0.1}),
                                            prof({0.1, 0.9})};
  EXPECT_DOUBLE_EQ(recovery_score(two, {0, 1}), 1.0);

  const std::vector<DiscrepancyProfile> spike{prof({0.0, 0.0, 1.0})};
  EXPECT_DOUBLE_EQ(recovery_score(spike, {2}), 1.0);
  EXPECT_DOUBLE_EQ(recovery_score(spike, {0}), 0.5);

  EXPECT_THROW(recovery_score(one, {}), ConfigError);
  EXPECT_THROW(recovery_score({}, {0}), ConfigError);
}

TEST(RecoveryScore, MatchesBruteForceOracle) {
  Rng rng(404);
  for (int it = 0; it < 100; ++it) {
    const int attrs = 2 + static_cast<int>(rng.uniform_int(0, 4));
    const int n_profiles = 1 + static_cast<int>(rng.uniform_int(0, 4));
    std::vector<DiscrepancyProfile> profiles;
    for (int p = 0; p < n_profiles; ++p) {
      DiscrepancyProfile d;
      d.mean = Vec(attrs);
      for (Index k = 0; k < attrs; ++k) d.mean(k) = rng.uniform();
      profiles.push_back(std::move(d));
    }
    const int n_missing = 1 + static_cast<int>(rng.uniform_int(0, attrs - 1));
    const std::vector<int> missing =
        rng.sample_without_replacement(attrs, n_missing);
    EXPECT_DOUBLE_EQ(recovery_score(profiles, missing),
                     oracle_recovery(profiles, missing))
        << "case " << it;
  }
}

TEST(EntropyScore, HandValues) {
  const auto uniform4 = prof_samples(Mat::Constant(4, 1, 0.3));
  EXPECT_NEAR(entropy_score({uniform4}), 138.62943611198907, 1e-9);

  const auto uniform2 = prof_samples(Mat::Zero(2, 1));
  EXPECT_NEAR(entropy_score({uniform2}), 69.31471805599453, 1e-9);

  Mat spike(4, 1);
  spike << 10.0, 0.0, 0.0, 0.0;
  EXPECT_NEAR(entropy_score({prof_samples(spike)}), 0.14980029292489647, 1e-9);

  Mat ramp(3, 1);
  ramp << 3.0, 1.0, 0.0;
  EXPECT_NEAR(entropy_score({prof_samples(ramp)}), 52.42666167276728, 1e-9);

  // Pooled over directions and samples: mean of the per-column entropies.
  Mat both(2, 2);
  both.col(0).setZero();
  both.col(1) << 10.0, 0.0;
  const double h2 = std::log(2.0);
  const double spike2 = [] {
    const double z = 1.0 + std::exp(-10.0);
    const double p0 = 1.0 / z;
    const double p1 = std::exp(-10.0) / z;
    return -p0 * std::log(p0) - p1 * std::log(p1);
  }();
  EXPECT_NEAR(entropy_score({prof_samples(both), prof_samples(Mat::Zero(2, 1))}),
              100.0 * (h2 + spike2 + h2) / 3.0, 1e-9);

  EXPECT_NEAR(entropy_score({uniform4}, 1.0), std::log(4.0), 1e-12);
  EXPECT_THROW(entropy_score({}), ConfigError);
  DiscrepancyProfile empty;
  empty.mean = Vec::Zero(2);
  empty.per_sample = Mat(2, 0);
  EXPECT_THROW(entropy_score({empty}), ConfigError);
}

TEST(EntropyScore, BoundedByLogK) {
  Rng rng(405);
  for (int it = 0; it < 50; ++it) {
    const int attrs = 2 + static_cast<int>(rng.uniform_int(0, 5));
    const Mat samples = rng.normal_matrix(attrs, 3).cwiseAbs();
    const double h = entropy_score({prof_samples(samples)});
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, 100.0 * std::log(static_cast<double>(attrs)) + 1e-9);
  }
}

TEST(DeviationScore, HandValues) {
  Mat one_attr(1, 2);
  one_attr << 0.0, 2.0;
  EXPECT_DOUBLE_EQ(deviation_score(one_attr), 1.0);

  Mat two_attr(2, 2);
  two_attr << 0.0, 2.0, 1.0, 3.0;
  EXPECT_DOUBLE_EQ(deviation_score(two_attr), 2.0);

  Mat shifted = two_attr;
  shifted.row(0).array() += 5.0;
  EXPECT_DOUBLE_EQ(deviation_score(shifted), deviation_score(two_attr));

  EXPECT_DOUBLE_EQ(deviation_score(Mat::Constant(3, 4, 0.7)), 0.0);

  Mat three(1, 3);
  three << 0.0, 1.0, 2.0;
  EXPECT_NEAR(deviation_score(three), 2.0 / 3.0, 1e-12);

  EXPECT_THROW(deviation_score(Mat::Zero(2, 1)), ConfigError);
}

TEST(MeanPredictions, MatchesDirectAverage) {
  const World world = small_world(81);
  DirectionBank bank = init_bank(82, 4, 2, 1, 3.0);
  Rng rng(83);
  const Mat latents = rng.normal_matrix(4, 4);
  const Mat got = mean_predictions(world.client, world.oracle, bank, latents);
  ASSERT_EQ(got.rows(), 3);
  ASSERT_EQ(got.cols(), 3);
  for (int n = 0; n < bank.size(); ++n) {
    Vec acc = Vec::Zero(3);
    for (Index i = 0; i < 4; ++i) {
      acc += world.oracle.classify(
          world.client.generate(bank.apply(n, latents.col(i))));
    }
    acc /= 4.0;
    EXPECT_NEAR((got.col(n) - acc).cwiseAbs().maxCoeff(), 0.0, 1e-15);
  }
}

TEST(GreedyAlign, HandExamples) {
  const std::vector<DiscrepancyProfile> client{prof({1.0, 0.0}),
                                               prof({0.0, 1.0})};
  const std::vector<DiscrepancyProfile> reference{prof({1.0, 0.0}),
                                                  prof({0.0, 1.0})};
  const std::vector<std::pair<int, int>> identity{{0, 0}, {1, 1}};
  EXPECT_EQ(greedy_align(client, reference, 2), identity);

  // Crossed refs: the best available cosine pairs client 0 with reference 1.
  const std::vector<DiscrepancyProfile> crossed_c{prof_samples(angle2(0.0)),
                                                  prof_samples(angle2(1.57))};
  const std::vector<DiscrepancyProfile> crossed_r{prof_samples(angle2(1.50)),
                                                  prof_samples(angle2(0.02))};
  const std::vector<std::pair<int, int>> crossed{{0, 1}, {1, 0}};
  EXPECT_EQ(greedy_align(crossed_c, crossed_r, 2), crossed);

  // All-identical profiles tie everywhere; the scan order keeps the
  // lexicographically smallest pair each round.
  const std::vector<DiscrepancyProfile> same{prof({1.0, 1.0}),
                                             prof({1.0, 1.0})};
  EXPECT_EQ(greedy_align(same, same, 2), identity);

  EXPECT_TRUE(greedy_align(client, reference, 0).empty());
  EXPECT_THROW(greedy_align(client, reference, 3), ConfigError);
  EXPECT_THROW(greedy_align(client, reference, -1), ConfigError);
}

TEST(GreedyAlign, MatchesBruteForceOracle) {
  Rng rng(406);
  for (int it = 0; it < 100; ++it) {
    const int nc = 1 + static_cast<int>(rng.uniform_int(0, 5));
    const int nr = 1 + static_cast<int>(rng.uniform_int(0, 5));
    std::vector<DiscrepancyProfile> client, reference;
    for (int i = 0; i < nc; ++i) {
      DiscrepancyProfile p;
      p.mean = rng.normal_vector(3);
      if (rng.uniform() < 0.1) p.mean.setZero();
      client.push_back(std::move(p));
    }
    for (int j = 0; j < nr; ++j) {
      DiscrepancyProfile p;
      p.mean = rng.normal_vector(3);
      if (rng.uniform() < 0.1) p.mean.setZero();
      reference.push_back(std::move(p));
    }
    const int count = static_cast<int>(rng.uniform_int(0, std::min(nc, nr)));
    EXPECT_EQ(greedy_align(client, reference, count),
              oracle_greedy(client, reference, count))
        << "case " << it;
  }
}

TEST(AuditReportTest, ShapeAndScoreRanges) {
  const World world = small_world(91);
  XgaConfig cfg;
  cfg.seed = 92;
  auto [client_bank, ref_bank] = initial_banks(4, 2, 0, 1, cfg);
  MetricsOptions opts;
  opts.eval_samples = 16;
  opts.seed = 93;

  const AuditReport rep =
      compute_audit_report(world, client_bank, ref_bank, opts);
  EXPECT_EQ(rep.n_common, 2);
  EXPECT_EQ(rep.alignment, "joint");
  ASSERT_EQ(rep.common_pairs.size(), 2u);
  EXPECT_EQ(rep.common_pairs[0], (std::pair<int, int>{0, 0}));
  EXPECT_EQ(rep.common_pairs[1], (std::pair<int, int>{1, 1}));
  EXPECT_GE(rep.a_score, -1.0);
  EXPECT_LE(rep.a_score, 1.0);
  ASSERT_TRUE(rep.has_r_score);
  EXPECT_GT(rep.r_score, 0.0);
  EXPECT_LE(rep.r_score, 1.0);
  EXPECT_EQ(rep.missing_attrs, (std::vector<int>{2}));
  EXPECT_TRUE(rep.novel_attrs.empty());
  ASSERT_EQ(rep.ranks.size(), 1u);
  EXPECT_EQ(rep.ranks[0].attribute, 2);
  EXPECT_EQ(rep.ranks[0].direction, 2);
  EXPECT_GE(rep.ranks[0].rank, 1);
  EXPECT_LE(rep.ranks[0].rank, 3);
  ASSERT_EQ(rep.client_profiles.size(), 2u);
  ASSERT_EQ(rep.reference_profiles.size(), 3u);
  EXPECT_EQ(rep.client_profiles[0].per_sample.cols(), 16);
  EXPECT_GE(rep.h_score_client, 0.0);
  EXPECT_LE(rep.h_score_client, 100.0 * std::log(3.0) + 1e-9);
  EXPECT_GE(rep.d_score_client, 0.0);
  EXPECT_GE(rep.d_score_reference, 0.0);

  // The recovery inputs are the reference unique-block profiles, so the
  // score is reproducible from the report itself.
  const std::vector<DiscrepancyProfile> unique(
      rep.reference_profiles.begin() + rep.n_common,
      rep.reference_profiles.end());
  EXPECT_DOUBLE_EQ(rep.r_score, recovery_score(unique, rep.missing_attrs));
  EXPECT_DOUBLE_EQ(rep.a_score,
                   alignment_score(rep.client_profiles, rep.reference_profiles,
                                   rep.n_common));

  const AuditReport again =
      compute_audit_report(world, client_bank, ref_bank, opts);
  EXPECT_DOUBLE_EQ(again.a_score, rep.a_score);
  EXPECT_DOUBLE_EQ(again.r_score, rep.r_score);

  MetricsOptions other = opts;
  other.seed = 94;
  const AuditReport moved =
      compute_audit_report(world, client_bank, ref_bank, other);
  EXPECT_NE(moved.a_score, rep.a_score);
}

TEST(AuditReportTest, ExplicitPairsSwitchToPosthoc) {
  const World world = small_world(95);
  XgaConfig cfg;
  cfg.seed = 96;
  auto [client_bank, ref_bank] = initial_banks(4, 2, 0, 1, cfg);
  MetricsOptions opts;
  opts.eval_samples = 8;
  opts.seed = 97;
  const std::vector<std::pair<int, int>> pairs{{1, 0}, {0, 1}};
  const AuditReport rep =
      compute_audit_report(world, client_bank, ref_bank, opts, &pairs);
  EXPECT_EQ(rep.alignment, "posthoc");
  EXPECT_EQ(rep.common_pairs, pairs);
  EXPECT_DOUBLE_EQ(rep.a_score,
                   alignment_score_pairs(rep.client_profiles,
                                         rep.reference_profiles, pairs));
}

TEST(AuditReportTest, MissingProfilesThroughClientBranch) {
  const World world = small_world(98);
  XgaConfig cfg;
  cfg.seed = 99;
  auto [client_bank, ref_bank] = initial_banks(4, 2, 0, 1, cfg);
  MetricsOptions opts;
  opts.eval_samples = 8;
  opts.seed = 100;
  opts.missing_profiles_from_reference = false;
  const AuditReport rep =
      compute_audit_report(world, client_bank, ref_bank, opts);
  ASSERT_TRUE(rep.has_r_score);

  // Same unique directions pushed through the client generator on the
  // client eval latents.
  DirectionBank sub;
  sub.alpha = ref_bank.alpha;
  sub.n_common = 0;
  sub.mats.assign(ref_bank.mats.begin() + 2, ref_bank.mats.end());
  const Mat clat = Rng(opts.seed).fork(1).normal_matrix(4, opts.eval_samples);
  const auto rec =
      discrepancy_profiles(world.client, world.oracle, sub, clat);
  EXPECT_DOUBLE_EQ(rep.r_score, recovery_score(rec, rep.missing_attrs));
}

TEST(AuditReportTest, RejectsBadInputs) {
  const World world = small_world(101);
  XgaConfig cfg;
  cfg.seed = 102;
  auto [client_bank, ref_bank] = initial_banks(4, 2, 0, 1, cfg);
  MetricsOptions opts;
  opts.eval_samples = 0;
  EXPECT_THROW(compute_audit_report(world, client_bank, ref_bank, opts),
               ConfigError);
  opts.eval_samples = 4;
  DirectionBank mismatched = ref_bank;
  mismatched.n_common = 1;
  EXPECT_THROW(compute_audit_report(world, client_bank, mismatched, opts),
               ConfigError);
}

TEST(ReportSerialization, JsonLayout) {
  const World world = small_world(103);
  XgaConfig cfg;
  cfg.seed = 104;
  auto [client_bank, ref_bank] = initial_banks(4, 2, 0, 1, cfg);
  MetricsOptions opts;
  opts.eval_samples = 8;
  opts.seed = 105;
  AuditReport rep = compute_audit_report(world, client_bank, ref_bank, opts);
  rep.dre_client_trained = true;
  rep.config = Json{{"note", "echo"}};
  rep.world_hash = "cafe";

  const Json j = report_to_json(rep);
  EXPECT_EQ(j.at("kind"), "xga-report");
  EXPECT_EQ(j.at("format_version"), 1);
  EXPECT_EQ(j.at("alignment"), "joint");
  EXPECT_EQ(j.at("n_common"), 2);
  EXPECT_DOUBLE_EQ(j.at("scores").at("a_score").get<double>(), rep.a_score);
  EXPECT_DOUBLE_EQ(j.at("scores").at("r_score").get<double>(), rep.r_score);
  EXPECT_EQ(j.at("missing_attrs"), Json({2}));
  EXPECT_EQ(j.at("ranks").size(), 1u);
  EXPECT_EQ(j.at("ranks")[0].at("attribute"), 2);
  EXPECT_EQ(j.at("common_pairs"), Json({{0, 0}, {1, 1}}));
  EXPECT_EQ(j.at("profiles").at("client").size(), 2u);
  EXPECT_EQ(j.at("profiles").at("client")[0].at("block"), "common");
  EXPECT_EQ(j.at("profiles").at("reference")[2].at("block"), "missing");
  EXPECT_TRUE(j.at("dre_trained").at("client").get<bool>());
  EXPECT_FALSE(j.at("dre_trained").at("reference").get<bool>());
  EXPECT_EQ(j.at("config").at("note"), "echo");
  EXPECT_EQ(j.at("world_hash"), "cafe");

  AuditReport no_recovery = rep;
  no_recovery.has_r_score = false;
  EXPECT_TRUE(report_to_json(no_recovery).at("scores").at("r_score").is_null());
}

TEST(ReportSerialization, CsvLayout) {
  const World world = small_world(106);
  XgaConfig cfg;
  cfg.seed = 107;
  auto [client_bank, ref_bank] = initial_banks(4, 2, 0, 1, cfg);
  MetricsOptions opts;
  opts.eval_samples = 8;
  opts.seed = 108;
  const AuditReport rep =
      compute_audit_report(world, client_bank, ref_bank, opts);
  const std::string csv = report_to_csv(rep);
  EXPECT_EQ(csv.rfind("side,direction,block,top1,top2,top3,profile_norm\n", 0),
            0u);
  const long lines = std::count(csv.begin(), csv.end(), '\n');
  EXPECT_EQ(lines, 1 + 2 + 3);
  EXPECT_NE(csv.find("client,0,common"), std::string::npos);
  EXPECT_NE(csv.find("client,1,common"), std::string::npos);
  EXPECT_NE(csv.find("reference,2,missing"), std::string::npos);
}

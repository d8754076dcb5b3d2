#include <gtest/gtest.h>

#include "test_util.hpp"
#include "xga/dre.hpp"
#include "xga/xga.hpp"

using namespace xga;
using namespace xga::test;

namespace {

constexpr double kEps = 1e-5;
constexpr double kTol = 1e-4;

struct GradCase {
  World world;
  FeatureExtractor extractor;
  DirectionBank client;
  DirectionBank reference;
  LatentBatch batch;
  XgaConfig cfg;
  RatioEstimator gamma_c;
  RatioEstimator gamma_r;
};

GradCase make_case(std::uint64_t seed) {
  GradCase c{small_world(seed),
             FeatureExtractor::random_projection(seed + 1, 6, 4),
             DirectionBank{},
             DirectionBank{},
             LatentBatch{},
             XgaConfig{},
             RatioEstimator{},
             RatioEstimator{}};
  c.cfg.seed = seed + 2;
  c.cfg.lambda_a = 0.1;
  c.cfg.lambda_b = 1.0;
  auto banks = initial_banks(4, 2, 1, 1, c.cfg);
  c.client = banks.first;
  c.reference = banks.second;
  Rng rng(seed + 3);
  c.batch = sample_latent_batch(rng, 4, 2);
  Rng rc = rng.fork(1);
  Rng rr = rng.fork(2);
  c.gamma_c = RatioEstimator{DreKind::kliep, Mlp2::init(rc, 4, 5), false};
  c.gamma_r = RatioEstimator{DreKind::kliep, Mlp2::init(rr, 4, 5), false};
  return c;
}

DivergenceSet side_divergences(const SyntheticGenerator& gen,
                               const FeatureExtractor& extractor,
                               const DirectionBank& bank, const Mat& latents) {
  DivergenceSet divs(static_cast<std::size_t>(bank.size()));
  for (int n = 0; n < bank.size(); ++n) {
    for (Index i = 0; i < latents.cols(); ++i) {
      divs[static_cast<std::size_t>(n)].push_back(
          divergence(gen, extractor, bank, n, latents.col(i)));
    }
  }
  return divs;
}

double xent_forward(const GradCase& c, const DirectionBank& cb,
                    const DirectionBank& rb, int n) {
  const DivergenceSet cd =
      side_divergences(c.world.client, c.extractor, cb, c.batch.client);
  const DivergenceSet rd =
      side_divergences(c.world.reference, c.extractor, rb, c.batch.reference);
  // The cross weight only applies to the common block (n_common = 2 here).
  const double lambda = n < cb.n_common ? c.cfg.lambda_a : 0.0;
  return xent_loss(cd, rd, n, lambda, c.cfg.tau,
                   c.cfg.cross_pair_excludes_diagonal);
}

double total_forward(const GradCase& c, const DirectionBank& cb,
                     const DirectionBank& rb) {
  return total_loss(cb, rb, c.world, c.extractor, &c.gamma_c, &c.gamma_r,
                    c.batch, c.cfg)
      .total;
}

}  // namespace

TEST(Gradients, XentLossWrtAllBankMatrices) {
  for (std::uint64_t seed = 50; seed < 54; ++seed) {
    GradCase c = make_case(seed);
    for (int n = 0; n < 3; ++n) {
      std::vector<Mat> cg;
      std::vector<Mat> rg;
      XgaConfig no_unique = c.cfg;
      no_unique.lambda_b = 0.0;
      total_loss_grad(c.client, c.reference, c.world, c.extractor, nullptr,
                      nullptr, c.batch, no_unique, {n}, {0, 1, 2}, cg, rg);
      for (int m = 0; m < 3; ++m) {
        Mat cnum = Mat::Zero(4, 4);
        Mat rnum = Mat::Zero(4, 4);
        for (Index r = 0; r < 4; ++r) {
          for (Index col = 0; col < 4; ++col) {
            cnum(r, col) = central_diff(
                [&](double v) {
                  DirectionBank cb = c.client;
                  cb.mats[static_cast<std::size_t>(m)](r, col) = v;
                  return xent_forward(c, cb, c.reference, n);
                },
                c.client.mats[static_cast<std::size_t>(m)](r, col), kEps);
            rnum(r, col) = central_diff(
                [&](double v) {
                  DirectionBank rb = c.reference;
                  rb.mats[static_cast<std::size_t>(m)](r, col) = v;
                  return xent_forward(c, c.client, rb, n);
                },
                c.reference.mats[static_cast<std::size_t>(m)](r, col), kEps);
          }
        }
        EXPECT_LT(max_rel_err(cg[static_cast<std::size_t>(m)], cnum), kTol)
            << "seed " << seed << " xent n=" << n << " client M_" << m;
        EXPECT_LT(max_rel_err(rg[static_cast<std::size_t>(m)], rnum), kTol)
            << "seed " << seed << " xent n=" << n << " reference M_" << m;
      }
    }
  }
}

TEST(Gradients, TotalLossWrtAllBankMatrices) {
  for (std::uint64_t seed = 60; seed < 64; ++seed) {
    GradCase c = make_case(seed);
    std::vector<Mat> cg;
    std::vector<Mat> rg;
    total_loss_grad(c.client, c.reference, c.world, c.extractor, &c.gamma_c,
                    &c.gamma_r, c.batch, c.cfg, {}, {}, cg, rg);
    for (int m = 0; m < 3; ++m) {
      Mat cnum = Mat::Zero(4, 4);
      Mat rnum = Mat::Zero(4, 4);
      for (Index r = 0; r < 4; ++r) {
        for (Index col = 0; col < 4; ++col) {
          cnum(r, col) = central_diff(
              [&](double v) {
                DirectionBank cb = c.client;
                cb.mats[static_cast<std::size_t>(m)](r, col) = v;
                return total_forward(c, cb, c.reference);
              },
              c.client.mats[static_cast<std::size_t>(m)](r, col), kEps);
          rnum(r, col) = central_diff(
              [&](double v) {
                DirectionBank rb = c.reference;
                rb.mats[static_cast<std::size_t>(m)](r, col) = v;
                return total_forward(c, c.client, rb);
              },
              c.reference.mats[static_cast<std::size_t>(m)](r, col), kEps);
        }
      }
      EXPECT_LT(max_rel_err(cg[static_cast<std::size_t>(m)], cnum), kTol)
          << "seed " << seed << " total client M_" << m;
      EXPECT_LT(max_rel_err(rg[static_cast<std::size_t>(m)], rnum), kTol)
          << "seed " << seed << " total reference M_" << m;
    }
  }
}

TEST(Gradients, KliepLossesWrtEstimatorWeights) {
  for (std::uint64_t seed = 70; seed < 74; ++seed) {
    Rng rng(seed);
    Rng ri = rng.fork(1);
    RatioEstimator model{DreKind::kliep, Mlp2::init(ri, 4, 5), false};
    const Mat cf = rng.normal_matrix(4, 6);
    const Mat rf = rng.normal_matrix(4, 7);

    const DreLossGrad gc = kliep_loss_client_grad(model, cf, rf);
    const DreLossGrad gr = kliep_loss_ref_grad(model, cf, rf);
    const Vec base = model.net.pack();
    Vec cnum(base.size());
    Vec rnum(base.size());
    for (Index k = 0; k < base.size(); ++k) {
      cnum(k) = central_diff(
          [&](double v) {
            RatioEstimator pert = model;
            Vec p = base;
            p(k) = v;
            pert.net.unpack(p);
            return kliep_loss_client(pert, cf, rf);
          },
          base(k), kEps);
      rnum(k) = central_diff(
          [&](double v) {
            RatioEstimator pert = model;
            Vec p = base;
            p(k) = v;
            pert.net.unpack(p);
            return kliep_loss_ref(pert, cf, rf);
          },
          base(k), kEps);
    }
    EXPECT_LT(max_rel_err(gc.grad, cnum), kTol) << "seed " << seed << " client";
    EXPECT_LT(max_rel_err(gr.grad, rnum), kTol) << "seed " << seed << " ref";
  }
}

TEST(Gradients, LogLossWrtEstimatorWeights) {
  for (std::uint64_t seed = 80; seed < 82; ++seed) {
    Rng rng(seed);
    Rng ri = rng.fork(1);
    RatioEstimator model{DreKind::log_loss, Mlp2::init(ri, 4, 5), false};
    const Mat cf = rng.normal_matrix(4, 6);
    const Mat rf = rng.normal_matrix(4, 7);
    for (DreSide side : {DreSide::client, DreSide::reference}) {
      const DreLossGrad g = log_loss_grad(model, cf, rf, side);
      const Vec base = model.net.pack();
      Vec num(base.size());
      for (Index k = 0; k < base.size(); ++k) {
        num(k) = central_diff(
            [&](double v) {
              RatioEstimator pert = model;
              Vec p = base;
              p(k) = v;
              pert.net.unpack(p);
              return log_loss(pert, cf, rf, side);
            },
            base(k), kEps);
      }
      EXPECT_LT(max_rel_err(g.grad, num), kTol) << "seed " << seed;
    }
  }
}

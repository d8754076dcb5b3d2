#pragma once

#include <cmath>

#include "xga/common.hpp"

namespace xga {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One optimizer slot; moments advance only when update() is called, so a
// parameter group that is skipped for an iteration keeps its step count.
struct AdamState {
  Vec m;
  Vec v;
  long step = 0;

  explicit AdamState(Index n) : m(Vec::Zero(n)), v(Vec::Zero(n)) {}

  void update(const AdamConfig& cfg, const Vec& grad, Vec& params) {
    require(grad.size() == m.size() && params.size() == m.size(),
            "adam state dimension mismatch");
    ++step;
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.array().square().matrix();
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
    params.array() -= cfg.lr * (m.array() / bc1) /
                      ((v.array() / bc2).sqrt() + cfg.eps);
  }
};

}  // namespace xga

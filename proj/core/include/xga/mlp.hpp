#pragma once

#include "xga/common.hpp"
#include "xga/rng.hpp"
#include "xga/serial.hpp"

namespace xga {

// Two-layer perceptron: input -> tanh hidden -> scalar linear head.
// The head nonlinearity (softplus or sigmoid) lives in the caller.
struct Mlp2 {
  Mat w1;  // hidden x input
  Vec b1;  // hidden
  Vec w2;  // hidden
  double b2 = 0.0;

  static Mlp2 init(Rng& rng, Index input_dim, Index hidden_dim);

  Index input_dim() const { return w1.cols(); }
  Index hidden_dim() const { return w1.rows(); }
  Index param_count() const;

  double forward(const Vec& x) const;
  // Samples are columns of x; returns one pre-activation per column.
  Vec forward_batch(const Mat& x) const;

  // Flat parameter vector in the fixed order w1, b1, w2, b2.
  Vec pack() const;
  void unpack(const Vec& params);

  Json to_json() const;
  static Mlp2 from_json(const Json& j);
};

struct Mlp2Grad {
  Vec params;  // gradient in pack() order
  Mat inputs;  // gradient w.r.t. each input column
};

// dy holds the loss gradient w.r.t. the scalar output of each column of x.
Mlp2Grad mlp2_backward(const Mlp2& net, const Mat& x, const Vec& dy);

}  // namespace xga

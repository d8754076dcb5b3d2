#include "xga/mlp.hpp"

#include <cmath>

namespace xga {

Mlp2 Mlp2::init(Rng& rng, Index input_dim, Index hidden_dim) {
  require(input_dim > 0, "mlp input_dim must be positive");
  require(hidden_dim > 0, "mlp hidden_dim must be positive");
  Mlp2 net;
  net.w1 = rng.normal_matrix(hidden_dim, input_dim) /
           std::sqrt(static_cast<double>(input_dim));
  net.b1 = Vec::Zero(hidden_dim);
  net.w2 = rng.normal_vector(hidden_dim) /
           std::sqrt(static_cast<double>(hidden_dim));
  net.b2 = 0.0;
  return net;
}

Index Mlp2::param_count() const {
  return w1.size() + b1.size() + w2.size() + 1;
}

double Mlp2::forward(const Vec& x) const {
  require(x.size() == input_dim(), "mlp input dimension mismatch");
  const Vec h = (w1 * x + b1).array().tanh().matrix();
  return w2.dot(h) + b2;
}

Vec Mlp2::forward_batch(const Mat& x) const {
  require(x.rows() == input_dim(), "mlp input dimension mismatch");
  const Mat h = ((w1 * x).colwise() + b1).array().tanh().matrix();
  return ((h.transpose() * w2).array() + b2).matrix();
}

Vec Mlp2::pack() const {
  Vec p(param_count());
  Index off = 0;
  p.segment(off, w1.size()) = Eigen::Map<const Vec>(w1.data(), w1.size());
  off += w1.size();
  p.segment(off, b1.size()) = b1;
  off += b1.size();
  p.segment(off, w2.size()) = w2;
  off += w2.size();
  p(off) = b2;
  return p;
}

void Mlp2::unpack(const Vec& params) {
  require(params.size() == param_count(), "mlp parameter length mismatch");
  Index off = 0;
  Eigen::Map<Vec>(w1.data(), w1.size()) = params.segment(off, w1.size());
  off += w1.size();
  b1 = params.segment(off, b1.size());
  off += b1.size();
  w2 = params.segment(off, w2.size());
  off += w2.size();
  b2 = params(off);
}

Json Mlp2::to_json() const {
  Json j;
  j["w1"] = matrix_to_json(w1);
  j["b1"] = vector_to_json(b1);
  j["w2"] = vector_to_json(w2);
  j["b2"] = b2;
  return j;
}

Mlp2 Mlp2::from_json(const Json& j) {
  Mlp2 net;
  net.w1 = matrix_from_json(j.at("w1"));
  net.b1 = vector_from_json(j.at("b1"));
  net.w2 = vector_from_json(j.at("w2"));
  net.b2 = j.at("b2").get<double>();
  require(net.b1.size() == net.w1.rows(), "mlp b1 length mismatch");
  require(net.w2.size() == net.w1.rows(), "mlp w2 length mismatch");
  return net;
}

Mlp2Grad mlp2_backward(const Mlp2& net, const Mat& x, const Vec& dy) {
  require(x.rows() == net.input_dim(), "mlp input dimension mismatch");
  require(dy.size() == x.cols(), "mlp dy length must match batch size");
  const Mat h = ((net.w1 * x).colwise() + net.b1).array().tanh().matrix();
  const Vec dw2 = h * dy;
  const double db2 = dy.sum();
  const Mat da =
      ((net.w2 * dy.transpose()).array() * (1.0 - h.array().square()))
          .matrix();
  const Mat dw1 = da * x.transpose();
  const Vec db1 = da.rowwise().sum();

  Mlp2Grad g;
  g.params.resize(net.param_count());
  Index off = 0;
  g.params.segment(off, dw1.size()) =
      Eigen::Map<const Vec>(dw1.data(), dw1.size());
  off += dw1.size();
  g.params.segment(off, db1.size()) = db1;
  off += db1.size();
  g.params.segment(off, dw2.size()) = dw2;
  off += dw2.size();
  g.params(off) = db2;
  g.inputs = net.w1.transpose() * da;
  return g;
}

}  // namespace xga

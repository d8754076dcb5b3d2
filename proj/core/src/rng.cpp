#include "xga/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace xga {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // u1 in (0, 1] so the log is finite.
  const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

int Rng::uniform_int(int lo, int hi) {
  require(lo <= hi, "uniform_int: empty range");
  const std::uint64_t span = static_cast<std::uint64_t>(hi) - lo + 1;
  // Rejection sampling keeps the distribution exact and the stream portable.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t draw;
  do {
    draw = next_u64();
  } while (draw >= limit);
  return lo + static_cast<int>(draw % span);
}

Vec Rng::normal_vector(Index n) {
  Vec v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal();
  return v;
}

Mat Rng::normal_matrix(Index rows, Index cols) {
  Mat m(rows, cols);
  // Row-major fill so serialization order matches draw order.
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = normal();
  return m;
}

std::vector<int> Rng::sample_without_replacement(int population, int count) {
  require(count >= 0 && count <= population,
          "sample_without_replacement: count out of range");
  std::vector<int> pool(population);
  for (int i = 0; i < population; ++i) pool[i] = i;
  for (int i = 0; i < count; ++i) {
    const int j = uniform_int(i, population - 1);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

Rng Rng::fork(std::uint64_t tag) const {
  return Rng(splitmix64(seed_ ^ splitmix64(tag)));
}

}  // namespace xga

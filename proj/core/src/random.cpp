#include "eemf/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace eemf {

namespace {

std::seed_seq make_seed_seq(std::uint64_t seed, std::uint64_t stream_id) {
  return std::seed_seq{static_cast<std::uint32_t>(seed),
                       static_cast<std::uint32_t>(seed >> 32),
                       static_cast<std::uint32_t>(stream_id),
                       static_cast<std::uint32_t>(stream_id >> 32),
                       0x9e3779b9u};
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  auto seq = make_seed_seq(seed, stream_id);
  engine_.seed(seq);
}

double RngStream::uniform() { return uniform_(engine_); }

double RngStream::normal() { return normal_(engine_); }

double RngStream::gamma(double shape) {
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(engine_);
}

double RngStream::beta(double a, double b) {
  const double x = gamma(a);
  const double y = gamma(b);
  return x / (x + y);
}

Eigen::VectorXd RngStream::normal_vector(Eigen::Index n) {
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = normal();
  return z;
}

Eigen::VectorXd sample_gaussian(const Eigen::VectorXd& mu,
                                const Eigen::MatrixXd& factor, RngStream& rng) {
  return mu + factor * rng.normal_vector(mu.size());
}

Eigen::VectorXd sample_epanechnikov(const Eigen::VectorXd& mu,
                                    const Eigen::MatrixXd& factor,
                                    RngStream& rng) {
  const auto n = mu.size();
  Eigen::VectorXd s = rng.normal_vector(n);
  double norm = s.norm();
  while (norm == 0.0) {
    s = rng.normal_vector(n);
    norm = s.norm();
  }
  const double eta = rng.beta(0.5 * static_cast<double>(n), 2.0);
  const double radius = std::sqrt((static_cast<double>(n) + 4.0) * eta);
  return mu + factor * (s * (radius / norm));
}

GridInverseCdf::GridInverseCdf(std::vector<double> cdf_values)
    : cdf_(std::move(cdf_values)) {
  if (cdf_.size() < 2) {
    throw std::invalid_argument("inverse CDF needs at least two nodes");
  }
}

double GridInverseCdf::cdf(double z) const {
  if (z <= 0.0) return 0.0;
  if (z >= 1.0) return 1.0;
  const double K = static_cast<double>(intervals());
  const double pos = z * K;
  const auto i = std::min(static_cast<std::size_t>(pos), intervals() - 1);
  const double frac = pos - static_cast<double>(i);
  return cdf_[i] + frac * (cdf_[i + 1] - cdf_[i]);
}

double GridInverseCdf::invert(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) {
    throw std::invalid_argument("inverse CDF argument outside [0, 1]");
  }
  if (u == 0.0) return 0.0;
  if (u == 1.0) return 1.0;
  // First node with cdf >= u; the preceding node then has cdf < u.
  const auto it = std::lower_bound(cdf_.begin() + 1, cdf_.end(), u);
  const auto i = static_cast<std::size_t>(it - cdf_.begin());
  const double lo = cdf_[i - 1];
  const double hi = cdf_[i];
  const double frac = (u - lo) / (hi - lo);
  return (static_cast<double>(i - 1) + frac) / static_cast<double>(intervals());
}

GridInverseCdf build_inverse_cdf(std::vector<double> log_values) {
  if (log_values.size() < 65) {
    throw std::invalid_argument("inverse CDF grid needs K >= 64");
  }
  double peak = -std::numeric_limits<double>::infinity();
  for (double v : log_values) {
    if (!std::isnan(v)) peak = std::max(peak, v);
  }
  if (!std::isfinite(peak)) {
    throw ZeroSupportError("density vanishes on the whole grid");
  }
  std::vector<double> cdf(log_values.size(), 0.0);
  double prev = std::isnan(log_values[0]) ? 0.0 : std::exp(log_values[0] - peak);
  for (std::size_t i = 1; i < log_values.size(); ++i) {
    const double cur =
        std::isnan(log_values[i]) ? 0.0 : std::exp(log_values[i] - peak);
    cdf[i] = cdf[i - 1] + 0.5 * (prev + cur);
    prev = cur;
  }
  const double total = cdf.back();
  if (!(total > 0.0)) {
    throw ZeroSupportError("density has no trapezoidal mass on the grid");
  }
  for (double& c : cdf) c /= total;
  cdf.back() = 1.0;
  return GridInverseCdf(std::move(cdf));
}

GridInverseCdf build_inverse_cdf(const std::function<double(double)>& log_density,
                                 std::size_t K) {
  if (K < 64) {
    throw std::invalid_argument("inverse CDF grid needs K >= 64");
  }
  std::vector<double> values(K + 1);
  for (std::size_t i = 0; i <= K; ++i) {
    values[i] = log_density(static_cast<double>(i) / static_cast<double>(K));
  }
  return build_inverse_cdf(std::move(values));
}

}  // namespace eemf

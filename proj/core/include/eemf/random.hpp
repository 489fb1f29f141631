#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

namespace eemf {

/// A reproducible random stream. Identical (seed, stream_id) pairs yield
/// identical variate sequences; distinct stream ids give independent
/// streams. A stream must be used by one thread at a time.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  double uniform();  // [0, 1)
  double normal();
  double gamma(double shape);
  double beta(double a, double b);
  Eigen::VectorXd normal_vector(Eigen::Index n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// mu + factor * z with z standard normal.
Eigen::VectorXd sample_gaussian(const Eigen::VectorXd& mu,
                                const Eigen::MatrixXd& factor, RngStream& rng);

/// Epanechnikov draw with mean mu and covariance factor * factor'.
/// A Gaussian direction is projected onto the shell of radius sqrt(n+4) and
/// scaled by sqrt(eta), eta ~ Beta(n/2, 2).
Eigen::VectorXd sample_epanechnikov(const Eigen::VectorXd& mu,
                                    const Eigen::MatrixXd& factor,
                                    RngStream& rng);

/// Tabulated CDF of a density on [0, 1] over K+1 equispaced nodes.
class GridInverseCdf {
 public:
  explicit GridInverseCdf(std::vector<double> cdf_values);

  std::size_t intervals() const { return cdf_.size() - 1; }
  const std::vector<double>& cdf_values() const { return cdf_; }

  /// Piecewise-linear CDF at z in [0, 1].
  double cdf(double z) const;
  /// Piecewise-linear inverse; invert(0) = 0 and invert(1) = 1.
  double invert(double u) const;

 private:
  std::vector<double> cdf_;
};

inline constexpr std::size_t kDefaultInverseCdfGrid = 1024;

// Thrown when a tabulated density has no mass on the grid.
struct ZeroSupportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Tabulates exp(log_density) on K+1 nodes (max-shifted), integrates with
/// the trapezoidal rule and normalizes. Throws ZeroSupportError when every
/// node has log-density -inf, std::invalid_argument when K < 64.
GridInverseCdf build_inverse_cdf(const std::function<double(double)>& log_density,
                                 std::size_t K = kDefaultInverseCdfGrid);

/// Same, from log-density values already tabulated at the K+1 nodes.
GridInverseCdf build_inverse_cdf(std::vector<double> log_values);

}  // namespace eemf

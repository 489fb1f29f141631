#include "eemf/kernel_math.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace eemf {

namespace {

void require_dim(int n) {
  if (n < 1) {
    throw std::invalid_argument("dimension must be >= 1, got " +
                                std::to_string(n));
  }
}

Eigen::LLT<Eigen::MatrixXd> checked_llt(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols()) {
    throw std::invalid_argument("covariance must be square");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("covariance is not symmetric positive definite");
  }
  return llt;
}

// log of the normalizing constant (n+2) / (2 c_n (n+4)^{(n+2)/2}).
double log_epanechnikov_constant(int n) {
  const double nd = n;
  return std::log(nd + 2.0) - std::numbers::ln2 - log_unit_ball_volume(n) -
         0.5 * (nd + 2.0) * std::log(nd + 4.0);
}

}  // namespace

double KernelConstants::beta() const { return std::exp(log_beta); }
double KernelConstants::gamma() const { return std::exp(log_gamma); }

double log_unit_ball_volume(int n) {
  require_dim(n);
  const double half = 0.5 * n;
  return half * std::log(std::numbers::pi) - std::lgamma(half + 1.0);
}

double unit_ball_volume(int n) { return std::exp(log_unit_ball_volume(n)); }

KernelConstants kernel_constants(KernelKind kind, int n) {
  require_dim(n);
  const double nd = n;
  KernelConstants c;
  c.dim = n;
  c.alpha = 1.0;
  if (kind == KernelKind::Gaussian) {
    c.log_beta = -nd * std::log(2.0 * std::sqrt(std::numbers::pi));
  } else {
    c.log_beta = std::numbers::ln2 - log_unit_ball_volume(n) +
                 std::log(nd + 2.0) - (0.5 * nd + 1.0) * std::log(nd + 4.0);
  }
  // Gaussian reference: (2^n pi^{n/2})^{-1} (n/2 + n^2/4).
  c.log_gamma = -nd * std::numbers::ln2 - 0.5 * nd * std::log(std::numbers::pi) +
                std::log(0.5 * nd + 0.25 * nd * nd);
  return c;
}

double optimal_bandwidth(const KernelConstants& c, int N) {
  if (N < 2) {
    throw std::invalid_argument("bandwidth needs N >= 2, got " +
                                std::to_string(N));
  }
  const double nd = c.dim;
  const double log_h = (c.log_beta + std::log(nd) - 2.0 * std::log(c.alpha) -
                        c.log_gamma - std::log(static_cast<double>(N))) /
                       (nd + 4.0);
  return std::exp(log_h);
}

double amise(const KernelConstants& c, double h, int N) {
  const double nd = c.dim;
  const double bias = 0.25 * std::pow(h, 4) * c.alpha * c.alpha * c.gamma();
  const double variance =
      std::exp(c.log_beta - std::log(static_cast<double>(N)) - nd * std::log(h));
  return bias + variance;
}

double amise_at_optimal_bandwidth(const KernelConstants& c, int N) {
  const double nd = c.dim;
  const double r = nd / (nd + 4.0);
  const double log_reference = std::log((nd + 4.0) / 4.0) + r * c.log_gamma;
  const double log_kernel =
      c.log_beta - r * (std::log(nd) + c.log_beta - 2.0 * std::log(c.alpha));
  const double log_rate = -4.0 / (nd + 4.0) * std::log(static_cast<double>(N));
  return std::exp(log_reference + log_kernel + log_rate);
}

double gaussian_efficiency(int n) {
  require_dim(n);
  const double nd = n;
  return std::exp((nd + 2.0) * std::numbers::ln2 -
                  (0.5 * nd + 1.0) * std::log(nd + 4.0) +
                  std::lgamma(0.5 * nd + 2.0));
}

double epanechnikov_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                        const Eigen::MatrixXd& sigma) {
  const auto llt = checked_llt(sigma);
  const int n = static_cast<int>(mu.size());
  const Eigen::VectorXd s = llt.matrixL().solve(x - mu);
  const double q = s.squaredNorm();
  if (q >= n + 4.0) return 0.0;
  const double log_det_half =
      llt.matrixLLT().diagonal().array().log().sum();
  return std::exp(log_epanechnikov_constant(n) - log_det_half) * (n + 4.0 - q);
}

double gaussian_log_pdf_factored(const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& mu,
                                 const Eigen::MatrixXd& lower) {
  const Eigen::VectorXd s =
      lower.triangularView<Eigen::Lower>().solve(x - mu);
  const double log_det_half = lower.diagonal().array().log().sum();
  const double nd = static_cast<double>(mu.size());
  return -0.5 * nd * std::log(2.0 * std::numbers::pi) - log_det_half -
         0.5 * s.squaredNorm();
}

double gaussian_log_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                        const Eigen::MatrixXd& sigma) {
  const auto llt = checked_llt(sigma);
  return gaussian_log_pdf_factored(x, mu, llt.matrixL().toDenseMatrix());
}

double gaussian_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                    const Eigen::MatrixXd& sigma) {
  return std::exp(gaussian_log_pdf(x, mu, sigma));
}

Eigen::MatrixXd epanechnikov_gaussian_approx_cov(const Eigen::MatrixXd& sigma,
                                                 int n) {
  return 0.5 * (n + 4.0) * sigma;
}

double half_gaussian_cdf(double m) {
  if (m <= 0.0) return 0.0;
  return std::erf(m / std::numbers::sqrt2);
}

double radial_fraction_quantile(int n, double p) {
  require_dim(n);
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("probability outside [0, 1]");
  }
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  return std::sqrt(boost::math::ibeta_inv(0.5 * n, 2.0, p));
}

}  // namespace eemf

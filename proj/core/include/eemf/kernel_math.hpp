#pragma once

#include <Eigen/Dense>

namespace eemf {

enum class KernelKind { Gaussian, Epanechnikov };

// AMISE constants of a unit-covariance kernel in `dim` dimensions. beta and
// gamma are stored as logarithms because both underflow double precision
// well before n = 1000.
struct KernelConstants {
  double alpha = 1.0;
  double log_beta = 0.0;
  double log_gamma = 0.0;
  int dim = 1;

  double beta() const;
  double gamma() const;
};

/// Volume of the unit ball in n dimensions, pi^{n/2} / Gamma(n/2 + 1).
double unit_ball_volume(int n);
double log_unit_ball_volume(int n);

/// Constants for the requested kernel. gamma is always the curvature
/// functional of the unit Gaussian reference density.
KernelConstants kernel_constants(KernelKind kind, int n);

/// AMISE-optimal scalar bandwidth for N samples.
double optimal_bandwidth(const KernelConstants& constants, int N);

/// AMISE(h) = h^4 alpha^2 gamma / 4 + beta / (N h^n). Test utility.
double amise(const KernelConstants& constants, double h, int N);

/// AMISE evaluated in closed form at the optimal bandwidth. Test utility.
double amise_at_optimal_bandwidth(const KernelConstants& constants, int N);

/// Efficiency of the Gaussian kernel relative to the Epanechnikov kernel,
/// 2^{n+2} Gamma(n/2 + 2) / (n+4)^{n/2+1}. Evaluated in log space.
double gaussian_efficiency(int n);

/// Density of the Epanechnikov distribution with mean mu and covariance
/// sigma. Its support is the ellipsoid (x-mu)' sigma^{-1} (x-mu) < n+4.
/// Throws std::invalid_argument if sigma is not SPD.
double epanechnikov_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                        const Eigen::MatrixXd& sigma);

double gaussian_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                    const Eigen::MatrixXd& sigma);
double gaussian_log_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                        const Eigen::MatrixXd& sigma);

/// Log-density of N(mu, L L') at x given the lower Cholesky factor L.
double gaussian_log_pdf_factored(const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& mu,
                                 const Eigen::MatrixXd& lower);

/// Covariance of the first-order Gaussian approximation to an
/// Epanechnikov distribution with covariance sigma: ((n+4)/2) sigma.
Eigen::MatrixXd epanechnikov_gaussian_approx_cov(const Eigen::MatrixXd& sigma,
                                                 int n);

/// CDF of the unit half-Gaussian, erf(m / sqrt 2) for m >= 0.
double half_gaussian_cdf(double m);

/// Quantile of the radial fraction z of a unit Epanechnikov draw, where
/// z^2 ~ Beta(n/2, 2). Returns z in [0, 1].
double radial_fraction_quantile(int n, double p);

}  // namespace eemf

#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace eemf {

// n x N matrix; each column is one particle.
using Ensemble = Eigen::MatrixXd;

struct FactorizationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Eigen::VectorXd ensemble_mean(const Ensemble& ens);

/// Unbiased sample covariance, symmetrized. Requires N >= 2.
Eigen::MatrixXd ensemble_covariance(const Ensemble& ens);

/// Lower Cholesky factor of a symmetric matrix. On failure, eps (trace/n) I
/// is added with eps = 1e-12, 1e-10, 1e-8 in turn; each retry increments
/// the thread's jitter counter. Throws FactorizationError if all fail.
Eigen::MatrixXd spd_factor(const Eigen::MatrixXd& values);

/// Cholesky solver with the same jitter policy as spd_factor.
Eigen::LLT<Eigen::MatrixXd> spd_llt(const Eigen::MatrixXd& values);

enum class TaperTopology { None, Ring };

struct LocalizationTaper {
  double radius = 0.0;
  TaperTopology topology = TaperTopology::None;
  Eigen::MatrixXd rho;  // symmetric, unit diagonal, entries in [0, 1]
};

/// Gaussian decorrelation rho_ij = exp(-d(i,j)^2 / (2 r^2)), with d the
/// cyclic distance on a ring of n variables. TaperTopology::None gives the
/// all-ones taper (no localization).
LocalizationTaper gaussian_taper(int n, double radius, TaperTopology topology);

/// Schur product rho o cov.
Eigen::MatrixXd localize(const Eigen::MatrixXd& cov,
                         const LocalizationTaper& taper);

/// mean + alpha_inf (x_i - mean) for each column.
Ensemble inflate(const Ensemble& ens, double alpha_inf);

}  // namespace eemf

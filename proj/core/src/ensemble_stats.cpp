#include "eemf/ensemble_stats.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "eemf/diagnostics.hpp"

namespace eemf {

Eigen::VectorXd ensemble_mean(const Ensemble& ens) {
  if (ens.cols() == 0) throw std::invalid_argument("empty ensemble");
  return ens.rowwise().mean();
}

Eigen::MatrixXd ensemble_covariance(const Ensemble& ens) {
  if (ens.cols() < 2) {
    throw std::invalid_argument("covariance needs at least two particles");
  }
  const Eigen::MatrixXd anomalies = ens.colwise() - ensemble_mean(ens);
  Eigen::MatrixXd cov =
      anomalies * anomalies.transpose() / static_cast<double>(ens.cols() - 1);
  return 0.5 * (cov + cov.transpose());
}

Eigen::LLT<Eigen::MatrixXd> spd_llt(const Eigen::MatrixXd& values) {
  if (values.rows() != values.cols()) {
    throw std::invalid_argument("factorization needs a square matrix");
  }
  const Eigen::MatrixXd sym = 0.5 * (values + values.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(sym);
  if (llt.info() == Eigen::Success) return llt;

  const auto n = sym.rows();
  double scale = sym.trace() / static_cast<double>(n);
  if (!(scale > 0.0) || !std::isfinite(scale)) scale = 1.0;
  static constexpr std::array<double, 3> kJitter{1e-12, 1e-10, 1e-8};
  for (double eps : kJitter) {
    ++thread_diagnostics().jitter_applied;
    Eigen::MatrixXd jittered = sym;
    jittered.diagonal().array() += eps * scale;
    llt.compute(jittered);
    if (llt.info() == Eigen::Success) return llt;
  }
  std::ostringstream msg;
  msg << "factorization failed after maximum jitter: " << n << "x" << n
      << " matrix, trace " << sym.trace() << ", min diagonal "
      << sym.diagonal().minCoeff();
  throw FactorizationError(msg.str());
}

Eigen::MatrixXd spd_factor(const Eigen::MatrixXd& values) {
  return spd_llt(values).matrixL();
}

LocalizationTaper gaussian_taper(int n, double radius, TaperTopology topology) {
  if (!(radius > 0.0)) throw std::invalid_argument("taper radius must be > 0");
  LocalizationTaper taper;
  taper.radius = radius;
  taper.topology = topology;
  taper.rho = Eigen::MatrixXd::Ones(n, n);
  if (topology == TaperTopology::None) return taper;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int gap = std::abs(i - j);
      const double d = std::min(gap, n - gap);
      taper.rho(i, j) = std::exp(-d * d / (2.0 * radius * radius));
    }
  }
  return taper;
}

Eigen::MatrixXd localize(const Eigen::MatrixXd& cov,
                         const LocalizationTaper& taper) {
  if (cov.rows() != taper.rho.rows() || cov.cols() != taper.rho.cols()) {
    throw std::invalid_argument("taper and covariance shapes differ");
  }
  return cov.cwiseProduct(taper.rho);
}

Ensemble inflate(const Ensemble& ens, double alpha_inf) {
  if (alpha_inf < 1.0) throw std::invalid_argument("inflation factor must be >= 1");
  if (alpha_inf == 1.0) return ens;
  const Eigen::VectorXd mean = ensemble_mean(ens);
  return (alpha_inf * (ens.colwise() - mean)).colwise() + mean;
}

}  // namespace eemf

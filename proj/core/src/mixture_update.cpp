#include "eemf/mixture_update.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "eemf/diagnostics.hpp"
#include "eemf/ensemble_stats.hpp"
#include "eemf/kernel_math.hpp"

namespace eemf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct KalmanStep {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  double innovation_log_density = 0.0;
};

// Kalman update of (mean, cov) for a measurement linearized at `mean` with
// noise covariance R. Also returns log N(y; h(mean), H cov H' + R).
KalmanStep kalman_step(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                       const MeasurementModel& meas, const Eigen::MatrixXd& R) {
  const Eigen::MatrixXd H = meas.jacobian(mean);
  const Eigen::MatrixXd PHt = cov * H.transpose();
  const Eigen::MatrixXd S = H * PHt + R;
  const Eigen::MatrixXd S_factor = spd_factor(S);
  const auto lower = S_factor.triangularView<Eigen::Lower>();
  // G' = S^{-1} H P, via the two triangular solves of the factor.
  Eigen::MatrixXd Gt = lower.solve(PHt.transpose());
  lower.transpose().solveInPlace(Gt);
  const Eigen::VectorXd predicted = meas(mean);

  KalmanStep out;
  out.mean = mean - Gt.transpose() * (predicted - meas.y());
  out.cov = cov;
  out.cov.noalias() -= Gt.transpose() * PHt.transpose();
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  out.innovation_log_density =
      gaussian_log_pdf_factored(meas.y(), predicted, S_factor);
  return out;
}

double innovation_log_density(const Eigen::VectorXd& mean,
                              const Eigen::MatrixXd& cov,
                              const MeasurementModel& meas) {
  const Eigen::MatrixXd H = meas.jacobian(mean);
  const Eigen::MatrixXd S = H * cov * H.transpose() + meas.R();
  return gaussian_log_pdf_factored(meas.y(), meas(mean), spd_factor(S));
}

std::vector<double> scaled_gaussian_weights(
    const std::vector<MixtureComponent>& comps, const MeasurementModel& meas,
    double scale) {
  std::vector<double> lw(comps.size());
  for (std::size_t i = 0; i < comps.size(); ++i) {
    lw[i] = comps[i].log_weight +
            innovation_log_density(comps[i].mean, scale * comps[i].cov, meas);
  }
  normalize_log_weights(lw);
  return lw;
}

}  // namespace

bool normalize_log_weights(std::vector<double>& lw) {
  if (lw.empty()) return true;
  double peak = kNegInf;
  for (double v : lw) {
    if (std::isfinite(v)) peak = std::max(peak, v);
  }
  if (!std::isfinite(peak)) {
    ++thread_diagnostics().weight_underflow;
    std::fill(lw.begin(), lw.end(), -std::log(static_cast<double>(lw.size())));
    return false;
  }
  double sum = 0.0;
  for (double v : lw) {
    if (std::isfinite(v)) sum += std::exp(v - peak);
  }
  const double log_total = peak + std::log(sum);
  for (double& v : lw) v = std::isfinite(v) ? v - log_total : kNegInf;
  return true;
}

UpdatedComponent ekf_component_update(const MixtureComponent& comp,
                                      const MeasurementModel& meas) {
  const KalmanStep step = kalman_step(comp.mean, comp.cov, meas, meas.R());
  return {step.mean, step.cov, comp.log_weight + step.innovation_log_density};
}

UpdatedComponent bruf_component_update(const MixtureComponent& comp,
                                       const MeasurementModel& meas, int M) {
  if (M < 1) throw std::invalid_argument("BRUF needs M >= 1");
  if (M == 1) return ekf_component_update(comp, meas);
  const Eigen::MatrixXd inflated_R = static_cast<double>(M) * meas.R();
  KalmanStep step{comp.mean, comp.cov};
  for (int k = 0; k < M; ++k) {
    step = kalman_step(step.mean, step.cov, meas, inflated_R);
  }
  return {step.mean, step.cov,
          comp.log_weight + innovation_log_density(comp.mean, comp.cov, meas)};
}

std::vector<double> engmf_weights(const std::vector<MixtureComponent>& comps,
                                  const MeasurementModel& meas) {
  return scaled_gaussian_weights(comps, meas, 1.0);
}

std::vector<double> enemf_gaussian_weights(
    const std::vector<MixtureComponent>& comps, const MeasurementModel& meas,
    double s_E) {
  if (!(s_E > 0.0)) throw std::invalid_argument("s_E must be > 0");
  if (comps.empty()) return {};
  const auto n = static_cast<double>(comps.front().mean.size());
  return scaled_gaussian_weights(comps, meas, s_E * 0.5 * (n + 4.0));
}

double UtParams::mean_weight(int n, int j) const {
  const double lam = lambda(n);
  return j == 0 ? lam / (lam + n) : 1.0 / (2.0 * (lam + n));
}

double UtParams::cov_weight(int n, int j) const {
  const double w = mean_weight(n, j);
  return j == 0 ? w + 1.0 - alpha * alpha + beta : w;
}

Eigen::MatrixXd epanechnikov_sigma_points(const Eigen::VectorXd& mu,
                                          const Eigen::MatrixXd& cov_factor,
                                          const UtParams& params) {
  const int n = static_cast<int>(mu.size());
  const double spread = n + params.lambda(n);
  if (!(spread > 0.0)) throw std::invalid_argument("n + lambda must be > 0");

  // Every non-central Gaussian point sits at Mahalanobis radius
  // m = sqrt(n + lambda) along +-e_j in whitened coordinates.
  const double m = std::sqrt(spread);
  const double z = radial_fraction_quantile(n, half_gaussian_cdf(m));
  const double radius = std::sqrt(n + 4.0) * z;

  Eigen::MatrixXd points(n, 2 * n + 1);
  points.col(0) = mu;
  for (int j = 0; j < n; ++j) {
    const Eigen::VectorXd offset = radius * cov_factor.col(j);
    points.col(1 + j) = mu + offset;
    points.col(1 + n + j) = mu - offset;
  }
  return points;
}

std::vector<double> enemf_unscented_weights(
    const std::vector<MixtureComponent>& comps, const MeasurementModel& meas,
    double s_E, const UtParams& params) {
  if (!(s_E > 0.0)) throw std::invalid_argument("s_E must be > 0");
  std::vector<double> lw(comps.size());
  if (comps.empty()) return lw;
  const int n = static_cast<int>(comps.front().mean.size());
  const int count = 2 * n + 1;
  const auto m = meas.size();

  std::vector<double> Wm(count), Wc(count);
  for (int j = 0; j < count; ++j) {
    Wm[j] = params.mean_weight(n, j);
    Wc[j] = params.cov_weight(n, j);
  }

  Eigen::MatrixXd images(m, count);
  std::vector<double> terms(count);
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const Eigen::MatrixXd L = spd_factor(s_E * comps[i].cov);
    const Eigen::MatrixXd points = epanechnikov_sigma_points(comps[i].mean, L, params);
    for (int j = 0; j < count; ++j) images.col(j) = meas(points.col(j));

    Eigen::VectorXd ybar = Eigen::VectorXd::Zero(m);
    for (int j = 0; j < count; ++j) ybar += Wm[j] * images.col(j);
    Eigen::MatrixXd Sy = meas.R();
    for (int j = 0; j < count; ++j) {
      const Eigen::VectorXd d = images.col(j) - ybar;
      Sy.noalias() += Wc[j] * d * d.transpose();
    }
    const Eigen::MatrixXd Sy_factor = spd_factor(Sy);

    // log sum_j W_j N(y; h(Xi_j), Sy); W_0 may be negative for other UT
    // parameters, so the shifted sum is formed with signs.
    const Eigen::MatrixXd white = Sy_factor.triangularView<Eigen::Lower>().solve(
        (-images).colwise() + meas.y());
    const double log_norm = -0.5 * static_cast<double>(m) * std::log(2.0 * std::numbers::pi) -
                            Sy_factor.diagonal().array().log().sum();
    double peak = kNegInf;
    for (int j = 0; j < count; ++j) {
      terms[j] = log_norm - 0.5 * white.col(j).squaredNorm();
      peak = std::max(peak, terms[j]);
    }
    double sum = 0.0;
    for (int j = 0; j < count; ++j) sum += Wm[j] * std::exp(terms[j] - peak);
    lw[i] = comps[i].log_weight + (sum > 0.0 ? peak + std::log(sum) : kNegInf);
  }
  normalize_log_weights(lw);
  return lw;
}

}  // namespace eemf

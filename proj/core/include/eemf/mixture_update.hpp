#pragma once

#include <Eigen/Dense>
#include <vector>

#include "eemf/measurement.hpp"

namespace eemf {

/// One KDE mode. cov is already bandwidth-scaled (h^2 times the ensemble
/// covariance).
struct MixtureComponent {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  double log_weight = 0.0;
};

/// Gaussian-sum update of one mode.
struct UpdatedComponent {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  double log_weight = 0.0;
};

/// Extended Kalman update of one component, Jacobian at the prior mean.
/// log_weight is the prior log-weight plus log N(y; h(m), H P H' + R).
UpdatedComponent ekf_component_update(const MixtureComponent& comp,
                                      const MeasurementModel& meas);

/// Bayesian recursive update: M EKF steps with covariance M R, each
/// re-linearized at the latest mean. The log-weight is the single EKF weight
/// of the incoming component.
UpdatedComponent bruf_component_update(const MixtureComponent& comp,
                                       const MeasurementModel& meas, int M);

/// Normalized log-weights w_i ~ w_i^- N(y; h(m_i), H_i P_i H_i' + R).
/// If every weight underflows, returns uniform weights and bumps the
/// thread's underflow counter.
std::vector<double> engmf_weights(const std::vector<MixtureComponent>& comps,
                                  const MeasurementModel& meas);

/// As engmf_weights with each P_i scaled by s_E (n+4)/2, the Gaussian
/// approximation of an Epanechnikov mode.
std::vector<double> enemf_gaussian_weights(
    const std::vector<MixtureComponent>& comps, const MeasurementModel& meas,
    double s_E);

struct UtParams {
  double alpha = 1.0;
  double kappa = 3.0;
  double beta = 2.0;

  double lambda(int n) const { return alpha * alpha * (n + kappa) - n; }
  double mean_weight(int n, int j) const;
  double cov_weight(int n, int j) const;
};

/// 2n+1 Epanechnikov sigma points (columns). Gaussian points
/// mu +- sqrt(n + lambda) L e_j are pushed radially onto the Epanechnikov
/// radial law by matching the half-Gaussian CDF of their Mahalanobis radius.
Eigen::MatrixXd epanechnikov_sigma_points(const Eigen::VectorXd& mu,
                                          const Eigen::MatrixXd& cov_factor,
                                          const UtParams& params = {});

/// Unscented expected-likelihood weights of Epanechnikov modes with
/// covariance s_E P_i.
std::vector<double> enemf_unscented_weights(
    const std::vector<MixtureComponent>& comps, const MeasurementModel& meas,
    double s_E, const UtParams& params = {});

/// Subtracts log-sum-exp. Returns false (and writes uniform weights) when no
/// entry is finite.
bool normalize_log_weights(std::vector<double>& log_weights);

}  // namespace eemf

#pragma once

#include <Eigen/Dense>

#include "eemf/ensemble_stats.hpp"
#include "eemf/kernel_math.hpp"
#include "eemf/measurement.hpp"
#include "eemf/random.hpp"

namespace eemf {

// n-dimensional banana problem: a correlated prior observed through its
// Euclidean norm.
struct BananaProblem {
  static constexpr double kMeanOffset = -2.5;
  static constexpr double kObservation = 1.0;
  static constexpr double kNoiseVariance = 0.01;

  int n = 2;
  KernelKind prior_kind = KernelKind::Gaussian;
  Eigen::VectorXd prior_mean;
  Eigen::MatrixXd prior_cov;     // tridiagonal: 1 on the diagonal, 0.5 beside it
  Eigen::MatrixXd prior_factor;

  Eigen::VectorXd sample_prior(RngStream& rng) const;
  Ensemble sample_prior_ensemble(Eigen::Index N, RngStream& rng) const;
};

/// Prior with mean -2.5 in the first coordinate and zeros elsewhere.
BananaProblem banana_prior(int n, KernelKind kind = KernelKind::Gaussian);

/// h(x) = ||x||, R = 0.01, y = 1 unless given. The Jacobian at x = 0 is the
/// zero row and bumps the singular-Jacobian counter.
MeasurementModel banana_measurement(int n, double y = BananaProblem::kObservation);

namespace l96 {

inline constexpr int kDim = 40;
inline constexpr int kObsDim = 20;
inline constexpr double kForcing = 8.0;
inline constexpr double kWindow = 0.2;
inline constexpr double kSubstep = 0.05;
inline constexpr double kNoiseVariance = 0.25;
inline constexpr double kSpinupTime = 10.0;

}  // namespace l96

/// Lorenz '96 tendency with cyclic neighbours. Works for any length >= 4.
Eigen::VectorXd l96_rhs(const Eigen::VectorXd& x, double forcing = l96::kForcing);

/// Classical RK4 over `duration` in steps of `substep`; the substep must
/// divide the duration.
Eigen::VectorXd l96_propagate(const Eigen::VectorXd& x, double duration,
                              double substep = l96::kSubstep,
                              double forcing = l96::kForcing);

/// Pairwise magnitudes [h(x)]_i = sqrt(x_{2i-1}^2 + x_{2i}^2), i = 1..20
/// (1-based), R = I/4.
MeasurementModel l96_measurement(Eigen::VectorXd y = Eigen::VectorXd::Zero(l96::kObsDim));

struct L96Start {
  Eigen::VectorXd truth;  // after spin-up
  Ensemble ensemble;      // truth + unit Gaussian perturbations
};

/// Truth spun up for 10 time units from F + 0.01 N(0, I), then an initial
/// ensemble of N members around it.
L96Start l96_truth_and_initial_ensemble(Eigen::Index N, RngStream& rng);

}  // namespace eemf

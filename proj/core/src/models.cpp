#include "eemf/models.hpp"

#include <cmath>
#include <stdexcept>

#include "eemf/diagnostics.hpp"

namespace eemf {

Eigen::VectorXd BananaProblem::sample_prior(RngStream& rng) const {
  return prior_kind == KernelKind::Gaussian
             ? sample_gaussian(prior_mean, prior_factor, rng)
             : sample_epanechnikov(prior_mean, prior_factor, rng);
}

Ensemble BananaProblem::sample_prior_ensemble(Eigen::Index N,
                                              RngStream& rng) const {
  Ensemble ens(n, N);
  for (Eigen::Index i = 0; i < N; ++i) ens.col(i) = sample_prior(rng);
  return ens;
}

BananaProblem banana_prior(int n, KernelKind kind) {
  if (n < 1) throw std::invalid_argument("banana dimension must be >= 1");
  BananaProblem p;
  p.n = n;
  p.prior_kind = kind;
  p.prior_mean = Eigen::VectorXd::Zero(n);
  p.prior_mean(0) = BananaProblem::kMeanOffset;
  p.prior_cov = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    p.prior_cov(i, i + 1) = 0.5;
    p.prior_cov(i + 1, i) = 0.5;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(p.prior_cov);
  if (llt.info() != Eigen::Success) {
    throw std::logic_error("banana prior covariance is not SPD");
  }
  p.prior_factor = llt.matrixL();
  return p;
}

MeasurementModel banana_measurement(int n, double y) {
  auto h = [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return Eigen::VectorXd::Constant(1, x.norm());
  };
  auto jac = [](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    const double r = x.norm();
    if (r == 0.0) {
      ++thread_diagnostics().singular_jacobian;
      return Eigen::MatrixXd::Zero(1, x.size());
    }
    return x.transpose() / r;
  };
  if (n < 1) throw std::invalid_argument("banana dimension must be >= 1");
  return MeasurementModel(h, jac,
                          Eigen::MatrixXd::Constant(1, 1, BananaProblem::kNoiseVariance),
                          Eigen::VectorXd::Constant(1, y));
}

Eigen::VectorXd l96_rhs(const Eigen::VectorXd& x, double forcing) {
  const Eigen::Index n = x.size();
  if (n < 4) throw std::invalid_argument("Lorenz '96 needs at least 4 variables");
  Eigen::VectorXd dx(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double xm2 = x((k + n - 2) % n);
    const double xm1 = x((k + n - 1) % n);
    const double xp1 = x((k + 1) % n);
    dx(k) = -xm1 * (xm2 - xp1) - x(k) + forcing;
  }
  return dx;
}

Eigen::VectorXd l96_propagate(const Eigen::VectorXd& x, double duration,
                              double substep, double forcing) {
  if (!(duration > 0.0) || !(substep > 0.0)) {
    throw std::invalid_argument("duration and substep must be positive");
  }
  const double steps_real = duration / substep;
  const long steps = std::lround(steps_real);
  if (steps < 1 || std::abs(steps_real - static_cast<double>(steps)) > 1e-9 * steps_real) {
    throw std::invalid_argument("substep does not divide the duration");
  }
  Eigen::VectorXd state = x;
  for (long s = 0; s < steps; ++s) {
    const Eigen::VectorXd k1 = l96_rhs(state, forcing);
    const Eigen::VectorXd k2 = l96_rhs(state + 0.5 * substep * k1, forcing);
    const Eigen::VectorXd k3 = l96_rhs(state + 0.5 * substep * k2, forcing);
    const Eigen::VectorXd k4 = l96_rhs(state + substep * k3, forcing);
    state += substep / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return state;
}

MeasurementModel l96_measurement(Eigen::VectorXd y) {
  auto h = [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    Eigen::VectorXd out(x.size() / 2);
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      out(i) = std::sqrt(x(2 * i) * x(2 * i) + x(2 * i + 1) * x(2 * i + 1));
    }
    return out;
  };
  auto jac = [](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    const Eigen::Index m = x.size() / 2;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m, x.size());
    for (Eigen::Index i = 0; i < m; ++i) {
      const double a = x(2 * i);
      const double b = x(2 * i + 1);
      const double r = std::sqrt(a * a + b * b);
      if (r == 0.0) {
        ++thread_diagnostics().singular_jacobian;
        continue;
      }
      H(i, 2 * i) = a / r;
      H(i, 2 * i + 1) = b / r;
    }
    return H;
  };
  if (y.size() != l96::kObsDim) {
    throw std::invalid_argument("Lorenz '96 observation must have 20 entries");
  }
  return MeasurementModel(
      h, jac, l96::kNoiseVariance * Eigen::MatrixXd::Identity(l96::kObsDim, l96::kObsDim),
      std::move(y));
}

L96Start l96_truth_and_initial_ensemble(Eigen::Index N, RngStream& rng) {
  if (N < 2) throw std::invalid_argument("ensemble needs at least two members");
  Eigen::VectorXd x0 = Eigen::VectorXd::Constant(l96::kDim, l96::kForcing) +
                       0.01 * rng.normal_vector(l96::kDim);
  L96Start start;
  start.truth = l96_propagate(x0, l96::kSpinupTime);
  start.ensemble.resize(l96::kDim, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    start.ensemble.col(i) = start.truth + rng.normal_vector(l96::kDim);
  }
  return start;
}

}  // namespace eemf

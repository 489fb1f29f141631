#pragma once

#include <Eigen/Dense>
#include <functional>

namespace eemf {

// y = h(x) + eta, eta ~ N(0, R). The Cholesky factor of R is computed once
// at construction so that likelihood evaluations never refactor it.
class MeasurementModel {
 public:
  using Map = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
  using Jacobian = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

  MeasurementModel(Map h, Jacobian jacobian, Eigen::MatrixXd R,
                   Eigen::VectorXd y);

  /// h(x) = H x + offset.
  static MeasurementModel linear(Eigen::MatrixXd H, Eigen::MatrixXd R,
                                 Eigen::VectorXd y,
                                 Eigen::VectorXd offset = {});

  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const { return h_(x); }
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const { return jac_(x); }

  const Eigen::MatrixXd& R() const { return R_; }
  const Eigen::MatrixXd& R_factor() const { return R_factor_; }
  const Eigen::VectorXd& y() const { return y_; }
  Eigen::Index size() const { return y_.size(); }

  /// Same map and noise model, new realized observation.
  MeasurementModel with_observation(Eigen::VectorXd y) const;

  /// log N(y; h(x), R).
  double log_likelihood(const Eigen::VectorXd& x) const;

 private:
  Map h_;
  Jacobian jac_;
  Eigen::MatrixXd R_;
  Eigen::MatrixXd R_factor_;
  Eigen::VectorXd y_;
  double log_norm_ = 0.0;  // -m/2 log(2 pi) - log|R|/2
  bool diagonal_R_ = false;
  Eigen::VectorXd inv_sd_;  // 1 / sqrt(R_ii), set when R is diagonal
};

}  // namespace eemf

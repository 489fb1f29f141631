#include "eemf/measurement.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace eemf {

MeasurementModel::MeasurementModel(Map h, Jacobian jacobian, Eigen::MatrixXd R,
                                   Eigen::VectorXd y)
    : h_(std::move(h)), jac_(std::move(jacobian)), R_(std::move(R)),
      y_(std::move(y)) {
  if (R_.rows() != R_.cols() || R_.rows() != y_.size()) {
    throw std::invalid_argument("measurement covariance and observation sizes differ");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(R_);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("measurement covariance is not SPD");
  }
  R_factor_ = llt.matrixL();
  diagonal_R_ = R_.isDiagonal(0.0);
  if (diagonal_R_) inv_sd_ = R_.diagonal().cwiseSqrt().cwiseInverse();
  log_norm_ = -0.5 * static_cast<double>(y_.size()) *
                  std::log(2.0 * std::numbers::pi) -
              R_factor_.diagonal().array().log().sum();
}

MeasurementModel MeasurementModel::linear(Eigen::MatrixXd H, Eigen::MatrixXd R,
                                          Eigen::VectorXd y,
                                          Eigen::VectorXd offset) {
  if (offset.size() == 0) offset = Eigen::VectorXd::Zero(H.rows());
  Map h = [H, offset](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return H * x + offset;
  };
  Jacobian jac = [H](const Eigen::VectorXd&) -> Eigen::MatrixXd { return H; };
  return MeasurementModel(std::move(h), std::move(jac), std::move(R),
                          std::move(y));
}

MeasurementModel MeasurementModel::with_observation(Eigen::VectorXd y) const {
  if (y.size() != y_.size()) {
    throw std::invalid_argument("observation size changed");
  }
  MeasurementModel copy = *this;
  copy.y_ = std::move(y);
  return copy;
}

double MeasurementModel::log_likelihood(const Eigen::VectorXd& x) const {
  if (diagonal_R_) {
    return log_norm_ - 0.5 * (y_ - h_(x)).cwiseProduct(inv_sd_).squaredNorm();
  }
  const Eigen::VectorXd r = R_factor_.triangularView<Eigen::Lower>().solve(
      y_ - h_(x));
  return log_norm_ - 0.5 * r.squaredNorm();
}

}  // namespace eemf

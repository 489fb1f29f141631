#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "eemf/kernel_math.hpp"
#include "eemf/mixture_update.hpp"
#include "eemf/models.hpp"
#include "eemf/random.hpp"
#include "oracles.hpp"

using namespace eemf;

namespace {

MeasurementModel scalar_identity(double R, double y) {
  return MeasurementModel::linear(Eigen::MatrixXd::Identity(1, 1),
                                  Eigen::MatrixXd::Constant(1, 1, R),
                                  Eigen::VectorXd::Constant(1, y));
}

double sum_of_weights(const std::vector<double>& lw) {
  double s = 0.0;
  for (double v : lw) s += std::exp(v);
  return s;
}

// Exact expected likelihood of a 1D Epanechnikov mode (mean m, variance P)
// under y = x + noise, by quadrature over the support.
double exact_epanechnikov_weight(double m, double P, double R, double y) {
  const double half = std::sqrt(5.0 * P);
  const Eigen::VectorXd mu = Eigen::VectorXd::Constant(1, m);
  const Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(1, 1, P);
  return eemf::test::integrate([&](double x) {
    return epanechnikov_pdf(Eigen::VectorXd::Constant(1, x), mu, cov) *
           std::exp(-0.5 * (y - x) * (y - x) / R) / std::sqrt(2 * std::numbers::pi * R);
  }, m - half, m + half);
}

}  // namespace

TEST_CASE("scalar EKF update") {
  const MixtureComponent comp{Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1), 0.0};
  const auto up = ekf_component_update(comp, scalar_identity(1.0, 1.0));
  CHECK(up.mean(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(up.cov(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(up.log_weight == doctest::Approx(-1.5155121234846454).epsilon(1e-13));
}

TEST_CASE("uninformative measurement leaves the component unchanged") {
  RngStream rng(21, 0);
  const Eigen::MatrixXd P = eemf::test::random_spd(3, rng);
  const MixtureComponent comp{rng.normal_vector(3), P, 0.0};
  const auto meas = MeasurementModel::linear(Eigen::MatrixXd::Identity(2, 3),
                                             1e12 * Eigen::MatrixXd::Identity(2, 2),
                                             Eigen::Vector2d(4.0, -3.0));
  const auto up = ekf_component_update(comp, meas);
  CHECK((up.mean - comp.mean).norm() <= 1e-6 * comp.mean.norm());
  CHECK((up.cov - P).norm() <= 1e-6 * P.norm());
}

TEST_CASE("EKF on a banana component matches the linearized Bayes posterior") {
  const BananaProblem problem = banana_prior(2);
  const MixtureComponent comp{problem.prior_mean, problem.prior_cov, 0.0};
  const auto up = ekf_component_update(comp, banana_measurement(2, 1.0));

  // Dense-grid moments of prior times the likelihood linearized at the mean.
  CHECK(up.mean(0) == doctest::Approx(-1.0148515).epsilon(1e-6));
  CHECK(up.mean(1) == doctest::Approx(0.74257224).epsilon(1e-5));
  CHECK(up.cov(0, 0) == doctest::Approx(0.0099009897).epsilon(1e-5));
  CHECK(up.cov(0, 1) == doctest::Approx(0.0049504385).epsilon(1e-4));
  CHECK(up.cov(1, 1) == doctest::Approx(0.75246666).epsilon(1e-5));
  CHECK(up.cov == up.cov.transpose());
  CHECK(up.log_weight == doctest::Approx(-2.0377750847698706).epsilon(1e-12));
}

TEST_CASE("linear updates shrink the covariance") {
  RngStream rng(22, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd P = eemf::test::random_spd(4, rng);
    Eigen::MatrixXd H(2, 4);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 4; ++j) H(i, j) = rng.normal();
    const auto meas = MeasurementModel::linear(H, eemf::test::random_spd(2, rng),
                                               rng.normal_vector(2));
    const auto up = ekf_component_update({rng.normal_vector(4), P, 0.0}, meas);
    CHECK(up.cov.trace() <= P.trace());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(up.cov);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("BRUF is M-invariant for linear measurements") {
  RngStream rng(23, 0);
  const Eigen::MatrixXd P = eemf::test::random_spd(3, rng);
  Eigen::MatrixXd H(2, 3);
  H << 1.0, 0.5, -0.2, 0.0, 2.0, 1.0;
  const auto meas = MeasurementModel::linear(H, eemf::test::random_spd(2, rng),
                                             Eigen::Vector2d(0.7, -1.1),
                                             Eigen::Vector2d(0.1, 0.2));
  const MixtureComponent comp{rng.normal_vector(3), P, -0.3};
  const auto ekf = ekf_component_update(comp, meas);
  for (int M : {1, 2, 5, 10}) {
    CAPTURE(M);
    const auto bruf = bruf_component_update(comp, meas, M);
    CHECK((bruf.mean - ekf.mean).norm() <= 1e-10 * ekf.mean.norm());
    CHECK((bruf.cov - ekf.cov).norm() <= 1e-10 * ekf.cov.norm());
    CHECK(bruf.log_weight == doctest::Approx(ekf.log_weight).epsilon(1e-12));
  }
  CHECK_THROWS_AS(bruf_component_update(comp, meas, 0), std::invalid_argument);
}

TEST_CASE("BRUF on the banana component") {
  const BananaProblem problem = banana_prior(2);
  const MixtureComponent comp{problem.prior_mean, problem.prior_cov, 0.0};
  const auto meas = banana_measurement(2, 1.0);
  const auto bruf = bruf_component_update(comp, meas, 5);
  CHECK(bruf.mean(0) == doctest::Approx(-0.9895622205623793).epsilon(1e-12));
  CHECK(bruf.mean(1) == doctest::Approx(0.3090637301956445).epsilon(1e-12));
  CHECK(bruf.cov(0, 1) == doctest::Approx(0.06332722362463454).epsilon(1e-11));
  CHECK(bruf.cov(1, 1) == doctest::Approx(0.21183302457484887).epsilon(1e-11));

  // Mean of the exact posterior on a dense grid.
  const Eigen::Vector2d bayes(-0.7877377153102263, 0.3160872091265784);
  const auto ekf = ekf_component_update(comp, meas);
  CHECK((bruf.mean - bayes).norm() < (ekf.mean - bayes).norm());
  CHECK(bruf.log_weight == ekf.log_weight);
}

TEST_CASE("Gaussian mixture weights") {
  const auto meas = scalar_identity(0.5, 1.0);
  const Eigen::MatrixXd P = Eigen::MatrixXd::Constant(1, 1, 0.3);
  const MixtureComponent near{Eigen::VectorXd::Constant(1, 1.0), P, 0.0};
  const MixtureComponent far{Eigen::VectorXd::Constant(1, 3.0), P, 0.0};

  CHECK(engmf_weights({near}, meas)[0] == doctest::Approx(0.0));
  const auto same = engmf_weights({near, near}, meas);
  CHECK(std::exp(same[0]) == doctest::Approx(0.5));
  CHECK(std::exp(same[1]) == doctest::Approx(0.5));

  const auto lw = engmf_weights({near, far}, meas);
  const double ratio = gaussian_pdf(Eigen::VectorXd::Constant(1, 1.0),
                                    Eigen::VectorXd::Constant(1, 1.0),
                                    Eigen::MatrixXd::Constant(1, 1, 0.8)) /
                       gaussian_pdf(Eigen::VectorXd::Constant(1, 1.0),
                                    Eigen::VectorXd::Constant(1, 3.0),
                                    Eigen::MatrixXd::Constant(1, 1, 0.8));
  CHECK(std::exp(lw[0] - lw[1]) == doctest::Approx(ratio).epsilon(1e-12));
  CHECK(sum_of_weights(lw) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("EnEMF Gaussian-approximation weights") {
  RngStream rng(24, 0);
  const int n = 3;
  const Eigen::MatrixXd P = 0.2 * eemf::test::random_spd(n, rng);
  std::vector<MixtureComponent> comps;
  for (int i = 0; i < 12; ++i) comps.push_back({rng.normal_vector(n), P, -std::log(12.0)});
  const auto meas = MeasurementModel::linear(Eigen::MatrixXd::Identity(2, n),
                                             0.1 * Eigen::MatrixXd::Identity(2, 2),
                                             Eigen::Vector2d(0.3, -0.4));

  const auto plain = engmf_weights(comps, meas);
  const auto cancelled = enemf_gaussian_weights(comps, meas, 2.0 / (n + 4.0));
  for (std::size_t i = 0; i < comps.size(); ++i) {
    CHECK(cancelled[i] == doctest::Approx(plain[i]).epsilon(1e-12));
  }

  // The top weight goes to the smallest Mahalanobis innovation.
  const double s_E = 0.4;
  const auto lw = enemf_gaussian_weights(comps, meas, s_E);
  const Eigen::MatrixXd H = Eigen::MatrixXd::Identity(2, n);
  const Eigen::MatrixXd S = H * (s_E * (n + 4.0) / 2.0 * P) * H.transpose() + meas.R();
  const Eigen::LLT<Eigen::MatrixXd> llt(S);
  std::size_t best = 0;
  double best_d = INFINITY;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const Eigen::VectorXd r = meas.y() - H * comps[i].mean;
    const double d = r.dot(llt.solve(r));
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  CHECK(std::max_element(lw.begin(), lw.end()) - lw.begin() == static_cast<long>(best));
  CHECK(sum_of_weights(lw) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(enemf_gaussian_weights(comps, meas, 0.0), std::invalid_argument);
}

TEST_CASE("unscented transform weights") {
  const UtParams ut;
  for (int n : {1, 2, 7, 40}) {
    double sm = 0.0, sc = 0.0;
    for (int j = 0; j <= 2 * n; ++j) {
      sm += ut.mean_weight(n, j);
      sc += ut.cov_weight(n, j);
    }
    CHECK(sm == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sc == doctest::Approx(1.0 + (1.0 - ut.alpha * ut.alpha + ut.beta)).epsilon(1e-12));
  }
  CHECK(ut.lambda(1) == 3.0);
  CHECK(ut.mean_weight(1, 0) == doctest::Approx(0.75));
  CHECK(ut.mean_weight(1, 1) == doctest::Approx(0.125));
  CHECK(ut.cov_weight(1, 0) == doctest::Approx(2.75));
  CHECK(ut.cov_weight(1, 2) == doctest::Approx(0.125));
}

TEST_CASE("Epanechnikov sigma points") {
  const Eigen::VectorXd mu = Eigen::VectorXd::Constant(1, 0.4);
  const Eigen::MatrixXd L = Eigen::MatrixXd::Constant(1, 1, 1.5);
  const Eigen::MatrixXd pts = epanechnikov_sigma_points(mu, L);
  REQUIRE(pts.cols() == 3);
  CHECK(pts(0, 0) == 0.4);
  CHECK(pts(0, 1) == doctest::Approx(0.4 + 1.834412598914169 * 1.5).epsilon(1e-12));
  CHECK(pts(0, 2) == doctest::Approx(0.4 - 1.834412598914169 * 1.5).epsilon(1e-12));

  RngStream rng(25, 0);
  for (int n : {2, 5, 40}) {
    const Eigen::MatrixXd S = eemf::test::random_spd(n, rng);
    const Eigen::MatrixXd F = Eigen::LLT<Eigen::MatrixXd>(S).matrixL();
    const Eigen::VectorXd m = rng.normal_vector(n);
    const Eigen::MatrixXd X = epanechnikov_sigma_points(m, F);
    CHECK(X.cols() == 2 * n + 1);
    CHECK(X.col(0) == m);
    const Eigen::MatrixXd white = F.triangularView<Eigen::Lower>().solve(X.colwise() - m);
    CHECK(white.colwise().norm().maxCoeff() < std::sqrt(n + 4.0));
    // The mapped radius agrees with a bisection inverse of the radial law.
    const double p = std::erf(std::sqrt((n + UtParams{}.lambda(n)) / 2.0));
    const double eta = eemf::test::bisect_quantile(
        [&](double x) { return eemf::test::beta_a2_cdf(0.5 * n, x); }, p);
    CHECK(white.col(1).norm() == doctest::Approx(std::sqrt((n + 4.0) * eta)).epsilon(1e-9));
  }
}

TEST_CASE("EnEMF unscented weights") {
  const Eigen::MatrixXd P = Eigen::MatrixXd::Constant(1, 1, 0.2);
  const std::vector<MixtureComponent> one{{Eigen::VectorXd::Constant(1, 2.0), P, 0.0}};
  const auto meas = scalar_identity(0.1, 0.0);
  CHECK(enemf_unscented_weights(one, meas, 0.5)[0] == doctest::Approx(0.0));

  const MeasurementModel constant(
      [](const Eigen::VectorXd&) { return Eigen::VectorXd::Constant(1, 3.0); },
      [](const Eigen::VectorXd&) { return Eigen::MatrixXd::Zero(1, 1); },
      Eigen::MatrixXd::Constant(1, 1, 0.1), Eigen::VectorXd::Constant(1, 0.0));
  std::vector<MixtureComponent> many;
  for (int i = 0; i < 5; ++i) many.push_back({Eigen::VectorXd::Constant(1, i), P, 0.0});
  const auto flat = enemf_unscented_weights(many, constant, 0.5);
  for (double v : flat) CHECK(std::exp(v) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("weight rankings follow the exact expected likelihood in 1D") {
  RngStream rng(26, 0);
  const double P = 0.3, R = 0.2, y = 0.25;
  std::vector<MixtureComponent> comps;
  std::vector<double> exact;
  for (int i = 0; i < 20; ++i) {
    const double m = 3.0 * rng.normal();
    comps.push_back({Eigen::VectorXd::Constant(1, m), Eigen::MatrixXd::Constant(1, 1, P), 0.0});
    exact.push_back(exact_epanechnikov_weight(m, P, R, y));
  }
  const auto meas = scalar_identity(R, y);
  const auto g = enemf_gaussian_weights(comps, meas, 0.4);
  const auto u = enemf_unscented_weights(comps, meas, 0.5);
  CHECK(eemf::test::spearman(g, exact) == doctest::Approx(1.0));
  CHECK(eemf::test::spearman(u, exact) >= 0.95);
  CHECK(sum_of_weights(u) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("log-weight normalization") {
  std::vector<double> lw{-1000.0, -1001.0, -INFINITY};
  CHECK(normalize_log_weights(lw));
  CHECK(std::exp(lw[0]) + std::exp(lw[1]) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(lw[2] == -INFINITY);
  CHECK(lw[0] - lw[1] == doctest::Approx(1.0));

  std::vector<double> dead{-INFINITY, -INFINITY, NAN, -INFINITY};
  CHECK_FALSE(normalize_log_weights(dead));
  for (double v : dead) CHECK(v == doctest::Approx(std::log(0.25)));
}

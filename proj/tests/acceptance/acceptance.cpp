// Acceptance suite. Prints one PASS/FAIL line per criterion; `--only k`
// restricts the run to criterion k. Exit status is 0 only if every
// selected criterion passes.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "../unit/oracles.hpp"
#include "eemf/filters.hpp"
#include "eemf/harness.hpp"
#include "eemf/kernel_math.hpp"
#include "eemf/mixture_update.hpp"
#include "eemf/models.hpp"
#include "eemf/random.hpp"
#include "eemf/resampling.hpp"

using namespace eemf;
namespace fs = std::filesystem;

namespace {

// Tolerances.
constexpr double kEff1 = 0.951187;
constexpr double kEff1Tol = 1e-4;
constexpr double kEff1QuadratureTol = 1e-10;
constexpr double kEff40Lo = 0.0066;
constexpr double kEff40Hi = 0.0072;
constexpr double kBandwidthRelTol = 1e-12;
constexpr int kSamplerDraws = 100000;
constexpr double kSamplerMeanSigmas = 4.0;
constexpr double kSamplerCovRelTol = 0.05;
constexpr int kOracleSamples = 100000;
constexpr double kOracleKsTol = 0.015;
constexpr double kOracleCovRelTol = 0.03;
constexpr double kBrufRelTol = 1e-10;
constexpr double kSpearmanMin = 0.95;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 6) {
  std::ostringstream out;
  out.precision(digits);
  out << v;
  return out.str();
}

double rel_frobenius(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / b.norm();
}

// Efficiency of the unit-covariance Gaussian kernel in 1D as the ratio of
// squared-kernel integrals, each evaluated by quadrature.
double efficiency_1d_by_quadrature() {
  const double half = std::sqrt(5.0);
  const auto epan = [&](double x) { return 0.75 / half * (1.0 - x * x / 5.0); };
  const auto gauss = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2 * std::numbers::pi); };
  const double r_e = test::integrate([&](double x) { return epan(x) * epan(x); }, -half, half);
  const double r_g = 2.0 * test::integrate([&](double x) { return gauss(x) * gauss(x); }, 0.0, 40.0);
  return r_e / r_g;
}

Outcome criterion1() {
  const double e1 = gaussian_efficiency(1);
  const double e40 = gaussian_efficiency(40);
  const double quad = efficiency_1d_by_quadrature();
  const bool ok = std::abs(e1 - kEff1) <= kEff1Tol && std::abs(e1 - quad) <= kEff1QuadratureTol &&
                  e40 >= kEff40Lo && e40 <= kEff40Hi;
  return {ok, "eff(1)=" + fmt(e1, 10) + " quadrature=" + fmt(quad, 10) + " eff(40)=" + fmt(e40) +
                  " N_equiv(100)=" + fmt(100.0 / e40)};
}

Outcome criterion2() {
  double worst = 0.0;
  for (int N : {10, 100, 1000}) {
    const double h = optimal_bandwidth(kernel_constants(KernelKind::Gaussian, 1), N);
    const double expected = std::pow(4.0 / (3.0 * N), 0.2);
    worst = std::max(worst, std::abs(h - expected) / expected);
  }
  return {worst <= kBandwidthRelTol, "max relative error " + fmt(worst, 3)};
}

Outcome criterion3() {
  RngStream rng(3003, 0);
  bool ok = true;
  std::ostringstream detail;
  for (int n : {1, 2, 5}) {
    const Eigen::MatrixXd S = test::random_spd(n, rng);
    const Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>(S).matrixL();
    const Eigen::VectorXd mu = rng.normal_vector(n);
    Eigen::MatrixXd xs(n, kSamplerDraws);
    for (int k = 0; k < kSamplerDraws; ++k) xs.col(k) = sample_epanechnikov(mu, L, rng);
    const Eigen::VectorXd mean = xs.rowwise().mean();
    double worst_sigmas = 0.0;
    for (int i = 0; i < n; ++i) {
      const double se = std::sqrt(S(i, i) / kSamplerDraws);
      worst_sigmas = std::max(worst_sigmas, std::abs(mean(i) - mu(i)) / se);
    }
    const double cov_err = rel_frobenius(test::sample_cov(xs), S);
    const Eigen::MatrixXd white = L.triangularView<Eigen::Lower>().solve(xs.colwise() - mu);
    const int outside = static_cast<int>(
        (white.colwise().squaredNorm().array() > n + 4.0).count());
    ok = ok && worst_sigmas <= kSamplerMeanSigmas && cov_err <= kSamplerCovRelTol && outside == 0;
    detail << "n=" << n << " mean " << fmt(worst_sigmas, 3) << "sd cov " << fmt(cov_err, 3)
           << " outside " << outside << "; ";
  }
  return {ok, detail.str()};
}

// Exact posterior of one Epanechnikov prior mode under a linear Gaussian
// measurement, drawn by rejection from the prior.
Outcome criterion4() {
  const Eigen::Vector2d m(0.0, 0.0);
  Eigen::Matrix2d P;
  P << 1.0, 0.3, 0.3, 0.5;
  const Eigen::Matrix2d R = 0.5 * Eigen::Matrix2d::Identity();
  const Eigen::Vector2d y(1.0, -0.5);
  const auto meas = MeasurementModel::linear(Eigen::Matrix2d::Identity(), R, y);
  const Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>(P).matrixL();

  RngStream oracle_rng(4004, 0);
  Eigen::MatrixXd oracle(2, kOracleSamples);
  for (int k = 0; k < kOracleSamples;) {
    const Eigen::VectorXd x = sample_epanechnikov(m, L, oracle_rng);
    const Eigen::VectorXd r = y - x;
    if (oracle_rng.uniform() < std::exp(-0.5 * r.dot(R.ldlt().solve(r)))) oracle.col(k++) = x;
  }

  PosteriorMixture post;
  post.prior.push_back({m, P, 0.0});
  post.updated.push_back(ekf_component_update(post.prior.back(), meas));
  post.log_weights = {0.0};
  RngStream rng(4004, 1);
  const Ensemble filt = emm_resample(post, meas, kOracleSamples, rng);

  double worst_ks = 0.0;
  for (int axis = 0; axis < 2; ++axis) {
    const Eigen::RowVectorXd a = oracle.row(axis), b = filt.row(axis);
    worst_ks = std::max(worst_ks, test::ks_two_sample({a.data(), a.data() + a.size()},
                                                      {b.data(), b.data() + b.size()}));
  }
  const double cov_err = rel_frobenius(test::sample_cov(filt), test::sample_cov(oracle));
  return {worst_ks < kOracleKsTol && cov_err <= kOracleCovRelTol,
          "max per-axis KS " + fmt(worst_ks, 4) + " cov rel " + fmt(cov_err, 4)};
}

Outcome criterion5() {
  RngStream rng(5005, 0);
  const Eigen::MatrixXd P = test::random_spd(3, rng);
  Eigen::MatrixXd H(2, 3);
  H << 1.0, 0.5, -0.2, 0.0, 2.0, 1.0;
  const auto meas = MeasurementModel::linear(H, test::random_spd(2, rng),
                                             Eigen::Vector2d(0.7, -1.1));
  const MixtureComponent comp{rng.normal_vector(3), P, 0.0};
  const auto ekf = ekf_component_update(comp, meas);
  double worst = 0.0;
  for (int M : {1, 2, 5, 10}) {
    const auto bruf = bruf_component_update(comp, meas, M);
    worst = std::max(worst, (bruf.mean - ekf.mean).norm() / ekf.mean.norm());
    worst = std::max(worst, (bruf.cov - ekf.cov).norm() / ekf.cov.norm());
  }
  return {worst <= kBrufRelTol, "max relative deviation " + fmt(worst, 3)};
}

Outcome criterion6() {
  const BananaProblem problem = banana_prior(2);
  const auto meas = banana_measurement(2, 1.0);
  // Dense-grid Bayes posterior mean.
  const int cells = 2000;
  const double lo = -6.0, hi = 6.0, step = (hi - lo) / cells;
  const Eigen::Matrix2d prec = problem.prior_cov.inverse();
  double mass = 0.0;
  Eigen::Vector2d first = Eigen::Vector2d::Zero();
  for (int i = 0; i < cells; ++i) {
    for (int j = 0; j < cells; ++j) {
      const Eigen::Vector2d x(lo + (i + 0.5) * step, lo + (j + 0.5) * step);
      const Eigen::Vector2d d = x - problem.prior_mean;
      const double r = 1.0 - x.norm();
      const double w = std::exp(-0.5 * d.dot(prec * d) - 0.5 * r * r / 0.01);
      mass += w;
      first += w * x;
    }
  }
  const Eigen::Vector2d bayes = first / mass;
  const MixtureComponent comp{problem.prior_mean, problem.prior_cov, 0.0};
  const double d_ekf = (ekf_component_update(comp, meas).mean - bayes).norm();
  const double d_bruf = (bruf_component_update(comp, meas, 5).mean - bayes).norm();
  return {d_bruf < d_ekf, "grid mean (" + fmt(bayes(0)) + ", " + fmt(bayes(1)) +
                              ") distance BRUF(5) " + fmt(d_bruf, 4) + " EKF " + fmt(d_ekf, 4)};
}

Outcome criterion7() {
  RngStream rng(7007, 0);
  const double P = 0.3, R = 0.2, y = 0.25;
  const double half = std::sqrt(5.0 * P);
  std::vector<MixtureComponent> comps;
  std::vector<double> exact;
  for (int i = 0; i < 20; ++i) {
    const double m = 3.0 * rng.normal();
    comps.push_back({Eigen::VectorXd::Constant(1, m), Eigen::MatrixXd::Constant(1, 1, P), 0.0});
    exact.push_back(test::integrate([&](double x) {
      const double z2 = (x - m) * (x - m) / (5.0 * P);
      return 0.75 / half * (1.0 - z2) * std::exp(-0.5 * (y - x) * (y - x) / R);
    }, m - half, m + half));
  }
  const auto meas = MeasurementModel::linear(Eigen::MatrixXd::Identity(1, 1),
                                             Eigen::MatrixXd::Constant(1, 1, R),
                                             Eigen::VectorXd::Constant(1, y));
  const double rho_g = test::spearman(enemf_gaussian_weights(comps, meas, 0.4), exact);
  const double rho_u = test::spearman(enemf_unscented_weights(comps, meas, 0.5), exact);
  return {rho_g >= kSpearmanMin && rho_u >= kSpearmanMin,
          "Spearman EnEMF-G " + fmt(rho_g, 4) + " EnEMF-U " + fmt(rho_u, 4)};
}

// A filter with any diverged run is treated as having unbounded mean error.
double comparable_mean(const SweepResult& res, std::size_t s, std::size_t f) {
  return res.diverged[s][f] > 0 ? std::numeric_limits<double>::infinity() : res.mean_rmse[s][f];
}

std::string sweep_row(const SweepResult& res, std::size_t s) {
  std::ostringstream out;
  out << res.sweep_column << '=' << res.sweep[s] << ':';
  for (std::size_t f = 0; f < res.columns.size(); ++f) {
    out << ' ' << res.columns[f] << ' ';
    if (res.diverged[s][f] > 0) {
      out << "diverged(" << res.diverged[s][f] << ')';
    } else {
      out << fmt(res.mean_rmse[s][f], 4);
    }
  }
  return out.str();
}

Outcome criterion8() {
  ExperimentConfig cfg = ExperimentConfig::banana_defaults();
  cfg.base_seed = 8008;
  const SweepResult res = run_sweep(cfg);
  // Columns: EnEMF-G, EnEMF-U, EnGMF, EnKF.
  std::vector<int> enemf_losses;
  std::vector<int> engmf_above;
  for (std::size_t s = 0; s < res.sweep.size(); ++s) {
    const double kf = comparable_mean(res, s, 3);
    if (!(comparable_mean(res, s, 0) < kf) || !(comparable_mean(res, s, 1) < kf)) {
      enemf_losses.push_back(res.sweep[s]);
    }
    if (res.sweep[s] >= 10 && res.sweep[s] <= 25 && comparable_mean(res, s, 2) > kf) {
      engmf_above.push_back(res.sweep[s]);
    }
  }
  std::ostringstream detail;
  detail << "EnEMF not below EnKF at n = {";
  for (std::size_t i = 0; i < enemf_losses.size(); ++i) detail << (i ? "," : "") << enemf_losses[i];
  detail << "}; EnGMF above EnKF at n = {";
  for (std::size_t i = 0; i < engmf_above.size(); ++i) detail << (i ? "," : "") << engmf_above[i];
  detail << "}";
  for (std::size_t s = 0; s < res.sweep.size(); ++s) std::cerr << "  " << sweep_row(res, s) << '\n';
  return {enemf_losses.empty() && !engmf_above.empty(), detail.str()};
}

Outcome criterion9() {
  ExperimentConfig cfg = ExperimentConfig::l96_defaults();
  cfg.base_seed = 2024;
  const SweepResult res = run_sweep(cfg);
  const auto at = [&](int N) {
    for (std::size_t s = 0; s < res.sweep.size(); ++s) {
      if (res.sweep[s] == N) return s;
    }
    throw std::logic_error("missing sweep value");
  };
  const std::size_t s300 = at(300), s150 = at(150);
  const bool n300 = comparable_mean(res, s300, 0) < comparable_mean(res, s300, 3);
  const double kf150 = comparable_mean(res, s150, 3);
  const bool n150 = comparable_mean(res, s150, 0) < kf150 &&
                    comparable_mean(res, s150, 1) < kf150 &&
                    !(comparable_mean(res, s150, 2) < kf150);
  return {n300 && n150, sweep_row(res, s150) + "; " + sweep_row(res, s300)};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

Outcome criterion10(const std::string& cli) {
  if (cli.empty()) return {false, "no CLI path given (--cli <path>)"};
  const fs::path dir = fs::temp_directory_path() / "eemf_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  struct Case {
    std::string name;
    std::string args;
    bool threaded;
  };
  const std::vector<Case> cases{
      {"banana", "banana --mc 6 --dims 1:4 --seed 7 --particles 40", true},
      {"l96", "l96 --mc 3 --Ns 20 --windows 8 --discard 2 --seed 7", true},
      {"kernel-table", "kernel-table --dims 1:50 --particles 150", false},
  };
  std::ostringstream detail;
  bool ok = true;
  for (const auto& c : cases) {
    std::vector<std::string> outputs;
    for (int workers : {1, 8}) {
      for (int rep = 0; rep < 2; ++rep) {
        const fs::path out = dir / (c.name + "-w" + std::to_string(workers) + "-" +
                                    std::to_string(rep) + ".csv");
        std::string cmd = "\"" + cli + "\" " + c.args + " --out \"" + out.string() + "\"";
        if (c.threaded) cmd += " --workers " + std::to_string(workers);
        cmd += " > /dev/null 2>&1";
        if (std::system(cmd.c_str()) != 0) {
          return {false, c.name + ": command failed: " + cmd};
        }
        outputs.push_back(read_file(out));
      }
    }
    bool same = !outputs.front().empty();
    for (const auto& o : outputs) same = same && o == outputs.front();
    ok = ok && same;
    detail << c.name << (same ? " identical" : " DIFFERENT") << "; ";
  }
  fs::remove_all(dir);
  return {ok, detail.str()};
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  std::string cli;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else if (arg == "--cli" && i + 1 < argc) {
      cli = argv[++i];
    } else {
      std::cerr << "usage: eemf_acceptance [--only k] [--cli path-to-eemf]\n";
      return 2;
    }
  }
  const std::array<std::function<Outcome()>, 10> criteria{
      criterion1, criterion2, criterion3, criterion4, criterion5,
      criterion6, criterion7, criterion8, criterion9, [&] { return criterion10(cli); }};
  const std::array<const char*, 10> names{
      "kernel efficiency values",
      "Gaussian bandwidth at n=1",
      "Epanechnikov sampler moments",
      "Epanechnikov resampler vs rejection oracle",
      "BRUF linear invariance",
      "BRUF nonlinear improvement",
      "weight-scheme ranking fidelity",
      "banana sweep ordering",
      "Lorenz '96 ordering",
      "CLI determinism across worker counts"};
  bool all = true;
  for (int k = 1; k <= 10; ++k) {
    if (only != 0 && only != k) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "criterion " << k << " [" << names[k - 1] << "]: " << (o.pass ? "PASS" : "FAIL")
              << " (" << o.detail << ") " << fmt(secs, 3) << "s" << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}

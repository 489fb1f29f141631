#include "eemf/filters.hpp"

#include <cmath>
#include <stdexcept>

#include "eemf/kernel_math.hpp"
#include "eemf/mixture_update.hpp"

namespace eemf {

namespace {

void require_particles(const Ensemble& ens) {
  if (ens.cols() < 2) {
    throw std::invalid_argument("analysis needs at least two particles");
  }
}

Eigen::MatrixXd prior_covariance(const Ensemble& ens, const FilterConfig& cfg) {
  Eigen::MatrixXd cov = ensemble_covariance(ens);
  if (cfg.taper) cov = localize(cov, *cfg.taper);
  return cov;
}

double entropy(const std::vector<double>& log_weights) {
  double h = 0.0;
  for (double lw : log_weights) {
    if (std::isfinite(lw)) h -= std::exp(lw) * lw;
  }
  return h;
}

}  // namespace

FilterConfig FilterConfig::enkf(double alpha_inf) {
  FilterConfig c;
  c.kind = FilterKind::EnKF;
  c.alpha_inf = alpha_inf;
  return c;
}

FilterConfig FilterConfig::engmf(UpdateVariant variant, int M) {
  FilterConfig c;
  c.kind = FilterKind::EnGMF;
  c.variant = variant;
  c.bruf_steps = M;
  return c;
}

FilterConfig FilterConfig::enemf_g(double s_E, UpdateVariant variant, int M) {
  FilterConfig c = engmf(variant, M);
  c.kind = FilterKind::EnEMF_G;
  c.s_E = s_E;
  return c;
}

FilterConfig FilterConfig::enemf_u(double s_E, UpdateVariant variant, int M) {
  FilterConfig c = enemf_g(s_E, variant, M);
  c.kind = FilterKind::EnEMF_U;
  return c;
}

void FilterConfig::validate() const {
  if (bruf_steps < 1) throw std::invalid_argument("BRUF needs M >= 1");
  if (!(s_E > 0.0)) throw std::invalid_argument("s_E must be > 0");
  if (alpha_inf < 1.0) throw std::invalid_argument("alpha_inf must be >= 1");
}

std::string filter_name(FilterKind kind) {
  switch (kind) {
    case FilterKind::EnKF: return "EnKF";
    case FilterKind::EnGMF: return "EnGMF";
    case FilterKind::EnEMF_G: return "EnEMF-G";
    case FilterKind::EnEMF_U: return "EnEMF-U";
  }
  return "unknown";
}

AnalysisResult enkf_analyze(const Ensemble& ens, const MeasurementModel& meas,
                            const FilterConfig& cfg, RngStream& rng) {
  require_particles(ens);
  cfg.validate();
  const DiagnosticCounters before = thread_diagnostics();

  Ensemble X = inflate(ens, cfg.alpha_inf);
  const Eigen::MatrixXd P = prior_covariance(X, cfg);
  const Eigen::MatrixXd H = meas.jacobian(ensemble_mean(X));
  const Eigen::MatrixXd PHt = P * H.transpose();
  const auto llt = spd_llt(H * PHt + meas.R());
  const Eigen::MatrixXd K = llt.solve(PHt.transpose()).transpose();

  for (Eigen::Index i = 0; i < X.cols(); ++i) {
    const Eigen::VectorXd perturbed =
        meas.y() + meas.R_factor() * rng.normal_vector(meas.size());
    X.col(i) += K * (perturbed - meas(X.col(i)));
  }
  return {std::move(X), 0.0, thread_diagnostics() - before};
}

PosteriorMixture build_mixture_posterior(const Ensemble& ens,
                                         const MeasurementModel& meas,
                                         const FilterConfig& cfg) {
  require_particles(ens);
  cfg.validate();
  if (cfg.kind == FilterKind::EnKF) {
    throw std::invalid_argument("EnKF has no mixture posterior");
  }
  const int n = static_cast<int>(ens.rows());
  const int N = static_cast<int>(ens.cols());
  const KernelKind kernel = cfg.kind == FilterKind::EnGMF
                                ? KernelKind::Gaussian
                                : KernelKind::Epanechnikov;
  const double h = optimal_bandwidth(kernel_constants(kernel, n), N);
  const Eigen::MatrixXd P = h * h * prior_covariance(ens, cfg);

  PosteriorMixture post;
  post.prior.reserve(N);
  post.updated.reserve(N);
  const double uniform = -std::log(static_cast<double>(N));
  for (int i = 0; i < N; ++i) {
    post.prior.push_back({ens.col(i), P, uniform});
  }
  for (const auto& comp : post.prior) {
    post.updated.push_back(cfg.variant == UpdateVariant::BRUF
                               ? bruf_component_update(comp, meas, cfg.bruf_steps)
                               : ekf_component_update(comp, meas));
  }

  switch (cfg.kind) {
    case FilterKind::EnGMF:
      post.log_weights.reserve(N);
      for (const auto& u : post.updated) post.log_weights.push_back(u.log_weight);
      normalize_log_weights(post.log_weights);
      break;
    case FilterKind::EnEMF_G:
      post.log_weights = enemf_gaussian_weights(post.prior, meas, cfg.s_E);
      break;
    case FilterKind::EnEMF_U:
      post.log_weights = enemf_unscented_weights(post.prior, meas, cfg.s_E);
      break;
    case FilterKind::EnKF:
      break;
  }
  return post;
}

AnalysisResult engmf_analyze(const Ensemble& ens, const MeasurementModel& meas,
                             const FilterConfig& cfg, RngStream& rng) {
  const DiagnosticCounters before = thread_diagnostics();
  const PosteriorMixture post = build_mixture_posterior(ens, meas, cfg);
  Ensemble X = gmm_resample(post, ens.cols(), rng);
  return {std::move(X), entropy(post.log_weights), thread_diagnostics() - before};
}

AnalysisResult enemf_analyze(const Ensemble& ens, const MeasurementModel& meas,
                             const FilterConfig& cfg, RngStream& rng) {
  const DiagnosticCounters before = thread_diagnostics();
  const PosteriorMixture post = build_mixture_posterior(ens, meas, cfg);
  Ensemble X = emm_resample(post, meas, ens.cols(), rng);
  return {std::move(X), entropy(post.log_weights), thread_diagnostics() - before};
}

AnalysisResult analyze(const Ensemble& ens, const MeasurementModel& meas,
                       const FilterConfig& cfg, RngStream& rng) {
  switch (cfg.kind) {
    case FilterKind::EnKF: return enkf_analyze(ens, meas, cfg, rng);
    case FilterKind::EnGMF: return engmf_analyze(ens, meas, cfg, rng);
    case FilterKind::EnEMF_G:
    case FilterKind::EnEMF_U: return enemf_analyze(ens, meas, cfg, rng);
  }
  throw std::invalid_argument("unknown filter kind");
}

}  // namespace eemf

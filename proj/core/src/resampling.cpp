#include "eemf/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "eemf/diagnostics.hpp"

namespace eemf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Log of the likelihood-free radial density z^{n-1} (1 - z^2).
double log_radial_prior(double z, int n) {
  if (z >= 1.0) return kNegInf;
  const double shape = std::log1p(-z * z);
  if (n == 1) return shape;
  if (z <= 0.0) return kNegInf;
  return (n - 1) * std::log(z) + shape;
}

}  // namespace

void PosteriorMixture::validate() const {
  if (prior.size() != updated.size() || prior.size() != log_weights.size()) {
    throw std::invalid_argument("posterior mixture lists are misaligned");
  }
  if (prior.empty()) throw std::invalid_argument("posterior mixture is empty");
}

CategoricalSampler::CategoricalSampler(const std::vector<double>& log_weights) {
  if (log_weights.empty()) throw std::invalid_argument("empty pmf");
  cumulative_.resize(log_weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    acc += std::exp(log_weights[i]);
    cumulative_[i] = acc;
  }
  if (!(acc > 0.0)) throw std::invalid_argument("pmf has no mass");
  for (double& c : cumulative_) c /= acc;
  cumulative_.back() = 1.0;
}

std::size_t CategoricalSampler::operator()(RngStream& rng) const {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return std::min(static_cast<std::size_t>(it - cumulative_.begin()),
                  cumulative_.size() - 1);
}

std::size_t categorical_draw(const std::vector<double>& log_weights,
                             RngStream& rng) {
  return CategoricalSampler(log_weights)(rng);
}

Ensemble gmm_resample(const PosteriorMixture& post, Eigen::Index n_out,
                      RngStream& rng) {
  post.validate();
  const auto n = post.updated.front().mean.size();
  Ensemble out(n, n_out);
  if (n_out == 0) return out;
  const CategoricalSampler pick(post.log_weights);
  std::vector<Eigen::MatrixXd> factors(post.size());
  for (Eigen::Index k = 0; k < n_out; ++k) {
    const std::size_t j = pick(rng);
    if (factors[j].size() == 0) factors[j] = spd_factor(post.updated[j].cov);
    out.col(k) = sample_gaussian(post.updated[j].mean, factors[j], rng);
  }
  return out;
}

EpanechnikovResampler::EpanechnikovResampler(const PosteriorMixture& post,
                                             const MeasurementModel& meas,
                                             std::size_t grid)
    : post_(post), meas_(meas), grid_(grid),
      categorical_((post.validate(), post.log_weights)) {
  const std::size_t count = post.size();
  shared_prior_cov_ = std::all_of(
      post.prior.begin(), post.prior.end(),
      [&](const MixtureComponent& c) { return c.cov == post.prior.front().cov; });
  if (shared_prior_cov_) {
    prior_factors_.push_back(spd_factor(post.prior.front().cov));
  } else {
    prior_factors_.reserve(count);
    for (const auto& c : post.prior) prior_factors_.push_back(spd_factor(c.cov));
  }
  updated_factors_.resize(count);
  for (std::size_t j = 0; j < count; ++j) {
    if (std::isfinite(post.log_weights[j])) {
      updated_factors_[j] = spd_factor(post.updated[j].cov);
    }
  }
}

const Eigen::MatrixXd& EpanechnikovResampler::prior_factor(std::size_t j) const {
  return shared_prior_cov_ ? prior_factors_.front() : prior_factors_[j];
}

Eigen::VectorXd EpanechnikovResampler::draw(RngStream& rng) const {
  return draw_from_mode(categorical_(rng), rng);
}

Eigen::VectorXd EpanechnikovResampler::draw_from_mode(std::size_t j,
                                                      RngStream& rng) const {
  const auto& prior = post_.prior[j];
  const auto& updated = post_.updated[j];
  const Eigen::MatrixXd& L = prior_factor(j);
  const int n = static_cast<int>(prior.mean.size());

  Eigen::VectorXd s;
  double norm = 0.0;
  while (norm == 0.0) {
    const Eigen::VectorXd u =
        sample_gaussian(updated.mean, updated_factors_[j], rng);
    s = L.triangularView<Eigen::Lower>().solve(u - prior.mean);
    norm = s.norm();
  }
  // Ray from the prior mean to the boundary of the prior mode's support.
  const Eigen::VectorXd boundary = L * (s * (std::sqrt(n + 4.0) / norm));

  std::vector<double> log_values(grid_ + 1);
  for (std::size_t i = 0; i <= grid_; ++i) {
    const double z = static_cast<double>(i) / static_cast<double>(grid_);
    const double radial = log_radial_prior(z, n);
    log_values[i] = std::isfinite(radial)
                        ? radial + meas_.log_likelihood(prior.mean + z * boundary)
                        : kNegInf;
  }
  GridInverseCdf cdf = [&] {
    try {
      return build_inverse_cdf(log_values);
    } catch (const ZeroSupportError&) {
      ++thread_diagnostics().zero_support_radial;
      for (std::size_t i = 0; i <= grid_; ++i) {
        log_values[i] =
            log_radial_prior(static_cast<double>(i) / static_cast<double>(grid_), n);
      }
      return build_inverse_cdf(log_values);
    }
  }();
  const double kappa = cdf.invert(rng.uniform());
  return prior.mean + kappa * boundary;
}

Eigen::VectorXd emm_resample_one(const PosteriorMixture& post,
                                 const MeasurementModel& meas, RngStream& rng) {
  return EpanechnikovResampler(post, meas).draw(rng);
}

Ensemble emm_resample(const PosteriorMixture& post,
                      const MeasurementModel& meas, Eigen::Index n_out,
                      RngStream& rng) {
  post.validate();
  Ensemble out(post.prior.front().mean.size(), n_out);
  if (n_out == 0) return out;
  const EpanechnikovResampler sampler(post, meas);
  for (Eigen::Index k = 0; k < n_out; ++k) out.col(k) = sampler.draw(rng);
  return out;
}

}  // namespace eemf

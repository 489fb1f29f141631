#pragma once

#include <Eigen/Dense>
#include <vector>

#include "eemf/ensemble_stats.hpp"
#include "eemf/measurement.hpp"
#include "eemf/mixture_update.hpp"
#include "eemf/random.hpp"

namespace eemf {

/// Prior modes paired index-wise with their Gaussian-sum updates and the
/// normalized posterior log-weights.
struct PosteriorMixture {
  std::vector<MixtureComponent> prior;
  std::vector<UpdatedComponent> updated;
  std::vector<double> log_weights;

  std::size_t size() const { return log_weights.size(); }
  void validate() const;
};

/// Inverse-CDF draw over a fixed pmf given as normalized log-weights.
class CategoricalSampler {
 public:
  explicit CategoricalSampler(const std::vector<double>& log_weights);
  std::size_t operator()(RngStream& rng) const;

 private:
  std::vector<double> cumulative_;
};

std::size_t categorical_draw(const std::vector<double>& log_weights,
                             RngStream& rng);

/// Mode by weight, then a Gaussian draw from that mode's updated moments.
Ensemble gmm_resample(const PosteriorMixture& post, Eigen::Index n_out,
                      RngStream& rng);

/// Shell-projection sampler for one Epanechnikov posterior mode.
///
/// A Gaussian draw from the updated component fixes a direction relative to
/// the prior mode; the radial fraction along that direction is then drawn
/// from z^{n-1}(1 - z^2) N(y; h(x_j + z L s), R) on [0, 1) by grid inverse
/// CDF. Exact when h is linear. Falls back to the likelihood-free radial law
/// (and bumps the zero-support counter) when the likelihood vanishes along
/// the ray.
class EpanechnikovResampler {
 public:
  EpanechnikovResampler(const PosteriorMixture& post,
                        const MeasurementModel& meas,
                        std::size_t grid = kDefaultInverseCdfGrid);

  Eigen::VectorXd draw(RngStream& rng) const;

 private:
  Eigen::VectorXd draw_from_mode(std::size_t j, RngStream& rng) const;
  const Eigen::MatrixXd& prior_factor(std::size_t j) const;

  const PosteriorMixture& post_;
  const MeasurementModel& meas_;
  std::size_t grid_;
  CategoricalSampler categorical_;
  bool shared_prior_cov_ = false;
  std::vector<Eigen::MatrixXd> prior_factors_;
  std::vector<Eigen::MatrixXd> updated_factors_;
};

Eigen::VectorXd emm_resample_one(const PosteriorMixture& post,
                                 const MeasurementModel& meas, RngStream& rng);

Ensemble emm_resample(const PosteriorMixture& post,
                      const MeasurementModel& meas, Eigen::Index n_out,
                      RngStream& rng);

}  // namespace eemf

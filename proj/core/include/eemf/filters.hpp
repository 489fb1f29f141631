#pragma once

#include <optional>
#include <string>

#include "eemf/diagnostics.hpp"
#include "eemf/ensemble_stats.hpp"
#include "eemf/measurement.hpp"
#include "eemf/random.hpp"
#include "eemf/resampling.hpp"

namespace eemf {

enum class FilterKind { EnKF, EnGMF, EnEMF_G, EnEMF_U };

enum class UpdateVariant { EKF, BRUF };

struct FilterConfig {
  FilterKind kind = FilterKind::EnKF;
  UpdateVariant variant = UpdateVariant::EKF;
  int bruf_steps = 1;        // M, used when variant == BRUF
  double s_E = 1.0;          // EnEMF weight scaling
  double alpha_inf = 1.0;    // EnKF inflation
  std::optional<LocalizationTaper> taper;

  static FilterConfig enkf(double alpha_inf = 1.0);
  static FilterConfig engmf(UpdateVariant variant = UpdateVariant::EKF, int M = 1);
  static FilterConfig enemf_g(double s_E, UpdateVariant variant = UpdateVariant::EKF,
                              int M = 1);
  static FilterConfig enemf_u(double s_E, UpdateVariant variant = UpdateVariant::EKF,
                              int M = 1);

  FilterConfig& localized(LocalizationTaper t) {
    taper = std::move(t);
    return *this;
  }

  void validate() const;
};

std::string filter_name(FilterKind kind);

struct AnalysisResult {
  Ensemble posterior;
  // Shannon entropy of the posterior mixture weights (0 for the EnKF).
  double weight_entropy = 0.0;
  DiagnosticCounters diagnostics;
};

AnalysisResult enkf_analyze(const Ensemble& ens, const MeasurementModel& meas,
                            const FilterConfig& cfg, RngStream& rng);
AnalysisResult engmf_analyze(const Ensemble& ens, const MeasurementModel& meas,
                             const FilterConfig& cfg, RngStream& rng);
AnalysisResult enemf_analyze(const Ensemble& ens, const MeasurementModel& meas,
                             const FilterConfig& cfg, RngStream& rng);

/// KDE prior, per-mode update and weights of a mixture filter, before
/// resampling. Only valid for EnGMF and EnEMF kinds.
PosteriorMixture build_mixture_posterior(const Ensemble& ens,
                                         const MeasurementModel& meas,
                                         const FilterConfig& cfg);

/// Dispatches on cfg.kind.
AnalysisResult analyze(const Ensemble& ens, const MeasurementModel& meas,
                       const FilterConfig& cfg, RngStream& rng);

}  // namespace eemf

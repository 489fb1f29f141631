#include <benchmark/benchmark.h>

#include "eemf/filters.hpp"
#include "eemf/models.hpp"

namespace {

eemf::Ensemble l96_ensemble(Eigen::Index N) {
  eemf::RngStream rng(7, 0);
  return eemf::l96_truth_and_initial_ensemble(N, rng).ensemble;
}

void BM_L96Propagate(benchmark::State& state) {
  eemf::RngStream rng(1, 0);
  Eigen::VectorXd x = eemf::l96_truth_and_initial_ensemble(2, rng).truth;
  for (auto _ : state) {
    x = eemf::l96_propagate(x, eemf::l96::kWindow);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(BM_L96Propagate);

void BM_EkfComponentUpdate(benchmark::State& state) {
  const eemf::Ensemble ens = l96_ensemble(150);
  const auto meas = eemf::l96_measurement(Eigen::VectorXd::Ones(eemf::l96::kObsDim) * 8.0);
  eemf::MixtureComponent comp{ens.col(0), 0.1 * eemf::ensemble_covariance(ens), 0.0};
  for (auto _ : state) {
    auto up = eemf::ekf_component_update(comp, meas);
    benchmark::DoNotOptimize(up.mean.data());
  }
}
BENCHMARK(BM_EkfComponentUpdate);

void BM_MixturePosterior(benchmark::State& state) {
  const eemf::Ensemble ens = l96_ensemble(state.range(0));
  const auto meas = eemf::l96_measurement(Eigen::VectorXd::Ones(eemf::l96::kObsDim) * 8.0);
  const auto cfg = eemf::FilterConfig::enemf_g(0.15, eemf::UpdateVariant::BRUF, 5);
  for (auto _ : state) {
    auto post = eemf::build_mixture_posterior(ens, meas, cfg);
    benchmark::DoNotOptimize(post.log_weights.data());
  }
}
BENCHMARK(BM_MixturePosterior)->Arg(150)->Unit(benchmark::kMillisecond);

void BM_UnscentedWeights(benchmark::State& state) {
  const eemf::Ensemble ens = l96_ensemble(150);
  const auto meas = eemf::l96_measurement(Eigen::VectorXd::Ones(eemf::l96::kObsDim) * 8.0);
  const auto post = eemf::build_mixture_posterior(
      ens, meas, eemf::FilterConfig::enemf_u(2.5, eemf::UpdateVariant::BRUF, 5));
  for (auto _ : state) {
    auto w = eemf::enemf_unscented_weights(post.prior, meas, 2.5);
    benchmark::DoNotOptimize(w.data());
  }
}
BENCHMARK(BM_UnscentedWeights)->Unit(benchmark::kMillisecond);

void BM_EmmResampleDraw(benchmark::State& state) {
  const eemf::Ensemble ens = l96_ensemble(150);
  const auto meas = eemf::l96_measurement(Eigen::VectorXd::Ones(eemf::l96::kObsDim) * 8.0);
  const auto post = eemf::build_mixture_posterior(
      ens, meas, eemf::FilterConfig::enemf_g(0.15, eemf::UpdateVariant::BRUF, 5));
  const eemf::EpanechnikovResampler sampler(post, meas);
  eemf::RngStream rng(3, 0);
  for (auto _ : state) {
    auto x = sampler.draw(rng);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(BM_EmmResampleDraw)->Unit(benchmark::kMicrosecond);

void BM_AnalysisCycle(benchmark::State& state) {
  const eemf::Ensemble ens = l96_ensemble(150);
  const auto meas = eemf::l96_measurement(Eigen::VectorXd::Ones(eemf::l96::kObsDim) * 8.0);
  const auto kind = static_cast<eemf::FilterKind>(state.range(0));
  eemf::FilterConfig cfg =
      kind == eemf::FilterKind::EnKF ? eemf::FilterConfig::enkf(1.01)
      : kind == eemf::FilterKind::EnGMF
          ? eemf::FilterConfig::engmf(eemf::UpdateVariant::BRUF, 5)
          : kind == eemf::FilterKind::EnEMF_G
                ? eemf::FilterConfig::enemf_g(0.15, eemf::UpdateVariant::BRUF, 5)
                : eemf::FilterConfig::enemf_u(2.5, eemf::UpdateVariant::BRUF, 5);
  cfg.localized(eemf::gaussian_taper(eemf::l96::kDim, 4.0, eemf::TaperTopology::Ring));
  eemf::RngStream rng(5, 0);
  for (auto _ : state) {
    auto res = eemf::analyze(ens, meas, cfg, rng);
    benchmark::DoNotOptimize(res.posterior.data());
  }
  state.SetLabel(eemf::filter_name(kind));
}
BENCHMARK(BM_AnalysisCycle)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

#include "eemf/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#include "eemf/kernel_math.hpp"
#include "eemf/models.hpp"

namespace eemf {

namespace {

constexpr std::uint64_t kSharedRole = 0;

// Stream id of one random role inside one Monte-Carlo run. Role 0 is the
// scenario shared by all filters (truth, prior draw, observation noise);
// role 1 + f is filter f's internal sampling.
std::uint64_t stream_id(ExperimentKind kind, int sweep_value, int mc,
                        std::uint64_t role) {
  return (static_cast<std::uint64_t>(kind == ExperimentKind::L96) << 62) |
         (static_cast<std::uint64_t>(sweep_value) << 36) |
         (static_cast<std::uint64_t>(mc) << 8) | role;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool all_finite(const Ensemble& ens) { return ens.allFinite(); }

std::vector<FilterConfig> localized_filters(const ExperimentConfig& cfg, int n) {
  std::vector<FilterConfig> filters = cfg.filters;
  if (cfg.localization_radius > 0.0) {
    const auto taper = gaussian_taper(n, cfg.localization_radius, TaperTopology::Ring);
    for (auto& f : filters) f.taper = taper;
  }
  return filters;
}

using RunFn = std::function<std::vector<RunRecord>(int sweep_value, int mc)>;

// Runs every (sweep value, mc index) job on cfg.workers threads. Records
// land in slots fixed by job index, so the output never depends on thread
// scheduling.
std::vector<RunRecord> run_jobs(const ExperimentConfig& cfg, const RunFn& run) {
  const std::size_t jobs = cfg.sweep.size() * static_cast<std::size_t>(cfg.mc_runs);
  std::vector<std::vector<RunRecord>> slots(jobs);
  std::vector<std::exception_ptr> errors(jobs);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t job = next++; job < jobs; job = next++) {
      const int sweep_value = cfg.sweep[job / cfg.mc_runs];
      const int mc = static_cast<int>(job % cfg.mc_runs);
      try {
        slots[job] = run(sweep_value, mc);
      } catch (...) {
        errors[job] = std::current_exception();
      }
    }
  };
  const auto threads = static_cast<std::size_t>(std::max(1, cfg.workers));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < std::min(threads, jobs); ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<RunRecord> records;
  records.reserve(jobs * cfg.filters.size());
  for (auto& s : slots) {
    for (auto& r : s) records.push_back(std::move(r));
  }
  return records;
}

SweepResult aggregate(const ExperimentConfig& cfg, std::vector<RunRecord> records,
                      std::string sweep_column) {
  SweepResult out;
  out.sweep_column = std::move(sweep_column);
  out.sweep = cfg.sweep;
  for (const auto& f : cfg.filters) out.columns.push_back(filter_name(f.kind));
  const std::size_t nf = cfg.filters.size();
  out.mean_rmse.assign(cfg.sweep.size(), std::vector<double>(nf, 0.0));
  out.diverged.assign(cfg.sweep.size(), std::vector<int>(nf, 0));
  std::vector<std::vector<int>> counts(cfg.sweep.size(), std::vector<int>(nf, 0));
  // Records are ordered (sweep, mc, filter); summation follows that order.
  for (std::size_t k = 0; k < records.size(); ++k) {
    const std::size_t s = k / (nf * cfg.mc_runs);
    const std::size_t f = k % nf;
    if (records[k].diverged) {
      ++out.diverged[s][f];
    } else {
      out.mean_rmse[s][f] += records[k].rmse;
      ++counts[s][f];
    }
  }
  for (std::size_t s = 0; s < cfg.sweep.size(); ++s) {
    for (std::size_t f = 0; f < nf; ++f) {
      out.mean_rmse[s][f] = counts[s][f] > 0
                                ? out.mean_rmse[s][f] / counts[s][f]
                                : std::numeric_limits<double>::quiet_NaN();
    }
  }
  out.records = std::move(records);
  return out;
}

std::vector<RunRecord> banana_run(const ExperimentConfig& cfg, int n, int mc) {
  RngStream scenario(cfg.base_seed, stream_id(cfg.experiment, n, mc, kSharedRole));
  const BananaProblem problem = banana_prior(n, KernelKind::Gaussian);
  const Eigen::VectorXd truth = problem.sample_prior(scenario);
  const Ensemble prior = problem.sample_prior_ensemble(cfg.particles, scenario);
  const double noise = std::sqrt(BananaProblem::kNoiseVariance) * scenario.normal();
  const MeasurementModel meas = banana_measurement(n, truth.norm() + noise);

  const auto filters = localized_filters(cfg, n);
  std::vector<RunRecord> out;
  for (std::size_t f = 0; f < filters.size(); ++f) {
    RunRecord rec;
    rec.filter = filter_name(filters[f].kind);
    rec.sweep_value = n;
    rec.mc_index = mc;
    rec.seed = cfg.base_seed;
    RngStream rng(cfg.base_seed, stream_id(cfg.experiment, n, mc, 1 + f));
    const DiagnosticCounters before = thread_diagnostics();
    try {
      const AnalysisResult res = analyze(prior, meas, filters[f], rng);
      rec.rmse = spatial_rmse({ensemble_mean(res.posterior)}, {truth});
      rec.diverged = !all_finite(res.posterior) || !std::isfinite(rec.rmse);
    } catch (const FactorizationError&) {
      rec.diverged = true;
    }
    rec.diagnostics = thread_diagnostics() - before;
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<RunRecord> l96_run(const ExperimentConfig& cfg, int N, int mc) {
  RngStream scenario(cfg.base_seed, stream_id(cfg.experiment, N, mc, kSharedRole));
  const L96Start start = l96_truth_and_initial_ensemble(N, scenario);
  const MeasurementModel base = l96_measurement();

  std::vector<Eigen::VectorXd> truths(cfg.windows);
  std::vector<Eigen::VectorXd> observations(cfg.windows);
  Eigen::VectorXd x = start.truth;
  for (int k = 0; k < cfg.windows; ++k) {
    x = l96_propagate(x, cfg.dt, cfg.substep);
    truths[k] = x;
    observations[k] =
        base(x) + base.R_factor() * scenario.normal_vector(l96::kObsDim);
  }

  const auto filters = localized_filters(cfg, l96::kDim);
  std::vector<RunRecord> out;
  for (std::size_t f = 0; f < filters.size(); ++f) {
    RunRecord rec;
    rec.filter = filter_name(filters[f].kind);
    rec.sweep_value = N;
    rec.mc_index = mc;
    rec.seed = cfg.base_seed;
    RngStream rng(cfg.base_seed, stream_id(cfg.experiment, N, mc, 1 + f));
    const DiagnosticCounters before = thread_diagnostics();

    Ensemble ens = start.ensemble;
    std::vector<Eigen::VectorXd> estimates;
    std::vector<Eigen::VectorXd> kept_truths;
    try {
      for (int k = 0; k < cfg.windows && !rec.diverged; ++k) {
        for (Eigen::Index i = 0; i < ens.cols(); ++i) {
          ens.col(i) = l96_propagate(ens.col(i), cfg.dt, cfg.substep);
        }
        if (!all_finite(ens)) {
          rec.diverged = true;
          break;
        }
        ens = analyze(ens, base.with_observation(observations[k]), filters[f], rng)
                  .posterior;
        if (!all_finite(ens)) rec.diverged = true;
        if (k >= cfg.discard) {
          estimates.push_back(ensemble_mean(ens));
          kept_truths.push_back(truths[k]);
        }
      }
    } catch (const FactorizationError&) {
      rec.diverged = true;
    }
    if (!rec.diverged) {
      rec.rmse = spatial_rmse(estimates, kept_truths);
      rec.diverged = !std::isfinite(rec.rmse);
    }
    rec.diagnostics = thread_diagnostics() - before;
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::banana_defaults() {
  ExperimentConfig c;
  c.experiment = ExperimentKind::Banana;
  c.filters = {FilterConfig::enemf_g(0.4), FilterConfig::enemf_u(0.5),
               FilterConfig::engmf(), FilterConfig::enkf(1.0)};
  c.sweep = parse_int_list("1:20");
  c.mc_runs = 100;
  c.particles = 100;
  return c;
}

ExperimentConfig ExperimentConfig::l96_defaults() {
  ExperimentConfig c;
  c.experiment = ExperimentKind::L96;
  const auto bruf = UpdateVariant::BRUF;
  c.filters = {FilterConfig::enemf_g(0.15, bruf, 5), FilterConfig::enemf_u(2.5, bruf, 5),
               FilterConfig::engmf(bruf, 5), FilterConfig::enkf(1.01)};
  c.sweep = {150, 300};
  c.mc_runs = 8;
  c.windows = 440;
  c.discard = 40;
  c.localization_radius = 4.0;
  return c;
}

void ExperimentConfig::validate() const {
  if (mc_runs < 1) throw ConfigError("mc must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (sweep.empty()) throw ConfigError("sweep list is empty");
  for (int v : sweep) {
    if (v < 1) throw ConfigError("sweep entries must be positive");
  }
  if (filters.empty()) throw ConfigError("no filters configured");
  for (const auto& f : filters) {
    try {
      f.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(filter_name(f.kind) + ": " + e.what());
    }
  }
  if (experiment == ExperimentKind::Banana) {
    if (particles < 2) throw ConfigError("particles must be >= 2");
  } else {
    for (int v : sweep) {
      if (v < 2) throw ConfigError("particle counts must be >= 2");
    }
    if (windows < 1) throw ConfigError("windows must be >= 1");
    if (discard < 0 || discard >= windows) {
      throw ConfigError("discard must be in [0, windows)");
    }
    if (!(dt > 0.0) || !(substep > 0.0)) throw ConfigError("dt and substep must be > 0");
    const double steps = dt / substep;
    if (std::abs(steps - std::round(steps)) > 1e-9 * steps) {
      throw ConfigError("substep must divide dt");
    }
  }
}

double spatial_rmse(const std::vector<Eigen::VectorXd>& estimates,
                    const std::vector<Eigen::VectorXd>& truths) {
  if (estimates.size() != truths.size()) {
    throw std::invalid_argument("estimate and truth counts differ");
  }
  if (estimates.empty()) throw std::invalid_argument("RMSE of an empty set");
  double sum = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    sum += (estimates[i] - truths[i]).squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(estimates.size()));
}

SweepResult run_banana_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  auto records = run_jobs(cfg, [&](int n, int mc) { return banana_run(cfg, n, mc); });
  SweepResult res = aggregate(cfg, std::move(records), "nsT");
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

SweepResult run_l96_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  auto records = run_jobs(cfg, [&](int N, int mc) { return l96_run(cfg, N, mc); });
  SweepResult res = aggregate(cfg, std::move(records), "Ns");
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

SweepResult run_sweep(const ExperimentConfig& cfg) {
  return cfg.experiment == ExperimentKind::Banana ? run_banana_sweep(cfg)
                                                  : run_l96_sweep(cfg);
}

std::string sweep_csv(const SweepResult& result) {
  const std::string prefix = result.sweep_column == "nsT" ? "merrs" : "rmse";
  std::ostringstream out;
  out << result.sweep_column;
  for (const auto& c : result.columns) {
    std::string key = c;
    if (key == "EnEMF-G") key = "EnEMF";
    if (key == "EnEMF-U") key = "EnEMFUKF";
    out << ',' << prefix << key;
  }
  out << '\n';
  for (std::size_t s = 0; s < result.sweep.size(); ++s) {
    out << result.sweep[s];
    for (double v : result.mean_rmse[s]) out << ',' << format_number(v);
    out << '\n';
  }
  return out.str();
}

std::string sweep_summary(const ExperimentConfig& cfg, const SweepResult& result) {
  std::ostringstream out;
  out << "experiment: "
      << (cfg.experiment == ExperimentKind::Banana ? "banana" : "l96") << '\n'
      << "base_seed: " << cfg.base_seed << '\n'
      << "mc_runs: " << cfg.mc_runs << '\n'
      << "workers: " << cfg.workers << '\n'
      << "runs: " << result.records.size() << '\n';
  DiagnosticCounters total;
  std::size_t diverged = 0;
  for (const auto& r : result.records) {
    total += r.diagnostics;
    if (r.diverged) ++diverged;
  }
  out << "diverged_runs: " << diverged << '\n';
  for (std::size_t s = 0; s < result.sweep.size(); ++s) {
    for (std::size_t f = 0; f < result.columns.size(); ++f) {
      if (result.diverged[s][f] > 0) {
        out << "  " << result.sweep_column << '=' << result.sweep[s] << ' '
            << result.columns[f] << ": " << result.diverged[s][f] << " diverged\n";
      }
    }
  }
  out << "jitter_applied: " << total.jitter_applied << '\n'
      << "weight_underflow: " << total.weight_underflow << '\n'
      << "zero_support_radial: " << total.zero_support_radial << '\n'
      << "singular_jacobian: " << total.singular_jacobian << '\n'
      << "wall_seconds: " << result.wall_seconds << '\n';
  return out.str();
}

std::string kernel_table_csv(const std::vector<int>& dims, int N) {
  std::ostringstream out;
  out << "n,bandwidth_gauss,bandwidth_epan,eff_gauss\n";
  for (int n : dims) {
    out << n << ','
        << format_number(optimal_bandwidth(kernel_constants(KernelKind::Gaussian, n), N))
        << ','
        << format_number(optimal_bandwidth(kernel_constants(KernelKind::Epanechnikov, n), N))
        << ',' << format_number(gaussian_efficiency(n)) << '\n';
  }
  return out.str();
}

std::vector<int> parse_int_list(const std::string& text) {
  auto to_int = [&](const std::string& s) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(s, &used);
    } catch (const std::exception&) {
      throw ConfigError("not an integer list: '" + text + "'");
    }
    if (used != s.size() || v < 1) {
      throw ConfigError("not a positive integer list: '" + text + "'");
    }
    return v;
  };
  std::vector<std::string> parts;
  std::vector<int> out;
  if (text.find(':') != std::string::npos) {
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() < 2 || parts.size() > 3) {
      throw ConfigError("range must be a:b or a:b:step, got '" + text + "'");
    }
    const int lo = to_int(parts[0]);
    const int hi = to_int(parts[1]);
    const int step = parts.size() == 3 ? to_int(parts[2]) : 1;
    if (hi < lo) throw ConfigError("empty range '" + text + "'");
    for (int v = lo; v <= hi; v += step) out.push_back(v);
    return out;
  }
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) out.push_back(to_int(p));
  if (out.empty()) throw ConfigError("empty integer list");
  return out;
}

std::string default_output_path(const std::string& experiment) {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  localtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", &tm);
  return "results/" + experiment + "-" + stamp + ".csv";
}

void write_text_file(const std::string& path, const std::string& contents) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << contents;
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace eemf

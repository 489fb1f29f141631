#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <set>

#include "eemf/harness.hpp"

namespace eemf {

namespace {

namespace pt = boost::property_tree;

template <typename T>
T get_value(const pt::ptree& node, const std::string& where) {
  try {
    return node.get_value<T>();
  } catch (const pt::ptree_error&) {
    throw ConfigError("bad value for " + where + ": '" + node.data() + "'");
  }
}

UpdateVariant parse_variant(const std::string& text) {
  if (text == "EKF" || text == "ekf") return UpdateVariant::EKF;
  if (text == "BRUF" || text == "bruf") return UpdateVariant::BRUF;
  throw ConfigError("update must be EKF or BRUF, got '" + text + "'");
}

FilterConfig* find_filter(ExperimentConfig& cfg, FilterKind kind) {
  for (auto& f : cfg.filters) {
    if (f.kind == kind) return &f;
  }
  return nullptr;
}

void apply_experiment_section(const pt::ptree& section, ExperimentConfig& cfg) {
  for (const auto& [key, node] : section) {
    const std::string where = "experiment." + key;
    if (key == "mc") {
      cfg.mc_runs = get_value<int>(node, where);
    } else if (key == "seed") {
      cfg.base_seed = get_value<std::uint64_t>(node, where);
    } else if (key == "workers") {
      cfg.workers = get_value<int>(node, where);
    } else if (key == "sweep" || key == "dims" || key == "Ns") {
      cfg.sweep = parse_int_list(node.data());
    } else if (key == "particles") {
      cfg.particles = get_value<int>(node, where);
    } else if (key == "windows") {
      cfg.windows = get_value<int>(node, where);
    } else if (key == "discard") {
      cfg.discard = get_value<int>(node, where);
    } else if (key == "dt") {
      cfg.dt = get_value<double>(node, where);
    } else if (key == "substep") {
      cfg.substep = get_value<double>(node, where);
    } else if (key == "localization_radius") {
      cfg.localization_radius = get_value<double>(node, where);
    } else if (key == "out") {
      cfg.output_path = node.data();
    } else {
      throw ConfigError("unknown key " + where);
    }
  }
}

void apply_filter_section(const std::string& name, const pt::ptree& section,
                          FilterConfig& f) {
  for (const auto& [key, node] : section) {
    const std::string where = name + "." + key;
    const bool mixture = f.kind != FilterKind::EnKF;
    const bool epanechnikov =
        f.kind == FilterKind::EnEMF_G || f.kind == FilterKind::EnEMF_U;
    if (key == "s_E" && epanechnikov) {
      f.s_E = get_value<double>(node, where);
    } else if (key == "update" && mixture) {
      f.variant = parse_variant(node.data());
    } else if (key == "M" && mixture) {
      f.bruf_steps = get_value<int>(node, where);
    } else if (key == "alpha_inf" && !mixture) {
      f.alpha_inf = get_value<double>(node, where);
    } else {
      throw ConfigError("unknown key " + where);
    }
  }
}

}  // namespace

void apply_config_stream(std::istream& in, ExperimentConfig& cfg) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  static const std::set<std::string> kFilterSections{"EnEMF-G", "EnEMF-U", "EnGMF",
                                                     "EnKF"};
  for (const auto& [name, section] : tree) {
    if (name == "experiment") {
      apply_experiment_section(section, cfg);
    } else if (kFilterSections.contains(name)) {
      const FilterKind kind = name == "EnEMF-G"   ? FilterKind::EnEMF_G
                              : name == "EnEMF-U" ? FilterKind::EnEMF_U
                              : name == "EnGMF"   ? FilterKind::EnGMF
                                                  : FilterKind::EnKF;
      FilterConfig* f = find_filter(cfg, kind);
      if (f == nullptr) throw ConfigError("filter " + name + " is not configured");
      apply_filter_section(name, section, *f);
    } else if (section.empty()) {
      throw ConfigError("top-level key '" + name + "' outside any section");
    } else {
      throw ConfigError("unknown section [" + name + "]");
    }
  }
}

void apply_config_file(const std::string& path, ExperimentConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  apply_config_stream(in, cfg);
}

}  // namespace eemf

#include "config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "schema.hpp"

namespace rdmft::cli {

namespace {

InteractionSpec parse_interaction(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "hubbard") {
    if (!j.contains("u")) throw ConfigError("/model/interaction/u: required for kind 'hubbard'");
    return InteractionSpec::hubbard(j.at("u").get<double>());
  }
  if (kind == "density_density") {
    if (!j.contains("couplings")) {
      throw ConfigError("/model/interaction/couplings: required for kind 'density_density'");
    }
    return InteractionSpec::density_density(j.at("couplings").get<std::vector<double>>());
  }
  if (!j.contains("terms")) throw ConfigError("/model/interaction/terms: required for kind 'explicit'");
  std::vector<OperatorTerm> terms;
  for (const auto& t : j.at("terms")) {
    OperatorTerm term;
    term.coefficient = t.at("coefficient").get<double>();
    for (const auto& op : t.at("ops")) term.ops.push_back({op.at("orbital").get<int>(), op.at("create").get<bool>()});
    terms.push_back(std::move(term));
  }
  return InteractionSpec::explicit_terms(std::move(terms));
}

void check_model(const Model& model) {
  try {
    model.lattice.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("/model/lattice: ") + e.what());
  }
  if (model.particles > model.lattice.orbitals()) {
    throw ConfigError("/model/particles: exceeds the " + std::to_string(model.lattice.orbitals()) + " orbitals");
  }
}

int parse_twice(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    if (const auto slash = text.find('/'); slash != std::string::npos) {
      const int num = std::stoi(text.substr(0, slash), &used);
      if (used != slash) throw std::invalid_argument(text);
      const int den = std::stoi(text.substr(slash + 1), &used);
      if (used != text.size() - slash - 1) throw std::invalid_argument(text);
      if (den == 1) return 2 * num;
      if (den == 2) return num;
      throw std::invalid_argument(text);
    }
    const double v = std::stod(text, &used);
    if (used != text.size() || std::floor(2.0 * v) != 2.0 * v) throw std::invalid_argument(text);
    return static_cast<int>(2.0 * v);
  } catch (const std::logic_error&) {
    throw UsageError(what + " '" + text + "' is not an integer or half-integer");
  }
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, sep)) parts.push_back(part);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

}  // namespace

RunConfig parse_config(const nlohmann::json& document) {
  const auto issues = validate(run_config_schema(), document);
  if (!issues.empty()) {
    std::string message;
    for (const auto& issue : issues) {
      if (!message.empty()) message += "; ";
      message += (issue.pointer.empty() ? "/" : issue.pointer) + ": " + issue.message;
    }
    throw ConfigError(message);
  }
  RunConfig config;
  if (document.contains("model")) {
    const auto& m = document.at("model");
    const auto& lat = m.at("lattice");
    Model model;
    model.lattice.dimension = lat.at("dimension").get<int>();
    model.lattice.length = lat.at("length").get<int>();
    model.lattice.hopping = lat.value("hopping", 1.0);
    model.lattice.spinful = lat.value("spinful", true);
    model.particles = m.at("particles").get<int>();
    model.interaction = parse_interaction(m.at("interaction"));
    check_model(model);
    config.model = model;
  }
  if (document.contains("sector")) {
    const auto& s = document.at("sector");
    if (!config.model) throw ConfigError("/sector: needs a model section");
    SectorLabel label;
    label.momentum = s.at("momentum").get<std::vector<int>>();
    if (static_cast<int>(label.momentum.size()) != config.model->lattice.dimension) {
      throw ConfigError("/sector/momentum: needs one component per lattice dimension");
    }
    if (config.model->lattice.spinful) {
      label.twice_mz = s.value("twice_mz", config.model->particles % 2);
    } else {
      label.twice_mz = config.model->particles;
      if (s.contains("twice_mz") && s.at("twice_mz").get<int>() != label.twice_mz) {
        throw ConfigError("/sector/twice_mz: a spinless lattice has 2 Mz = N");
      }
    }
    if (s.contains("twice_s")) label.twice_s = s.at("twice_s").get<int>();
    if (s.contains("parity")) label.parity = s.at("parity").get<int>();
    config.sector = label;
  }
  if (document.contains("functional")) {
    const auto& f = document.at("functional");
    if (f.contains("grid")) {
      for (const auto& axis : f.at("grid")) {
        config.grid.push_back({axis.at("start").get<double>(), axis.at("stop").get<double>(),
                               axis.at("points").get<int>()});
      }
    }
    if (f.contains("facet")) config.facet = f.at("facet").get<int>();
    config.ray = f.value("ray", false);
    config.ensemble = f.value("ensemble", false);
    config.gradient = f.value("gradient", true);
  }
  if (document.contains("square")) {
    const auto& q = document.at("square");
    config.square.figure = q.value("figure", config.square.figure);
    config.square.u = q.value("u", config.square.u);
    config.square.grid_n2 = q.value("grid_n2", config.square.grid_n2);
    config.square.u_min = q.value("u_min", config.square.u_min);
    config.square.u_max = q.value("u_max", config.square.u_max);
    config.square.u_points = q.value("u_points", config.square.u_points);
  }
  if (document.contains("output")) config.output = document.at("output").get<std::string>();
  config.seed = document.value("seed", config.seed);
  config.workers = document.value("workers", config.workers);
  if (document.contains("tolerances")) {
    const auto& t = document.at("tolerances");
    config.tolerances.constraint = t.value("constraint", config.tolerances.constraint);
    config.tolerances.snap = t.value("snap", config.tolerances.snap);
    config.tolerances.margin = t.value("margin", config.tolerances.margin);
    config.tolerances.gradient_step = t.value("gradient_step", config.tolerances.gradient_step);
    config.tolerances.value = t.value("value", config.tolerances.value);
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  nlohmann::json document;
  try {
    document = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("/: " + path.string() + " is not valid JSON (" + e.what() + ")");
  }
  return parse_config(document);
}

SectorLabel parse_sector(const std::string& text, const Model& model) {
  const auto parts = split(text, ',');
  const int d = model.lattice.dimension;
  const int size = static_cast<int>(parts.size());
  if (size != d && size != d + 1) {
    throw UsageError("sector '" + text + "' needs " + std::to_string(d) + " momentum components and an optional Mz");
  }
  SectorLabel label;
  for (int i = 0; i < d; ++i) {
    try {
      std::size_t used = 0;
      label.momentum.push_back(std::stoi(parts[i], &used));
      if (used != parts[i].size()) throw std::invalid_argument(parts[i]);
    } catch (const std::logic_error&) {
      throw UsageError("sector momentum component '" + parts[i] + "' is not an integer");
    }
  }
  if (!model.lattice.spinful) {
    label.twice_mz = model.particles;
    if (size == d + 1 && parse_twice(parts[d], "Mz") != model.particles) {
      throw UsageError("a spinless lattice has Mz = N/2");
    }
  } else {
    label.twice_mz = size == d + 1 ? parse_twice(parts[d], "Mz") : model.particles % 2;
  }
  return label;
}

std::vector<GridAxis> parse_grid(const std::string& text) {
  std::vector<GridAxis> axes;
  for (const auto& part : split(text, ',')) {
    const auto fields = split(part, ':');
    if (fields.size() != 3) throw UsageError("grid axis '" + part + "' is not start:stop:points");
    try {
      GridAxis axis{std::stod(fields[0]), std::stod(fields[1]), std::stoi(fields[2])};
      if (axis.points < 1) throw UsageError("grid axis '" + part + "' needs at least one point");
      axes.push_back(axis);
    } catch (const std::logic_error&) {
      throw UsageError("grid axis '" + part + "' is not start:stop:points");
    }
  }
  return axes;
}

int parse_twice_spin(const std::string& text) {
  const int twice = parse_twice(text, "spin");
  if (twice < 0) throw UsageError("spin must be non-negative");
  return twice;
}

}  // namespace rdmft::cli

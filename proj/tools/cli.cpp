#include "cli.hpp"

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "config.hpp"
#include "rdmft/hubbard_square.hpp"
#include "rdmft/levy.hpp"
#include "rdmft/oracle.hpp"
#include "rdmft/parallel.hpp"
#include "rdmft/table.hpp"

namespace rdmft::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Flags {
  std::string config;
  std::string sector;
  std::string spin;
  std::optional<int> parity;
  std::string csv;
  bool dry_run = false;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<double> constraint_tol;
  std::optional<double> snap_tol;
  std::optional<double> margin_tol;
  std::optional<double> gradient_step;
  std::optional<double> value_tol;

  std::string grid;
  std::optional<int> facet;
  bool ray = false;
  bool ensemble = false;
  bool no_gradient = false;
  bool check = false;

  std::string vertices_csv;

  std::optional<int> figure;
  std::optional<double> u;
  std::optional<int> grid_n2;
  std::optional<double> u_min;
  std::optional<double> u_max;
  std::optional<int> u_points;
};

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  sink->set_pattern("[%l] %v");
  auto logger = std::make_shared<spdlog::logger>("rdmft", sink);
  const char* env = std::getenv("RDMFT_LOG_LEVEL");
  logger->set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
  return logger;
}

void add_common(CLI::App* cmd, Flags& f, bool with_sector) {
  cmd->add_option("--config", f.config, "JSON run configuration");
  cmd->add_option("--csv", f.csv, "write the main table as CSV to this path");
  cmd->add_flag("--dry-run", f.dry_run, "validate the configuration and exit");
  cmd->add_option("--seed", f.seed, "random seed for restarts");
  cmd->add_option("--workers", f.workers, "worker threads")->check(CLI::PositiveNumber);
  if (with_sector) {
    cmd->add_option("--sector", f.sector, "K1,...,KD[,Mz] (ground-state also accepts 'all')");
    cmd->add_option("--spin", f.spin, "restrict to total spin S (e.g. 0, 1/2, 1)");
    cmd->add_option("--parity", f.parity, "restrict to reflection parity +1 or -1")->check(CLI::IsMember({-1, 1}));
  }
}

RunConfig resolve(const Flags& f) {
  RunConfig config = f.config.empty() ? RunConfig{} : load_config(f.config);
  if (!f.csv.empty()) config.output = f.csv;
  if (f.seed) config.seed = *f.seed;
  if (f.workers) config.workers = *f.workers;
  if (f.constraint_tol) config.tolerances.constraint = *f.constraint_tol;
  if (f.snap_tol) config.tolerances.snap = *f.snap_tol;
  if (f.margin_tol) config.tolerances.margin = *f.margin_tol;
  if (f.gradient_step) config.tolerances.gradient_step = *f.gradient_step;
  if (f.value_tol) config.tolerances.value = *f.value_tol;
  if (!f.grid.empty()) config.grid = parse_grid(f.grid);
  if (f.facet) config.facet = *f.facet;
  if (f.ray) config.ray = true;
  if (f.ensemble) config.ensemble = true;
  if (f.no_gradient) config.gradient = false;
  if (f.check) config.check = true;
  if (f.figure) config.square.figure = *f.figure;
  if (f.u) config.square.u = *f.u;
  if (f.grid_n2) config.square.grid_n2 = *f.grid_n2;
  if (f.u_min) config.square.u_min = *f.u_min;
  if (f.u_max) config.square.u_max = *f.u_max;
  if (f.u_points) config.square.u_points = *f.u_points;

  if (f.sector == "all") {
    config.all_sectors = true;
    config.sector.reset();
  } else if (!f.sector.empty()) {
    if (!config.model) throw UsageError("--sector needs a model; pass --config");
    config.sector = parse_sector(f.sector, *config.model);
  }
  if (!f.spin.empty() || f.parity) {
    if (!config.sector) throw UsageError("--spin and --parity refine a single sector; pass --sector");
    if (!f.spin.empty()) config.sector->twice_s = parse_twice_spin(f.spin);
    if (f.parity) config.sector->parity = *f.parity;
  }
  if (config.tolerances.constraint <= 0.0) throw UsageError("constraint tolerance must be positive");
  if (config.tolerances.snap < 0.0 || config.tolerances.margin < 0.0 || config.tolerances.gradient_step < 0.0) {
    throw UsageError("tolerances must be non-negative");
  }
  if (config.tolerances.value <= 0.0) throw UsageError("value tolerance must be positive");
  return config;
}

const Model& require_model(const RunConfig& config) {
  if (!config.model) throw UsageError("this subcommand needs a model section; pass --config");
  return *config.model;
}

const SectorLabel& require_sector(const RunConfig& config) {
  if (!config.sector) throw UsageError("this subcommand needs a single sector; pass --sector or set /sector");
  return *config.sector;
}

SectorLabel determinant_label(SectorLabel label) {
  label.twice_s.reset();
  label.parity.reset();
  return label;
}

/// Determinant basis of the sector, or its (S, p) block when requested.
struct Workspace {
  SectorBasis basis;
  std::optional<AdaptedBasis> adapted;
  SectorLabel label;

  int size() const { return adapted ? adapted->size() : basis.size(); }
  Eigen::MatrixXd occupation() const { return adapted ? occupation_map(*adapted) : occupation_map(basis); }
  InteractionMatrix interaction(const InteractionSpec& spec) const {
    return adapted ? build_interaction_matrix(spec, *adapted) : build_interaction_matrix(spec, basis);
  }
  SectorHamiltonian hamiltonian(const InteractionSpec& spec) const {
    const auto v = interaction(spec);
    return adapted ? make_hamiltonian(*adapted, v) : make_hamiltonian(basis, v);
  }
};

Workspace make_workspace(const Model& model, const SectorLabel& label) {
  Workspace w{enumerate_sector(model.lattice, model.particles, determinant_label(label)), std::nullopt, label};
  if (w.basis.empty()) throw EmptySectorError("sector " + label.to_string() + " has no determinants");
  if (label.twice_s || label.parity) {
    w.adapted = adapt_symmetry(w.basis, label.twice_s, label.parity);
    if (w.adapted->empty()) throw EmptySectorError("sector " + label.to_string() + " has no states");
  }
  return w;
}

std::string join_orbitals(const LatticeSpec& lattice, const std::vector<int>& orbitals) {
  std::string out;
  for (int q : orbitals) {
    if (!out.empty()) out += ' ';
    out += orbital_label(lattice, q);
  }
  return out;
}

std::string vertex_string(const std::vector<int>& vertex) {
  std::string out;
  for (int v : vertex) out += static_cast<char>('0' + v);
  return out;
}

void maybe_write(const RunConfig& config, const Table& table, std::ostream& out, spdlog::logger& log) {
  if (!config.output) return;
  emit_csv(table, *config.output);
  log.info("wrote {} rows to {}", table.rows.size(), config.output->string());
  out << "csv: " << config.output->string() << "\n";
}

FunctionalOptions functional_options(const RunConfig& config) {
  FunctionalOptions options;
  options.seed = config.seed;
  options.constraint_tol = config.tolerances.constraint;
  options.snap_tol = config.tolerances.snap;
  return options;
}

// ---------------------------------------------------------------- basis

int cmd_basis(const RunConfig& config, std::ostream& out, spdlog::logger& log) {
  const Model& model = require_model(config);
  const Workspace w = make_workspace(model, require_sector(config));
  const auto& lat = model.lattice;
  out << "sector " << w.label.to_string() << "\n";
  out << "R=" << w.size() << "\n";
  Table table;
  if (!w.adapted) {
    table.header = {"sector", "index", "orbitals", "vertex"};
    const auto vertices = vertex_vectors(w.basis);
    for (int r = 0; r < w.basis.size(); ++r) {
      const std::string orbitals = join_orbitals(lat, w.basis.orbitals(r));
      out << "  " << r << ": |" << orbitals << ">\n";
      table.rows.push_back({w.label.to_string(), std::int64_t{r}, orbitals, vertex_string(vertices[r])});
    }
  } else {
    table.header = {"sector", "state", "index", "orbitals", "coefficient"};
    for (int a = 0; a < w.adapted->size(); ++a) {
      out << "  state " << a << ":";
      for (int r = 0; r < w.basis.size(); ++r) {
        const double c = w.adapted->coefficients(a, r);
        if (c == 0.0) continue;
        const std::string orbitals = join_orbitals(lat, w.basis.orbitals(r));
        out << " " << format_cell(c) << "|" << orbitals << ">";
        table.rows.push_back({w.label.to_string(), std::int64_t{a}, std::int64_t{r}, orbitals, c});
      }
      out << "\n";
    }
  }
  maybe_write(config, table, out, log);
  return kExitOk;
}

// ------------------------------------------------------------- polytope

RepresentabilityPolytope polytope_of(const Workspace& w) { return build_polytope(rational_vertices(w.occupation())); }

std::vector<std::string> chart_columns(const LatticeSpec& lat, const AffineChart& chart, const std::string& prefix) {
  std::vector<std::string> names;
  for (int q : chart.independent) names.push_back(prefix + orbital_label(lat, q));
  return names;
}

int cmd_polytope(const RunConfig& config, const std::string& vertices_csv, std::ostream& out,
                 spdlog::logger& log) {
  const Model& model = require_model(config);
  const Workspace w = make_workspace(model, require_sector(config));
  const auto& lat = model.lattice;
  const auto poly = polytope_of(w);
  const auto& chart = poly.chart;
  out << "sector " << w.label.to_string() << "\n";
  out << "d=" << chart.full_dimension << " d_ind=" << chart.dimension() << " vertices=" << poly.vertex_count()
      << " facets=" << poly.facet_count() << " simplex=" << (poly.simplex ? "yes" : "no") << "\n";
  out << "independent:";
  for (int q : chart.independent) out << " n_" << orbital_label(lat, q);
  out << "\n";
  for (int q = 0; q < chart.full_dimension; ++q) {
    if (std::find(chart.independent.begin(), chart.independent.end(), q) != chart.independent.end()) continue;
    out << "  n_" << orbital_label(lat, q) << " = " << chart.constant[q].to_string();
    for (int k = 0; k < chart.dimension(); ++k) {
      const Rational& c = chart.coefficients[q][k];
      if (c == Rational(0)) continue;
      out << " + (" << c.to_string() << ") n_" << orbital_label(lat, chart.independent[k]);
    }
    out << "\n";
  }
  Table facets;
  facets.header = {"facet", "k0"};
  for (const auto& name : chart_columns(lat, chart, "k_")) facets.header.push_back(name);
  for (const auto& f : poly.facets) {
    out << "  D" << f.label << ":";
    std::vector<Cell> row{std::int64_t{f.label}, f.constant};
    out << " " << f.constant;
    for (auto c : f.coefficients) {
      out << " " << c;
      row.push_back(c);
    }
    out << " >= 0\n";
    facets.rows.push_back(std::move(row));
  }
  maybe_write(config, facets, out, log);
  if (!vertices_csv.empty()) {
    Table vertices;
    vertices.header = {"index", "orbitals"};
    for (const auto& name : chart_columns(lat, chart, "n_")) vertices.header.push_back(name);
    for (int r = 0; r < poly.vertex_count(); ++r) {
      std::vector<Cell> row{std::int64_t{r}, w.adapted ? std::string("state") : join_orbitals(lat, w.basis.orbitals(r))};
      for (double x : poly.chart_vertex(r)) row.push_back(x);
      vertices.rows.push_back(std::move(row));
    }
    emit_csv(vertices, vertices_csv);
    out << "vertices csv: " << vertices_csv << "\n";
  }
  return kExitOk;
}

// ----------------------------------------------------------- functional

std::vector<std::vector<double>> grid_points(const std::vector<GridAxis>& axes) {
  std::vector<std::vector<double>> points{{}};
  for (const auto& axis : axes) {
    std::vector<std::vector<double>> next;
    for (const auto& p : points) {
      for (int i = 0; i < axis.points; ++i) {
        const double t = axis.points == 1 ? 0.0 : static_cast<double>(i) / (axis.points - 1);
        auto q = p;
        q.push_back(axis.start + t * (axis.stop - axis.start));
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  return points;
}

int cmd_boundary(const RunConfig& config, const ConstrainedSearchProblem& problem,
                 std::ostream& out, spdlog::logger& log) {
  const auto& poly = problem.polytope;
  const int j = *config.facet;
  if (j < 1 || j > poly.facet_count()) {
    throw UsageError("facet " + std::to_string(j) + " out of range 1.." + std::to_string(poly.facet_count()));
  }
  const auto fit = boundary_expansion(problem, j - 1, {}, functional_options(config));
  out << "facet D" << j << ": F0=" << format_cell(fit.f0) << " G=" << format_cell(fit.g)
      << " beta=" << format_cell(fit.beta) << " residual=" << format_cell(fit.residual)
      << (fit.poor_fit ? " (poor fit)" : "") << "\n";
  if (fit.poor_fit) log.warn("boundary fit on facet {} has RMS log residual {}", j, fit.residual);
  Table table{{"distance", "F"}, {}};
  for (std::size_t i = 0; i < fit.distances.size(); ++i) table.rows.push_back({fit.distances[i], fit.values[i]});
  maybe_write(config, table, out, log);
  return kExitOk;
}

int cmd_functional(const RunConfig& config, std::ostream& out, spdlog::logger& log) {
  const Model& model = require_model(config);
  const Workspace w = make_workspace(model, require_sector(config));
  const auto& lat = model.lattice;
  const auto poly = polytope_of(w);
  const auto v = w.interaction(model.interaction);
  const auto problem = make_problem(poly, v.values);
  const FunctionalOptions options = functional_options(config);
  out << "sector " << w.label.to_string() << " R=" << w.size() << " d_ind=" << poly.dimension() << "\n";

  if (config.facet) {
    if (!config.ray) throw UsageError("--facet selects a boundary study; add --ray");
    return cmd_boundary(config, problem, out, log);
  }
  if (config.ray) throw UsageError("--ray needs --facet");

  std::vector<std::vector<double>> points;
  if (config.grid.empty()) {
    points.push_back(poly.centroid());
  } else {
    if (static_cast<int>(config.grid.size()) != poly.dimension()) {
      throw UsageError("grid has " + std::to_string(config.grid.size()) + " axes, the chart has " +
                       std::to_string(poly.dimension()));
    }
    points = grid_points(config.grid);
  }
  const bool check = config.check && w.size() <= kMaxBruteForceStates;
  if (config.check && !check) log.warn("--check skipped: R={} exceeds the brute-force limit", w.size());
  const Eigen::MatrixXd occupation = w.occupation();

  struct Row {
    double f = kNaN;
    bool converged = false;
    double margin = kNaN;
    std::vector<double> gradient;
    double reference = kNaN;
  };
  std::vector<Row> rows(points.size());
  const int d = poly.dimension();
  parallel_for(static_cast<int>(points.size()), config.workers, [&](int i) {
    Row& row = rows[i];
    const auto& p = points[i];
    const auto values = poly.facet_values(p);
    row.margin = values.empty() ? 0.0 : *std::min_element(values.begin(), values.end());
    row.gradient.assign(d, kNaN);
    if (row.margin < -config.tolerances.margin) return;
    const auto eval = config.ensemble ? functional_ensemble(problem, p, options) : functional_general(problem, p, options);
    row.f = eval.value;
    row.converged = eval.converged;
    if (config.gradient) {
      try {
        row.gradient = exchange_force(problem, p, config.tolerances.gradient_step, options);
      } catch (const StepTooLargeError&) {
        // Too close to a facet for a central difference; left as NaN.
      }
    }
    if (check) {
      BruteForceOptions bf;
      bf.seed = config.seed;
      row.reference = levy_brute_force(occupation, v.values, poly.chart.expand(p), bf).value;
    }
  });

  Table table;
  table.header = chart_columns(lat, poly.chart, "n_");
  for (const char* name : {"F", "converged", "margin"}) table.header.push_back(name);
  if (config.gradient) {
    for (const auto& name : chart_columns(lat, poly.chart, "dF_")) table.header.push_back(name);
  }
  if (check) table.header.push_back("F_check");
  int outside = 0;
  int mismatches = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Row& row = rows[i];
    std::vector<Cell> cells(points[i].begin(), points[i].end());
    cells.push_back(row.f);
    cells.push_back(std::int64_t{row.converged ? 1 : 0});
    cells.push_back(row.margin);
    if (config.gradient) cells.insert(cells.end(), row.gradient.begin(), row.gradient.end());
    if (check) {
      cells.push_back(row.reference);
      if (std::isfinite(row.f) && std::abs(row.f - row.reference) > config.tolerances.value) {
        ++mismatches;
        log.warn("point {}: F={} but brute force gives {}", i, row.f, row.reference);
      }
    }
    if (std::isnan(row.f)) ++outside;
    table.rows.push_back(std::move(cells));
  }
  if (points.size() == 1 && rows[0].margin < -config.tolerances.margin) {
    throw InfeasibleError("occupations lie outside the polytope (min D = " + format_cell(rows[0].margin) + ")");
  }
  out << "points=" << points.size() << " outside=" << outside;
  if (check) out << " check_mismatches=" << mismatches;
  out << "\n";
  if (points.size() == 1 && std::isfinite(rows[0].f)) out << "F=" << format_cell(rows[0].f) << "\n";
  maybe_write(config, table, out, log);
  return kExitOk;
}

// --------------------------------------------------------- ground-state

int cmd_ground_state(const RunConfig& config, std::ostream& out, spdlog::logger& log) {
  const Model& model = require_model(config);
  const auto& lat = model.lattice;
  std::vector<SectorLabel> labels;
  if (config.sector && !config.all_sectors) {
    labels.push_back(*config.sector);
  } else {
    for (const auto& b : enumerate_all_sectors(lat, model.particles)) labels.push_back(*b.label);
  }
  struct Entry {
    int r = 0;
    double e0 = kNaN;
    std::vector<double> n;
  };
  std::vector<Entry> entries(labels.size());
  parallel_for(static_cast<int>(labels.size()), config.workers, [&](int i) {
    const Workspace w = make_workspace(model, labels[i]);
    entries[i].r = w.size();
    if (w.size() > kMaxDenseSector) return;
    const auto gs = ground_state(w.hamiltonian(model.interaction));
    entries[i].e0 = gs.energy;
    entries[i].n = gs.occupations;
  });
  Table table{{"sector", "R", "E0"}, {}};
  for (int q = 0; q < lat.orbitals(); ++q) table.header.push_back("n_" + orbital_label(lat, q));
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& e = entries[i];
    if (std::isnan(e.e0)) log.warn("sector {} skipped: R={} exceeds the dense limit", labels[i].to_string(), e.r);
    std::vector<Cell> row{labels[i].to_string(), std::int64_t{e.r}, e.e0};
    for (int q = 0; q < lat.orbitals(); ++q) row.push_back(e.n.empty() ? kNaN : e.n[q]);
    table.rows.push_back(std::move(row));
    out << labels[i].to_string() << " R=" << e.r << " E0=" << format_cell(e.e0) << "\n";
    if (e.e0 < lowest) lowest = e.e0;
  }
  // Degenerate ground sectors are all reported; none is preferred.
  out << "lowest E0=" << format_cell(lowest) << " in";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (std::abs(entries[i].e0 - lowest) <= 1e-10 * std::max(1.0, std::abs(lowest))) {
      out << " " << labels[i].to_string();
    }
  }
  out << "\n";
  maybe_write(config, table, out, log);
  return kExitOk;
}

// --------------------------------------------------------------- square

int cmd_square(const RunConfig& config, std::ostream& out, spdlog::logger& log) {
  const auto& s = config.square;
  Table table;
  if (s.figure == 1) {
    if (s.grid_n2 < 2) throw UsageError("--grid-n2 needs at least 2 points");
    if (!(s.u >= 0.0)) throw UsageError("--u must be non-negative");
    std::vector<double> n2(s.grid_n2);
    for (int i = 0; i < s.grid_n2; ++i) n2[i] = static_cast<double>(i) / (s.grid_n2 - 1);
    table = square::figure_functional(s.u, n2, config.workers);
    out << "figure 1: u=" << format_cell(s.u) << " points=" << n2.size() << "\n";
  } else if (s.figure == 2) {
    if (!(s.u_min > 0.0) || !(s.u_max >= s.u_min)) throw UsageError("need 0 < u-min <= u-max");
    if (s.u_points < 1) throw UsageError("--u-points must be positive");
    std::vector<double> u(s.u_points);
    for (int i = 0; i < s.u_points; ++i) {
      const double t = s.u_points == 1 ? 1.0 : static_cast<double>(i) / (s.u_points - 1);
      u[i] = s.u_min * std::pow(s.u_max / s.u_min, t);
    }
    table = square::figure_energy(u, config.workers);
    double worst = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (u[i] >= 20.0) worst = std::max(worst, table.number(i, "rel_err_strong"));
    }
    out << "figure 2: points=" << u.size() << " max rel_err_strong(u>=20)=" << format_cell(worst) << "\n";
  } else {
    throw UsageError("--figure must be 1 or 2");
  }
  maybe_write(config, table, out, log);
  return kExitOk;
}

void describe(const RunConfig& config, const std::string& command, std::ostream& out) {
  out << "config ok: " << command;
  if (config.model) {
    out << " D=" << config.model->lattice.dimension << " L=" << config.model->lattice.length
        << " N=" << config.model->particles << " interaction=" << config.model->interaction.kind_name();
  }
  if (config.sector) out << " sector=" << config.sector->to_string();
  if (config.all_sectors) out << " sector=all";
  out << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto log = make_logger(err);
  Flags f;
  CLI::App app{"Exact reduced-density-matrix functionals for symmetric lattice models", "rdmft"};
  app.require_subcommand(1);
  auto* basis = app.add_subcommand("basis", "list the determinants or adapted states of a sector");
  auto* polytope = app.add_subcommand("polytope", "chart, vertices and facets of the occupation polytope");
  auto* functional = app.add_subcommand("functional", "evaluate F[n] on a grid or along a boundary ray");
  auto* ground = app.add_subcommand("ground-state", "exact diagonalization per sector");
  auto* square_cmd = app.add_subcommand("square", "Hubbard-square functional and energy curves");
  for (auto* cmd : {basis, polytope, functional, ground}) add_common(cmd, f, true);
  add_common(square_cmd, f, false);
  for (auto* cmd : {functional}) {
    cmd->add_option("--grid", f.grid, "start:stop:points per chart axis, comma-separated");
    cmd->add_option("--facet", f.facet, "1-based facet for a boundary study");
    cmd->add_flag("--ray", f.ray, "sample F along the ray to the chosen facet and fit F0 + G D^beta");
    cmd->add_flag("--ensemble", f.ensemble, "use the ensemble functional");
    cmd->add_flag("--no-gradient", f.no_gradient, "skip the finite-difference gradient");
    cmd->add_flag("--check", f.check, "compare every point against the brute-force oracle");
    cmd->add_option("--constraint-tol", f.constraint_tol, "feasibility tolerance");
    cmd->add_option("--snap-tol", f.snap_tol, "facet snapping threshold");
    cmd->add_option("--margin-tol", f.margin_tol, "points with min D(n) below -tol are outside");
    cmd->add_option("--gradient-step", f.gradient_step, "central-difference step (0: 1e-5 x diameter)");
    cmd->add_option("--value-tol", f.value_tol, "allowed |F - F_check|");
  }
  polytope->add_option("--vertices-csv", f.vertices_csv, "also write the chart vertices as CSV");
  square_cmd->add_option("--figure", f.figure, "1: F(n2) curves, 2: E0(u) curves")->check(CLI::IsMember({1, 2}));
  square_cmd->add_option("--u", f.u, "coupling U/t for figure 1");
  square_cmd->add_option("--grid-n2", f.grid_n2, "number of n2 points on [0, 1]");
  square_cmd->add_option("--u-min", f.u_min, "smallest u for figure 2");
  square_cmd->add_option("--u-max", f.u_max, "largest u for figure 2");
  square_cmd->add_option("--u-points", f.u_points, "log-spaced u points for figure 2");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const RunConfig config = resolve(f);
    std::string command = app.get_subcommands().front()->get_name();
    if (f.dry_run) {
      if (command != "square" && !config.model) throw UsageError("this subcommand needs a model section");
      describe(config, command, out);
      return kExitOk;
    }
    if (command == "basis") return cmd_basis(config, out, *log);
    if (command == "polytope") return cmd_polytope(config, f.vertices_csv, out, *log);
    if (command == "functional") return cmd_functional(config, out, *log);
    if (command == "ground-state") return cmd_ground_state(config, out, *log);
    return cmd_square(config, out, *log);
  } catch (const UsageError& e) {
    log->error("{}", e.what());
    return kExitUsage;
  } catch (const DomainError& e) {
    log->error("{}", e.what());
    return kExitDomain;
  } catch (const std::exception& e) {
    log->error("{}", e.what());
    return kExitDomain;
  }
}

}  // namespace rdmft::cli

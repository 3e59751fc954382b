#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "rdmft/errors.hpp"
#include "rdmft/interaction.hpp"
#include "rdmft/sector.hpp"

namespace rdmft::cli {

/// Malformed configuration; the message starts with the JSON pointer.
class ConfigError : public UsageError {
 public:
  using UsageError::UsageError;
};

struct GridAxis {
  double start = 0.0;
  double stop = 1.0;
  int points = 1;
};

struct Tolerances {
  double constraint = 1e-10;
  double snap = 1e-10;
  double margin = 1e-12;
  /// 0 selects 1e-5 times the polytope diameter.
  double gradient_step = 0.0;
  double value = 1e-6;
};

struct Model {
  LatticeSpec lattice;
  int particles = 0;
  InteractionSpec interaction;
};

struct SquareSettings {
  int figure = 1;
  double u = 4.0;
  int grid_n2 = 101;
  double u_min = 0.01;
  double u_max = 100.0;
  int u_points = 41;
};

struct RunConfig {
  std::optional<Model> model;
  /// Momentum (and Mz for spinful lattices) plus optional S and parity.
  std::optional<SectorLabel> sector;
  bool all_sectors = false;

  std::vector<GridAxis> grid;
  std::optional<int> facet;
  bool ray = false;
  bool ensemble = false;
  bool gradient = true;
  bool check = false;

  SquareSettings square;
  std::optional<std::filesystem::path> output;
  std::uint64_t seed = 20240601;
  int workers = 1;
  Tolerances tolerances;
};

/// Validates against the compiled-in schema and converts. Throws ConfigError.
RunConfig parse_config(const nlohmann::json& document);
RunConfig load_config(const std::filesystem::path& path);

/// "K1,...,KD[,Mz]" with Mz an integer, half-integer ("0.5") or fraction
/// ("-1/2"). Spinless lattices fix 2 Mz = N. Omitted Mz means the smallest
/// |Mz| allowed by N.
SectorLabel parse_sector(const std::string& text, const Model& model);
/// "start:stop:points" per axis, comma-separated.
std::vector<GridAxis> parse_grid(const std::string& text);
/// Twice a spin given as "1", "0.5" or "3/2".
int parse_twice_spin(const std::string& text);

}  // namespace rdmft::cli

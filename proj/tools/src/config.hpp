#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dictct/dictlearn.hpp"
#include "dictct/io.hpp"
#include "dictct/recon.hpp"

namespace dictct::app {

namespace fs = std::filesystem;

enum class SolverMode { Main, Nnls, L1Ball, Art };

std::string_view to_string(SolverMode mode);
SolverMode parse_mode(std::string_view text);

struct KeySpec {
  std::string name;
  std::string default_value;
  std::string help;
};

/// Every recognised configuration key, in the order they are echoed.
const std::vector<KeySpec>& config_schema();

/// Output directory override.
inline constexpr const char* kOutputDirEnv = "DICTCT_OUTPUT_DIR";

struct ExperimentConfig {
  // paths; empty means "not given"
  fs::path training_image;
  fs::path exact_image;
  fs::path output_dir;
  fs::path dictionary;
  fs::path sinogram;
  fs::path reconstruction;

  // learning
  Index patch_rows = 8;
  Index patch_cols = 8;
  Index atoms = 200;
  Index patch_stride = 1;
  Index patch_limit = 10000;  // 0 = every window
  std::uint64_t patch_seed = 0;
  LearnConfig learn;

  // simulation
  Index projections = 20;
  double angle_start = 0.0;
  double angle_end = 180.0;
  double rel_noise = 0.01;
  std::uint64_t noise_seed = 0;
  bool export_system_matrix = false;

  // reconstruction
  SolverMode mode = SolverMode::Main;
  double mu_over_q = 0.022;
  std::optional<double> mu;  // absolute weight; overrides mu_over_q
  double delta = 0.0;
  double gamma = 0.0;
  Index art_sweeps = 10;
  double art_relax = 1.0;
  SolverConfig solver;

  // phantom
  Index phantom_rows = 128;
  Index phantom_cols = 128;
  std::uint64_t phantom_seed = 0;
  double phantom_grains = 4.0;

  // sweep grids; empty means the single configured value
  std::vector<double> sweep_lambda;
  std::vector<double> sweep_mu_over_q;
  std::vector<double> sweep_delta;
  std::vector<double> sweep_gamma;
  std::vector<Index> sweep_atoms;
  std::vector<Index> sweep_patch;
  Index threads = 1;

  /// Effective key=value view, every key in schema order.
  io::KeyValues effective;

  fs::path output(const std::string& name) const { return output_dir / name; }
  fs::path dictionary_path() const { return dictionary.empty() ? output("dictionary.dmat") : dictionary; }
  fs::path sinogram_path() const { return sinogram.empty() ? output("sinogram.dmat") : sinogram; }
  fs::path reconstruction_path() const {
    return reconstruction.empty() ? output("reconstruction.dmat") : reconstruction;
  }
};

/// Layers, lowest priority first: schema defaults, config file, the
/// DICTCT_OUTPUT_DIR environment variable, command-line overrides.
/// Unknown keys and malformed values throw ConfigError.
ExperimentConfig load_config(const std::optional<fs::path>& file, const std::map<std::string, std::string>& overrides);

/// Typed view of an already merged key=value set.
ExperimentConfig parse_config(const io::KeyValues& merged);

}  // namespace dictct::app

#pragma once

#include <iosfwd>

#include "config.hpp"
#include "dictct/projector.hpp"

namespace dictct::app {

// Each command reads its inputs, writes artifacts under output_dir and
// returns normally, or throws a dictct::Error subclass.
void cmd_phantom(const ExperimentConfig& config, std::ostream& log);
void cmd_learn(const ExperimentConfig& config, std::ostream& log);
void cmd_simulate(const ExperimentConfig& config, std::ostream& log);
void cmd_reconstruct(const ExperimentConfig& config, std::ostream& log);
void cmd_evaluate(const ExperimentConfig& config, std::ostream& log);
void cmd_sweep(const ExperimentConfig& config, std::ostream& log);

/// Process exit code for an exception escaping a command.
int exit_code_for(const std::exception& error);

inline constexpr int kExitConfig = 2;
inline constexpr int kExitGeometry = 3;
inline constexpr int kExitConvergence = 4;
inline constexpr int kExitIo = 5;
inline constexpr int kExitConsistency = 6;

/// FNV-1a over the geometry parameters; stored with sinograms.
std::string geometry_hash(const ScanGeometry& geometry);

}  // namespace dictct::app

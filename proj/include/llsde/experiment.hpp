#pragma once

// Config-driven experiment runner: parse an experiment description, run
// convergence studies or single trajectories, and write CSV artifacts.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "llsde/model.hpp"
#include "llsde/weakmc.hpp"

namespace llsde {

// One jump channel requested by the config: a named coefficient from the
// catalog ("constant" only) with its parameter and intensity.
struct JumpChannelConfig {
  std::string kind = "constant";
  double value = 0.0;  // displacement added to every state component
  double mu = 0.0;     // intensity
};

struct NamedScheme {
  std::string label;  // unique per config; defaults to the variant name
  McScheme scheme;
};

struct ExperimentConfig {
  std::string problem;
  std::vector<NamedScheme> schemes;
  McPlan plan;
  std::vector<JumpChannelConfig> jump_channels;  // empty = problem default
  std::string out_dir = ".";
  std::string raw;  // full config text, hashed into the manifest
};

// Parses the flat key/value + repeatable [scheme] section format.  Throws
// std::runtime_error with a line-numbered message on any malformed input;
// unknown keys are errors.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Builds the catalog problem named in the config, applying any [jump]
// channel overrides.
Problem resolve_problem(const ExperimentConfig& cfg);

// Runs the full convergence study and writes, atomically at the end:
// one <label>.csv per scheme (scheme,functional,h,error,stderr,n), a
// summary.csv with the fitted slopes, and manifest.json.  No partial
// outputs are left behind on error.
void run_convergence(const ExperimentConfig& cfg);

// Simulates a single sample path of the first configured scheme and writes
// trajectory.csv (t, state components, jump channel annotation).  The seed
// and step-size overrides replace the config values when present.
void run_trajectory(const ExperimentConfig& cfg,
                    std::optional<std::uint64_t> seed_override,
                    std::optional<double> h_override);

// Hex FNV-1a hash of the config text, recorded in the manifest.
std::string config_hash(const std::string& text);

// Human-readable listing of the scheme variants and their preconditions.
std::string list_schemes_text();

}  // namespace llsde

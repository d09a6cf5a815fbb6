#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "dacsim/adversary.hpp"
#include "dacsim/baseline.hpp"
#include "dacsim/engine.hpp"
#include "dacsim/graph.hpp"
#include "dacsim/masks.hpp"
#include "dacsim/signals.hpp"

namespace dacsim {

enum class AdversaryMode { None, Eavesdropper, Coalition };

struct EtaSource {
  enum class Kind { Random, Explicit };
  Kind kind = Kind::Random;
  double range = kDefaultEtaRange;
  Eigen::MatrixXd matrix;  // explicit only
};

struct AdversaryConfig {
  AdversaryMode mode = AdversaryMode::None;
  std::set<std::size_t> coalition;      // 0-based
  std::optional<std::size_t> target;    // 0-based
};

struct BaselineConfig {
  bool enabled = false;
  double coupling = 1.0;
  double splitRange = kDefaultSplitRange;
};

/// One file fully determines a run. Agent indices are 1-based in JSON and
/// 0-based here.
struct ExperimentConfig {
  TopologyDescriptor topology;
  std::vector<SinusoidSpec> signals;
  EngineConfig engine;
  std::uint64_t seed = 1;
  EtaSource eta;
  // Test fixture: masks applied as given, bypassing eta (may break zero sum).
  std::optional<std::vector<double>> maskOverride;
  AdversaryConfig adversary;
  BaselineConfig baseline;
};

ExperimentConfig parseConfig(const nlohmann::json& j);
nlohmann::json configToJson(const ExperimentConfig& cfg);
ExperimentConfig loadConfig(const std::filesystem::path& path);

/// Reads an eta file: a dense n x n JSON array, or {"eta": [[...]]}.
Eigen::MatrixXd readEtaFile(const std::filesystem::path& path);

// The 6-agent ring scenario: six sinusoids, the reference eta matrix,
// beta = 300, dt = 1e-4, t_final = 30, record_every = 10.
std::vector<SinusoidSpec> goldenSignals();
Eigen::MatrixXd goldenEtaMatrix();
ExperimentConfig goldenConfig();

/// Validated, ready-to-run objects built from a config.
struct Scenario {
  Graph graph;
  SignalBank bank;
  EtaMatrix eta;
  MaskVector masks;
};

Scenario prepareScenario(const ExperimentConfig& cfg);

/// Writes run.csv (or run_samples.json), run.json, eta.json, masks.json and,
/// when an adversary is configured, attack_<agent>.csv and attack.json.
void runScenario(const ExperimentConfig& cfg, const std::filesystem::path& outDir,
                 bool csv = true);

enum class TheoremCheck { Thm1, Thm2, Thm3, Corollary, Lemma1, Remark2 };
std::set<TheoremCheck> allTheoremChecks();
std::optional<TheoremCheck> parseTheoremCheck(const std::string& name);
std::string theoremCheckName(TheoremCheck check);

// Per-check entries carry "status": pass | fail | skipped | not_applicable,
// plus the measured quantities. "all_passed" is false if any check failed.
nlohmann::json verifyTheorems(const ExperimentConfig& cfg,
                              const std::set<TheoremCheck>& suite);

/// Conventional, masked and decomposed runs side by side. Writes
/// convergence.csv (t, conventional, masked, decomposed) and
/// convergence.json; returns the summary.
nlohmann::json compareConvergence(const ExperimentConfig& cfg,
                                  const std::filesystem::path& outDir);

inline constexpr double kThresholdForComparison = 0.5;
inline constexpr double kIntegrationTolerance = 1e-4;

}  // namespace dacsim

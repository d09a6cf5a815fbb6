#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dacsim/engine.hpp"
#include "dacsim/graph.hpp"
#include "dacsim/masks.hpp"
#include "dacsim/signals.hpp"

namespace dacsim {

// What an external eavesdropper holds: the public topology, the public gain
// and the link traffic. No eta, no masks, no reference signals.
struct EavesdropperView {
  Graph graph;
  double beta;
  Transcript transcript;
};

// Pooled knowledge of honest-but-curious agents H. Keys of incidentEtas are
// directed pairs (a, b) meaning eta_ab, restricted to edges touching H.
struct CoalitionView {
  std::set<std::size_t> coalition;
  Graph graph;
  double beta;
  Transcript transcript;
  std::map<std::size_t, SinusoidSpec> ownSignals;
  std::map<Edge, ExactSum> incidentEtas;

  static CoalitionView pool(const Graph& g, double beta, const Transcript& transcript,
                            const SignalBank& bank, const EtaMatrix& eta,
                            std::set<std::size_t> coalition);
};

// Per-agent time series aligned with the transcript samples.
struct Reconstruction {
  std::vector<double> times;
  Eigen::MatrixXd values;  // samples x agents
};

/// Exact algebraic inversion of the update rule:
///   x_m(t) = xhat(t) + beta * integral_0^t L xhat(tau) dtau,
/// integrated on the sample grid with the trapezoidal rule plus its
/// Euler-Maclaurin endpoint correction -h^2/12 (f'(t) - f'(0)), the endpoint
/// slopes taken from second-order differences of the samples.
Reconstruction eavesdropReconstruct(const EavesdropperView& view);

/// Uncorrected trapezoidal variant of the same inversion.
Reconstruction eavesdropReconstructTrapezoid(const EavesdropperView& view);

struct MaskSplit {
  ExactSum vKnownExact;
  double vKnown = 0.0;
  std::vector<Edge> unknownEdges;  // (target, legitimate neighbor)
};

/// m_target = v (from eta on edges to H) + u (edges to legitimate neighbors).
MaskSplit coalitionSplitMask(const CoalitionView& view, std::size_t target);

struct CoalitionEstimate {
  std::size_t target = 0;
  std::vector<double> times;
  std::vector<double> estimate;  // x_target(t) + u_target up to quadrature error
  MaskSplit split;
};

CoalitionEstimate coalitionInfer(const CoalitionView& view, std::size_t target);

inline constexpr double kResidualConstancyTolerance = 5e-3;

struct AttackReport {
  std::size_t target = 0;
  std::vector<double> times;
  std::vector<double> estimate;
  std::vector<double> truth;
  std::vector<double> residual;
  double fittedResidual = 0.0;  // mean over t >= steadyStart
  double wobble = 0.0;          // max |residual - fittedResidual| over the same window
  bool residualIsConstant = false;
};

/// Scores an estimate against the ground truth of the target's reference.
AttackReport assessAttack(std::size_t target, std::span<const double> times,
                          std::span<const double> estimate, const SignalBank& truth,
                          double steadyStart);

struct Theorem2Outcome {
  Transcript original;
  Transcript alternative;
  bool equal = false;
};

/// Runs (x, m) and (x + s, m - s) and compares the transcripts bit for bit.
/// The shifted masks are applied directly, without an eta realization.
Theorem2Outcome theorem2AltExecution(const Graph& g, const SignalBank& bank,
                                     const EtaMatrix& eta, std::span<const double> s,
                                     const EngineConfig& cfg);

// Same, reusing an already computed original transcript.
Theorem2Outcome theorem2AltExecution(const Graph& g, const SignalBank& bank,
                                     const EtaMatrix& eta, std::span<const double> s,
                                     const EngineConfig& cfg, const Transcript& original);

struct Theorem3Outcome {
  Transcript original;
  Transcript alternative;
  bool transcriptsEqual = false;
  bool estimatesEqual = false;
  // x'_target - x_target == r and x'_neighbor - x_neighbor == -r, exactly.
  bool referenceShiftExact = false;
  double targetMaskShift = 0.0;    // m'_target - m_target
  double neighborMaskShift = 0.0;  // m'_neighbor - m_neighbor
  double fittedResidualOriginal = 0.0;
  double fittedResidualAlternative = 0.0;
};

/// Perturbs eta_{target,neighbor} by r and shifts the references by
/// r (e_target - e_neighbor); then runs both executions and the coalition
/// attack on each.
Theorem3Outcome theorem3AltExecution(const Graph& g, const SignalBank& bank,
                                     const EtaMatrix& eta, std::size_t target,
                                     std::size_t neighbor, double r,
                                     const std::set<std::size_t>& coalition,
                                     const EngineConfig& cfg);

}  // namespace dacsim

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dacsim/graph.hpp"
#include "dacsim/masks.hpp"
#include "dacsim/signals.hpp"

namespace dacsim {

// Classical RK4 crosses the negative real axis of its stability region at
// about -2.785.
inline constexpr double kRk4StabilityLimit = 2.785;
inline constexpr double kDivergenceThreshold = 1e12;

struct EngineConfig {
  double beta = 300.0;
  double dt = 1e-4;
  double tFinal = 30.0;
  std::size_t recordEvery = 10;
  double steadyStart = 1.0;  // start of the lim-sup window
};

// Throws StabilityGuardViolated unless dt < 2.785 / (beta * lambdaMax), and
// ConfigInvalid on non-positive parameters.
void checkEngineConfig(const EngineConfig& cfg, double lambdaMax);

/// Time-sampled record of every agent's broadcast estimate.
class Transcript {
 public:
  Transcript() = default;
  Transcript(std::size_t agents, std::vector<double> times, std::vector<double> states);

  std::size_t agents() const { return agents_; }
  std::size_t samples() const { return times_.size(); }
  const std::vector<double>& times() const { return times_; }
  double time(std::size_t k) const { return times_[k]; }
  std::span<const double> state(std::size_t k) const {
    return {states_.data() + k * agents_, agents_};
  }
  std::span<const double> initialState() const { return state(0); }
  double at(std::size_t k, std::size_t i) const { return states_[k * agents_ + i]; }
  const std::vector<double>& data() const { return states_; }

  void append(double t, std::span<const double> state);

  // Same sample times and same state bits.
  bool bitwiseEqual(const Transcript& other) const;

  Transcript decimated(std::size_t factor) const;

 private:
  std::size_t agents_ = 0;
  std::vector<double> times_;
  std::vector<double> states_;  // row-major, samples x agents
};

struct WeightedNeighbor {
  std::size_t index;
  double weight;
};

// Weighted Laplacian action y_i = sum_j w_ij (x_i - x_j), summed in ascending
// neighbor order so that repeated runs are bit-reproducible.
class CouplingOperator {
 public:
  explicit CouplingOperator(std::vector<std::vector<WeightedNeighbor>> rows);
  static CouplingOperator fromGraph(const Graph& g);

  std::size_t size() const { return rows_.size(); }
  const std::vector<WeightedNeighbor>& row(std::size_t i) const { return rows_[i]; }
  void apply(std::span<const double> x, std::span<double> out) const;
  Eigen::MatrixXd laplacian() const;

 private:
  std::vector<std::vector<WeightedNeighbor>> rows_;
};

using DriveFunction = std::function<void(double t, std::span<double> out)>;

/// Fixed-step RK4 for  d/dt xhat = drive(t) - beta * L xhat  from x0.
/// Records t = 0 and every recordEvery-th step. Throws NonFiniteState if any
/// component leaves [-1e12, 1e12].
Transcript integrateConsensus(const CouplingOperator& coupling, double beta,
                              const EngineConfig& cfg, std::span<const double> x0,
                              const DriveFunction& drive);

struct RunResult {
  Transcript transcript;
  std::vector<double> trueAverage;       // (1/n) 1^T x(t) of the unmasked bank
  std::vector<double> consensusErrorL2;  // ||e(t)||_2, e_i = |xhat_i - x_a|
  double gamma = 0.0;
  double lambda2 = 0.0;
  double bound = 0.0;  // gamma / (beta lambda2)
  double beta = 0.0;
  double dt = 0.0;
};

RunResult simulateConventional(const Graph& g, const SignalBank& bank,
                               const EngineConfig& cfg);

// Same vector field as the conventional run, started from x(0) + m; errors are
// measured against the true unmasked average.
RunResult simulateMasked(const Graph& g, const MaskedBank& masked,
                         const EngineConfig& cfg);

/// max over samples of |1^T xhat(t) - 1^T x(t)| for the given input bank.
double sumPreservation(const RunResult& result, const SignalBank& bank);
double sumPreservation(const RunResult& result, const MaskedBank& masked);

/// Per-agent sup over t >= tStart of |xhat_i(t) - x_a(t)|.
Eigen::VectorXd limsupTrackingError(const RunResult& result, double tStart);

/// ||(I - 11^T/n) xhat(t)||_2 at every sample.
std::vector<double> disagreementNorms(const Transcript& transcript);

/// Exponential rate of the transient: least-squares slope of
/// log(d(t) - floor), where floor is the sup of d over t >= steadyStart,
/// fitted from where d - floor first drops below 0.3 d(0) until it falls
/// under max(3 floor, 1e-9 d(0)). Throws InsufficientTransient when fewer
/// than 5 samples remain.
double fitDecayRate(const Transcript& transcript, double steadyStart);

// Fitted rates of two masked runs that differ only in their masks. Both runs
// are recorded at every step regardless of cfg.recordEvery.
struct DecayRates {
  double rateA = 0.0;
  double rateB = 0.0;
};

DecayRates estimateDecayRate(const Graph& g, const SignalBank& bank,
                             const EngineConfig& cfg, const MaskVector& variantA,
                             const MaskVector& variantB);

struct OrderEstimate {
  double errorCoarse = 0.0;  // step dt vs. dt/4 reference
  double errorFine = 0.0;    // step dt/2 vs. dt/4 reference
  double ratio = 0.0;
  double order = 0.0;        // log2(ratio)
};

/// Empirical convergence order of the integrator by step halving, compared on
/// the samples of the dt run (recordEvery is scaled with the step).
OrderEstimate measureIntegratorOrder(const Graph& g, const MaskedBank& masked,
                                     const EngineConfig& cfg);

}  // namespace dacsim

#include "dacsim/baseline.hpp"

#include <cmath>
#include <string>

#include "dacsim/error.hpp"
#include "dacsim/masks.hpp"

namespace dacsim {

namespace {

CouplingOperator decomposedOperator(const Graph& g, double coupling) {
  const std::size_t n = g.size();
  std::vector<std::vector<WeightedNeighbor>> rows(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : g.neighbors(i)) rows[i].push_back({j, 1.0});
    rows[i].push_back({n + i, coupling});
    rows[n + i].push_back({i, coupling});
  }
  return CouplingOperator(std::move(rows));
}

double checkedCoupling(double coupling) {
  if (!(coupling > 0.0) || !std::isfinite(coupling)) {
    throw Error(ErrorKind::NonPositiveCoupling, "coupling must be positive and finite");
  }
  return coupling;
}

}  // namespace

DecomposedGraph::DecomposedGraph(const Graph& base, double coupling)
    : base_(base),
      coupling_(checkedCoupling(coupling)),
      operator_(decomposedOperator(base, coupling)),
      spectrum_(laplacianSpectrum(operator_.laplacian())) {}

DecomposedGraph buildDecomposed(const Graph& g, double coupling) {
  return DecomposedGraph(g, coupling);
}

RunResult simulateDecomposed(const DecomposedGraph& dg, const SignalBank& bank,
                             const EngineConfig& cfg, std::mt19937_64& rng,
                             double splitRange) {
  const std::size_t n = dg.base().size();
  if (bank.size() != n) {
    throw Error(ErrorKind::LengthMismatch, "signal count does not match the base graph");
  }
  if (!(splitRange >= 0.0) || !std::isfinite(splitRange)) {
    throw Error(ErrorKind::ConfigInvalid, "split range must be non-negative");
  }
  checkEngineConfig(cfg, dg.spectrum().lambdaMax);

  std::vector<double> x0(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = bank.value(i, 0.0);
    const double rho = splitRange * (2.0 * unitUniform(rng) - 1.0);
    x0[i] = xi + rho;
    x0[n + i] = xi - rho;
  }

  RunResult result;
  result.transcript = integrateConsensus(
      dg.couplingOperator(), cfg.beta, cfg, x0,
      // alpha carries twice the drive so that the substate total stays
      // 2 * sum_i x_i(t), the same invariant the initial split sets up.
      [&bank, n](double t, std::span<double> out) {
        bank.evaluateDerivativeInto(t, out.first(n));
        for (std::size_t i = 0; i < n; ++i) out[i] *= 2.0;
        for (std::size_t i = n; i < 2 * n; ++i) out[i] = 0.0;
      });
  result.beta = cfg.beta;
  result.dt = cfg.dt;
  result.lambda2 = dg.spectrum().lambda2;
  result.gamma = computeGamma(bank);
  result.bound = result.gamma / (cfg.beta * result.lambda2);

  const auto& tr = result.transcript;
  result.trueAverage.resize(tr.samples());
  result.consensusErrorL2.resize(tr.samples());
  for (std::size_t k = 0; k < tr.samples(); ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += bank.value(i, tr.time(k));
    const double avg = sum / static_cast<double>(n);
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = tr.at(k, i) - avg;
      sq += e * e;
    }
    result.trueAverage[k] = avg;
    result.consensusErrorL2[k] = std::sqrt(sq);
  }
  return result;
}

double timeToThreshold(const RunResult& result, double threshold) {
  for (std::size_t k = 0; k < result.consensusErrorL2.size(); ++k) {
    if (result.consensusErrorL2[k] < threshold) return result.transcript.time(k);
  }
  return -1.0;
}

double fitDecomposedDecayRate(const RunResult& result, std::size_t agents,
                              double steadyStart) {
  const auto& tr = result.transcript;
  Transcript alpha;
  for (std::size_t k = 0; k < tr.samples(); ++k) {
    alpha.append(tr.time(k), tr.state(k).first(agents));
  }
  return fitDecayRate(alpha, steadyStart);
}

}  // namespace dacsim

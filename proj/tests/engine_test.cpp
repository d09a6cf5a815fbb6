#include "dacsim/engine.hpp"

#include <cmath>
#include <random>

#include "dacsim/error.hpp"
#include "dacsim/experiment.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace dacsim;

namespace {

const Graph& ring6() {
  static const Graph g = buildGraph({TopologyKind::Ring, 6, {}});
  return g;
}

MaskVector goldenMasks() {
  return computeMasks(ring6(), loadEta(ring6(), goldenEtaMatrix()));
}

ErrorKind kindOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected dacsim::Error");
  return ErrorKind::Io;
}

EngineConfig shortRun(double tFinal) {
  EngineConfig cfg;
  cfg.tFinal = tFinal;
  return cfg;
}

}  // namespace

TEST_CASE("constant references follow the matrix exponential") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t n = 4 + trial;
    const auto edges = testing::randomConnectedEdges(n, rng);
    const Graph g(n, edges);
    std::vector<SinusoidSpec> specs;
    for (std::size_t i = 0; i < n; ++i) {
      specs.push_back({Waveform::Sin, 0.0, 1.0, 0.0, 2.0 * unitUniform(rng) - 1.0});
    }
    const SignalBank bank(specs);
    EngineConfig cfg;
    cfg.beta = 100.0;
    cfg.recordEvery = 25;
    const double settle = 20.0 / (cfg.beta * spectrum(g).lambda2);
    cfg.tFinal = settle + 0.01;
    cfg.steadyStart = 0.0;
    const RunResult run = simulateConventional(g, bank, cfg);

    // x(t) = V exp(-beta Lambda t) V^T x0 from an independent eigensolve.
    const Eigen::MatrixXd l = testing::explicitLaplacian(n, edges);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l);
    const Eigen::VectorXd x0 = bank.evaluate(0.0);
    const double average = x0.mean();
    double worst = 0.0;
    double settled = 0.0;
    for (std::size_t k = 0; k < run.transcript.samples(); ++k) {
      const double t = run.transcript.time(k);
      if (t >= settle) {
        for (std::size_t i = 0; i < n; ++i)
          settled = std::max(settled, std::fabs(run.transcript.at(k, i) - average));
      }
      const Eigen::VectorXd decay = (-cfg.beta * t * es.eigenvalues().array()).exp().matrix();
      const Eigen::VectorXd exact =
          es.eigenvectors() * decay.asDiagonal() * es.eigenvectors().transpose() * x0;
      for (std::size_t i = 0; i < n; ++i) {
        worst = std::max(worst, std::fabs(run.transcript.at(k, i) - exact(i)));
      }
    }
    CHECK(worst < 1e-6);
    CHECK(settled < 1e-8);
  }
}

TEST_CASE("identical references stay at consensus") {
  const SinusoidSpec s{Waveform::Cos, 2.0, 1.3, 0.4, 1.0};
  const SignalBank bank({s, s, s, s, s, s});
  const RunResult run = simulateConventional(ring6(), bank, shortRun(2.0));
  double worst = 0.0;
  for (double e : run.consensusErrorL2) worst = std::max(worst, e);
  CHECK(worst < 1e-10);
}

TEST_CASE("zero masks reproduce the conventional run bit for bit") {
  const SignalBank bank(goldenSignals());
  const EngineConfig cfg = shortRun(1.0);
  const RunResult plain = simulateConventional(ring6(), bank, cfg);
  const RunResult masked = simulateMasked(ring6(), maskBank(bank, MaskVector::zeros(6)), cfg);
  CHECK(plain.transcript.bitwiseEqual(masked.transcript));
}

TEST_CASE("masked run equals a conventional run on the masked references") {
  const SignalBank bank(goldenSignals());
  const MaskedBank masked = maskBank(bank, goldenMasks());
  const EngineConfig cfg = shortRun(1.0);
  const RunResult a = simulateMasked(ring6(), masked, cfg);
  const RunResult b = simulateConventional(ring6(), masked.effective(), cfg);
  CHECK(a.transcript.bitwiseEqual(b.transcript));
}

TEST_CASE("sum preservation") {
  const SinusoidSpec c{Waveform::Sin, 0.0, 1.0, 0.0, 0.0};
  std::vector<SinusoidSpec> constant;
  for (double v : {1.0, -2.0, 3.5, 0.25, 7.0, -4.0}) {
    SinusoidSpec s = c;
    s.offset = v;
    constant.push_back(s);
  }
  const RunResult flat = simulateConventional(ring6(), SignalBank(constant), shortRun(1.0));
  CHECK(sumPreservation(flat, SignalBank(constant)) < 1e-12);

  const SignalBank bank(goldenSignals());
  const MaskedBank masked = maskBank(bank, goldenMasks());
  const EngineConfig cfg = shortRun(30.0);
  const RunResult run = simulateMasked(ring6(), masked, cfg);
  CHECK(sumPreservation(run, masked) < 1e-6);

  // Corrupt one mask: the offset shows up as a constant sum error.
  const Eigen::VectorXd golden = goldenMasks().values();
  std::vector<double> broken(golden.data(), golden.data() + 6);
  broken[2] += 0.75;
  const MaskedBank bad = maskBank(bank, MaskVector::fromValues(broken));
  const RunResult badRun = simulateMasked(ring6(), bad, shortRun(1.0));
  CHECK(std::fabs(sumPreservation(badRun, bank) - 0.75) < 1e-9);
  CHECK(sumPreservation(badRun, bad) < 1e-9);
}

TEST_CASE("stability guard and divergence") {
  const SignalBank bank(goldenSignals());
  EngineConfig cfg;
  cfg.dt = 0.01;
  CHECK(kindOf([&] { simulateConventional(ring6(), bank, cfg); }) ==
        ErrorKind::StabilityGuardViolated);
  cfg.dt = 0.0;
  CHECK(kindOf([&] { simulateConventional(ring6(), bank, cfg); }) == ErrorKind::ConfigInvalid);
  // Just inside and just outside the limit for beta * lambdaMax = 1200.
  CHECK_NOTHROW(checkEngineConfig(EngineConfig{300.0, 2.78 / 1200.0, 1.0, 1, 0.5}, 4.0));
  CHECK_THROWS_AS(checkEngineConfig(EngineConfig{300.0, 2.79 / 1200.0, 1.0, 1, 0.5}, 4.0), Error);

  // Past the guard the scheme blows up and the engine says so.
  EngineConfig wild{300.0, 0.01, 5.0, 1, 1.0};
  const std::vector<double> x0{1.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  CHECK(kindOf([&] {
          integrateConsensus(CouplingOperator::fromGraph(ring6()), 300.0, wild, x0,
                             [](double, std::span<double> out) {
                               for (double& v : out) v = 0.0;
                             });
        }) == ErrorKind::NonFiniteState);
}

TEST_CASE("masks leave the decay rate unchanged") {
  const SignalBank bank(goldenSignals());
  const EngineConfig cfg = shortRun(3.0);
  const DecayRates rates =
      estimateDecayRate(ring6(), bank, cfg, MaskVector::zeros(6), goldenMasks());
  CHECK(std::fabs(rates.rateA - rates.rateB) / rates.rateA < 0.05);
  CHECK(rates.rateA > 250.0);
  CHECK(rates.rateA < 350.0);

  EngineConfig doubled = cfg;
  doubled.beta = 600.0;
  doubled.dt = 5e-5;
  doubled.recordEvery = 20;
  const DecayRates fast =
      estimateDecayRate(ring6(), bank, doubled, MaskVector::zeros(6), goldenMasks());
  CHECK(std::fabs(fast.rateB / rates.rateB - 2.0) < 0.2);
}

TEST_CASE("constant references decay at beta lambda2") {
  std::vector<SinusoidSpec> specs;
  for (double v : {9.0, -3.0, 4.0, 0.5, -6.0, 2.0}) specs.push_back({Waveform::Sin, 0.0, 1.0, 0.0, v});
  const SignalBank bank(specs);
  EngineConfig cfg = shortRun(0.2);
  cfg.recordEvery = 5;
  cfg.steadyStart = 0.15;
  const RunResult run = simulateConventional(ring6(), bank, cfg);
  CHECK(std::fabs(fitDecayRate(run.transcript, cfg.steadyStart) - 300.0) / 300.0 < 0.02);
}

TEST_CASE("too short a transient is reported") {
  Transcript tiny(2, {0.0, 0.1, 0.2}, {1.0, -1.0, 0.5, -0.5, 0.25, -0.25});
  CHECK(kindOf([&] { fitDecayRate(tiny, 0.15); }) == ErrorKind::InsufficientTransient);
  CHECK(kindOf([&] { fitDecayRate(tiny, 5.0); }) == ErrorKind::InsufficientTransient);
}

TEST_CASE("integrator is fourth order") {
  const MaskedBank masked = maskBank(SignalBank(goldenSignals()), goldenMasks());
  EngineConfig cfg{300.0, 1e-3, 0.5, 1, 0.1};
  const OrderEstimate est = measureIntegratorOrder(ring6(), masked, cfg);
  CHECK(est.order >= 3.6);
}

TEST_CASE("doubling beta halves the steady tracking error") {
  const SignalBank bank(goldenSignals());
  EngineConfig cfg = shortRun(15.0);
  const double e1 = limsupTrackingError(simulateConventional(ring6(), bank, cfg), 1.0).maxCoeff();
  cfg.beta = 600.0;
  cfg.dt = 5e-5;
  cfg.recordEvery = 20;
  const double e2 = limsupTrackingError(simulateConventional(ring6(), bank, cfg), 1.0).maxCoeff();
  CHECK(std::fabs(e1 / e2 - 2.0) / 2.0 < 0.15);
}

TEST_CASE("tracking error stays under the bound on random scenarios") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3 + static_cast<std::size_t>(trial % 8);
    const Graph g(n, testing::randomConnectedEdges(n, rng));
    std::vector<SinusoidSpec> specs;
    for (std::size_t i = 0; i < n; ++i) specs.push_back(testing::randomSpec(rng));
    const SignalBank bank(specs);
    const MaskVector m = computeMasks(g, drawEta(g, rng));
    EngineConfig cfg = shortRun(4.0);
    cfg.beta = 150.0 + 350.0 * unitUniform(rng);
    cfg.dt = std::min(1e-4, 2.0 / (cfg.beta * spectrum(g).lambdaMax));
    cfg.recordEvery = 20;
    cfg.steadyStart = std::min(3.0, 25.0 / (cfg.beta * spectrum(g).lambda2));
    const RunResult run = simulateMasked(g, maskBank(bank, m), cfg);
    const double worst = limsupTrackingError(run, cfg.steadyStart).maxCoeff();
    CHECK(worst <= run.bound + kIntegrationTolerance);
  }
}

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dacsim/adversary.hpp"
#include "dacsim/baseline.hpp"
#include "dacsim/engine.hpp"
#include "dacsim/experiment.hpp"
#include "dacsim/masks.hpp"

using namespace dacsim;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

const Graph& ring6() {
  static const Graph g = buildGraph({TopologyKind::Ring, 6, {}});
  return g;
}

EtaMatrix goldenEta() { return loadEta(ring6(), goldenEtaMatrix()); }
MaskVector goldenMasks() { return computeMasks(ring6(), goldenEta()); }

EngineConfig goldenEngine() { return goldenConfig().engine; }

EngineConfig fullRate(EngineConfig cfg) {
  cfg.recordEvery = 1;
  return cfg;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<double> column(const Reconstruction& r, std::size_t i) {
  std::vector<double> out(r.times.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = r.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i));
  }
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Zero-sum vector with entries in [-range, range]; the last entry closes the
// sum exactly or the draw is repeated.
std::vector<double> zeroSumShift(std::size_t n, std::mt19937_64& rng, double range) {
  for (;;) {
    std::vector<double> s(n);
    ExactSum rest;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      s[i] = range * (2.0 * unitUniform(rng) - 1.0);
      rest.add(s[i]);
    }
    s[n - 1] = -rest.value();
    if ((rest + s[n - 1]).isZero()) return s;
  }
}

Outcome masksGolden() {
  const MaskVector m = goldenMasks();
  const double expected[6] = {14.85, -8.25, -9.35, 9.80, -3.25, -3.80};
  double worst = 0.0;
  for (std::size_t i = 0; i < 6; ++i) worst = std::max(worst, std::fabs(m[i] - expected[i]));
  const bool exactZero = m.exactTotal().isZero();
  return {worst < 1e-12 && exactZero,
          fmt("max error %.3g, exact total zero: %s", worst, exactZero ? "yes" : "no")};
}

Outcome zeroSum() {
  std::mt19937_64 rng(2025);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 3 + static_cast<std::size_t>(rng() % 30);
    std::vector<Edge> edges;
    // Random spanning tree plus extra edges.
    for (std::size_t k = 1; k < n; ++k) edges.emplace_back(rng() % k, k);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (unitUniform(rng) < 0.2) edges.emplace_back(i, j);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    const Graph g(n, edges);
    const double range = std::pow(10.0, 3.0 * unitUniform(rng) - 1.0);
    worst = std::max(worst, std::fabs(computeMasks(g, drawEta(g, rng, range)).total()));
  }
  return {worst < 1e-9, fmt("max |1'm| over 1000 instances %.3g", worst)};
}

Outcome lemmaBound() {
  const MaskedBank masked = maskBank(SignalBank(goldenSignals()), goldenMasks());
  const RunResult run = simulateMasked(ring6(), masked, goldenEngine());
  const double worst = limsupTrackingError(run, 1.0).maxCoeff();
  const double allowed = 0.0514 + 5e-4;
  return {worst <= allowed,
          fmt("max_i sup|e_i| = %.5f, allowed %.4f (gamma %.4f, own bound %.5f)", worst, allowed,
              run.gamma, run.bound)};
}

Outcome rateEquality() {
  const SignalBank bank(goldenSignals());
  const EngineConfig cfg = goldenEngine();
  const DecayRates golden = estimateDecayRate(ring6(), bank, cfg, MaskVector::zeros(6), goldenMasks());
  const double rel = std::fabs(golden.rateA - golden.rateB) / golden.rateA;

  std::vector<SinusoidSpec> flat;
  for (double c : {3.0, -1.0, 4.0, -1.5, 5.0, -9.0}) flat.push_back({Waveform::Sin, 0.0, 1.0, 0.0, c});
  EngineConfig shortCfg = cfg;
  shortCfg.tFinal = 2.0;
  const DecayRates free =
      estimateDecayRate(ring6(), SignalBank(flat), shortCfg, MaskVector::zeros(6), goldenMasks());
  const double target = cfg.beta * spectrum(ring6()).lambda2;
  const double devA = std::fabs(free.rateA - target) / target;
  const double devB = std::fabs(free.rateB - target) / target;
  return {rel < 0.05 && devA < 0.10 && devB < 0.10,
          fmt("golden %.2f vs %.2f (rel %.4f); gamma-free %.2f, %.2f vs %.1f", golden.rateA,
              golden.rateB, rel, free.rateA, free.rateB, target)};
}

Outcome theorem2() {
  const SignalBank bank(goldenSignals());
  const EngineConfig cfg = goldenEngine();
  const Transcript original = simulateMasked(ring6(), maskBank(bank, goldenMasks()), cfg).transcript;
  std::mt19937_64 rng(31337);
  int equal = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = zeroSumShift(6, rng, 10.0);
    if (theorem2AltExecution(ring6(), bank, goldenEta(), s, cfg, original).equal) ++equal;
  }
  return {equal == 100, fmt("%d of 100 shifted executions bitwise identical", equal)};
}

Outcome theorem3() {
  const SignalBank bank(goldenSignals());
  EngineConfig cfg = fullRate(goldenEngine());
  const std::set<std::size_t> coalition{1};
  const Theorem3Outcome golden = theorem3AltExecution(ring6(), bank, goldenEta(), 0, 5, 5.0, coalition, cfg);
  bool ok = golden.transcriptsEqual && golden.estimatesEqual && golden.referenceShiftExact;
  std::string detail =
      fmt("instance: transcripts %s, estimates %s, shift exact %s, residual %.4f -> %.4f",
          golden.transcriptsEqual ? "equal" : "differ", golden.estimatesEqual ? "equal" : "differ",
          golden.referenceShiftExact ? "yes" : "no", golden.fittedResidualOriginal,
          golden.fittedResidualAlternative);

  cfg.tFinal = 3.0;
  std::mt19937_64 rng(4242);
  int good = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t target;
    do {
      target = rng() % 6;
    } while (coalition.contains(target));
    std::vector<std::size_t> legit;
    for (std::size_t j : ring6().neighbors(target))
      if (!coalition.contains(j)) legit.push_back(j);
    const std::size_t neighbor = legit[rng() % legit.size()];
    const double r = 20.0 * unitUniform(rng) - 10.0;
    const auto out = theorem3AltExecution(ring6(), bank, goldenEta(), target, neighbor, r, coalition, cfg);
    if (out.transcriptsEqual && out.estimatesEqual && out.referenceShiftExact) ++good;
  }
  ok = ok && good == 50;
  detail += fmt("; random tuples %d of 50", good);
  return {ok, detail};
}

Outcome eavesdropper() {
  const SignalBank bank(goldenSignals());
  const MaskVector m = goldenMasks();
  const EngineConfig cfg = fullRate(goldenEngine());
  const RunResult run = simulateMasked(ring6(), maskBank(bank, m), cfg);
  const Reconstruction rec = eavesdropReconstruct({ring6(), cfg.beta, run.transcript});
  double worstOffset = 0.0;
  double worstWobble = 0.0;
  for (std::size_t i = 0; i < 6; ++i) {
    const AttackReport rep = assessAttack(i, rec.times, column(rec, i), bank, cfg.steadyStart);
    worstOffset = std::max(worstOffset, std::fabs(rep.fittedResidual - m[i]));
    worstWobble = std::max(worstWobble, rep.wobble);
  }

  const RunResult plain = simulateConventional(ring6(), bank, cfg);
  const Reconstruction open = eavesdropReconstruct({ring6(), cfg.beta, plain.transcript});
  double worstPlain = 0.0;
  for (Eigen::Index k = 0; k < open.values.rows(); ++k)
    for (std::size_t i = 0; i < 6; ++i)
      worstPlain = std::max(worstPlain, std::fabs(open.values(k, static_cast<Eigen::Index>(i)) -
                                                  bank.value(i, open.times[static_cast<std::size_t>(k)])));
  return {worstOffset < 1e-3 && worstWobble < 5e-3 && worstPlain < 1e-3,
          fmt("masked: |residual - m| %.2e, wobble %.2e; unmasked recovery error %.2e",
              worstOffset, worstWobble, worstPlain)};
}

Outcome insider() {
  const SignalBank bank(goldenSignals());
  const EngineConfig cfg = fullRate(goldenEngine());
  const RunResult run = simulateMasked(ring6(), maskBank(bank, goldenMasks()), cfg);

  const auto single = CoalitionView::pool(ring6(), cfg.beta, run.transcript, bank, goldenEta(), {1});
  const auto est = coalitionInfer(single, 0);
  const AttackReport rep = assessAttack(0, est.times, est.estimate, bank, cfg.steadyStart);

  const auto both = CoalitionView::pool(ring6(), cfg.beta, run.transcript, bank, goldenEta(), {1, 5});
  const auto full = coalitionInfer(both, 0);
  double worst = 0.0;
  for (std::size_t k = 0; k < full.times.size(); ++k)
    worst = std::max(worst, std::fabs(full.estimate[k] - bank.value(0, full.times[k])));
  return {std::fabs(rep.fittedResidual - 8.30) < 1e-3 && full.split.unknownEdges.empty() && worst < 2e-3,
          fmt("H={2}: residual %.5f; H={2,6}: recovery error %.2e", rep.fittedResidual, worst)};
}

Outcome baselineOrdering() {
  const double ringBase = spectrum(ring6()).lambda2;
  const double ringDec = buildDecomposed(ring6()).spectrum().lambda2;
  const Graph path = buildGraph({TopologyKind::Path, 6, {}});
  const double pathBase = spectrum(path).lambda2;
  const double pathDec = buildDecomposed(path).spectrum().lambda2;

  const SignalBank bank(goldenSignals());
  const EngineConfig cfg = goldenEngine();
  const RunResult masked = simulateMasked(ring6(), maskBank(bank, goldenMasks()), cfg);
  std::mt19937_64 rng(goldenConfig().seed + 1);
  const RunResult dec = simulateDecomposed(buildDecomposed(ring6()), bank, cfg, rng);
  const double tm = timeToThreshold(masked, kThresholdForComparison);
  const double td = timeToThreshold(dec, kThresholdForComparison);
  return {ringDec < ringBase && pathDec < pathBase && tm >= 0.0 && td > tm,
          fmt("lambda2 ring %.4f < %.4f, path %.4f < %.4f; time to 0.5: masked %.4f, decomposed %.4f",
              ringDec, ringBase, pathDec, pathBase, tm, td)};
}

Outcome hygiene() {
  const MaskedBank masked = maskBank(SignalBank(goldenSignals()), goldenMasks());
  EngineConfig orderCfg = goldenEngine();
  orderCfg.dt = 1e-3;
  orderCfg.tFinal = 2.0;
  orderCfg.recordEvery = 1;
  const OrderEstimate order = measureIntegratorOrder(ring6(), masked, orderCfg);

  // Reconstruction error of the unmasked eavesdropper at sample step h and h/2.
  const SignalBank bank(goldenSignals());
  auto reconstructionError = [&](double dt, bool corrected) {
    EngineConfig cfg = goldenEngine();
    cfg.dt = dt;
    cfg.tFinal = 2.0;
    cfg.recordEvery = 1;
    const RunResult run = simulateConventional(ring6(), bank, cfg);
    const EavesdropperView view{ring6(), cfg.beta, run.transcript};
    const Reconstruction rec =
        corrected ? eavesdropReconstruct(view) : eavesdropReconstructTrapezoid(view);
    double worst = 0.0;
    for (Eigen::Index k = 0; k < rec.values.rows(); ++k)
      for (std::size_t i = 0; i < 6; ++i)
        worst = std::max(worst, std::fabs(rec.values(k, static_cast<Eigen::Index>(i)) -
                                          bank.value(i, rec.times[static_cast<std::size_t>(k)])));
    return worst;
  };
  const double coarse = reconstructionError(1e-4, true);
  const double fine = reconstructionError(5e-5, true);
  const double factor = coarse / fine;
  const double plainFactor = reconstructionError(1e-4, false) / reconstructionError(5e-5, false);

  const fs::path root = fs::temp_directory_path() / "dacsim_acceptance";
  fs::remove_all(root);
  ExperimentConfig cfg = goldenConfig();
  runScenario(cfg, root / "a");
  runScenario(cfg, root / "b");
  bool identical = true;
  int files = 0;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    ++files;
    const fs::path other = root / "b" / entry.path().filename();
    identical = identical && fs::exists(other) && slurp(entry.path()) == slurp(other);
  }
  fs::remove_all(root);
  return {order.order >= 3.6 && factor >= 3.5 && identical && files > 0,
          fmt("RK4 order %.3f; reconstruction error %.2e -> %.2e (factor %.1f, uncorrected "
              "trapezoid %.1f); %d artifacts %s",
              order.order, coarse, fine, factor, plainFactor, files,
              identical ? "byte-identical" : "DIFFER")};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budgetSeconds;  // <= 0: no runtime bound
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "mask golden values", 1e-3, masksGolden},
      {2, "zero-sum masks on random instances", 1.0, zeroSum},
      {3, "tracking error bound on the golden run", 5.0, lemmaBound},
      {4, "decay rate unchanged by masking", 10.0, rateEquality},
      {5, "zero-sum shift indistinguishability", 60.0, theorem2},
      {6, "edge perturbation indistinguishability", 60.0, theorem3},
      {7, "eavesdropper recovers x + m only", 5.0, eavesdropper},
      {8, "insider coalition residual and full-neighborhood recovery", 5.0, insider},
      {9, "decomposition baseline is slower", 10.0, baselineOrdering},
      {10, "numerics hygiene", 0.0, hygiene},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out{false, ""};
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool inTime = c.budgetSeconds <= 0.0 || seconds < c.budgetSeconds;
    const bool pass = out.pass && inTime;
    if (!pass) ++failures;
    std::printf("%s criterion %2d (%s): %s [%.3f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                out.detail.c_str(), seconds, inTime ? "" : ", over budget");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}

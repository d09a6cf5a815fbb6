#include "dacsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "dacsim/error.hpp"

namespace dacsim {

void checkEngineConfig(const EngineConfig& cfg, double lambdaMax) {
  if (!(cfg.beta > 0.0) || !std::isfinite(cfg.beta)) {
    throw Error(ErrorKind::ConfigInvalid, "beta must be positive");
  }
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) {
    throw Error(ErrorKind::ConfigInvalid, "dt must be positive");
  }
  if (!(cfg.tFinal >= cfg.dt) || !std::isfinite(cfg.tFinal)) {
    throw Error(ErrorKind::ConfigInvalid, "t_final must be at least dt");
  }
  if (cfg.recordEvery < 1) {
    throw Error(ErrorKind::ConfigInvalid, "record_every must be at least 1");
  }
  const double limit = kRk4StabilityLimit / (cfg.beta * lambdaMax);
  if (!(cfg.dt < limit)) {
    throw Error(ErrorKind::StabilityGuardViolated,
                "dt = " + std::to_string(cfg.dt) + " violates dt < 2.785/(beta*lambdaMax) = " +
                    std::to_string(limit));
  }
}

Transcript::Transcript(std::size_t agents, std::vector<double> times,
                       std::vector<double> states)
    : agents_(agents), times_(std::move(times)), states_(std::move(states)) {
  if (states_.size() != agents_ * times_.size()) {
    throw Error(ErrorKind::LengthMismatch, "transcript states do not match sample count");
  }
}

void Transcript::append(double t, std::span<const double> state) {
  if (agents_ == 0) agents_ = state.size();
  if (state.size() != agents_) {
    throw Error(ErrorKind::LengthMismatch, "transcript state width mismatch");
  }
  times_.push_back(t);
  states_.insert(states_.end(), state.begin(), state.end());
}

bool Transcript::bitwiseEqual(const Transcript& other) const {
  if (agents_ != other.agents_ || times_.size() != other.times_.size()) return false;
  return std::memcmp(times_.data(), other.times_.data(), times_.size() * sizeof(double)) == 0 &&
         std::memcmp(states_.data(), other.states_.data(),
                     states_.size() * sizeof(double)) == 0;
}

Transcript Transcript::decimated(std::size_t factor) const {
  if (factor < 1) throw Error(ErrorKind::ConfigInvalid, "decimation factor must be >= 1");
  Transcript out;
  out.agents_ = agents_;
  for (std::size_t k = 0; k < samples(); k += factor) out.append(time(k), state(k));
  return out;
}

CouplingOperator::CouplingOperator(std::vector<std::vector<WeightedNeighbor>> rows)
    : rows_(std::move(rows)) {
  for (auto& row : rows_) {
    std::sort(row.begin(), row.end(),
              [](const WeightedNeighbor& a, const WeightedNeighbor& b) {
                return a.index < b.index;
              });
  }
}

CouplingOperator CouplingOperator::fromGraph(const Graph& g) {
  std::vector<std::vector<WeightedNeighbor>> rows(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j : g.neighbors(i)) rows[i].push_back({j, 1.0});
  }
  return CouplingOperator(std::move(rows));
}

void CouplingOperator::apply(std::span<const double> x, std::span<double> out) const {
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    double acc = 0.0;
    for (const auto& nb : rows_[i]) acc += nb.weight * (x[i] - x[nb.index]);
    out[i] = acc;
  }
}

Eigen::MatrixXd CouplingOperator::laplacian() const {
  const auto n = static_cast<Eigen::Index>(rows_.size());
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    for (const auto& nb : rows_[i]) {
      l(i, i) += nb.weight;
      l(i, nb.index) -= nb.weight;
    }
  }
  return l;
}

Transcript integrateConsensus(const CouplingOperator& coupling, double beta,
                              const EngineConfig& cfg, std::span<const double> x0,
                              const DriveFunction& drive) {
  const std::size_t n = coupling.size();
  if (x0.size() != n) throw Error(ErrorKind::LengthMismatch, "initial state width mismatch");
  const auto steps = static_cast<std::size_t>(std::llround(cfg.tFinal / cfg.dt));
  const double dt = cfg.dt;
  const double half = dt / 2.0;

  std::vector<double> x(x0.begin(), x0.end());
  std::vector<double> stage(n), lap(n), d(n);
  std::vector<double> k1(n), k2(n), k3(n), k4(n);

  auto field = [&](double t, std::span<const double> state, std::vector<double>& out) {
    drive(t, d);
    coupling.apply(state, lap);
    for (std::size_t i = 0; i < n; ++i) out[i] = d[i] - beta * lap[i];
  };

  Transcript transcript;
  transcript.append(0.0, x);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    field(t, x, k1);
    for (std::size_t i = 0; i < n; ++i) stage[i] = x[i] + half * k1[i];
    field(t + half, stage, k2);
    for (std::size_t i = 0; i < n; ++i) stage[i] = x[i] + half * k2[i];
    field(t + half, stage, k3);
    for (std::size_t i = 0; i < n; ++i) stage[i] = x[i] + dt * k3[i];
    field(t + dt, stage, k4);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      if (!(std::fabs(x[i]) <= kDivergenceThreshold)) {
        throw Error(ErrorKind::NonFiniteState,
                    "state of node " + std::to_string(i + 1) + " diverged at t = " +
                        std::to_string(t + dt));
      }
    }
    if ((k + 1) % cfg.recordEvery == 0) {
      transcript.append(static_cast<double>(k + 1) * dt, x);
    }
  }
  return transcript;
}

namespace {

void fillMetrics(RunResult& result, const SignalBank& truth) {
  const auto& tr = result.transcript;
  const std::size_t n = truth.size();
  result.trueAverage.resize(tr.samples());
  result.consensusErrorL2.resize(tr.samples());
  for (std::size_t k = 0; k < tr.samples(); ++k) {
    const double t = tr.time(k);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += truth.value(i, t);
    const double avg = sum / static_cast<double>(n);
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = tr.at(k, i) - avg;
      sq += e * e;
    }
    result.trueAverage[k] = avg;
    result.consensusErrorL2[k] = std::sqrt(sq);
  }
}

RunResult runDac(const Graph& g, const SignalBank& drivingBank, const SignalBank& truthBank,
                 const EngineConfig& cfg) {
  if (drivingBank.size() != g.size()) {
    throw Error(ErrorKind::LengthMismatch,
                "signal count " + std::to_string(drivingBank.size()) + " != agent count " +
                    std::to_string(g.size()));
  }
  const Spectrum spec = spectrum(g);
  checkEngineConfig(cfg, spec.lambdaMax);

  const Eigen::VectorXd x0 = drivingBank.evaluate(0.0);
  RunResult result;
  result.transcript = integrateConsensus(
      CouplingOperator::fromGraph(g), cfg.beta, cfg,
      std::span<const double>(x0.data(), g.size()),
      [&drivingBank](double t, std::span<double> out) {
        drivingBank.evaluateDerivativeInto(t, out);
      });
  result.beta = cfg.beta;
  result.dt = cfg.dt;
  result.lambda2 = spec.lambda2;
  result.gamma = computeGamma(truthBank);
  result.bound = result.gamma / (cfg.beta * spec.lambda2);
  fillMetrics(result, truthBank);
  return result;
}

}  // namespace

RunResult simulateConventional(const Graph& g, const SignalBank& bank,
                               const EngineConfig& cfg) {
  return runDac(g, bank, bank, cfg);
}

RunResult simulateMasked(const Graph& g, const MaskedBank& masked, const EngineConfig& cfg) {
  return runDac(g, masked.effective(), masked.base(), cfg);
}

double sumPreservation(const RunResult& result, const SignalBank& bank) {
  const auto& tr = result.transcript;
  double worst = 0.0;
  for (std::size_t k = 0; k < tr.samples(); ++k) {
    double estimateSum = 0.0;
    double inputSum = 0.0;
    for (std::size_t i = 0; i < tr.agents(); ++i) {
      estimateSum += tr.at(k, i);
      inputSum += bank.value(i, tr.time(k));
    }
    worst = std::max(worst, std::fabs(estimateSum - inputSum));
  }
  return worst;
}

double sumPreservation(const RunResult& result, const MaskedBank& masked) {
  return sumPreservation(result, masked.effective());
}

Eigen::VectorXd limsupTrackingError(const RunResult& result, double tStart) {
  const auto& tr = result.transcript;
  Eigen::VectorXd worst = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(tr.agents()));
  for (std::size_t k = 0; k < tr.samples(); ++k) {
    if (tr.time(k) < tStart) continue;
    for (std::size_t i = 0; i < tr.agents(); ++i) {
      worst(i) = std::max(worst(i), std::fabs(tr.at(k, i) - result.trueAverage[k]));
    }
  }
  return worst;
}

std::vector<double> disagreementNorms(const Transcript& transcript) {
  std::vector<double> out(transcript.samples());
  const std::size_t n = transcript.agents();
  for (std::size_t k = 0; k < transcript.samples(); ++k) {
    const auto x = transcript.state(k);
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double sq = 0.0;
    for (double v : x) sq += (v - mean) * (v - mean);
    out[k] = std::sqrt(sq);
  }
  return out;
}

double fitDecayRate(const Transcript& transcript, double steadyStart) {
  const auto d = disagreementNorms(transcript);
  const auto& t = transcript.times();
  double floor = 0.0;
  bool haveSteady = false;
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (t[k] >= steadyStart) {
      floor = std::max(floor, d[k]);
      haveSteady = true;
    }
  }
  if (!haveSteady) {
    throw Error(ErrorKind::InsufficientTransient,
                "no samples after the steady-state start; extend t_final");
  }
  const double upper = 0.3 * d.front();
  const double lower = std::max(3.0 * floor, 1e-9 * d.front());
  std::size_t first = d.size();
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (d[k] - floor <= upper) {
      first = k;
      break;
    }
  }
  std::size_t last = first;
  while (last < d.size() && d[last] - floor >= lower) ++last;
  if (first >= d.size() || last - first < 5) {
    throw Error(ErrorKind::InsufficientTransient,
                "transient reaches the oscillation floor within fewer than 5 samples");
  }
  // Ordinary least squares on (t, log y).
  const double count = static_cast<double>(last - first);
  double st = 0.0, sy = 0.0;
  for (std::size_t k = first; k < last; ++k) {
    st += t[k];
    sy += std::log(d[k] - floor);
  }
  const double tm = st / count;
  const double ym = sy / count;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = first; k < last; ++k) {
    const double dx = t[k] - tm;
    sxy += dx * (std::log(d[k] - floor) - ym);
    sxx += dx * dx;
  }
  return -sxy / sxx;
}

DecayRates estimateDecayRate(const Graph& g, const SignalBank& bank,
                             const EngineConfig& cfg, const MaskVector& variantA,
                             const MaskVector& variantB) {
  // The transient lasts a few hundred steps; fit on every step.
  EngineConfig every = cfg;
  every.recordEvery = 1;
  const RunResult a = simulateMasked(g, maskBank(bank, variantA), every);
  const RunResult b = simulateMasked(g, maskBank(bank, variantB), every);
  return {fitDecayRate(a.transcript, cfg.steadyStart),
          fitDecayRate(b.transcript, cfg.steadyStart)};
}

OrderEstimate measureIntegratorOrder(const Graph& g, const MaskedBank& masked,
                                     const EngineConfig& cfg) {
  EngineConfig coarse = cfg;
  EngineConfig fine = cfg;
  fine.dt = cfg.dt / 2.0;
  fine.recordEvery = cfg.recordEvery * 2;
  EngineConfig reference = cfg;
  reference.dt = cfg.dt / 4.0;
  reference.recordEvery = cfg.recordEvery * 4;

  const auto a = simulateMasked(g, masked, coarse).transcript;
  const auto b = simulateMasked(g, masked, fine).transcript;
  const auto r = simulateMasked(g, masked, reference).transcript;
  const std::size_t samples = std::min({a.samples(), b.samples(), r.samples()});
  OrderEstimate est;
  for (std::size_t k = 0; k < samples; ++k) {
    for (std::size_t i = 0; i < a.agents(); ++i) {
      est.errorCoarse = std::max(est.errorCoarse, std::fabs(a.at(k, i) - r.at(k, i)));
      est.errorFine = std::max(est.errorFine, std::fabs(b.at(k, i) - r.at(k, i)));
    }
  }
  est.ratio = est.errorCoarse / est.errorFine;
  est.order = std::log2(est.ratio);
  return est;
}

}  // namespace dacsim

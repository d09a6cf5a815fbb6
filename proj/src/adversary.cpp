#include "dacsim/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "dacsim/error.hpp"

namespace dacsim {

namespace {

double uniformStep(const Transcript& tr) {
  if (tr.samples() < 2) {
    throw Error(ErrorKind::NonUniformSampling, "transcript needs at least two samples");
  }
  const double h = tr.time(1) - tr.time(0);
  if (!(h > 0.0)) throw Error(ErrorKind::NonUniformSampling, "sample times not increasing");
  for (std::size_t k = 1; k < tr.samples(); ++k) {
    const double step = tr.time(k) - tr.time(k - 1);
    if (std::fabs(step - h) > 1e-6 * h) {
      throw Error(ErrorKind::NonUniformSampling,
                  "sample spacing changes at index " + std::to_string(k));
    }
  }
  return h;
}

// beta * L xhat at every sample, samples x agents.
Eigen::MatrixXd couplingSeries(const EavesdropperView& view) {
  const auto& tr = view.transcript;
  const CouplingOperator coupling = CouplingOperator::fromGraph(view.graph);
  Eigen::MatrixXd f(tr.samples(), tr.agents());
  std::vector<double> row(tr.agents());
  for (std::size_t k = 0; k < tr.samples(); ++k) {
    coupling.apply(tr.state(k), row);
    for (std::size_t i = 0; i < tr.agents(); ++i) f(k, i) = view.beta * row[i];
  }
  return f;
}

Reconstruction invert(const EavesdropperView& view, bool endpointCorrection) {
  const auto& tr = view.transcript;
  if (tr.agents() != view.graph.size()) {
    throw Error(ErrorKind::LengthMismatch, "transcript width does not match the graph");
  }
  const double h = uniformStep(tr);
  const Eigen::MatrixXd f = couplingSeries(view);
  const auto samples = static_cast<Eigen::Index>(tr.samples());
  const auto n = static_cast<Eigen::Index>(tr.agents());

  Eigen::MatrixXd integral = Eigen::MatrixXd::Zero(samples, n);
  for (Eigen::Index k = 1; k < samples; ++k) {
    integral.row(k) = integral.row(k - 1) + 0.5 * h * (f.row(k - 1) + f.row(k));
  }

  if (endpointCorrection && samples >= 3) {
    Eigen::MatrixXd slope(samples, n);
    slope.row(0) = (-3.0 * f.row(0) + 4.0 * f.row(1) - f.row(2)) / (2.0 * h);
    for (Eigen::Index k = 1; k + 1 < samples; ++k) {
      slope.row(k) = (f.row(k + 1) - f.row(k - 1)) / (2.0 * h);
    }
    const Eigen::Index last = samples - 1;
    slope.row(last) = (3.0 * f.row(last) - 4.0 * f.row(last - 1) + f.row(last - 2)) / (2.0 * h);
    for (Eigen::Index k = 1; k < samples; ++k) {
      integral.row(k) -= h * h / 12.0 * (slope.row(k) - slope.row(0));
    }
  }

  Reconstruction out;
  out.times = tr.times();
  out.values.resize(samples, n);
  for (Eigen::Index k = 0; k < samples; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      out.values(k, i) = tr.at(static_cast<std::size_t>(k), static_cast<std::size_t>(i)) +
                         integral(k, i);
    }
  }
  return out;
}

void requireAgent(const Graph& g, std::size_t i) {
  if (i >= g.size()) {
    throw Error(ErrorKind::IndexOutOfRange, "agent " + std::to_string(i + 1) +
                                                " not in [1, " + std::to_string(g.size()) + "]");
  }
}

}  // namespace

CoalitionView CoalitionView::pool(const Graph& g, double beta, const Transcript& transcript,
                                  const SignalBank& bank, const EtaMatrix& eta,
                                  std::set<std::size_t> coalition) {
  CoalitionView view{std::move(coalition), g, beta, transcript, {}, {}};
  for (std::size_t h : view.coalition) {
    requireAgent(g, h);
    view.ownSignals.emplace(h, bank.specs().at(h));
    for (std::size_t s : g.neighbors(h)) {
      view.incidentEtas.emplace(Edge{h, s}, eta.exact(h, s));
      view.incidentEtas.emplace(Edge{s, h}, eta.exact(s, h));
    }
  }
  return view;
}

Reconstruction eavesdropReconstruct(const EavesdropperView& view) {
  return invert(view, true);
}

Reconstruction eavesdropReconstructTrapezoid(const EavesdropperView& view) {
  return invert(view, false);
}

MaskSplit coalitionSplitMask(const CoalitionView& view, std::size_t target) {
  requireAgent(view.graph, target);
  if (view.coalition.contains(target)) {
    throw Error(ErrorKind::TargetInCoalition,
                "target " + std::to_string(target + 1) + " belongs to the coalition");
  }
  MaskSplit split;
  for (std::size_t j : view.graph.neighbors(target)) {
    if (view.coalition.contains(j)) {
      split.vKnownExact.add(view.incidentEtas.at({j, target}));
      split.vKnownExact.subtract(view.incidentEtas.at({target, j}));
    } else {
      split.unknownEdges.emplace_back(target, j);
    }
  }
  split.vKnown = split.vKnownExact.value();
  return split;
}

CoalitionEstimate coalitionInfer(const CoalitionView& view, std::size_t target) {
  CoalitionEstimate out;
  out.target = target;
  out.split = coalitionSplitMask(view, target);
  const Reconstruction masked =
      eavesdropReconstruct(EavesdropperView{view.graph, view.beta, view.transcript});
  out.times = masked.times;
  out.estimate.resize(masked.times.size());
  for (std::size_t k = 0; k < masked.times.size(); ++k) {
    out.estimate[k] = masked.values(static_cast<Eigen::Index>(k),
                                    static_cast<Eigen::Index>(target)) -
                      out.split.vKnown;
  }
  return out;
}

AttackReport assessAttack(std::size_t target, std::span<const double> times,
                          std::span<const double> estimate, const SignalBank& truth,
                          double steadyStart) {
  if (times.size() != estimate.size()) {
    throw Error(ErrorKind::LengthMismatch, "estimate and time series differ in length");
  }
  if (target >= truth.size()) throw Error(ErrorKind::IndexOutOfRange, "target out of range");
  AttackReport report;
  report.target = target;
  report.times.assign(times.begin(), times.end());
  report.estimate.assign(estimate.begin(), estimate.end());
  report.truth.resize(times.size());
  report.residual.resize(times.size());
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    report.truth[k] = truth.value(target, times[k]);
    report.residual[k] = estimate[k] - report.truth[k];
    if (times[k] >= steadyStart) {
      sum += report.residual[k];
      ++count;
    }
  }
  if (count == 0) {
    throw Error(ErrorKind::InsufficientTransient, "no samples after the steady-state start");
  }
  report.fittedResidual = sum / static_cast<double>(count);
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] >= steadyStart) {
      report.wobble = std::max(report.wobble, std::fabs(report.residual[k] - report.fittedResidual));
    }
  }
  report.residualIsConstant = report.wobble < kResidualConstancyTolerance;
  return report;
}

Theorem2Outcome theorem2AltExecution(const Graph& g, const SignalBank& bank,
                                     const EtaMatrix& eta, std::span<const double> s,
                                     const EngineConfig& cfg, const Transcript& original) {
  if (s.size() != g.size()) throw Error(ErrorKind::LengthMismatch, "shift length mismatch");
  ExactSum total;
  for (double v : s) total.add(v);
  if (!(std::fabs(total.value()) < 1e-12)) {
    throw Error(ErrorKind::NotZeroSum, "shift vector does not sum to zero");
  }
  const MaskVector masks = computeMasks(g, eta);
  const SignalBank altBank = bank.shifted(s);
  const MaskVector altMasks = masks.minus(s);
  Theorem2Outcome out;
  out.original = original;
  out.alternative = simulateMasked(g, maskBank(altBank, altMasks), cfg).transcript;
  out.equal = out.original.bitwiseEqual(out.alternative);
  return out;
}

Theorem2Outcome theorem2AltExecution(const Graph& g, const SignalBank& bank,
                                     const EtaMatrix& eta, std::span<const double> s,
                                     const EngineConfig& cfg) {
  const Transcript original =
      simulateMasked(g, maskBank(bank, computeMasks(g, eta)), cfg).transcript;
  return theorem2AltExecution(g, bank, eta, s, cfg, original);
}

Theorem3Outcome theorem3AltExecution(const Graph& g, const SignalBank& bank,
                                     const EtaMatrix& eta, std::size_t target,
                                     std::size_t neighbor, double r,
                                     const std::set<std::size_t>& coalition,
                                     const EngineConfig& cfg) {
  requireAgent(g, target);
  requireAgent(g, neighbor);
  if (!g.hasEdge(target, neighbor)) {
    throw Error(ErrorKind::NotAnEdge, "(" + std::to_string(target + 1) + ", " +
                                          std::to_string(neighbor + 1) + ") is not an edge");
  }
  if (coalition.contains(target)) {
    throw Error(ErrorKind::TargetInCoalition, "target belongs to the coalition");
  }
  if (coalition.contains(neighbor)) {
    throw Error(ErrorKind::NeighborInCoalition,
                "neighbor " + std::to_string(neighbor + 1) + " belongs to the coalition");
  }

  const EtaMatrix altEta = eta.perturbed(g, target, neighbor, r);
  std::vector<double> shift(g.size(), 0.0);
  shift[target] = r;
  shift[neighbor] = -r;
  const SignalBank altBank = bank.shifted(shift);

  const MaskVector masks = computeMasks(g, eta);
  const MaskVector altMasks = computeMasks(g, altEta);

  Theorem3Outcome out;
  out.original = simulateMasked(g, maskBank(bank, masks), cfg).transcript;
  out.alternative = simulateMasked(g, maskBank(altBank, altMasks), cfg).transcript;
  out.transcriptsEqual = out.original.bitwiseEqual(out.alternative);

  out.targetMaskShift = (altMasks.exact()[target] - masks.exact()[target]).value();
  out.neighborMaskShift = (altMasks.exact()[neighbor] - masks.exact()[neighbor]).value();
  out.referenceShiftExact =
      (altBank.constant(target) - bank.constant(target)) == ExactSum(r) &&
      (altBank.constant(neighbor) - bank.constant(neighbor)) == ExactSum(-r);

  const auto viewA = CoalitionView::pool(g, cfg.beta, out.original, bank, eta, coalition);
  const auto viewB = CoalitionView::pool(g, cfg.beta, out.alternative, altBank, altEta, coalition);
  const auto estA = coalitionInfer(viewA, target);
  const auto estB = coalitionInfer(viewB, target);
  out.estimatesEqual =
      estA.estimate.size() == estB.estimate.size() &&
      std::memcmp(estA.estimate.data(), estB.estimate.data(),
                  estA.estimate.size() * sizeof(double)) == 0;
  out.fittedResidualOriginal =
      assessAttack(target, estA.times, estA.estimate, bank, cfg.steadyStart).fittedResidual;
  out.fittedResidualAlternative =
      assessAttack(target, estB.times, estB.estimate, altBank, cfg.steadyStart).fittedResidual;
  return out;
}

}  // namespace dacsim

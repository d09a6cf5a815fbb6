#include "dacsim/signals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dacsim/error.hpp"

namespace dacsim {

namespace {

void requireFinite(double v, const char* field, std::size_t agent) {
  if (!std::isfinite(v)) {
    throw Error(ErrorKind::NonFiniteParameter,
                std::string("signal ") + std::to_string(agent + 1) + ": " +
                    field + " is not finite");
  }
}

double oscillation(const SinusoidSpec& s, double t) {
  const double arg = s.omega * t + s.phase;
  return s.amplitude * (s.kind == Waveform::Sin ? std::sin(arg) : std::cos(arg));
}

double oscillationRate(const SinusoidSpec& s, double t) {
  const double arg = s.omega * t + s.phase;
  return s.kind == Waveform::Sin ? s.amplitude * s.omega * std::cos(arg)
                                 : -s.amplitude * s.omega * std::sin(arg);
}

}  // namespace

SignalBank::SignalBank(std::vector<SinusoidSpec> specs) : specs_(std::move(specs)) {
  constants_.reserve(specs_.size());
  roundedConstants_.reserve(specs_.size());
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    const auto& s = specs_[i];
    requireFinite(s.amplitude, "amplitude", i);
    requireFinite(s.omega, "omega", i);
    requireFinite(s.phase, "phase", i);
    requireFinite(s.offset, "offset", i);
    constants_.emplace_back(s.offset);
    roundedConstants_.push_back(s.offset);
  }
}

double SignalBank::value(std::size_t i, double t) const {
  return oscillation(specs_[i], t) + roundedConstants_[i];
}

double SignalBank::derivative(std::size_t i, double t) const {
  return oscillationRate(specs_[i], t);
}

Eigen::VectorXd SignalBank::evaluate(double t) const {
  Eigen::VectorXd out(specs_.size());
  for (std::size_t i = 0; i < specs_.size(); ++i) out(i) = value(i, t);
  return out;
}

Eigen::VectorXd SignalBank::evaluateDerivative(double t) const {
  Eigen::VectorXd out(specs_.size());
  evaluateDerivativeInto(t, {out.data(), specs_.size()});
  return out;
}

void SignalBank::evaluateDerivativeInto(double t, std::span<double> out) const {
  for (std::size_t i = 0; i < specs_.size(); ++i) out[i] = oscillationRate(specs_[i], t);
}

SignalBank SignalBank::shifted(std::span<const double> shift) const {
  if (shift.size() != size()) {
    throw Error(ErrorKind::LengthMismatch, "shift length " + std::to_string(shift.size()) +
                                               " != signal count " + std::to_string(size()));
  }
  std::vector<ExactSum> exact(shift.begin(), shift.end());
  return shifted(std::span<const ExactSum>(exact));
}

SignalBank SignalBank::shifted(std::span<const ExactSum> shift) const {
  if (shift.size() != size()) {
    throw Error(ErrorKind::LengthMismatch, "shift length " + std::to_string(shift.size()) +
                                               " != signal count " + std::to_string(size()));
  }
  SignalBank out = *this;
  for (std::size_t i = 0; i < size(); ++i) {
    out.constants_[i].add(shift[i]);
    out.roundedConstants_[i] = out.constants_[i].value();
    if (!std::isfinite(out.roundedConstants_[i])) {
      throw Error(ErrorKind::NonFiniteParameter, "shifted constant is not finite");
    }
  }
  return out;
}

double commonPeriod(const SignalBank& bank) {
  std::vector<double> omegas;
  for (const auto& s : bank.specs()) {
    if (s.amplitude != 0.0 && s.omega != 0.0) omegas.push_back(std::fabs(s.omega));
  }
  if (omegas.empty()) return 0.0;
  const double slowest = *std::min_element(omegas.begin(), omegas.end());
  const double fallback = 100.0 * 2.0 * std::numbers::pi / slowest;

  // Real-valued Euclid on the frequencies; the fundamental divides them all.
  const double tol = 1e-9 * *std::max_element(omegas.begin(), omegas.end());
  double base = omegas.front();
  for (std::size_t k = 1; k < omegas.size(); ++k) {
    double a = std::max(base, omegas[k]);
    double b = std::min(base, omegas[k]);
    int guard = 0;
    while (b > tol && guard++ < 200) {
      const double r = std::fmod(a, b);
      a = b;
      b = (r > b - tol) ? 0.0 : r;
    }
    if (guard >= 200 || a < 1e-6 * slowest) return fallback;
    base = a;
  }
  for (double w : omegas) {
    const double ratio = w / base;
    if (std::fabs(ratio - std::round(ratio)) > 1e-6) return fallback;
  }
  return 2.0 * std::numbers::pi / base;
}

double computeGamma(const SignalBank& bank, double horizon, double sampleStep) {
  const std::size_t n = bank.size();
  if (n == 0 || horizon <= 0.0 || sampleStep <= 0.0) return 0.0;
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / sampleStep));
  Eigen::VectorXd rate(n);
  double best = 0.0;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double tau = std::min(horizon, static_cast<double>(k) * sampleStep);
    bank.evaluateDerivativeInto(tau, {rate.data(), n});
    const double mean = rate.mean();
    best = std::max(best, (rate.array() - mean).matrix().norm());
  }
  return best;
}

double computeGamma(const SignalBank& bank) {
  const double period = commonPeriod(bank);
  if (period == 0.0) return 0.0;
  return computeGamma(bank, period, std::min(1e-3, period / 1000.0));
}

}  // namespace dacsim

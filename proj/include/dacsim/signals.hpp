#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dacsim/exact_sum.hpp"

namespace dacsim {

enum class Waveform { Sin, Cos };

// amplitude * trig(omega * t + phase) + offset. Angles in radians.
struct SinusoidSpec {
  Waveform kind = Waveform::Sin;
  double amplitude = 0.0;
  double omega = 0.0;
  double phase = 0.0;
  double offset = 0.0;

  friend bool operator==(const SinusoidSpec&, const SinusoidSpec&) = default;
};

/// Per-agent private reference signals x_i(t) with analytic derivatives.
///
/// Each signal splits into a varying sinusoidal part and a constant part. The
/// constant part is held exactly (the spec offset plus any shifts applied
/// later), and is rounded once when the signal is evaluated.
class SignalBank {
 public:
  SignalBank() = default;
  explicit SignalBank(std::vector<SinusoidSpec> specs);

  std::size_t size() const { return specs_.size(); }
  const std::vector<SinusoidSpec>& specs() const { return specs_; }
  const ExactSum& constant(std::size_t i) const { return constants_[i]; }

  double value(std::size_t i, double t) const;
  double derivative(std::size_t i, double t) const;

  Eigen::VectorXd evaluate(double t) const;
  Eigen::VectorXd evaluateDerivative(double t) const;
  void evaluateDerivativeInto(double t, std::span<double> out) const;

  // x_i(t) + shift_i for every agent, with the shift folded exactly into the
  // constant part.
  SignalBank shifted(std::span<const double> shift) const;
  SignalBank shifted(std::span<const ExactSum> shift) const;

 private:
  std::vector<SinusoidSpec> specs_;
  std::vector<ExactSum> constants_;
  std::vector<double> roundedConstants_;
};

// Smallest T > 0 with every component T-periodic, when the angular
// frequencies are commensurate within 1e-9; constant signals are ignored.
// Returns 0 when the bank is constant and falls back to 100 times the slowest
// component's period when no common period is found.
double commonPeriod(const SignalBank& bank);

/// sup over sampled tau in [0, horizon] of ||(I - 11^T/n) xdot(tau)||_2.
double computeGamma(const SignalBank& bank, double horizon, double sampleStep);

/// computeGamma over one common period at a step of 1e-3 (or period/1000,
/// whichever is finer).
double computeGamma(const SignalBank& bank);

}  // namespace dacsim

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dacsim/exact_sum.hpp"
#include "dacsim/graph.hpp"
#include "dacsim/signals.hpp"

namespace dacsim {

// Entry (i, j) is eta_ij: the value agent i drew for neighbor j. Zero on the
// diagonal and at every non-edge. Entries are held exactly so that
// edge-local perturbations compose without rounding.
class EtaMatrix {
 public:
  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return values_(i, j); }
  const ExactSum& exact(std::size_t i, std::size_t j) const {
    return exact_[i * n_ + j];
  }
  const Eigen::MatrixXd& values() const { return values_; }

  // eta with (i, j) replaced by eta_ij + delta; (i, j) must be an edge.
  EtaMatrix perturbed(const Graph& g, std::size_t i, std::size_t j,
                      double delta) const;

  EtaMatrix operator+(const EtaMatrix& other) const;

  friend EtaMatrix drawEta(const Graph&, std::mt19937_64&, double);
  friend EtaMatrix loadEta(const Graph&, const Eigen::MatrixXd&);

 private:
  explicit EtaMatrix(std::size_t n)
      : n_(n), exact_(n * n), values_(Eigen::MatrixXd::Zero(n, n)) {}
  void set(std::size_t i, std::size_t j, ExactSum v);

  std::size_t n_ = 0;
  std::vector<ExactSum> exact_;
  Eigen::MatrixXd values_;
};

/// Per-agent constant masks; the exact total is zero whenever the masks come
/// from computeMasks.
class MaskVector {
 public:
  MaskVector() = default;
  explicit MaskVector(std::vector<ExactSum> masks);
  static MaskVector zeros(std::size_t n);
  static MaskVector fromValues(std::span<const double> values);

  std::size_t size() const { return exact_.size(); }
  double operator[](std::size_t i) const { return values_(i); }
  const Eigen::VectorXd& values() const { return values_; }
  const std::vector<ExactSum>& exact() const { return exact_; }

  ExactSum exactTotal() const;
  // Floating sum in index order; what a naive 1^T m would report.
  double total() const { return values_.sum(); }

  // m - shift, exactly.
  MaskVector minus(std::span<const double> shift) const;

 private:
  std::vector<ExactSum> exact_;
  Eigen::VectorXd values_;
};

// Base bank plus constant masks; evaluates to x_i(t) + m_i.
class MaskedBank {
 public:
  MaskedBank(SignalBank base, MaskVector masks);

  const SignalBank& base() const { return base_; }
  const MaskVector& masks() const { return masks_; }
  // The masked references as a plain bank.
  const SignalBank& effective() const { return effective_; }

  Eigen::VectorXd evaluate(double t) const { return effective_.evaluate(t); }
  Eigen::VectorXd evaluateDerivative(double t) const {
    return effective_.evaluateDerivative(t);
  }

 private:
  SignalBank base_;
  MaskVector masks_;
  SignalBank effective_;
};

inline constexpr double kDefaultEtaRange = 10.0;

/// Independent uniform draw on [-range, range] for every directed edge,
/// consumed in (i ascending, j ascending) order.
EtaMatrix drawEta(const Graph& g, std::mt19937_64& rng, double range = kDefaultEtaRange);

EtaMatrix loadEta(const Graph& g, const Eigen::MatrixXd& explicitValues);

/// m_i = sum over j in N_i of (eta_ji - eta_ij), accumulated exactly.
MaskVector computeMasks(const Graph& g, const EtaMatrix& eta);

/// Matrix form m = (phi^T - phi) 1 in ordinary floating point.
Eigen::VectorXd computeMasksMatrixForm(const EtaMatrix& eta);

MaskedBank maskBank(const SignalBank& bank, const MaskVector& masks);

struct MaskSetup {
  EtaMatrix eta;
  MaskVector masks;
};

// Fresh draw and masks for a new topology; nothing from the old epoch is
// reused.
MaskSetup remaskOnTopologyChange(const Graph& gNew, std::mt19937_64& rng,
                                 double range = kDefaultEtaRange);

// Uniform double in [0, 1) from the top 53 bits; portable across standard
// libraries, unlike std::uniform_real_distribution.
inline double unitUniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace dacsim

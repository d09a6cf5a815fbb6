#include "dacsim/masks.hpp"

#include <cmath>
#include <string>

#include "dacsim/error.hpp"

namespace dacsim {

void EtaMatrix::set(std::size_t i, std::size_t j, ExactSum v) {
  values_(i, j) = v.value();
  exact_[i * n_ + j] = std::move(v);
}

EtaMatrix EtaMatrix::perturbed(const Graph& g, std::size_t i, std::size_t j,
                               double delta) const {
  if (!g.hasEdge(i, j)) {
    throw Error(ErrorKind::NotAnEdge, "(" + std::to_string(i + 1) + ", " +
                                          std::to_string(j + 1) + ") is not an edge");
  }
  EtaMatrix out = *this;
  out.set(i, j, exact(i, j) + delta);
  return out;
}

EtaMatrix EtaMatrix::operator+(const EtaMatrix& other) const {
  if (other.n_ != n_) throw Error(ErrorKind::LengthMismatch, "eta size mismatch");
  EtaMatrix out(n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) out.set(i, j, exact(i, j) + other.exact(i, j));
  return out;
}

MaskVector::MaskVector(std::vector<ExactSum> masks) : exact_(std::move(masks)) {
  values_.resize(static_cast<Eigen::Index>(exact_.size()));
  for (std::size_t i = 0; i < exact_.size(); ++i) values_(i) = exact_[i].value();
}

MaskVector MaskVector::zeros(std::size_t n) {
  return MaskVector(std::vector<ExactSum>(n));
}

MaskVector MaskVector::fromValues(std::span<const double> values) {
  std::vector<ExactSum> exact;
  exact.reserve(values.size());
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteParameter, "mask is not finite");
    exact.emplace_back(v);
  }
  return MaskVector(std::move(exact));
}

ExactSum MaskVector::exactTotal() const {
  ExactSum total;
  for (const auto& m : exact_) total.add(m);
  return total;
}

MaskVector MaskVector::minus(std::span<const double> shift) const {
  if (shift.size() != size()) {
    throw Error(ErrorKind::LengthMismatch, "shift length does not match mask count");
  }
  std::vector<ExactSum> out = exact_;
  for (std::size_t i = 0; i < out.size(); ++i) out[i].subtract(shift[i]);
  return MaskVector(std::move(out));
}

MaskedBank::MaskedBank(SignalBank base, MaskVector masks)
    : base_(std::move(base)),
      masks_(std::move(masks)),
      effective_(base_.shifted(std::span<const ExactSum>(masks_.exact()))) {}

EtaMatrix drawEta(const Graph& g, std::mt19937_64& rng, double range) {
  if (!(range > 0.0) || !std::isfinite(range)) {
    throw Error(ErrorKind::NonPositiveRange, "eta range must be positive and finite");
  }
  EtaMatrix eta(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j : g.neighbors(i)) {
      eta.set(i, j, ExactSum(range * (2.0 * unitUniform(rng) - 1.0)));
    }
  }
  return eta;
}

EtaMatrix loadEta(const Graph& g, const Eigen::MatrixXd& explicitValues) {
  const std::size_t n = g.size();
  if (static_cast<std::size_t>(explicitValues.rows()) != n ||
      static_cast<std::size_t>(explicitValues.cols()) != n) {
    throw Error(ErrorKind::LengthMismatch,
                "eta matrix must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  EtaMatrix eta(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = explicitValues(i, j);
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::NonFiniteParameter, "eta entry is not finite");
      }
      if (v != 0.0 && !g.hasEdge(i, j)) {
        throw Error(ErrorKind::SparsityViolation,
                    "nonzero eta at (" + std::to_string(i + 1) + ", " +
                        std::to_string(j + 1) + "), which is not an edge");
      }
      if (v != 0.0) eta.set(i, j, ExactSum(v));
    }
  }
  return eta;
}

MaskVector computeMasks(const Graph& g, const EtaMatrix& eta) {
  if (eta.size() != g.size()) throw Error(ErrorKind::LengthMismatch, "eta size mismatch");
  std::vector<ExactSum> masks(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j : g.neighbors(i)) {
      masks[i].add(eta.exact(j, i));
      masks[i].subtract(eta.exact(i, j));
    }
  }
  return MaskVector(std::move(masks));
}

Eigen::VectorXd computeMasksMatrixForm(const EtaMatrix& eta) {
  const auto& phi = eta.values();
  return (phi.transpose() - phi) * Eigen::VectorXd::Ones(phi.rows());
}

MaskedBank maskBank(const SignalBank& bank, const MaskVector& masks) {
  if (bank.size() != masks.size()) {
    throw Error(ErrorKind::LengthMismatch,
                "mask count " + std::to_string(masks.size()) + " != signal count " +
                    std::to_string(bank.size()));
  }
  return MaskedBank(bank, masks);
}

MaskSetup remaskOnTopologyChange(const Graph& gNew, std::mt19937_64& rng, double range) {
  EtaMatrix eta = drawEta(gNew, rng, range);
  MaskVector masks = computeMasks(gNew, eta);
  return {std::move(eta), std::move(masks)};
}

}  // namespace dacsim

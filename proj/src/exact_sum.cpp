#include "dacsim/exact_sum.hpp"

#include <cmath>
#include <utility>

namespace dacsim {

ExactSum& ExactSum::add(double x) {
  std::size_t i = 0;
  for (double y : partials_) {
    if (std::fabs(x) < std::fabs(y)) std::swap(x, y);
    const double hi = x + y;
    const double lo = y - (hi - x);
    if (lo != 0.0) partials_[i++] = lo;
    x = hi;
  }
  partials_.resize(i);
  if (x != 0.0) partials_.push_back(x);
  return *this;
}

ExactSum& ExactSum::add(const ExactSum& other) {
  // Copy first: other may alias *this.
  const std::vector<double> terms = other.partials_;
  for (double t : terms) add(t);
  return *this;
}

ExactSum& ExactSum::subtract(const ExactSum& other) {
  const std::vector<double> terms = other.partials_;
  for (double t : terms) add(-t);
  return *this;
}

ExactSum ExactSum::operator-() const {
  ExactSum out;
  out.partials_.reserve(partials_.size());
  for (double p : partials_) out.partials_.push_back(-p);
  return out;
}

// Round-half-even of the exact total; same final pass as Python's math.fsum.
double ExactSum::value() const {
  if (partials_.empty()) return 0.0;
  std::size_t k = partials_.size();
  double hi = partials_[--k];
  double lo = 0.0;
  while (k > 0) {
    const double x = hi;
    const double y = partials_[--k];
    hi = x + y;
    const double yr = hi - x;
    lo = y - yr;
    if (lo != 0.0) break;
  }
  if (k > 0 && ((lo < 0.0 && partials_[k - 1] < 0.0) ||
                (lo > 0.0 && partials_[k - 1] > 0.0))) {
    const double y = lo * 2.0;
    const double x = hi + y;
    const double yr = x - hi;
    if (y == yr) hi = x;
  }
  return hi;
}

}  // namespace dacsim

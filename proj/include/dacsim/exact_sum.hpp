#pragma once

#include <initializer_list>
#include <vector>

namespace dacsim {

// Exact accumulator for a finite multiset of doubles (non-overlapping
// expansion). value() is the correctly rounded exact total, so any two
// decompositions of the same real number round to the same double.
//
// Masks, offsets and the shifts of the indistinguishability experiments are
// carried in this form; that is what lets two executions whose masked
// references agree as real numbers produce bitwise-identical transcripts.
class ExactSum {
 public:
  ExactSum() = default;
  explicit ExactSum(double x) { add(x); }
  ExactSum(std::initializer_list<double> terms) {
    for (double t : terms) add(t);
  }

  ExactSum& add(double x);
  ExactSum& add(const ExactSum& other);
  ExactSum& subtract(double x) { return add(-x); }
  ExactSum& subtract(const ExactSum& other);

  ExactSum operator-() const;
  friend ExactSum operator+(ExactSum a, const ExactSum& b) { return a.add(b); }
  friend ExactSum operator-(ExactSum a, const ExactSum& b) {
    return a.subtract(b);
  }
  friend ExactSum operator+(ExactSum a, double b) { return a.add(b); }
  friend ExactSum operator-(ExactSum a, double b) { return a.subtract(b); }

  double value() const;
  bool isZero() const { return partials_.empty(); }

  // Exact comparison of the represented reals.
  friend bool operator==(const ExactSum& a, const ExactSum& b) {
    return (a - b).isZero();
  }

  const std::vector<double>& partials() const { return partials_; }

 private:
  std::vector<double> partials_;  // increasing magnitude, non-overlapping
};

}  // namespace dacsim

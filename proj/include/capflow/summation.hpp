#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace capflow {

/// Order-independent accumulator: terms are sorted by magnitude and summed
/// with Neumaier compensation, so equal multisets of terms give bitwise equal
/// totals no matter the order in which they were added.
class TermSum {
 public:
  void add(double x) {
    if (x != 0.0) terms_.push_back(x);
  }
  void add(double x, std::size_t times) {
    for (std::size_t i = 0; i < times; ++i) add(x);
  }

  double total() const {
    std::vector<double> t = terms_;
    std::sort(t.begin(), t.end(), [](double a, double b) {
      const double aa = std::abs(a), bb = std::abs(b);
      return aa < bb || (aa == bb && a < b);
    });
    double s = 0.0, c = 0.0;
    for (double x : t) {
      const double y = s + x;
      if (std::abs(s) >= std::abs(x)) {
        c += (s - y) + x;
      } else {
        c += (x - y) + s;
      }
      s = y;
    }
    return s + c;
  }

 private:
  std::vector<double> terms_;
};

}  // namespace capflow

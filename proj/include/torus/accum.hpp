#pragma once

#include <cmath>

namespace torus {

// Neumaier compensated summation; keeps long reductions accurate to a few ulps
// independent of term count, which the partition-exactness checks rely on.
struct NeumaierSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }

  void merge(const NeumaierSum& o) {
    add(o.sum);
    add(o.comp);
  }

  double value() const { return sum + comp; }
};

}  // namespace torus

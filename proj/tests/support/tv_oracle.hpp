#pragma once

#include <span>
#include <vector>

#include "hsc/cube.hpp"
#include "hsc/quantizer.hpp"

namespace hsc::test {

// Straightforward evaluation of sum (f - data)^2 + lambda * sum |forward
// differences| over a BSQ field; shares no code with the library kernels.
double tv_objective_direct(std::span<const double> field, std::span<const double> data,
                           const Dims& d, double lambda);

struct OracleResult {
  std::vector<double> field;
  double objective = 0.0;
  int sweeps = 0;
};

// Cyclic exact coordinate descent. Each one-dimensional subproblem
// (v - data)^2 + lambda * sum |v - n_j| on [lo, hi] is minimised by
// enumerating its breakpoints, its stationary points and the box ends.
OracleResult tv_coordinate_descent(std::span<const double> data, std::span<const BinSpec> bins,
                                   const Dims& d, double lambda, int max_sweeps = 2000);

}  // namespace hsc::test

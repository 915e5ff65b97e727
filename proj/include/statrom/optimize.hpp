#pragma once

#include <functional>

#include "statrom/linalg.hpp"

namespace statrom {

struct BoxMinResult {
  Vector x;
  double f = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

/// Minimize f over the box [lo, hi] with a projected limited-memory BFGS
/// iteration: finite-difference gradients (central, relative step 1e-6),
/// two-loop recursion direction, Armijo backtracking on the projected path
/// x(a) = clip(x + a d). Stops when the projected gradient drops below tol
/// (scaled) or max_iter is reached. Deliberately small: the pipelines only
/// optimize a handful of hyperparameters.
BoxMinResult minimize_box(const std::function<double(const Vector&)>& f, Vector x0, Vector lo,
                          Vector hi, int max_iter = 200, double tol = 1e-9);

}  // namespace statrom

#include "statrom/optimize.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>
#include <vector>

namespace statrom {

namespace {

Vector clip(Vector x, const Vector& lo, const Vector& hi) {
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = std::min(std::max(x(i), lo(i)), hi(i));
  return x;
}

}  // namespace

BoxMinResult minimize_box(const std::function<double(const Vector&)>& f, Vector x0, Vector lo,
                          Vector hi, int max_iter, double tol) {
  const Eigen::Index n = x0.size();
  if (lo.size() != n || hi.size() != n) throw std::invalid_argument("minimize_box: bound sizes");
  for (Eigen::Index i = 0; i < n; ++i)
    if (lo(i) > hi(i)) throw std::invalid_argument("minimize_box: lo > hi");

  BoxMinResult res;
  Vector x = clip(std::move(x0), lo, hi);
  int evals = 0;
  auto eval = [&](const Vector& p) {
    ++evals;
    const double v = f(p);
    return std::isfinite(v) ? v : 1e300;
  };
  auto gradient = [&](const Vector& p, double fp) {
    Vector g(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double h = 1e-6 * std::max(1.0, std::abs(p(i)));
      Vector pp = p, pm = p;
      pp(i) = std::min(p(i) + h, hi(i));
      pm(i) = std::max(p(i) - h, lo(i));
      const double span = pp(i) - pm(i);
      if (span <= 0.0) {
        g(i) = 0.0;
        continue;
      }
      const double fpp = (pp(i) == p(i)) ? fp : eval(pp);
      const double fpm = (pm(i) == p(i)) ? fp : eval(pm);
      g(i) = (fpp - fpm) / span;
    }
    return g;
  };

  double fx = eval(x);
  Vector g = gradient(x, fx);

  std::deque<Vector> S, Y;
  const int memory = 10;

  for (int it = 0; it < max_iter; ++it) {
    res.iterations = it + 1;
    // projected gradient convergence: how far a gradient step can actually move
    const Vector pg = x - clip(x - g, lo, hi);
    if (pg.cwiseAbs().maxCoeff() < tol * std::max(1.0, std::abs(fx))) {
      res.converged = true;
      break;
    }

    // two-loop recursion
    Vector d = -g;
    std::vector<double> alpha(S.size());
    for (int i = static_cast<int>(S.size()) - 1; i >= 0; --i) {
      const double rho = 1.0 / Y[i].dot(S[i]);
      alpha[i] = rho * S[i].dot(d);
      d -= alpha[i] * Y[i];
    }
    if (!S.empty()) {
      const double gamma = S.back().dot(Y.back()) / Y.back().squaredNorm();
      d *= gamma;
    }
    for (std::size_t i = 0; i < S.size(); ++i) {
      const double rho = 1.0 / Y[i].dot(S[i]);
      const double beta = rho * Y[i].dot(d);
      d += (alpha[i] - beta) * S[i];
    }
    if (d.dot(g) >= 0.0) d = -g;  // not a descent direction; fall back

    // Armijo backtracking along the projected path
    double step = 1.0;
    bool accepted = false;
    Vector xn;
    double fn = fx;
    for (int ls = 0; ls < 40; ++ls) {
      xn = clip(x + step * d, lo, hi);
      const Vector dx = xn - x;
      if (dx.cwiseAbs().maxCoeff() == 0.0) break;
      fn = eval(xn);
      if (fn <= fx + 1e-4 * g.dot(dx)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      res.converged = S.empty() ? false : true;  // stuck: treat as stationary
      break;
    }

    const Vector gn = gradient(xn, fn);
    const Vector s = xn - x, y = gn - g;
    if (y.dot(s) > 1e-12 * s.norm() * y.norm()) {
      S.push_back(s);
      Y.push_back(y);
      if (static_cast<int>(S.size()) > memory) {
        S.pop_front();
        Y.pop_front();
      }
    }
    x = xn;
    fx = fn;
    g = gn;
  }

  res.x = x;
  res.f = fx;
  res.evaluations = evals;
  return res;
}

}  // namespace statrom

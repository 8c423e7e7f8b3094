#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <vector>

#include "stlplan/errors.hpp"

namespace stlplan {

struct AscentOptions {
  int max_iterations = 500;
  /// Stop when the projected gradient infinity norm falls to this value.
  double tolerance = 1e-6;
  int memory = 8;
  double armijo = 1e-4;
  int max_backtracks = 40;
  /// Largest coordinate change tried by a steepest step.
  double initial_step = 0.1;
};

enum class AscentStop { Gradient, IterationLimit, Stalled };

struct AscentReport {
  AscentStop stop = AscentStop::Stalled;
  int iterations = 0;
  double value = 0.0;
  /// Objective after every accepted iterate, starting with the initial point.
  std::vector<double> history;
};

/// Objective callback: returns f(x) and writes df/dx into grad.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

/// Bound-constrained L-BFGS maximization. Variables at a bound whose gradient points outward are held
/// fixed for the step; the step is projected back into the box and accepted by an Armijo test, so the
/// recorded objective never decreases.
inline AscentReport maximize(const Objective& objective, Eigen::VectorXd& x, const Eigen::VectorXd& lower,
                             const Eigen::VectorXd& upper, const AscentOptions& opt) {
  const Eigen::Index n = x.size();
  x = x.cwiseMax(lower).cwiseMin(upper);

  // Internally minimize f = -objective.
  Eigen::VectorXd g(n);
  double f = -objective(x, g);
  g = -g;
  if (!std::isfinite(f) || !g.allFinite()) throw NumericalFailure("objective is not finite at the starting point");

  AscentReport rep;
  rep.history.push_back(-f);
  std::deque<Eigen::VectorXd> s_mem;
  std::deque<Eigen::VectorXd> y_mem;

  Eigen::VectorXd x_new(n);
  Eigen::VectorXd g_new(n);
  Eigen::VectorXd d(n);
  std::vector<char> held(static_cast<std::size_t>(n));

  const auto projected_norm = [&](const Eigen::VectorXd& at, const Eigen::VectorXd& grad) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double step = std::clamp(at[i] - grad[i], lower[i], upper[i]) - at[i];
      m = std::max(m, std::abs(step));
    }
    return m;
  };

  for (int it = 0;; ++it) {
    if (projected_norm(x, g) <= opt.tolerance) {
      rep.stop = AscentStop::Gradient;
      break;
    }
    if (it >= opt.max_iterations) {
      rep.stop = AscentStop::IterationLimit;
      break;
    }
    for (Eigen::Index i = 0; i < n; ++i)
      held[static_cast<std::size_t>(i)] = (x[i] <= lower[i] && g[i] > 0.0) || (x[i] >= upper[i] && g[i] < 0.0);

    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      const bool steepest = s_mem.empty();
      // two-loop recursion on the free coordinates
      d = -g;
      for (Eigen::Index i = 0; i < n; ++i)
        if (held[static_cast<std::size_t>(i)]) d[i] = 0.0;
      if (!steepest) {
        const std::size_t m = s_mem.size();
        std::vector<double> alpha(m);
        for (std::size_t j = m; j-- > 0;) {
          alpha[j] = s_mem[j].dot(d) / y_mem[j].dot(s_mem[j]);
          d -= alpha[j] * y_mem[j];
        }
        d *= s_mem.back().dot(y_mem.back()) / y_mem.back().squaredNorm();
        for (std::size_t j = 0; j < m; ++j) {
          const double beta = y_mem[j].dot(d) / y_mem[j].dot(s_mem[j]);
          d += (alpha[j] - beta) * s_mem[j];
        }
        for (Eigen::Index i = 0; i < n; ++i)
          if (held[static_cast<std::size_t>(i)]) d[i] = 0.0;
        if (g.dot(d) >= 0.0) {
          s_mem.clear();
          y_mem.clear();
          continue;
        }
      }
      double step = steepest ? opt.initial_step / std::max(d.lpNorm<Eigen::Infinity>(), 1e-300) : 1.0;
      if (steepest) step = std::min(step, 1.0);
      for (int bt = 0; bt < opt.max_backtracks; ++bt, step *= 0.5) {
        x_new = (x + step * d).cwiseMax(lower).cwiseMin(upper);
        const double f_new = -objective(x_new, g_new);
        if (!std::isfinite(f_new)) continue;
        if (f_new <= f + opt.armijo * g.dot(x_new - x) && f_new <= f) {
          g_new = -g_new;
          if (!g_new.allFinite()) throw NumericalFailure("objective gradient is not finite");
          Eigen::VectorXd s = x_new - x;
          Eigen::VectorXd y = g_new - g;
          const double sy = s.dot(y);
          if (sy > 1e-12 * s.norm() * y.norm()) {
            s_mem.push_back(std::move(s));
            y_mem.push_back(std::move(y));
            if (static_cast<int>(s_mem.size()) > opt.memory) {
              s_mem.pop_front();
              y_mem.pop_front();
            }
          }
          x = x_new;
          f = f_new;
          g = g_new;
          accepted = true;
          break;
        }
      }
      if (!accepted && !steepest) {
        s_mem.clear();
        y_mem.clear();
      } else if (!accepted) {
        break;
      }
    }
    if (!accepted) {
      rep.stop = AscentStop::Stalled;
      break;
    }
    ++rep.iterations;
    rep.history.push_back(-f);
  }
  rep.value = -f;
  return rep;
}

}  // namespace stlplan

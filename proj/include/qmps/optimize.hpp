// Copyright 2026 The qmps Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Derivative-free minimizers: Nelder-Mead simplex and a coordinate-descent polish.

#include "qmps/linalg.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

namespace qmps {

using Objective = std::function<double(const RealVector&)>;

struct MinimizeOptions {
  double initial_step = 0.5;
  double xtol = 1e-9;
  double ftol = 1e-13;
  int max_evaluations = 20000;
};

struct MinimizeResult {
  RealVector x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Nelder-Mead with the standard (1, 2, 0.5, 0.5) coefficients. Converged when both the
/// simplex diameter and the spread of function values fall below tolerance.
inline MinimizeResult nelder_mead(const Objective& f, const RealVector& x0, const MinimizeOptions& opt = {}) {
  const Eigen::Index n = x0.size();
  std::vector<RealVector> simplex(n + 1, x0);
  std::vector<double> values(n + 1);
  for (Eigen::Index i = 0; i < n; ++i) simplex[i + 1](i) += opt.initial_step;
  int evals = 0;
  auto eval = [&](const RealVector& x) {
    ++evals;
    return f(x);
  };
  for (Eigen::Index i = 0; i <= n; ++i) values[i] = eval(simplex[i]);

  std::vector<Eigen::Index> order(n + 1);
  bool converged = false;
  while (evals < opt.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    {
      std::vector<RealVector> s2;
      std::vector<double> v2;
      for (auto k : order) {
        s2.push_back(simplex[k]);
        v2.push_back(values[k]);
      }
      simplex = std::move(s2);
      values = std::move(v2);
    }
    double diameter = 0.0;
    for (Eigen::Index i = 1; i <= n; ++i)
      diameter = std::max(diameter, (simplex[i] - simplex[0]).lpNorm<Eigen::Infinity>());
    if (diameter <= opt.xtol && std::abs(values[n] - values[0]) <= opt.ftol) {
      converged = true;
      break;
    }

    RealVector centroid = RealVector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) centroid += simplex[i];
    centroid /= static_cast<double>(n);

    const RealVector reflected = centroid + (centroid - simplex[n]);
    const double fr = eval(reflected);
    if (fr < values[0]) {
      const RealVector expanded = centroid + 2.0 * (centroid - simplex[n]);
      const double fe = eval(expanded);
      if (fe < fr) {
        simplex[n] = expanded;
        values[n] = fe;
      } else {
        simplex[n] = reflected;
        values[n] = fr;
      }
      continue;
    }
    if (fr < values[n - 1]) {
      simplex[n] = reflected;
      values[n] = fr;
      continue;
    }
    const bool outside = fr < values[n];
    const RealVector contracted =
        outside ? RealVector(centroid + 0.5 * (reflected - centroid)) : RealVector(centroid + 0.5 * (simplex[n] - centroid));
    const double fc = eval(contracted);
    if (fc < std::min(fr, values[n])) {
      simplex[n] = contracted;
      values[n] = fc;
      continue;
    }
    for (Eigen::Index i = 1; i <= n; ++i) {
      simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0]);
      values[i] = eval(simplex[i]);
    }
  }
  const auto best = std::min_element(values.begin(), values.end()) - values.begin();
  return {simplex[best], values[best], evals, converged};
}

/// Golden-section search on the bracket [a, b].
inline double golden_section(const std::function<double(double)>& g, double a, double b, double tol, double* best_value) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a), d = a + r * (b - a);
  double gc = g(c), gd = g(d);
  while (std::abs(b - a) > tol) {
    if (gc < gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - r * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + r * (b - a);
      gd = g(d);
    }
  }
  const double x = 0.5 * (a + b);
  if (best_value) *best_value = g(x);
  return x;
}

/// Cyclic coordinate descent: per-axis golden-section search in a shrinking window.
/// Accepts only moves that lower the objective, so it never undoes the input's progress.
inline MinimizeResult coordinate_polish(const Objective& f, MinimizeResult start, double window = 1e-2,
                                        int sweeps = 6, double tol = 1e-11) {
  RealVector x = start.x;
  double fx = start.value;
  int evals = start.evaluations;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    bool improved = false;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      auto along = [&](double t) {
        RealVector y = x;
        y(k) = t;
        ++evals;
        return f(y);
      };
      double ft = 0.0;
      const double t = golden_section(along, x(k) - window, x(k) + window, tol, &ft);
      if (ft < fx) {
        improved = improved || (fx - ft) > 1e-15;
        x(k) = t;
        fx = ft;
      }
    }
    window *= 0.3;
    if (!improved && window < 1e-6) break;
  }
  return {x, fx, evals, start.converged};
}

/// Central-difference gradient.
inline RealVector numerical_gradient(const Objective& f, const RealVector& x, double h, int* evals = nullptr) {
  RealVector g(x.size());
  RealVector y = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    y(k) = x(k) + h;
    const double fp = f(y);
    y(k) = x(k) - h;
    const double fm = f(y);
    y(k) = x(k);
    g(k) = (fp - fm) / (2 * h);
  }
  if (evals) *evals += 2 * static_cast<int>(x.size());
  return g;
}

struct QuasiNewtonOptions {
  double gradient_step = 1e-5;
  double gtol = 1e-9;
  int max_iterations = 500;
};

/// BFGS with finite-difference gradients and a backtracking Armijo line search. Used to
/// polish simplex results; only accepts decreasing steps.
inline MinimizeResult bfgs(const Objective& f, MinimizeResult start, const QuasiNewtonOptions& opt = {}) {
  const Eigen::Index n = start.x.size();
  RealVector x = start.x;
  double fx = f(x);
  int evals = start.evaluations + 1;
  RealVector g = numerical_gradient(f, x, opt.gradient_step, &evals);
  RealMatrix hinv = RealMatrix::Identity(n, n);
  bool converged = false;
  for (int it = 0; it < opt.max_iterations; ++it) {
    if (g.lpNorm<Eigen::Infinity>() <= opt.gtol) {
      converged = true;
      break;
    }
    RealVector p = -hinv * g;
    if (p.dot(g) >= 0) {
      hinv.setIdentity();
      p = -g;
    }
    double t = 1.0;
    double ft = fx;
    RealVector xt = x;
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls) {
      xt = x + t * p;
      ft = f(xt);
      ++evals;
      if (ft <= fx + 1e-4 * t * p.dot(g)) {
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved || ft >= fx) {
      if (hinv.isIdentity()) break;
      hinv.setIdentity();
      continue;
    }
    const RealVector gt = numerical_gradient(f, xt, opt.gradient_step, &evals);
    const RealVector s = xt - x, y = gt - g;
    const double sy = s.dot(y);
    if (sy > 1e-300) {
      const double rho = 1.0 / sy;
      const RealMatrix id = RealMatrix::Identity(n, n);
      hinv = (id - rho * s * y.transpose()) * hinv * (id - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    x = xt;
    fx = ft;
    g = gt;
  }
  if (fx < start.value) return {x, fx, evals, converged};
  start.evaluations = evals;
  return start;
}

}  // namespace qmps

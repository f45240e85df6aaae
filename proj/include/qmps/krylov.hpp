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

// Matrix-free Krylov solvers on real vectors.

#include "qmps/linalg.hpp"

#include <functional>

namespace qmps {

using LinearMap = std::function<RealVector(const RealVector&)>;

struct EigenPair {
  double value = 0.0;
  RealVector vector;
  double residual = 0.0;
};

/// Lowest eigenpair of a symmetric operator by Lanczos with full reorthogonalization,
/// restarted from the current Ritz vector every `krylov_dim` steps.
inline EigenPair lanczos_lowest(const LinearMap& apply, RealVector x0, double tol, int krylov_dim = 40,
                                int max_restarts = 50) {
  EigenPair best;
  if (x0.norm() == 0) x0.setOnes();
  x0.normalize();
  for (int restart = 0; restart < max_restarts; ++restart) {
    std::vector<RealVector> q{x0};
    std::vector<double> alpha, beta;
    const int m = static_cast<int>(std::min<Eigen::Index>(krylov_dim, x0.size()));
    for (int k = 0; k < m; ++k) {
      RealVector w = apply(q.back());
      alpha.push_back(q.back().dot(w));
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& v : q) w -= v.dot(w) * v;
      const double b = w.norm();
      if (b < 1e-14 || k + 1 == m) break;
      beta.push_back(b);
      q.push_back(w / b);
    }
    const int k = static_cast<int>(alpha.size());
    RealMatrix t = RealMatrix::Zero(k, k);
    for (int i = 0; i < k; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(t);
    RealVector ritz = RealVector::Zero(x0.size());
    for (int i = 0; i < k; ++i) ritz += es.eigenvectors()(i, 0) * q[i];
    ritz.normalize();
    const RealVector r = apply(ritz);
    best.value = ritz.dot(r);
    best.residual = (r - best.value * ritz).norm();
    best.vector = ritz;
    if (best.residual <= tol) break;
    x0 = ritz;
  }
  return best;
}

struct SolveResult {
  RealVector x;
  double residual = 0.0;
  int iterations = 0;
};

/// Restarted GMRES for a general real operator.
inline SolveResult gmres(const LinearMap& apply, const RealVector& b, RealVector x, double tol, int restart = 30,
                         int max_iterations = 2000) {
  const double bnorm = std::max(b.norm(), 1e-300);
  SolveResult out;
  while (out.iterations < max_iterations) {
    RealVector r = b - apply(x);
    double beta = r.norm();
    out.residual = beta / bnorm;
    if (out.residual <= tol) break;
    std::vector<RealVector> v{r / beta};
    RealMatrix h = RealMatrix::Zero(restart + 1, restart);
    RealVector g = RealVector::Zero(restart + 1);
    g(0) = beta;
    std::vector<double> cs(restart), sn(restart);
    int k = 0;
    while (k < restart && out.iterations < max_iterations) {
      RealVector w = apply(v[k]);
      for (int i = 0; i <= k; ++i) {
        h(i, k) = v[i].dot(w);
        w -= h(i, k) * v[i];
      }
      const double wnorm = w.norm();
      h(k + 1, k) = wnorm;
      for (int i = 0; i < k; ++i) {
        const double t = cs[i] * h(i, k) + sn[i] * h(i + 1, k);
        h(i + 1, k) = -sn[i] * h(i, k) + cs[i] * h(i + 1, k);
        h(i, k) = t;
      }
      const double d = std::hypot(h(k, k), h(k + 1, k));
      cs[k] = h(k, k) / d;
      sn[k] = h(k + 1, k) / d;
      h(k, k) = d;
      h(k + 1, k) = 0.0;
      g(k + 1) = -sn[k] * g(k);
      g(k) = cs[k] * g(k);
      ++k;
      ++out.iterations;
      if (std::abs(g(k)) / bnorm <= tol || wnorm == 0.0) break;
      v.push_back(w / wnorm);
    }
    const RealVector y = h.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    for (int i = 0; i < k; ++i) x += y(i) * v[i];
  }
  out.x = x;
  out.residual = (b - apply(x)).norm() / bnorm;
  return out;
}

}  // namespace qmps

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

// Variational uniform MPS (VUMPS) for a real, translation-invariant nearest-neighbour
// Hamiltonian on a spin-1/2 chain. Used as the high bond-dimension reference solver.
//
// Mixed canonical form: AL[s] C = C AR[s] = AC[s], with sum_s AL[s]^T AL[s] = 1 and
// sum_s AR[s] AR[s]^T = 1. Two-site operators are 4x4 matrices h((s' t'), (s t)).

#include "qmps/krylov.hpp"

#include <array>

namespace qmps {

using SiteTensor = std::array<RealMatrix, 2>;

struct UniformMps {
  SiteTensor al, ar, ac;
  RealMatrix c;

  int chi() const { return static_cast<int>(c.rows()); }
};

struct VumpsOptions {
  double tol = 1e-10;    // gauge error ||AC - AL C||
  int max_iterations = 500;
};

struct VumpsResult {
  UniformMps state;
  double energy_density = 0.0;
  double gauge_error = 0.0;
  int iterations = 0;
  bool converged = false;

  /// Schmidt values across any bond, descending.
  RealVector schmidt_values() const {
    Eigen::JacobiSVD<RealMatrix> svd(state.c);
    return svd.singularValues() / svd.singularValues().norm();
  }
  double entropy_bits() const {
    const RealVector s = schmidt_values();
    double e = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      const double p = s(i) * s(i);
      if (p > 1e-300) e -= p * std::log2(p);
    }
    return std::max(e, 0.0);
  }
};

namespace detail {

inline RealVector stack(const SiteTensor& a) {
  const Eigen::Index n = a[0].size();
  RealVector v(2 * n);
  v.head(n) = Eigen::Map<const RealVector>(a[0].data(), n);
  v.tail(n) = Eigen::Map<const RealVector>(a[1].data(), n);
  return v;
}

inline SiteTensor unstack(const RealVector& v, int chi) {
  const Eigen::Index n = Eigen::Index{chi} * chi;
  return {Eigen::Map<const RealMatrix>(v.data(), chi, chi), Eigen::Map<const RealMatrix>(v.data() + n, chi, chi)};
}

/// Polar factor U of M = U P (U has orthonormal columns when M is tall).
inline RealMatrix polar_factor(const RealMatrix& m) {
  Eigen::JacobiSVD<RealMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().transpose();
}

/// Left isometry from the stacked (2 chi x chi) matrix [AC0; AC1].
inline RealMatrix vstack(const SiteTensor& a) {
  RealMatrix m(2 * a[0].rows(), a[0].cols());
  m << a[0], a[1];
  return m;
}
inline RealMatrix hstack(const SiteTensor& a) {
  RealMatrix m(a[0].rows(), 2 * a[0].cols());
  m << a[0], a[1];
  return m;
}

/// Two-site products P[s*2+t] = A[s] B[t].
inline std::array<RealMatrix, 4> pair_products(const SiteTensor& a, const SiteTensor& b) {
  return {a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]};
}

/// Apply h to a two-site block: out[o] = sum_i h(o, i) P[i].
inline std::array<RealMatrix, 4> apply_two_site(const RealMatrix& h, const std::array<RealMatrix, 4>& p) {
  std::array<RealMatrix, 4> out;
  for (int o = 0; o < 4; ++o) {
    out[o] = RealMatrix::Zero(p[0].rows(), p[0].cols());
    for (int i = 0; i < 4; ++i)
      if (h(o, i) != 0.0) out[o] += h(o, i) * p[i];
  }
  return out;
}

struct Environments {
  RealMatrix hl, hr;
  double energy = 0.0;
};

inline Environments environments(const UniformMps& m, const RealMatrix& h, double tol) {
  const int chi = m.chi();
  const RealMatrix r = m.c * m.c.transpose();   // right fixed point of the AL transfer map
  const RealMatrix l = m.c.transpose() * m.c;   // left fixed point of the AR transfer map

  const auto pl = pair_products(m.al, m.al);
  const auto hpl = apply_two_site(h, pl);
  RealMatrix hl_src = RealMatrix::Zero(chi, chi);
  for (int i = 0; i < 4; ++i) hl_src += pl[i].transpose() * hpl[i];

  const auto pr = pair_products(m.ar, m.ar);
  const auto hpr = apply_two_site(h, pr);
  RealMatrix hr_src = RealMatrix::Zero(chi, chi);
  for (int i = 0; i < 4; ++i) hr_src += hpr[i] * pr[i].transpose();

  Environments env;
  env.energy = (hl_src * r).trace();
  hl_src -= env.energy * RealMatrix::Identity(chi, chi);
  hr_src -= (l * hr_src).trace() * RealMatrix::Identity(chi, chi);

  const Eigen::Index n = Eigen::Index{chi} * chi;
  const LinearMap left_op = [&](const RealVector& x) {
    const Eigen::Map<const RealMatrix> xm(x.data(), chi, chi);
    RealMatrix y = xm - m.al[0].transpose() * xm * m.al[0] - m.al[1].transpose() * xm * m.al[1] +
                   (xm * r).trace() * RealMatrix::Identity(chi, chi);
    return RealVector(Eigen::Map<RealVector>(y.data(), n));
  };
  const LinearMap right_op = [&](const RealVector& x) {
    const Eigen::Map<const RealMatrix> xm(x.data(), chi, chi);
    RealMatrix y = xm - m.ar[0] * xm * m.ar[0].transpose() - m.ar[1] * xm * m.ar[1].transpose() +
                   (l * xm).trace() * RealMatrix::Identity(chi, chi);
    return RealVector(Eigen::Map<RealVector>(y.data(), n));
  };
  const RealVector bl = Eigen::Map<RealVector>(hl_src.data(), n);
  const RealVector br = Eigen::Map<RealVector>(hr_src.data(), n);
  const auto sl = gmres(left_op, bl, RealVector::Zero(n), tol, 40, 4000);
  const auto sr = gmres(right_op, br, RealVector::Zero(n), tol, 40, 4000);
  env.hl = Eigen::Map<const RealMatrix>(sl.x.data(), chi, chi);
  env.hr = Eigen::Map<const RealMatrix>(sr.x.data(), chi, chi);
  return env;
}

}  // namespace detail

/// Ground state of sum_j h_{j,j+1} at fixed bond dimension. `initial` warm-starts the search
/// (it is padded or truncated to `chi`).
inline VumpsResult vumps_ground_state(const RealMatrix& h, int chi, const VumpsOptions& opt = {},
                                      const UniformMps* initial = nullptr, std::uint64_t seed = 11) {
  using detail::polar_factor;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  auto noise = [&](int r, int c, double scale) {
    RealMatrix m(r, c);
    for (auto& x : m.reshaped()) x = scale * normal(rng);
    return m;
  };

  UniformMps m;
  {
    SiteTensor a{noise(chi, chi, 1.0), noise(chi, chi, 1.0)};
    RealMatrix c = RealMatrix::Identity(chi, chi);
    if (initial) {
      const int k = std::min(chi, initial->chi());
      for (int s = 0; s < 2; ++s) {
        a[s] *= 1e-3;
        a[s].topLeftCorner(k, k) += initial->ac[s].topLeftCorner(k, k);
      }
      c *= 1e-3;
      c.topLeftCorner(k, k) += initial->c.topLeftCorner(k, k);
    }
    c /= c.norm();
    m.c = c;
    m.ac = a;
    const double n = detail::vstack(a).norm();
    m.ac[0] /= n;
    m.ac[1] /= n;
    const RealMatrix uc = polar_factor(c);
    const RealMatrix al = polar_factor(detail::vstack(m.ac)) * uc.transpose();
    const RealMatrix ar = uc.transpose() * polar_factor(detail::hstack(m.ac));
    m.al = {al.topRows(chi), al.bottomRows(chi)};
    m.ar = {ar.leftCols(chi), ar.rightCols(chi)};
  }

  VumpsResult res;
  double err = 1.0;
  for (int it = 0; it < opt.max_iterations; ++it) {
    const double inner_tol = std::clamp(err * 1e-2, 1e-14, 1e-6);
    const auto env = detail::environments(m, h, inner_tol);

    const LinearMap h_ac = [&](const RealVector& x) {
      const SiteTensor ac = detail::unstack(x, chi);
      // h on (AL, AC): sum h((t' s'), (t s)) AL[t']^T AL[t] AC[s]
      const auto p1 = detail::pair_products(m.al, ac);
      const auto hp1 = detail::apply_two_site(h, p1);
      // h on (AC, AR): sum h((s' t'), (s t)) AC[s] AR[t] AR[t']^T
      const auto p2 = detail::pair_products(ac, m.ar);
      const auto hp2 = detail::apply_two_site(h, p2);
      SiteTensor out;
      for (int sp = 0; sp < 2; ++sp) {
        out[sp] = env.hl * ac[sp] + ac[sp] * env.hr;
        for (int tp = 0; tp < 2; ++tp) {
          out[sp] += m.al[tp].transpose() * hp1[tp * 2 + sp];
          out[sp] += hp2[sp * 2 + tp] * m.ar[tp].transpose();
        }
      }
      return detail::stack(out);
    };
    const LinearMap h_c = [&](const RealVector& x) {
      const Eigen::Map<const RealMatrix> c(x.data(), chi, chi);
      std::array<RealMatrix, 4> p;
      for (int s = 0; s < 2; ++s)
        for (int t = 0; t < 2; ++t) p[s * 2 + t] = m.al[s] * c * m.ar[t];
      const auto hp = detail::apply_two_site(h, p);
      RealMatrix out = env.hl * c + c * env.hr;
      for (int sp = 0; sp < 2; ++sp)
        for (int tp = 0; tp < 2; ++tp) out += m.al[sp].transpose() * hp[sp * 2 + tp] * m.ar[tp].transpose();
      return RealVector(Eigen::Map<RealVector>(out.data(), out.size()));
    };

    const auto eac = lanczos_lowest(h_ac, detail::stack(m.ac), inner_tol);
    const auto ec = lanczos_lowest(h_c, RealVector(Eigen::Map<RealVector>(m.c.data(), m.c.size())), inner_tol);
    m.ac = detail::unstack(eac.vector, chi);
    m.c = Eigen::Map<const RealMatrix>(ec.vector.data(), chi, chi);
    {
      const RealMatrix uac = polar_factor(detail::vstack(m.ac));
      const RealMatrix uc = polar_factor(m.c);
      const RealMatrix al = uac * uc.transpose();
      const RealMatrix uac_r = polar_factor(detail::hstack(m.ac));
      const RealMatrix ar = uc.transpose() * uac_r;
      m.al = {al.topRows(chi), al.bottomRows(chi)};
      m.ar = {ar.leftCols(chi), ar.rightCols(chi)};
    }
    // Eigenvectors carry an arbitrary sign, so compare against both signs of AL C.
    const RealMatrix gauge = detail::vstack(m.ac) - RealMatrix(RealMatrix(detail::vstack(m.al)) * m.c);
    const RealMatrix gauge_flip = detail::vstack(m.ac) + RealMatrix(RealMatrix(detail::vstack(m.al)) * m.c);
    err = std::min(gauge.norm(), gauge_flip.norm());
    res.iterations = it + 1;
    res.energy_density = env.energy;
    if (err < opt.tol) {
      res.converged = true;
      break;
    }
  }
  res.state = m;
  res.gauge_error = err;
  return res;
}

}  // namespace qmps

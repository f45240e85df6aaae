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

// Reference values for the transverse-field Ising chain H = -sum_j (Z_j Z_{j+1} + lambda X_j).

#include "qmps/linalg.hpp"
#include "qmps/vumps.hpp"

#include <array>
#include <functional>
#include <map>
#include <mutex>

namespace qmps {

struct TFIMParams {
  double lambda = 0.0;

  explicit TFIMParams(double l) : lambda(l) {
    if (!(l >= 0.0)) throw Error("TFIMParams: lambda must be nonnegative");
  }
};

enum class OracleMethod { kQuadrature, kHighChiMps, kExactDiag };

inline const char* to_string(OracleMethod m) {
  switch (m) {
    case OracleMethod::kQuadrature: return "quadrature";
    case OracleMethod::kHighChiMps: return "high_chi_mps";
    case OracleMethod::kExactDiag: return "exact_diag";
  }
  return "unknown";
}

struct OracleResult {
  double energy_density = 0.0;
  double entropy_bits = 0.0;
  OracleMethod method = OracleMethod::kQuadrature;
  double convergence_estimate = 0.0;
  bool converged = true;
};

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod (7/15) quadrature.

namespace detail {

struct GKSegment {
  double a, b, value, error;
};

inline GKSegment gauss_kronrod_15(const std::function<double(double)>& f, double a, double b) {
  static constexpr std::array<double, 8> xk = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                               0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                               0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                               0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  static constexpr std::array<double, 8> wk = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                               0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                               0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                               0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr std::array<double, 4> wg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                               0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = wk[7] * fc, gauss = wg[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double f1 = f(c - h * xk[i]), f2 = f(c + h * xk[i]);
    kron += wk[i] * (f1 + f2);
    if (i % 2 == 1) gauss += wg[i / 2] * (f1 + f2);
  }
  return {a, b, kron * h, std::abs((kron - gauss) * h)};
}

}  // namespace detail

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

inline QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                           double abs_tol = 1e-12, int max_segments = 2000) {
  std::vector<detail::GKSegment> segs{detail::gauss_kronrod_15(f, a, b)};
  auto total_error = [&] {
    double e = 0.0;
    for (const auto& s : segs) e += s.error;
    return e;
  };
  while (total_error() > abs_tol && static_cast<int>(segs.size()) < max_segments) {
    auto worst = std::max_element(segs.begin(), segs.end(), [](const auto& x, const auto& y) { return x.error < y.error; });
    const auto seg = *worst;
    const double mid = 0.5 * (seg.a + seg.b);
    *worst = detail::gauss_kronrod_15(f, seg.a, mid);
    segs.push_back(detail::gauss_kronrod_15(f, mid, seg.b));
  }
  // Sum small contributions first.
  std::sort(segs.begin(), segs.end(), [](const auto& x, const auto& y) { return std::abs(x.value) < std::abs(y.value); });
  QuadratureResult r;
  for (const auto& s : segs) r.value += s.value;
  r.error = total_error();
  return r;
}

/// Ground-state energy per site of the infinite chain from the free-fermion dispersion,
/// e = -(1/pi) * int_0^pi sqrt(1 + lambda^2 - 2 lambda cos k) dk.
inline OracleResult exact_energy_density(const TFIMParams& params) {
  const double l = params.lambda;
  const auto integrand = [l](double k) { return std::sqrt(std::max(0.0, 1.0 + l * l - 2.0 * l * std::cos(k))); };
  const auto q = integrate_adaptive(integrand, 0.0, kPi, 1e-12);
  OracleResult r;
  r.energy_density = -q.value / kPi;
  r.method = OracleMethod::kQuadrature;
  r.convergence_estimate = q.error / kPi;
  return r;
}

// ---------------------------------------------------------------------------
// Exact diagonalization of finite chains (Lanczos in the even-parity sector).

enum class ChainBoundary { kOpen, kPeriodic };

namespace detail {

/// y = H x for the N-site chain; bit (N-1-j) of the index is site j, |0> is Z = +1.
inline void tfim_apply(int n, double lambda, ChainBoundary bc, const RealVector& x, RealVector& y) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  const int bonds = bc == ChainBoundary::kPeriodic ? n : n - 1;
  y.setZero(dim);
  for (Eigen::Index s = 0; s < dim; ++s) {
    double diag = 0.0;
    for (int b = 0; b < bonds; ++b) {
      const int i = n - 1 - b, j = n - 1 - ((b + 1) % n);
      diag -= (((s >> i) ^ (s >> j)) & 1) ? -1.0 : 1.0;
    }
    y(s) += diag * x(s);
    if (lambda != 0.0)
      for (int site = 0; site < n; ++site) y(s ^ (Eigen::Index{1} << site)) -= lambda * x(s);
  }
}

inline void symmetrize_parity(RealVector& v) {
  const Eigen::Index dim = v.size();
  for (Eigen::Index s = 0; s < dim / 2; ++s) {
    const Eigen::Index t = (dim - 1) ^ s;
    const double m = 0.5 * (v(s) + v(t));
    v(s) = m;
    v(t) = m;
  }
}

}  // namespace detail

struct GroundState {
  double energy = 0.0;
  RealVector vector;
};

/// Lanczos with full reorthogonalization, restricted to the global-flip-even sector.
inline GroundState tfim_ground_state(int n, double lambda, ChainBoundary bc, int max_krylov = 300) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  std::mt19937_64 rng(1234);
  std::normal_distribution<double> normal;
  RealVector v(dim);
  for (auto& x : v) x = normal(rng);
  detail::symmetrize_parity(v);
  v.normalize();

  const int m_max = static_cast<int>(std::min<Eigen::Index>(max_krylov, dim));
  std::vector<RealVector> basis{v};
  std::vector<double> alpha, beta;
  RealVector w;
  double previous = std::numeric_limits<double>::infinity();
  GroundState gs;
  for (int m = 0; m < m_max; ++m) {
    detail::tfim_apply(n, lambda, bc, basis.back(), w);
    const double a = basis.back().dot(w);
    alpha.push_back(a);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis) w -= q.dot(w) * q;
    detail::symmetrize_parity(w);
    const double b = w.norm();

    const int k = static_cast<int>(alpha.size());
    RealMatrix t = RealMatrix::Zero(k, k);
    for (int i = 0; i < k; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(t);
    const double e0 = es.eigenvalues()(0);
    const bool done = b < 1e-12 || std::abs(e0 - previous) < 1e-14 * std::max(1.0, std::abs(e0)) || m + 1 == m_max;
    previous = e0;
    if (done) {
      gs.energy = e0;
      gs.vector = RealVector::Zero(dim);
      for (int i = 0; i < k; ++i) gs.vector += es.eigenvectors()(i, 0) * basis[i];
      gs.vector.normalize();
      break;
    }
    beta.push_back(b);
    basis.push_back(w / b);
  }
  return gs;
}

/// Entropy (bits) of the first floor(N/2) sites of a real state vector.
inline double bipartite_entropy(const RealVector& psi, int n) {
  const int left = n / 2;
  const Eigen::Index rows = Eigen::Index{1} << left, cols = Eigen::Index{1} << (n - left);
  const RealMatrix m = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(psi.data(), rows, cols);
  Eigen::JacobiSVD<RealMatrix> svd(m);
  double s = 0.0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    const double p = svd.singularValues()(i) * svd.singularValues()(i);
    if (p > 1e-300) s -= p * std::log2(p);
  }
  return std::max(0.0, s);
}

inline constexpr int kMaxExactDiagSites = 14;

/// Ground-state energy density and half-chain entropy of a finite chain. Open chains report
/// energy per bond, periodic chains energy per site.
inline OracleResult exact_diag(const TFIMParams& params, int n_sites, ChainBoundary bc) {
  if (n_sites < 2) throw Error("exact_diag: need at least 2 sites");
  if (n_sites > kMaxExactDiagSites) throw Error("exact_diag: refusing more than 14 sites (memory guard)");
  const GroundState gs = tfim_ground_state(n_sites, params.lambda, bc);
  RealVector r;
  detail::tfim_apply(n_sites, params.lambda, bc, gs.vector, r);
  OracleResult out;
  const int bonds = bc == ChainBoundary::kPeriodic ? n_sites : n_sites - 1;
  out.energy_density = gs.energy / bonds;
  out.entropy_bits = bipartite_entropy(gs.vector, n_sites);
  out.method = OracleMethod::kExactDiag;
  out.convergence_estimate = (r - gs.energy * gs.vector).norm();
  return out;
}


// ---------------------------------------------------------------------------
// Half-chain entanglement entropy from converged high bond-dimension uniform MPS.

/// Bond Hamiltonian -(ZZ + lambda/2 (XI + IX)) in the basis |s t>, |0> = Z-up.
inline RealMatrix tfim_bond_hamiltonian(double lambda) {
  RealMatrix h = RealMatrix::Zero(4, 4);
  for (int s = 0; s < 4; ++s) {
    const int z1 = (s >> 1) & 1 ? -1 : 1, z2 = s & 1 ? -1 : 1;
    h(s, s) = -double(z1 * z2);
    h(s ^ 2, s) -= 0.5 * lambda;
    h(s ^ 1, s) -= 0.5 * lambda;
  }
  return h;
}

struct EntropyRampOptions {
  std::vector<int> bond_dimensions{8, 16, 32, 64};
  double accept_tol = 1e-5;  // bits between successive bond dimensions
};

/// Entropy across the central cut of the infinite chain. In the ordered phase the solver
/// converges to a symmetry-broken state; the symmetric (cat) branch adds exactly one bit.
inline OracleResult exact_half_chain_entropy(const TFIMParams& params, const EntropyRampOptions& opt = {}) {
  const double lambda = params.lambda;
  if (std::abs(lambda - 1.0) < 1e-12) throw Error("exact_half_chain_entropy: entropy diverges at lambda = 1");
  OracleResult out;
  out.method = OracleMethod::kHighChiMps;
  out.energy_density = exact_energy_density(params).energy_density;
  if (lambda == 0.0) {
    // Product state |0...0>, exact at every bond dimension.
    out.entropy_bits = 1.0;
    out.convergence_estimate = 0.0;
    return out;
  }

  static std::mutex cache_mutex;
  static std::map<std::pair<double, double>, OracleResult> cache;
  const auto key = std::make_pair(lambda, opt.accept_tol * 1e6 + opt.bond_dimensions.back());
  {
    std::lock_guard lock(cache_mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }

  const RealMatrix h = tfim_bond_hamiltonian(lambda);
  UniformMps previous_state;
  double previous = std::numeric_limits<double>::quiet_NaN();
  out.converged = false;
  out.convergence_estimate = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < opt.bond_dimensions.size(); ++i) {
    const auto res = vumps_ground_state(h, opt.bond_dimensions[i], {}, i == 0 ? nullptr : &previous_state);
    previous_state = res.state;
    const double s = res.entropy_bits() + (lambda < 1.0 ? 1.0 : 0.0);
    out.entropy_bits = s;
    if (i > 0) {
      out.convergence_estimate = std::abs(s - previous);
      if (out.convergence_estimate < opt.accept_tol) {
        out.converged = true;
        break;
      }
    }
    previous = s;
  }
  std::lock_guard lock(cache_mutex);
  cache.emplace(key, out);
  return out;
}

}  // namespace qmps

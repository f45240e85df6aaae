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

// Uniform MPS on a half-infinite chain and the bond-space channel it induces.
//
// The site tensor V_sigma^{alpha beta} carries the bond state from left to right:
// the Kraus operators of one site are (K_sigma)_{beta alpha} = V_sigma^{alpha beta}, so
// one iteration of the channel is rho' = sum_sigma K_sigma rho K_sigma^dagger. Operators
// on bond space are vectorized row-major, which makes the transfer matrix
// T = sum_sigma K_sigma (x) conj(K_sigma).

#include "qmps/linalg.hpp"
#include "qmps/optimize.hpp"

#include <algorithm>
#include <array>
#include <optional>

namespace qmps {

/// Rank-3 uniform site tensor, stored as the pair of chi x chi matrices V_0, V_1.
class MPSTensor {
 public:
  explicit MPSTensor(std::array<Matrix, 2> v) : v_(std::move(v)) {
    if (v_[0].rows() != v_[0].cols() || v_[1].rows() != v_[1].cols() || v_[0].rows() != v_[1].rows())
      throw Error("MPSTensor: site matrices must be square and equally sized");
    n_bond_qubits_ = log2_exact(v_[0].rows());
  }

  /// Builds the tensor from Kraus operators, V_sigma = K_sigma^T.
  static MPSTensor from_kraus(const Matrix& k0, const Matrix& k1) {
    return MPSTensor({k0.transpose(), k1.transpose()});
  }

  int chi() const { return static_cast<int>(v_[0].rows()); }
  int n_bond_qubits() const { return n_bond_qubits_; }
  const Matrix& site_matrix(int sigma) const { return v_.at(static_cast<std::size_t>(sigma)); }
  Complex operator()(int sigma, int alpha, int beta) const { return v_.at(static_cast<std::size_t>(sigma))(alpha, beta); }
  Matrix kraus(int sigma) const { return site_matrix(sigma).transpose(); }

 private:
  std::array<Matrix, 2> v_;
  int n_bond_qubits_ = 0;
};

inline bool is_isometry(const MPSTensor& tensor, double tol) {
  const Matrix s = tensor.site_matrix(0) * tensor.site_matrix(0).adjoint() +
                   tensor.site_matrix(1) * tensor.site_matrix(1).adjoint();
  return (s - Matrix::Identity(tensor.chi(), tensor.chi())).norm() <= tol;
}

struct BondChannel {
  std::array<Matrix, 2> kraus;
  Matrix transfer;

  int chi() const { return static_cast<int>(kraus[0].rows()); }
};

inline BondChannel bond_channel(const MPSTensor& tensor) {
  if (!is_isometry(tensor, 1e-8)) throw Error("bond_channel: tensor is not an isometry");
  BondChannel ch;
  ch.kraus = {tensor.kraus(0), tensor.kraus(1)};
  ch.transfer = kron(ch.kraus[0], ch.kraus[0].conjugate()) + kron(ch.kraus[1], ch.kraus[1].conjugate());
  return ch;
}

inline Matrix apply_channel(const BondChannel& channel, const Matrix& rho) {
  if (rho.rows() != channel.chi() || rho.cols() != channel.chi())
    throw Error("apply_channel: density matrix dimension does not match the bond dimension");
  return channel.kraus[0] * rho * channel.kraus[0].adjoint() + channel.kraus[1] * rho * channel.kraus[1].adjoint();
}

/// n-fold application of the channel.
inline Matrix iterate_channel(const BondChannel& channel, Matrix rho, int steps) {
  for (int s = 0; s < steps; ++s) rho = apply_channel(channel, rho);
  return rho;
}

inline Matrix unvec(const Vector& v, int chi) {
  Matrix m(chi, chi);
  for (int a = 0; a < chi; ++a)
    for (int b = 0; b < chi; ++b) m(a, b) = v(a * chi + b);
  return m;
}

inline Vector vec(const Matrix& m) {
  const auto chi = m.rows();
  Vector v(chi * chi);
  for (Eigen::Index a = 0; a < chi; ++a)
    for (Eigen::Index b = 0; b < chi; ++b) v(a * chi + b) = m(a, b);
  return v;
}

/// Hermitize, clip negative eigenvalues to zero, renormalize to unit trace.
inline Matrix to_density_matrix(const Matrix& m) {
  Complex tr = m.trace();
  Matrix h = m;
  if (std::abs(tr) > 0) h *= std::conj(tr) / std::abs(tr);  // remove an arbitrary eigenvector phase
  h = hermitian_part(h);
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  RealVector ev = es.eigenvalues().cwiseMax(0.0);
  if (ev.sum() <= 0) throw Error("fixed point has no positive weight");
  ev /= ev.sum();
  return es.eigenvectors() * ev.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

struct BoundaryState {
  Vector vector;

  BoundaryState() = default;
  explicit BoundaryState(Vector v) : vector(std::move(v)) {
    if (std::abs(vector.norm() - 1.0) > 1e-12) throw Error("BoundaryState must be a unit vector");
  }
  static BoundaryState basis(int chi, int index = 0) {
    Vector v = Vector::Zero(chi);
    v(index) = 1.0;
    return BoundaryState(v);
  }
  /// Equal superposition of all bond basis states, the symmetric boundary.
  static BoundaryState uniform(int chi) { return BoundaryState(Vector::Constant(chi, 1.0 / std::sqrt(double(chi)))); }
  Matrix density() const { return vector * vector.adjoint(); }
  int chi() const { return static_cast<int>(vector.size()); }
};

struct ChannelSpectrum {
  Vector eigenvalues;          // descending modulus
  Matrix fixed_point;          // Hermitian PSD, unit trace
  Matrix subdominant_mode;     // right eigen-operator of the slowest decaying eigenvalue
  Matrix subdominant_dual;     // left eigen-operator: Tr(dual^dagger rho) is the mode's amplitude in rho
  Complex subdominant_eigenvalue{0.0};
  int fixed_point_multiplicity = 1;
  Status status = Status::kOk;

  bool degenerate() const { return status == Status::kDegenerate; }
  int chi() const { return static_cast<int>(fixed_point.rows()); }
};

namespace detail {

inline constexpr double kUnitEigenvalueTol = 1e-9;

/// Columns spanning the k-dimensional (approximate) null space of a.
inline Matrix null_space(const Matrix& a, int k) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
  return svd.matrixV().rightCols(k);
}

}  // namespace detail

/// Full eigendecomposition of the transfer matrix. For a degenerate unit eigenvalue the
/// fixed point is the limit reached from `boundary` (|0...0> when not given).
inline ChannelSpectrum transfer_spectrum(const BondChannel& channel,
                                         const std::optional<BoundaryState>& boundary = std::nullopt) {
  const int chi = channel.chi();
  const int d = chi * chi;
  Eigen::ComplexEigenSolver<Matrix> es(channel.transfer);
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  const Vector& ev = es.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double ma = std::abs(ev(a)), mb = std::abs(ev(b));
    if (std::abs(ma - mb) > 1e-13) return ma > mb;
    if (std::abs(ev(a).real() - ev(b).real()) > 1e-13) return ev(a).real() > ev(b).real();
    return ev(a).imag() > ev(b).imag();
  });

  ChannelSpectrum out;
  out.eigenvalues.resize(d);
  for (int i = 0; i < d; ++i) out.eigenvalues(i) = ev(order[i]);

  std::vector<int> unit, rest;
  for (int i = 0; i < d; ++i) (std::abs(ev(order[i]) - 1.0) <= detail::kUnitEigenvalueTol ? unit : rest).push_back(order[i]);
  if (unit.empty()) throw Error("transfer_spectrum: channel has no unit eigenvalue");
  out.fixed_point_multiplicity = static_cast<int>(unit.size());

  const Matrix shifted = channel.transfer - Matrix::Identity(d, d);
  if (unit.size() == 1) {
    out.fixed_point = to_density_matrix(unvec(detail::null_space(shifted, 1).col(0), chi));
  } else {
    out.status = Status::kDegenerate;
    const int k = static_cast<int>(unit.size());
    const Matrix right = detail::null_space(shifted, k);
    const Matrix left = detail::null_space(shifted.adjoint(), k);
    const Matrix seed = (boundary ? *boundary : BoundaryState::basis(chi)).density();
    const Matrix gram = left.adjoint() * right;
    const Vector projected = right * gram.fullPivLu().solve(left.adjoint() * vec(seed));
    out.fixed_point = to_density_matrix(unvec(projected, chi));
  }

  if (!rest.empty()) {
    // `rest` inherits the descending-modulus order.
    const Complex mu = ev(rest.front());
    out.subdominant_eigenvalue = mu;
    const Matrix shifted_mu = channel.transfer - mu * Matrix::Identity(d, d);
    out.subdominant_mode = unvec(detail::null_space(shifted_mu, 1).col(0), chi);
    out.subdominant_dual = unvec(detail::null_space(shifted_mu.adjoint(), 1).col(0), chi);
  } else {
    out.subdominant_mode = Matrix::Zero(chi, chi);
    out.subdominant_dual = Matrix::Zero(chi, chi);
  }
  return out;
}

/// Unique fixed point from one linear solve, or nullopt when the unit eigenvalue is (nearly)
/// degenerate. Cheaper than transfer_spectrum inside optimization loops.
inline std::optional<Matrix> unique_fixed_point(const BondChannel& channel) {
  const int chi = channel.chi();
  const int d = chi * chi;
  Matrix a = channel.transfer - Matrix::Identity(d, d);
  a.row(0).setZero();
  for (int i = 0; i < chi; ++i) a(0, i * chi + i) = 1.0;  // trace normalization replaces one equation
  Eigen::FullPivLU<Matrix> lu(a);
  lu.setThreshold(1e-11);
  if (lu.rank() < d) return std::nullopt;
  const Vector x = lu.solve(Vector::Unit(d, 0));
  if ((channel.transfer * x - x).norm() > 1e-9) return std::nullopt;
  return to_density_matrix(unvec(x, chi));
}

struct EntropyResult {
  double entropy_bits = 0.0;
  std::vector<double> schmidt_spectrum;  // descending
};

/// Von Neumann entropy in bits. Eigenvalues down to -1e-8 are treated as round-off and clipped.
inline EntropyResult entanglement_entropy(const Matrix& rho) {
  if (rho.rows() != rho.cols()) throw Error("entanglement_entropy: matrix is not square");
  if (!is_hermitian(rho, 1e-8)) throw Error("entanglement_entropy: matrix is not Hermitian");
  if (std::abs(rho.trace() - 1.0) > 1e-8) throw Error("entanglement_entropy: trace is not 1");
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(rho), Eigen::EigenvaluesOnly);
  std::vector<double> p(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  for (double& x : p) {
    if (x < -1e-8) throw Error("entanglement_entropy: matrix has a negative eigenvalue");
    x = std::max(x, 0.0);
  }
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& x : p) x /= total;
  std::sort(p.begin(), p.end(), std::greater<>());
  double s = 0.0;
  for (double x : p)
    if (x > 0) s -= x * std::log2(x);
  return {std::max(s, 0.0), p};
}

inline EntropyResult half_chain_entropy(const MPSTensor& tensor, const BoundaryState& boundary, int j) {
  if (j < 0) throw Error("half_chain_entropy: j must be nonnegative");
  const BondChannel ch = bond_channel(tensor);
  return entanglement_entropy(iterate_channel(ch, boundary.density(), j));
}

/// rho -> sum_{s,s'} O_{s' s} K_s rho K_{s'}^dagger; the trace of the result is <O> on the site.
inline Matrix insert_operator(const BondChannel& channel, const Matrix& op, const Matrix& rho) {
  Matrix out = Matrix::Zero(rho.rows(), rho.cols());
  for (int s = 0; s < 2; ++s)
    for (int sp = 0; sp < 2; ++sp)
      if (op(sp, s) != Complex(0.0)) out += op(sp, s) * channel.kraus[s] * rho * channel.kraus[sp].adjoint();
  return out;
}

/// <op> on site j (1-based) of the half-infinite chain grown from `boundary`.
inline double expectation_local(const MPSTensor& tensor, const BoundaryState& boundary, int j, const Matrix& op) {
  if (j < 1) throw Error("expectation_local: j must be at least 1");
  const BondChannel ch = bond_channel(tensor);
  const Matrix rho = iterate_channel(ch, boundary.density(), j - 1);
  return insert_operator(ch, op, rho).trace().real();
}

/// <op_a on site j, op_b on site j+1>.
inline double expectation_nn(const MPSTensor& tensor, const BoundaryState& boundary, int j, const Matrix& op_a,
                             const Matrix& op_b) {
  if (j < 1) throw Error("expectation_nn: j must be at least 1");
  const BondChannel ch = bond_channel(tensor);
  const Matrix rho = iterate_channel(ch, boundary.density(), j - 1);
  return insert_operator(ch, op_b, insert_operator(ch, op_a, rho)).trace().real();
}

/// Site-independent expectations evaluated directly at a bond state (usually the fixed point).
inline double local_at(const BondChannel& ch, const Matrix& rho, const Matrix& op) {
  return insert_operator(ch, op, rho).trace().real();
}
inline double nn_at(const BondChannel& ch, const Matrix& rho, const Matrix& op_a, const Matrix& op_b) {
  return insert_operator(ch, op_b, insert_operator(ch, op_a, rho)).trace().real();
}

inline int burn_in_length(const ChannelSpectrum& spectrum, double tol) {
  if (spectrum.degenerate())
    throw Error("burn_in_length: fixed point is degenerate; choose the iteration count manually");
  if (!(tol > 0 && tol < 1)) throw Error("burn_in_length: tol must lie in (0, 1)");
  const double mu = std::abs(spectrum.subdominant_eigenvalue);
  if (mu <= 0.0) return 1;
  if (mu >= 1.0 - 1e-12) throw Error("burn_in_length: subdominant eigenvalue on the unit circle");
  return std::max(1, static_cast<int>(std::ceil(std::log(tol) / std::log(mu) - 1e-12)));
}

inline int burn_in_length(const BondChannel& channel, double tol) {
  return burn_in_length(transfer_spectrum(channel), tol);
}

struct BoundarySelection {
  BoundaryState boundary;
  double overlap = 0.0;
  Status status = Status::kOk;
};

/// Pure boundary state with minimal amplitude on the slowest decaying channel mode.
/// The amplitude of a mode in rho is Tr(D^dagger rho) with D the dual (left) eigen-operator.
inline BoundarySelection select_boundary(const ChannelSpectrum& spectrum, std::uint64_t seed = 7, int restarts = 16) {
  const int chi = spectrum.chi();
  const Matrix& dual = spectrum.subdominant_dual;
  if (dual.norm() == 0.0) return {BoundaryState::basis(chi), 0.0, Status::kOk};
  const Matrix a = dual.adjoint() / dual.norm();
  auto to_state = [chi](const RealVector& x) {
    Vector v(chi);
    for (int i = 0; i < chi; ++i) v(i) = Complex(x(2 * i), x(2 * i + 1));
    const double n = v.norm();
    return n > 0 ? Vector(v / n) : Vector(Vector::Unit(chi, 0));
  };
  auto overlap = [&](const Vector& v) { return std::abs(Complex(v.adjoint() * a * v)); };
  const Objective objective = [&](const RealVector& x) {
    const Vector v = to_state(x);
    const double o = overlap(v);
    const double n2 = x.squaredNorm();
    return o * o + 1e-3 * (n2 - 1.0) * (n2 - 1.0);  // pins the scale of the redundant radial direction
  };
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector best = Vector::Unit(chi, 0);
  double best_overlap = overlap(best);
  for (int r = 0; r < restarts && best_overlap > 1e-13; ++r) {
    RealVector x0(2 * chi);
    for (auto& xi : x0) xi = normal(rng);
    x0.normalize();
    MinimizeOptions opt;
    opt.initial_step = 0.3;
    opt.ftol = 1e-30;
    opt.xtol = 1e-12;
    opt.max_evaluations = 20000;
    const auto res = nelder_mead(objective, x0, opt);
    const Vector v = to_state(res.x);
    if (overlap(v) < best_overlap) {
      best_overlap = overlap(v);
      best = v;
    }
  }
  // Fix the global phase so the first nonzero amplitude is real and positive.
  for (int i = 0; i < chi; ++i)
    if (std::abs(best(i)) > 1e-12) {
      best *= std::conj(best(i)) / std::abs(best(i));
      break;
    }
  best.normalize();
  const Status status = best_overlap <= 1e-8 ? Status::kOk : Status::kWarning;
  return {BoundaryState(best), best_overlap, status};
}

}  // namespace qmps

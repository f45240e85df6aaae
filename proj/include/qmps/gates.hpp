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

// Fixed gate matrices. Rotations follow R_a(theta) = exp(-i theta P_a / 2); in two-qubit
// matrices the first factor is the most significant bit.

#include "qmps/linalg.hpp"

namespace qmps {

enum class Axis { kX, kY, kZ };

inline char to_char(Axis a) { return a == Axis::kX ? 'X' : (a == Axis::kY ? 'Y' : 'Z'); }

inline Axis axis_from_char(char c) {
  switch (c) {
    case 'X': case 'x': return Axis::kX;
    case 'Y': case 'y': return Axis::kY;
    case 'Z': case 'z': return Axis::kZ;
  }
  throw Error(std::string("unknown rotation axis '") + c + "'");
}

inline Matrix pauli_matrix(Axis a) {
  return a == Axis::kX ? pauli::X() : (a == Axis::kY ? pauli::Y() : pauli::Z());
}

inline Matrix rotation(Axis a, double theta) {
  return std::cos(theta / 2) * pauli::I() - kI * std::sin(theta / 2) * pauli_matrix(a);
}
inline Matrix rx(double theta) { return rotation(Axis::kX, theta); }
inline Matrix ry(double theta) { return rotation(Axis::kY, theta); }
inline Matrix rz(double theta) { return rotation(Axis::kZ, theta); }

inline Matrix cz_matrix() {
  Matrix m = Matrix::Identity(4, 4);
  m(3, 3) = -1.0;
  return m;
}

/// CNOT with the first (most significant) qubit as control.
inline Matrix cnot_matrix() {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1.0;
  return m;
}

inline Matrix swap_matrix() {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = m(1, 2) = m(2, 1) = m(3, 3) = 1.0;
  return m;
}

/// Native entangling gate U_zz = exp(i pi/4 Z x Z).
inline Matrix uzz_matrix() {
  const Complex p = std::exp(kI * (kPi / 4)), m = std::exp(-kI * (kPi / 4));
  Matrix u = Matrix::Zero(4, 4);
  u(0, 0) = p;
  u(1, 1) = m;
  u(2, 2) = m;
  u(3, 3) = p;
  return u;
}

}  // namespace qmps

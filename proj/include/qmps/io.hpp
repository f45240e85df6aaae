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

// JSON / CSV serialization of circuits, shot tables and noise profiles.

#include "qmps/circuit.hpp"
#include "qmps/noise.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace qmps {

using json = nlohmann::json;

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(row);
  }
  return rows;
}

inline Matrix matrix_from_json(const json& j) {
  const auto n = static_cast<Eigen::Index>(j.size());
  Matrix m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    if (j[r].size() != j.size()) throw Error("matrix_from_json: matrix must be square");
    for (Eigen::Index c = 0; c < n; ++c) m(r, c) = Complex(j[r][c][0].get<double>(), j[r][c][1].get<double>());
  }
  return m;
}

inline json op_to_json(const CircuitOp& op) {
  json j{{"type", to_string(op.type)}, {"wires", op.wires}};
  switch (op.type) {
    case OpType::kGate:
      if (op.native) {
        if (op.native->is_uzz())
          j["fragment"] = {{"kind", "uzz"}};
        else
          j["fragment"] = {{"kind", "rotation"}, {"axis", std::string(1, to_char(op.native->axis))}, {"angle", op.native->angle}};
      } else {
        j["matrix"] = matrix_to_json(op.matrix);
      }
      break;
    case OpType::kMeasure:
      j["basis"] = std::string(1, to_char(op.basis));
      j["label"] = op.label;
      break;
    case OpType::kLeakCheck:
      j["label"] = op.label;
      break;
    case OpType::kReset:
      break;
  }
  return j;
}

inline CircuitOp op_from_json(const json& j) {
  const std::string type = j.at("type");
  const std::vector<int> wires = j.at("wires").get<std::vector<int>>();
  if (type == "gate") {
    if (j.contains("fragment")) {
      const auto& f = j["fragment"];
      if (f.at("kind") == "uzz") return CircuitOp::gate(NativeOp::uzz(wires.at(0), wires.at(1)));
      return CircuitOp::gate(NativeOp::rot(axis_from_char(f.at("axis").get<std::string>().at(0)), f.at("angle"), wires.at(0)));
    }
    return CircuitOp::gate(matrix_from_json(j.at("matrix")), wires);
  }
  if (type == "measure") return CircuitOp::measure(wires.at(0), axis_from_char(j.at("basis").get<std::string>().at(0)), j.at("label"));
  if (type == "reset") return CircuitOp::reset(wires.at(0));
  if (type == "leak_check") return CircuitOp::leak_check(wires, j.at("label"));
  throw Error("op_from_json: unknown op type " + type);
}

inline json circuit_to_json(const Circuit& c) {
  json ops = json::array();
  for (const auto& op : c.ops) ops.push_back(op_to_json(op));
  json meta{{"chi", c.metadata.chi}, {"iterations", c.metadata.iterations}, {"purpose", to_string(c.metadata.purpose)}};
  if (!std::isnan(c.metadata.lambda)) meta["lambda"] = c.metadata.lambda;
  if (!c.metadata.setting.empty()) meta["setting"] = c.metadata.setting;
  return {{"n_wires", c.n_wires}, {"metadata", meta}, {"ops", ops}};
}

inline Circuit circuit_from_json(const json& j) {
  Circuit c;
  c.n_wires = j.at("n_wires");
  for (const auto& op : j.at("ops")) c.ops.push_back(op_from_json(op));
  if (j.contains("metadata")) {
    const auto& m = j["metadata"];
    c.metadata.chi = m.value("chi", 1 << (c.n_wires - 1));
    c.metadata.iterations = m.value("iterations", 0);
    c.metadata.purpose = m.value("purpose", std::string("energy")) == "tomography" ? Purpose::kTomography : Purpose::kEnergy;
    c.metadata.lambda = m.value("lambda", std::numeric_limits<double>::quiet_NaN());
    c.metadata.setting = m.value("setting", std::string());
  }
  c.validate();
  return c;
}

/// One row per shot: measurement labels (in the given order), leak flag, seed.
inline std::string shots_to_csv(const std::vector<ShotRecord>& shots, const std::vector<std::string>& labels) {
  std::ostringstream out;
  for (const auto& l : labels) out << l << ',';
  out << "leaked,seed\n";
  for (const auto& s : shots) {
    for (const auto& l : labels) {
      const auto it = s.outcomes.find(l);
      if (it != s.outcomes.end()) out << it->second;
      out << ',';
    }
    out << (s.leaked ? 1 : 0) << ',' << s.seed << '\n';
  }
  return out.str();
}

inline json noise_to_json(const NoiseModel& n) {
  return {{"p2", n.p2}, {"p1", n.p1}, {"p_leak", n.p_leak}, {"eps_meas", n.eps_meas}, {"eps_reset", n.eps_reset}};
}

/// Missing fields keep the values of `base`.
inline NoiseModel noise_from_json(const json& j, NoiseModel base = NoiseModel::none()) {
  if (!j.is_object()) throw Error("noise profile must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (k == "p2") base.p2 = v.get<double>();
    else if (k == "p1") base.p1 = v.get<double>();
    else if (k == "p_leak") base.p_leak = v.get<double>();
    else if (k == "eps_meas") base.eps_meas = v.get<double>();
    else if (k == "eps_reset") base.eps_reset = v.get<double>();
    else throw Error("noise profile: unknown field " + k);
  }
  base.validate();
  return base;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error("invalid JSON in " + path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

/// Number formatting for tables (12 significant digits).
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace qmps

#pragma once

// JSON serialization of harmonic coefficients. The coefficient array is flat
// in basis_index order (n ascending, m from -n to n), one [x, y, z] triple
// per basis function. Doubles are written in shortest round-trip form, so a
// save/load cycle is bit exact.

#include "hemiparam/harmonics.hpp"

#include "json.hpp"

#include <fstream>

namespace hemiparam {

inline nlohmann::json coeffs_to_json(const HarmonicCoeffs& hc) {
  nlohmann::json j;
  j["n_max"] = hc.n_max;
  j["eps_eta"] = hc.eps_eta;
  j["spheroid"] = hc.spheroid.to_json();
  j["registration"] = hc.registration.to_json();
  j["fit_rms_residual"] = hc.fit_rms_residual;
  nlohmann::json arr = nlohmann::json::array();
  for (int i = 0; i < hc.coeffs.rows(); ++i)
    arr.push_back({hc.coeffs(i, 0), hc.coeffs(i, 1), hc.coeffs(i, 2)});
  j["coefficients"] = std::move(arr);
  return j;
}

inline HarmonicCoeffs coeffs_from_json(const nlohmann::json& j) {
  HarmonicCoeffs hc;
  hc.n_max = j.at("n_max").get<int>();
  hc.eps_eta = j.at("eps_eta").get<double>();
  hc.spheroid = Spheroid::from_json(j.at("spheroid"));
  hc.registration = RigidTransform::from_json(j.at("registration"));
  hc.fit_rms_residual = j.value("fit_rms_residual", 0.0);
  const auto& arr = j.at("coefficients");
  const int k = basis_size(hc.n_max);
  if (static_cast<int>(arr.size()) != k)
    throw MeshError("coefficient file: expected " + std::to_string(k) +
                    " entries, found " + std::to_string(arr.size()));
  hc.coeffs.resize(k, 3);
  for (int i = 0; i < k; ++i)
    for (int ch = 0; ch < 3; ++ch) hc.coeffs(i, ch) = arr.at(i).at(ch).get<double>();
  return hc;
}

inline void save_coeffs(const HarmonicCoeffs& hc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot open file for writing: " + path);
  out << coeffs_to_json(hc).dump(1) << '\n';
  if (!out) throw MeshError("write failure: " + path);
}

inline HarmonicCoeffs load_coeffs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open coefficient file: " + path);
  nlohmann::json j;
  in >> j;
  return coeffs_from_json(j);
}

}  // namespace hemiparam

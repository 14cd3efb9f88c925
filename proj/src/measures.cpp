#include "entangle/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace entangle {

namespace {

// sigma_y x sigma_y, the spin-flip kernel; real antidiagonal (-1, 1, 1, -1)
Matrix spin_flip_kernel() {
  Matrix y = Matrix::Zero(4, 4);
  y(0, 3) = -1.0;
  y(1, 2) = 1.0;
  y(2, 1) = 1.0;
  y(3, 0) = -1.0;
  return y;
}

PureState dominant_eigenvector(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
  Eigen::Index top;
  es.eigenvalues().maxCoeff(&top);
  return PureState(es.eigenvectors().col(top), rho.labels());
}

} // namespace

double concurrence(const DensityMatrix& rho) {
  if (rho.dim() != 4) {
    throw std::invalid_argument("concurrence: needs a two-qubit state");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
  const auto& ev = es.eigenvalues();
  double cutoff = 64.0 * std::numeric_limits<double>::epsilon() * ev.maxCoeff();

  int rank = 0;
  for (Eigen::Index i = 0; i < 4; ++i) {
    if (ev[i] > cutoff) ++rank;
  }
  if (rank == 0) return 0.0;

  Matrix psi(4, rank);
  int col = 0;
  for (Eigen::Index i = 0; i < 4; ++i) {
    if (ev[i] > cutoff) psi.col(col++) = std::sqrt(ev[i]) * es.eigenvectors().col(i);
  }

  static const Matrix y = spin_flip_kernel();
  Matrix tau = psi.transpose() * y * psi;
  Eigen::JacobiSVD<Matrix> svd(tau);
  const auto& s = svd.singularValues(); // descending

  double c = s[0];
  for (Eigen::Index i = 1; i < s.size(); ++i) c -= s[i];
  return std::max(0.0, c);
}

double tangle(const DensityMatrix& rho) {
  double c = concurrence(rho);
  return c * c;
}

double three_tangle(const PureState& psi) {
  if (psi.num_qubits() != 3) {
    throw std::invalid_argument("three_tangle: needs a three-qubit state");
  }
  DensityMatrix rho = density(psi);
  const Labels& l = psi.labels();
  DensityMatrix rho_a = partial_trace(rho, {l[0]});
  double tau_a_bc = 4.0 * (rho_a.matrix()(0, 0) * rho_a.matrix()(1, 1) -
                           rho_a.matrix()(0, 1) * rho_a.matrix()(1, 0))
                              .real();
  double tau_ab = tangle(partial_trace(rho, {l[0], l[1]}));
  double tau_ac = tangle(partial_trace(rho, {l[0], l[2]}));
  return std::clamp(tau_a_bc - tau_ab - tau_ac, 0.0, 1.0);
}

double negativity(const DensityMatrix& rho, const Labels& part) {
  Matrix pt = partial_transpose(rho, part);
  Eigen::SelfAdjointEigenSolver<Matrix> es(pt, Eigen::EigenvaluesOnly);
  double neg = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    double e = es.eigenvalues()[i];
    if (e < 0.0) neg -= e;
  }
  return 2.0 * neg;
}

double tripartite_negativity(const DensityMatrix& rho) {
  if (rho.num_qubits() != 3) {
    throw std::invalid_argument("tripartite_negativity: needs a three-qubit state");
  }
  double prod = 1.0;
  for (const auto& l : rho.labels()) prod *= negativity(rho, {l});
  return std::cbrt(prod);
}

double w_witness(const DensityMatrix& rho) {
  if (rho.num_qubits() != 3) {
    throw std::invalid_argument("w_witness: needs a three-qubit state");
  }
  return 2.0 / 3.0 - fidelity(w_state(), rho);
}

double closed_form_residual_tangle(double theta) {
  if (theta < -1e-12 || theta > std::numbers::pi / 4 + 1e-12) {
    throw std::invalid_argument("closed_form_residual_tangle: theta outside [0, pi/4]");
  }
  double s = std::sin(2.0 * theta);
  double d = std::cos(4.0 * theta) - 2.0;
  return 4.0 * s * s * s * s / (d * d);
}

namespace {

EntanglementReport profile_impl(const DensityMatrix& rho, const StateVariant* target) {
  if (rho.num_qubits() != 3) {
    throw std::invalid_argument("robustness_profile: needs a three-qubit state");
  }
  const Labels& l = rho.labels();
  EntanglementReport rep;
  for (auto [i, j] : {std::pair{0, 1}, {0, 2}, {1, 2}}) {
    double t = tangle(partial_trace(rho, {l[i], l[j]}));
    rep.pair_tangles.push_back({l[i], l[j], t});
  }
  rep.tau2_min = std::min({rep.pair_tangles[0].value, rep.pair_tangles[1].value,
                           rep.pair_tangles[2].value});
  rep.tau2_avg = (rep.pair_tangles[0].value + rep.pair_tangles[1].value +
                  rep.pair_tangles[2].value) /
                 3.0;
  rep.tripartite_negativity = tripartite_negativity(rho);
  rep.linear_entropy = linear_entropy(rho);
  rep.witness_value = w_witness(rho);
  if (rho.purity() > 1.0 - 1e-6) {
    rep.three_tangle = entangle::three_tangle(dominant_eigenvector(rho));
  }
  if (target) {
    if (const auto* p = std::get_if<PureState>(target)) {
      rep.fidelity_vs_target = fidelity(*p, rho);
    } else {
      rep.fidelity_vs_target = fidelity(rho, std::get<DensityMatrix>(*target));
    }
  }
  return rep;
}

} // namespace

EntanglementReport robustness_profile(const DensityMatrix& rho) {
  return profile_impl(rho, nullptr);
}

EntanglementReport robustness_profile(const DensityMatrix& rho, const StateVariant& target) {
  return profile_impl(rho, &target);
}

nlohmann::json report_to_json(const EntanglementReport& rep) {
  nlohmann::json j;
  nlohmann::json pairs = nlohmann::json::object();
  for (const auto& p : rep.pair_tangles) pairs[p.first + ":" + p.second] = p.value;
  j["pair_tangles"] = std::move(pairs);
  j["tau2_min"] = rep.tau2_min;
  j["tau2_avg"] = rep.tau2_avg;
  j["three_tangle"] = rep.three_tangle ? nlohmann::json(*rep.three_tangle)
                                       : nlohmann::json(nullptr);
  j["tripartite_negativity"] = rep.tripartite_negativity;
  j["linear_entropy"] = rep.linear_entropy;
  if (rep.witness_value) j["witness_value"] = *rep.witness_value;
  if (rep.fidelity_vs_target) j["fidelity_vs_target"] = *rep.fidelity_vs_target;
  if (!rep.error_bars.empty()) j["error_bars"] = rep.error_bars;
  return j;
}

PureState w_state() {
  Vector v = Vector::Zero(8);
  double a = 1.0 / std::sqrt(3.0);
  v[6] = a;  // |110>
  v[5] = a;  // |101>
  v[3] = -a; // |011>
  return PureState(std::move(v), {"c", "e", "f"});
}

PureState ghz_state() {
  Vector v = Vector::Zero(8);
  v[0] = v[7] = 1.0 / std::sqrt(2.0);
  return PureState(std::move(v), {"c", "e", "f"});
}

PureState bell_state(const std::string& which) {
  Vector v = Vector::Zero(4);
  double a = 1.0 / std::sqrt(2.0);
  if (which == "psi+") {
    v[1] = a;
    v[2] = a;
  } else if (which == "psi-") {
    v[1] = a;
    v[2] = -a;
  } else if (which == "phi+") {
    v[0] = a;
    v[3] = a;
  } else if (which == "phi-") {
    v[0] = a;
    v[3] = -a;
  } else {
    throw std::invalid_argument("bell_state: expected psi+, psi-, phi+ or phi-");
  }
  return PureState(std::move(v), {"a", "b"});
}

PureState product_zero_state() {
  Vector v = Vector::Zero(8);
  v[0] = 1.0;
  return PureState(std::move(v), {"c", "e", "f"});
}

PureState zero_tensor_bell() {
  Vector v = Vector::Zero(8);
  double a = 1.0 / std::sqrt(2.0);
  v[1] = a; // |001>
  v[2] = a; // |010>
  return PureState(std::move(v), {"c", "e", "f"});
}

DensityMatrix mems_state(double concurrence) {
  if (concurrence < 0.0 || concurrence > 1.0) {
    throw std::invalid_argument("mems_state: concurrence outside [0,1]");
  }
  double g = concurrence >= 2.0 / 3.0 ? concurrence / 2.0 : 1.0 / 3.0;
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = g;
  m(3, 3) = g;
  m(0, 3) = concurrence / 2.0;
  m(3, 0) = concurrence / 2.0;
  m(1, 1) = 1.0 - 2.0 * g;
  return DensityMatrix(std::move(m), {"a", "b"});
}

DensityMatrix werner_state(double p) {
  if (p < 0.0 || p > 1.0) {
    throw std::invalid_argument("werner_state: mixing parameter outside [0,1]");
  }
  PureState singlet = bell_state("psi-");
  Matrix m = p * (singlet.amplitudes() * singlet.amplitudes().adjoint()) +
             (1.0 - p) * 0.25 * Matrix::Identity(4, 4);
  return DensityMatrix(std::move(m), {"a", "b"});
}

StateVariant reference_state(const std::string& name, const std::vector<double>& params) {
  auto need_param = [&](const char* what) {
    if (params.empty()) {
      throw std::invalid_argument(std::string("reference_state: ") + name +
                                  " needs a parameter (" + what + ")");
    }
    return params[0];
  };
  std::string n = name;
  std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  if (n == "w") return w_state();
  if (n == "ghz") return ghz_state();
  if (n == "product-zero" || n == "zero") return product_zero_state();
  if (n == "zero-tensor-bell" || n == "zero-bell") return zero_tensor_bell();
  if (n == "psi+" || n == "psi-" || n == "phi+" || n == "phi-") return bell_state(n);
  if (n == "mems") return mems_state(need_param("concurrence"));
  if (n == "werner") return werner_state(need_param("mixing probability"));
  throw std::invalid_argument(
      "reference_state: unknown name '" + name +
      "' (expected w, ghz, product-zero, zero-tensor-bell, psi+, psi-, phi+, phi-, "
      "mems, werner)");
}

} // namespace entangle

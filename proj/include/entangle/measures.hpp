#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "entangle/qcore.hpp"

namespace entangle {

// Wootters concurrence of a two-qubit density matrix.
//
// Computed from the eigendecomposition rho = Psi Psi^dagger (columns scaled by
// sqrt of the eigenvalue, eigenvalues below 64*eps*max dropped): the Wootters
// lambdas are the singular values of Psi^T (sigma_y x sigma_y) Psi. This is
// algebraically the same spectrum as sqrt(eig(rho rhotilde)) but gives exact
// zeros for rank-deficient states instead of sqrt(machine-eps) noise.
double concurrence(const DensityMatrix& rho);

// Squared concurrence.
double tangle(const DensityMatrix& rho);

// Residual tangle tau_A(BC) - tau_AB - tau_AC of a three-qubit pure state,
// with the first label as focus qubit A. Permutation invariant for any pure
// state. Clamped into [0,1].
double three_tangle(const PureState& psi);

// Negativity across the cut (part | rest): twice the absolute sum of the
// negative eigenvalues of the partial transpose.
double negativity(const DensityMatrix& rho, const Labels& part);

// Geometric mean of the three one-vs-rest negativities of a three-qubit state.
double tripartite_negativity(const DensityMatrix& rho);

// Expectation of the witness (2/3) I - |W><W|. Negative values certify
// W-class entanglement.
double w_witness(const DensityMatrix& rho);

// Residual pair tangle of the ideal tunable family as a function of the
// preparation half-wave-plate angle (radians, [0, pi/4]):
//   tau2(theta) = 4 sin^4(2 theta) / (cos(4 theta) - 2)^2.
double closed_form_residual_tangle(double theta);

struct PairTangle {
  std::string first, second;
  double value = 0.0;
};

struct EntanglementReport {
  std::vector<PairTangle> pair_tangles; // pairs in label order
  double tau2_min = 0.0;
  double tau2_avg = 0.0;
  std::optional<double> three_tangle; // present when the state is (nearly) pure
  double tripartite_negativity = 0.0;
  double linear_entropy = 0.0;
  std::optional<double> fidelity_vs_target;
  std::optional<double> witness_value;
  std::map<std::string, double> error_bars; // measure key -> one sigma
};

// Full measure set of a three-qubit state: the three pair tangles, their min
// and mean, tripartite negativity, linear entropy, the W witness, and the
// three-tangle when purity exceeds 1 - 1e-6 (taken on the dominant eigenvector).
EntanglementReport robustness_profile(const DensityMatrix& rho);
EntanglementReport robustness_profile(const DensityMatrix& rho, const StateVariant& target);

nlohmann::json report_to_json(const EntanglementReport& report);

// Reference states. Three-qubit states carry labels (c,e,f), two-qubit ones (a,b).
PureState w_state();
PureState ghz_state();
PureState bell_state(const std::string& which); // "psi+", "psi-", "phi+", "phi-"
PureState product_zero_state();                 // |000>
PureState zero_tensor_bell();                   // |0> x (|01>+|10>)/sqrt2

// Rank-2 maximally-entangled-mixed-state family parameterized by concurrence:
//   basis (00,01,10,11):  [[g, 0, 0, C/2], [0, 1-2g, 0, 0], [0,0,0,0], [C/2, 0, 0, g]]
// with g = C/2 for C >= 2/3 and g = 1/3 below.
DensityMatrix mems_state(double concurrence);

// Werner mixture p |psi-><psi-| + (1-p) I/4.
DensityMatrix werner_state(double p);

// Named lookup used by the command-line surface. Parameterized families take
// their parameter from params[0].
StateVariant reference_state(const std::string& name, const std::vector<double>& params = {});

} // namespace entangle

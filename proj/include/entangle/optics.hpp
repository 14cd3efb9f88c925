#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "entangle/measures.hpp"
#include "entangle/qcore.hpp"

namespace entangle {

struct OpticalMode {
  std::string spatial;
  char polarization; // 'H' or 'V'
};

bool operator==(const OpticalMode& a, const OpticalMode& b);

// Few-photon bosonic state over a fixed list of polarization-resolved modes,
// stored as a sparse map occupation-vector -> amplitude. Basis kets carry the
// usual sqrt(n!) normalization. Terms below 1e-14 in magnitude are pruned.
class FockState {
 public:
  explicit FockState(std::vector<OpticalMode> modes); // vacuum
  static FockState single_term(std::vector<OpticalMode> modes,
                               std::vector<int> occupation, Complex amplitude);

  const std::vector<OpticalMode>& modes() const { return modes_; }
  const std::map<std::vector<int>, Complex>& terms() const { return terms_; }

  int mode_index(const std::string& spatial, char polarization) const; // -1 if absent
  double norm2() const;
  void add_term(std::vector<int> occupation, Complex amplitude);
  void prune(double tol = 1e-14);

  // Total photon number, required identical across terms.
  int photon_number() const;

 private:
  std::vector<OpticalMode> modes_;
  std::map<std::vector<int>, Complex> terms_;
};

// Tensor product of states over disjoint mode sets; modes concatenate.
FockState tensor_product(const FockState& a, const FockState& b);

// Two photons behind a half-wave plate at angle theta (radians, [0, pi/2]),
// prepared in spatial mode "a": amplitudes (cos^2 2t, sqrt2 cos2t sin2t,
// sin^2 2t) over (2H, 1H1V, 2V).
FockState prepare_qutrit(double theta);

// Beamsplitter between two spatial modes, acting identically on both
// polarizations. Creation operators map as
//   in1 -> sqrt(1-r) out1 + i sqrt(r) out2
//   in2 -> i sqrt(r) out1 + sqrt(1-r) out2
// (reflected amplitudes pick up the i phase). Output spatial labels may reuse
// the input ones; fresh output modes must start unoccupied.
FockState beamsplitter(const FockState& state, const std::string& in1,
                       const std::string& in2, const std::string& out1,
                       const std::string& out2, double reflectivity);

// Keeps the terms with exactly one photon in each listed spatial mode and
// nothing anywhere else, mapping polarization to qubit basis (H=0, V=1).
// Labels follow the listed order, first label most significant.
UnnormalizedState post_select_single_photon(const FockState& state,
                                            const std::vector<std::string>& spatials);

struct CircuitOutcome {
  PureState state;            // post-selected three-qubit state, phase aligned
  double success_probability; // norm^2 of the post-selected component
  double theta;               // radians
};

// Full source-and-two-beamsplitter circuit: two photons through the wave plate
// into mode a, one photon into mode b, 50:50 splitters (a,b)->(c,d) then
// (d,e)->(e,f), post-selected on one photon in each of c, e, f. Local phases
// are fixed to a canonical gauge (amplitudes of |000>, |100>, |110>, |101>
// made real non-negative, in that priority).
CircuitOutcome run_circuit(double theta);

// Closed-form family the circuit lands on, same gauge:
//   (cos^2, 2 cos sin, sin^2, sin^2, -sin^2) / sqrt(1 + 2 sin^2)
// over (|000>, |100>, |110>, |101>, |011>) with cos = cos 2theta, sin = sin 2theta.
PureState ideal_family_state(double theta);

// (1 + 2 sin^2 2theta) / 16.
double ideal_success_probability(double theta);

struct ThetaScanRow {
  double theta = 0.0; // radians
  double success_probability = 0.0;
  EntanglementReport report;
  double fidelity_vs_ideal = 0.0;
};

std::vector<ThetaScanRow> theta_scan(const std::vector<double>& thetas);

// Columns: theta_deg,success_prob,n3,tau3,tau2_ce,tau2_cf,tau2_ef,tau2_min,
// tau2_avg,s_linear,fidelity_vs_ideal
void write_theta_scan_csv(std::ostream& out, const std::vector<ThetaScanRow>& rows);

} // namespace entangle

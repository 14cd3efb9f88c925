#pragma once

#include <Eigen/Dense>
#include <complex>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace entangle {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using Labels = std::vector<std::string>;

// Qubit ordering is big-endian throughout: labels[0] is the leftmost tensor
// factor and owns the most significant bit of a computational-basis index.
// For labels (c,e,f), index 0b110 = 6 means |1>_c |1>_e |0>_f.

inline constexpr double kNormTol = 1e-12;  // state vector normalization
inline constexpr double kHermTol = 1e-10;  // Hermiticity / trace deviation
inline constexpr double kPsdTol = 1e-10;   // admissible negative eigenvalue

int bit_of(int index, int slot, int num_qubits);

class PureState {
 public:
  // amplitudes.size() must be a power of two matching labels.size();
  // the vector must be normalized within kNormTol and finite.
  PureState(Vector amplitudes, Labels labels);

  const Vector& amplitudes() const { return amps_; }
  const Labels& labels() const { return labels_; }
  int num_qubits() const { return static_cast<int>(labels_.size()); }
  int dim() const { return static_cast<int>(amps_.size()); }

 private:
  Vector amps_;
  Labels labels_;
};

// Same layout as PureState but without the normalization requirement.
// Circuit post-selection produces these; norm2() is the success probability.
class UnnormalizedState {
 public:
  UnnormalizedState(Vector amplitudes, Labels labels);

  const Vector& amplitudes() const { return amps_; }
  const Labels& labels() const { return labels_; }
  int num_qubits() const { return static_cast<int>(labels_.size()); }
  double norm2() const { return amps_.squaredNorm(); }
  PureState normalized() const; // throws if norm2() is numerically zero

 private:
  Vector amps_;
  Labels labels_;
};

class DensityMatrix {
 public:
  // mat must be Hermitian within kHermTol, unit trace within kHermTol,
  // and positive semidefinite with eigenvalues above -kPsdTol.
  DensityMatrix(Matrix mat, Labels labels);

  const Matrix& matrix() const { return mat_; }
  const Labels& labels() const { return labels_; }
  int num_qubits() const { return static_cast<int>(labels_.size()); }
  int dim() const { return static_cast<int>(mat_.rows()); }
  double purity() const { return (mat_ * mat_).trace().real(); }

 private:
  Matrix mat_;
  Labels labels_;
};

using StateVariant = std::variant<PureState, DensityMatrix>;

DensityMatrix density(const PureState& psi);

PureState tensor(const PureState& a, const PureState& b);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

// Reduced state over `keep`; the output keeps the original label order,
// regardless of the order labels appear in `keep`.
DensityMatrix partial_trace(const DensityMatrix& rho, const Labels& keep);

// Transpose of the subsystem named in `part`. The result is generally not a
// valid density matrix, so it is returned as a bare matrix.
Matrix partial_transpose(const DensityMatrix& rho, const Labels& part);

// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2. Symmetric in its arguments;
// equals |<psi|phi>|^2 for two pure states.
double fidelity(const DensityMatrix& a, const DensityMatrix& b);
double fidelity(const PureState& psi, const DensityMatrix& rho); // <psi|rho|psi>
double fidelity(const PureState& a, const PureState& b);

// Linear entropy, normalized to [0,1]: (d/(d-1)) (1 - Tr rho^2).
double linear_entropy(const DensityMatrix& rho);
// Unnormalized variant 1 - Tr rho^2.
double linear_entropy_unnormalized(const DensityMatrix& rho);

// One 2x2 unitary per qubit, in label order. Checked for unitarity.
PureState apply_local_unitaries(const PureState& psi,
                                const std::vector<Eigen::Matrix2cd>& us);
DensityMatrix apply_local_unitaries(const DensityMatrix& rho,
                                    const std::vector<Eigen::Matrix2cd>& us);

// JSON state files: {"labels": [...], "kind": "pure"|"density",
// "data": [[re,im], ...]} with matrix data flattened row-major.
nlohmann::json state_to_json(const StateVariant& state);
StateVariant state_from_json(const nlohmann::json& j);
void save_state(const std::filesystem::path& path, const StateVariant& state);
StateVariant load_state(const std::filesystem::path& path);

// Density form of either variant (pure states are projected).
DensityMatrix as_density(const StateVariant& state);

} // namespace entangle

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "entangle/measures.hpp"
#include "entangle/qcore.hpp"

namespace entangle {

struct AnalyzerSetting {
  std::string analyzers; // one of H,V,D,A,R,L per qubit, first qubit first
  Vector ket;            // the product analyzer state; projector is |ket><ket|
};

// All 6^n product analyzer settings in canonical order: per-qubit sequence
// H,V,D,A,R,L, enumerated odometer style with the last qubit cycling fastest.
// R = (|0> + i|1>)/sqrt2, L = (|0> - i|1>)/sqrt2.
std::vector<AnalyzerSetting> build_projector_set(int num_qubits);

struct MeasurementRecord {
  std::vector<AnalyzerSetting> settings; // canonical order
  std::vector<std::int64_t> counts;      // same length, non-negative
  Labels labels;                         // qubit labels of the measured state
  int iteration = 1;                     // duration tag (number of merged blocks)
  double flux = 0.0;                     // expected counts per unit probability; 0 = unknown
};

// Poisson counts with mean flux * <s_k| rho |s_k>. Setting k draws from the
// substream derive_seed(seed, k), so counts are independent of evaluation order.
MeasurementRecord simulate_counts(const DensityMatrix& rho,
                                  const std::vector<AnalyzerSetting>& settings,
                                  double flux, std::uint64_t seed);

// Sums counts of per-iteration blocks over identical settings.
MeasurementRecord merge_records(const std::vector<MeasurementRecord>& blocks);

// Columns: setting_index,qubit_settings,count,iteration with the analyzer
// letters comma-joined and quoted ("H,D,L").
void write_counts_csv(std::ostream& out, const std::vector<MeasurementRecord>& blocks);
std::vector<MeasurementRecord> read_counts_csv(std::istream& in);

struct ReconstructionOptions {
  int multistarts = 5;
  int max_iterations = 2000;
  std::uint64_t seed = 0; // perturbs the non-identity starts
  double grad_tol = 1e-8;
  double f_tol = 1e-12;
  std::optional<Eigen::VectorXd> warm_start; // parameter vector of a previous solution
};

struct ReconstructionResult {
  DensityMatrix rho;
  double objective = 0.0;   // weighted least squares at the optimum
  double fitted_flux = 0.0; // closed-form flux estimate at the optimum
  int iterations = 0;       // of the winning start
  bool converged = false;
  Eigen::VectorXd parameters; // winning Cholesky-factor parameters
};

// Weighted least-squares fit of a physical density matrix to the counts.
//
// rho is parameterized as T^dagger T / Tr(T^dagger T) with T lower triangular
// (real diagonal, d^2 real parameters), which keeps every iterate a valid
// state. The objective is sum_k (n_k - f m_k)^2 / max(n_k, 1) with the flux f
// profiled out in closed form; its gradient is analytic. Multi-start BFGS from
// identity plus noise; the best start wins.
ReconstructionResult reconstruct(const MeasurementRecord& record,
                                 const ReconstructionOptions& opts = {});

struct IterationPoint {
  int iteration = 0; // 1-based
  ReconstructionResult recon;
  double fidelity_vs_truth = 0.0;
  std::vector<PairTangle> pair_tangles; // three-qubit runs only
};

struct IterativeRun {
  std::vector<MeasurementRecord> blocks; // one record per iteration
  std::vector<IterationPoint> trajectory;
};

// Repeated acquisition blocks of equal flux against a fixed true state; each
// point reconstructs from the counts accumulated so far, warm-started from the
// previous solution. Iteration m draws from derive_seed(seed, 2m) and
// reconstructs with derive_seed(seed, 2m+1).
IterativeRun iterative_tomography(const DensityMatrix& truth, int iterations,
                                  double flux_per_iteration, std::uint64_t seed,
                                  const ReconstructionOptions& opts = {});

struct MonteCarloErrors {
  int resamples = 0;
  std::map<std::string, double> mean;
  std::map<std::string, double> stddev; // sample standard deviation (n-1)
};

// Parametric bootstrap: counts resampled as Poisson(observed), reconstructed,
// and the measure set recomputed per resample. Keys: tau2_<pair>, tau2_min,
// tau2_avg, n3, s_linear, witness, and fidelity when a target is given.
MonteCarloErrors monte_carlo_errors(const MeasurementRecord& record, int resamples,
                                    std::uint64_t seed,
                                    const std::optional<StateVariant>& target = {},
                                    const ReconstructionOptions& opts = {});

struct LocalUnitaryFit {
  std::vector<Eigen::Matrix2cd> unitaries; // one per qubit, label order
  double fidelity_before = 0.0;
  double fidelity_after = 0.0;
  bool converged = false;
};

// Maximizes fidelity(U rho U^dagger, target) over products of single-qubit
// unitaries (axis-angle parameterization, multi-start BFGS with numeric
// gradients). Entanglement measures are untouched by the correction.
LocalUnitaryFit fit_local_unitaries(const DensityMatrix& rho, const StateVariant& target,
                                    int starts = 6, std::uint64_t seed = 0);

struct ReducedTomographyResult {
  DensityMatrix truth_reduced;
  MeasurementRecord record;
  ReconstructionResult recon;
};

// Two-qubit tomography of the reduced state left after dropping traced_label:
// the 36-setting analog of the full three-qubit measurement.
ReducedTomographyResult direct_reduced_tomography(const DensityMatrix& truth,
                                                  const std::string& traced_label,
                                                  double flux, std::uint64_t seed,
                                                  const ReconstructionOptions& opts = {});

namespace detail {

// The reconstruction objective and its analytic gradient at one parameter
// vector, exposed so tests can difference it numerically.
double wls_objective(const MeasurementRecord& record, const Eigen::VectorXd& params,
                     Eigen::VectorXd* grad);

} // namespace detail

} // namespace entangle

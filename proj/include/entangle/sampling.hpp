#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "entangle/qcore.hpp"

namespace entangle {

// Haar-random pure state: iid standard complex Gaussian amplitudes,
// normalized. Equals sample 0 of a scatter study run with the same seed.
// Three-qubit states carry labels (c,e,f), otherwise q0..q(n-1).
PureState haar_random_pure(int num_qubits, std::uint64_t seed);

struct ScatterRow {
  double n3 = 0.0;
  double tau2_min = 0.0;
  double tau3 = 0.0;
};

struct HaarScatter {
  std::uint64_t seed = 0;
  std::vector<ScatterRow> rows;
};

// Random three-qubit pure states with their tripartite negativity, minimum
// pair tangle and three-tangle. Sample i draws from the substream
// derive_seed(seed, i); all measures go through the measures module.
HaarScatter scatter_study(std::int64_t samples, std::uint64_t seed);

struct CurvePoint {
  double theta = 0.0; // radians
  double n3 = 0.0;
  double tau2_min = 0.0;
  double tau2_avg = 0.0;
};

// The ideal tunable family swept over theta in [0, pi/4]; n3 ascends along the
// curve, which boundary_check relies on for interpolation.
std::vector<CurvePoint> ideal_curve(int num_points);

// Piecewise-linear curve value at the given n3, clamped to the curve ends.
double curve_tau2_min(const std::vector<CurvePoint>& curve, double n3);
double curve_tau2_avg(const std::vector<CurvePoint>& curve, double n3);

struct BoundaryViolation {
  std::int64_t index = 0;
  double n3 = 0.0, tau2_min = 0.0, curve_value = 0.0;
};

struct BoundaryReport {
  std::int64_t sample_count = 0;
  std::int64_t violation_count = 0; // tau2_min above curve by more than tolerance
  double max_excess = 0.0;          // max of tau2_min - curve(n3), signed
  std::int64_t clamped_count = 0;   // samples with n3 beyond the curve's top end
  double max_tau2_min = 0.0;
  std::int64_t w_class_count = 0; // tau3 < 1e-4
  double w_class_fraction = 0.0;
  double tolerance = 0.0;
  std::vector<BoundaryViolation> violations; // at most 100 listed
};

// Tests every sample against the curve: the family should be the upper
// boundary of minimum pair tangle at fixed tripartite negativity.
BoundaryReport boundary_check(const HaarScatter& scatter,
                              const std::vector<CurvePoint>& curve,
                              double tolerance = 1e-6);

struct AverageCase {
  std::int64_t index = 0;
  double n3 = 0.0, tau2_avg = 0.0, curve_avg = 0.0, tau2_min = 0.0;
};

struct AverageTangleReport {
  std::int64_t sample_count = 0;
  std::int64_t exceed_count = 0; // samples with tau2_avg above the curve's tau2_avg
  // exceeding samples whose minimum pair tangle is NOT strictly below their own
  // average, i.e. states that would beat the family without a weaker link
  std::int64_t counterexample_count = 0;
  double max_avg_excess = 0.0;
  std::vector<AverageCase> counterexamples; // at most 100 listed
};

// The family does not maximize the average pair tangle; random states may beat
// it there, but only by spreading their tangle unevenly. Reuses the same state
// stream as scatter_study, so indices match.
AverageTangleReport average_tangle_study(std::int64_t samples, std::uint64_t seed,
                                         const std::vector<CurvePoint>& curve,
                                         double tolerance = 1e-9);

// Columns: n3,tau2_min,tau3
void write_scatter_csv(std::ostream& out, const HaarScatter& scatter);
// Columns: theta_deg,n3,tau2_min,tau2_avg
void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve);
// Columns: name,n3,tau2_min,tau3 for the GHZ and W corner states
void write_reference_points_csv(std::ostream& out);

} // namespace entangle

#include "entangle/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "entangle/measures.hpp"
#include "entangle/optics.hpp"
#include "entangle/rng.hpp"

namespace entangle {

namespace {

PureState haar_from_engine(int num_qubits, std::mt19937_64& engine) {
  Labels labels;
  if (num_qubits == 3) {
    labels = {"c", "e", "f"};
  } else {
    for (int q = 0; q < num_qubits; ++q) labels.push_back("q" + std::to_string(q));
  }
  Vector v(Eigen::Index{1} << num_qubits);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v[i] = Complex(gaussian(engine), gaussian(engine));
  }
  v /= v.norm();
  return PureState(std::move(v), std::move(labels));
}

std::string fmt(double x, const char* spec = "%.12g") {
  char buf[32];
  std::snprintf(buf, sizeof(buf), spec, x);
  return buf;
}

} // namespace

PureState haar_random_pure(int num_qubits, std::uint64_t seed) {
  if (num_qubits < 1 || num_qubits > 12) {
    throw std::invalid_argument("haar_random_pure: unsupported qubit count");
  }
  auto engine = seeded_engine(seed, 0);
  return haar_from_engine(num_qubits, engine);
}

HaarScatter scatter_study(std::int64_t samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("scatter_study: need at least one sample");
  HaarScatter scatter;
  scatter.seed = seed;
  scatter.rows.reserve(static_cast<std::size_t>(samples));
  for (std::int64_t i = 0; i < samples; ++i) {
    auto engine = seeded_engine(seed, static_cast<std::uint64_t>(i));
    PureState psi = haar_from_engine(3, engine);
    EntanglementReport rep = robustness_profile(density(psi));
    scatter.rows.push_back({rep.tripartite_negativity, rep.tau2_min,
                            rep.three_tangle.value_or(0.0)});
  }
  return scatter;
}

std::vector<CurvePoint> ideal_curve(int num_points) {
  if (num_points < 2) throw std::invalid_argument("ideal_curve: need at least two points");
  std::vector<CurvePoint> curve;
  curve.reserve(static_cast<std::size_t>(num_points));
  for (int i = 0; i < num_points; ++i) {
    double theta = std::numbers::pi / 4 * static_cast<double>(i) /
                   static_cast<double>(num_points - 1);
    EntanglementReport rep = robustness_profile(density(ideal_family_state(theta)));
    curve.push_back({theta, rep.tripartite_negativity, rep.tau2_min, rep.tau2_avg});
  }
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (curve[i].n3 < curve[i - 1].n3) {
      throw std::logic_error("ideal_curve: n3 is not monotone along the family");
    }
  }
  return curve;
}

namespace {

double curve_interp(const std::vector<CurvePoint>& curve, double n3,
                    double CurvePoint::* field) {
  if (curve.size() < 2) throw std::invalid_argument("curve interpolation: too few points");
  if (n3 <= curve.front().n3) return curve.front().*field;
  if (n3 >= curve.back().n3) return curve.back().*field;
  auto it = std::upper_bound(
      curve.begin(), curve.end(), n3,
      [](double value, const CurvePoint& p) { return value < p.n3; });
  const CurvePoint& hi = *it;
  const CurvePoint& lo = *(it - 1);
  double span = hi.n3 - lo.n3;
  if (span <= 0.0) return lo.*field;
  double t = (n3 - lo.n3) / span;
  return lo.*field + t * (hi.*field - lo.*field);
}

} // namespace

double curve_tau2_min(const std::vector<CurvePoint>& curve, double n3) {
  return curve_interp(curve, n3, &CurvePoint::tau2_min);
}

double curve_tau2_avg(const std::vector<CurvePoint>& curve, double n3) {
  return curve_interp(curve, n3, &CurvePoint::tau2_avg);
}

BoundaryReport boundary_check(const HaarScatter& scatter,
                              const std::vector<CurvePoint>& curve, double tolerance) {
  BoundaryReport rep;
  rep.sample_count = static_cast<std::int64_t>(scatter.rows.size());
  rep.tolerance = tolerance;
  rep.max_excess = -std::numeric_limits<double>::infinity();
  double top_n3 = curve.back().n3;
  for (std::size_t i = 0; i < scatter.rows.size(); ++i) {
    const ScatterRow& row = scatter.rows[i];
    if (row.n3 > top_n3) ++rep.clamped_count;
    double bound = curve_tau2_min(curve, row.n3);
    double excess = row.tau2_min - bound;
    rep.max_excess = std::max(rep.max_excess, excess);
    if (excess > tolerance) {
      ++rep.violation_count;
      if (rep.violations.size() < 100) {
        rep.violations.push_back(
            {static_cast<std::int64_t>(i), row.n3, row.tau2_min, bound});
      }
    }
    rep.max_tau2_min = std::max(rep.max_tau2_min, row.tau2_min);
    if (row.tau3 < 1e-4) ++rep.w_class_count;
  }
  rep.w_class_fraction = rep.sample_count > 0
                             ? static_cast<double>(rep.w_class_count) /
                                   static_cast<double>(rep.sample_count)
                             : 0.0;
  return rep;
}

AverageTangleReport average_tangle_study(std::int64_t samples, std::uint64_t seed,
                                         const std::vector<CurvePoint>& curve,
                                         double tolerance) {
  if (samples < 1) {
    throw std::invalid_argument("average_tangle_study: need at least one sample");
  }
  AverageTangleReport rep;
  rep.sample_count = samples;
  rep.max_avg_excess = -std::numeric_limits<double>::infinity();
  for (std::int64_t i = 0; i < samples; ++i) {
    auto engine = seeded_engine(seed, static_cast<std::uint64_t>(i));
    PureState psi = haar_from_engine(3, engine);
    EntanglementReport prof = robustness_profile(density(psi));
    double bound = curve_tau2_avg(curve, prof.tripartite_negativity);
    double excess = prof.tau2_avg - bound;
    rep.max_avg_excess = std::max(rep.max_avg_excess, excess);
    if (excess > tolerance) {
      ++rep.exceed_count;
      // beating the family's average is only possible with a weaker weakest link
      if (prof.tau2_min >= prof.tau2_avg - 1e-9) {
        ++rep.counterexample_count;
        if (rep.counterexamples.size() < 100) {
          rep.counterexamples.push_back({i, prof.tripartite_negativity, prof.tau2_avg,
                                         bound, prof.tau2_min});
        }
      }
    }
  }
  return rep;
}

void write_scatter_csv(std::ostream& out, const HaarScatter& scatter) {
  out << "n3,tau2_min,tau3\n";
  for (const auto& row : scatter.rows) {
    out << fmt(row.n3, "%.9g") << ',' << fmt(row.tau2_min, "%.9g") << ','
        << fmt(row.tau3, "%.9g") << '\n';
  }
}

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve) {
  out << "theta_deg,n3,tau2_min,tau2_avg\n";
  for (const auto& p : curve) {
    out << fmt(p.theta * 180.0 / std::numbers::pi) << ',' << fmt(p.n3) << ','
        << fmt(p.tau2_min) << ',' << fmt(p.tau2_avg) << '\n';
  }
}

void write_reference_points_csv(std::ostream& out) {
  out << "name,n3,tau2_min,tau3\n";
  for (const auto& [name, psi] : {std::pair<const char*, PureState>{"ghz", ghz_state()},
                                  {"w", w_state()}}) {
    EntanglementReport rep = robustness_profile(density(psi));
    out << name << ',' << fmt(rep.tripartite_negativity) << ','
        << fmt(rep.tau2_min) << ',' << fmt(rep.three_tangle.value_or(0.0)) << '\n';
  }
}

} // namespace entangle

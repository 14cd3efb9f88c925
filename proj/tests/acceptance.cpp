// Acceptance gate: one self-contained check per shipped guarantee, each
// printing a single PASS/FAIL line with its measured values and elapsed time.
// Run with no arguments for the full gate or with criterion numbers to select.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <string>
#include <vector>

#include "entangle/measures.hpp"
#include "entangle/optics.hpp"
#include "entangle/qcore.hpp"
#include "entangle/rng.hpp"
#include "entangle/sampling.hpp"
#include "entangle/tomography.hpp"

using namespace entangle;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kMaster = 424242; // every stream below derives from this

struct Criterion {
  int number;
  const char* name;
  double budget_seconds;
  bool (*run)(std::string& detail);
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

PureState random_pure3(std::uint64_t seed) {
  auto rng = seeded_engine(seed);
  Vector v(8);
  for (int i = 0; i < 8; ++i) v[i] = Complex(gaussian(rng), gaussian(rng));
  v.normalize();
  return PureState(std::move(v), {"c", "e", "f"});
}

Eigen::Matrix2cd random_su2(std::mt19937_64& rng) {
  Eigen::Matrix2cd m;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m(i, j) = Complex(gaussian(rng), gaussian(rng));
  Eigen::HouseholderQR<Eigen::Matrix2cd> qr(m);
  return qr.householderQ();
}

// 1. W-state measure set at its analytic values.
bool crit_w_measures(std::string& detail) {
  auto rep = robustness_profile(as_density(w_state()));
  bool ok = std::abs(rep.tripartite_negativity - 0.9428) < 1e-4;
  for (const auto& p : rep.pair_tangles) ok &= std::abs(p.value - 4.0 / 9.0) < 1e-9;
  ok &= rep.three_tangle.has_value() && std::abs(*rep.three_tangle) < 1e-9;
  ok &= rep.witness_value.has_value() && std::abs(*rep.witness_value + 1.0 / 3.0) < 1e-9;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "n3=%.6f tau2=%.12f tau3=%.2e witness=%.12f",
                rep.tripartite_negativity, rep.pair_tangles[0].value,
                rep.three_tangle.value_or(-1.0), rep.witness_value.value_or(0.0));
  detail = buf;
  return ok;
}

// 2. GHZ contrast: maximal three-tangle, fragile pairs.
bool crit_ghz(std::string& detail) {
  auto rep = robustness_profile(as_density(ghz_state()));
  bool ok = rep.three_tangle.has_value() && std::abs(*rep.three_tangle - 1.0) < 1e-9;
  ok &= std::abs(rep.tau2_min) < 1e-9;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "tau3=%.12f tau2_min=%.2e",
                rep.three_tangle.value_or(-1.0), rep.tau2_min);
  detail = buf;
  return ok;
}

// 3. Circuit endpoints.
bool crit_circuit_limits(std::string& detail) {
  double f0 = fidelity(run_circuit(0.0).state, product_zero_state());
  double fw = fidelity(run_circuit(kPi / 4.0).state, w_state());
  char buf[96];
  std::snprintf(buf, sizeof(buf), "fid(theta=0 vs 000)=%.12f fid(theta=45deg vs W)=%.12f",
                f0, fw);
  detail = buf;
  return f0 >= 1.0 - 1e-9 && fw > 1.0 - 1e-9;
}

// 4. Pair-tangle symmetry and the closed form across the sweep.
bool crit_symmetry_sweep(std::string& detail) {
  double max_spread = 0.0, max_model_err = 0.0;
  for (int i = 0; i < 100; ++i) {
    double theta = kPi / 4.0 * i / 99.0;
    auto rho = density(run_circuit(theta).state);
    double t_ce = tangle(partial_trace(rho, {"c", "e"}));
    double t_cf = tangle(partial_trace(rho, {"c", "f"}));
    double t_ef = tangle(partial_trace(rho, {"e", "f"}));
    double lo = std::min({t_ce, t_cf, t_ef}), hi = std::max({t_ce, t_cf, t_ef});
    max_spread = std::max(max_spread, hi - lo);
    max_model_err =
        std::max(max_model_err, std::abs(t_ce - closed_form_residual_tangle(theta)));
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "max pair spread=%.2e max closed-form err=%.2e",
                max_spread, max_model_err);
  detail = buf;
  return max_spread < 1e-9 && max_model_err < 1e-9;
}

// 5. MEMS and Werner reference curves in the tangle-vs-mixedness plane.
bool crit_reference_plane(std::string& detail) {
  auto mems = mems_state(2.0 / 3.0);
  bool ok = std::abs(tangle(mems) - 4.0 / 9.0) < 1e-9;

  Eigen::SelfAdjointEigenSolver<Matrix> es(mems.matrix());
  Eigen::Vector4d expected(0.0, 0.0, 1.0 / 3.0, 2.0 / 3.0);
  double spec_err = (es.eigenvalues() - expected).cwiseAbs().maxCoeff();
  ok &= spec_err < 1e-9;
  auto reduced = partial_trace(as_density(w_state()), {"e", "f"});
  Eigen::SelfAdjointEigenSolver<Matrix> er(reduced.matrix());
  ok &= (er.eigenvalues() - expected).cwiseAbs().maxCoeff() < 1e-9;

  double max_werner_err = 0.0;
  for (int i = 0; i < 50; ++i) {
    double p = i / 49.0;
    auto rho = werner_state(p);
    double expected_tangle = std::pow(std::max(0.0, (3.0 * p - 1.0) / 2.0), 2.0);
    double expected_sl = 1.0 - p * p;
    max_werner_err = std::max(max_werner_err, std::abs(tangle(rho) - expected_tangle));
    max_werner_err =
        std::max(max_werner_err, std::abs(linear_entropy(rho) - expected_sl));
  }
  ok &= max_werner_err < 1e-9;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "mems spectrum err=%.2e werner curve err=%.2e",
                spec_err, max_werner_err);
  detail = buf;
  return ok;
}

// 6. Tomography fidelity at high flux and at the experiment's count scale.
bool crit_tomography(std::string& detail) {
  auto truth = as_density(w_state());
  auto settings = build_projector_set(3);

  auto high = simulate_counts(truth, settings, 1e5, derive_seed(kMaster, 600));
  double fid_high = fidelity(w_state(), reconstruct(high).rho);

  std::vector<double> fids;
  for (int s = 0; s < 20; ++s) {
    auto rec = simulate_counts(truth, settings, 480.0,
                               derive_seed(kMaster, 610 + static_cast<std::uint64_t>(s)));
    fids.push_back(fidelity(w_state(), reconstruct(rec).rho));
  }
  double med = median(fids);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "fid@1e5=%.6f median fid@480=%.4f", fid_high, med);
  detail = buf;
  // hardware runs at this count scale reach ~0.90 because of physical noise;
  // the purely statistical ceiling must clear that as well as the 0.98 bar
  return fid_high > 0.999 && med > 0.98 && med > 0.90;
}

// 7. Monte-Carlo error bars follow counting statistics: 4x flux halves them.
// The record is a depolarized W at the fidelity the hardware reaches (~0.92).
// A noiseless pure record would pin the fit to the state-space boundary, where
// the fidelity deficit is quadratic in count noise and error bars shrink like
// 1/N instead; 1/sqrt(N) is the behaviour of any interior state.
bool crit_error_scaling(std::string& detail) {
  auto pure = as_density(w_state());
  Matrix mixed = 0.9 * pure.matrix() + 0.1 * Matrix::Identity(8, 8) / 8.0;
  DensityMatrix truth(mixed, pure.labels());
  auto settings = build_projector_set(3);
  auto rec_lo = simulate_counts(truth, settings, 480.0, derive_seed(kMaster, 700));
  auto rec_hi = simulate_counts(truth, settings, 1920.0, derive_seed(kMaster, 701));
  auto mc_lo = monte_carlo_errors(rec_lo, 100, derive_seed(kMaster, 702),
                                  StateVariant(w_state()));
  auto mc_hi = monte_carlo_errors(rec_hi, 100, derive_seed(kMaster, 703),
                                  StateVariant(w_state()));
  double ratio = mc_lo.stddev.at("fidelity") / mc_hi.stddev.at("fidelity");
  char buf[96];
  std::snprintf(buf, sizeof(buf), "sd(fid)@480=%.2e sd(fid)@1920=%.2e ratio=%.2f",
                mc_lo.stddev.at("fidelity"), mc_hi.stddev.at("fidelity"), ratio);
  detail = buf;
  return ratio > 1.4 && ratio < 2.6;
}

// 8. Iterative acquisition settles all three pair tangles near 4/9.
bool crit_trajectory(std::string& detail) {
  auto truth = as_density(w_state());
  int good_seeds = 0;
  for (int s = 0; s < 20; ++s) {
    auto run = iterative_tomography(truth, 10, 480.0,
                                    derive_seed(kMaster, 800 + static_cast<std::uint64_t>(s)));
    bool settled = true;
    for (std::size_t i = 7; i < 10; ++i) {
      for (const auto& p : run.trajectory[i].pair_tangles) {
        settled &= std::abs(p.value - 4.0 / 9.0) <= 0.1;
      }
    }
    good_seeds += settled ? 1 : 0;
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "seeds settled in last 3 iterations: %d/20", good_seeds);
  detail = buf;
  return good_seeds >= 18;
}

// 9. Haar study: the family bounds the minimum pair tangle.
bool crit_haar_boundary(std::string& detail) {
  auto scatter = scatter_study(300000, derive_seed(kMaster, 900));
  auto curve = ideal_curve(2001);
  auto report = boundary_check(scatter, curve, 1e-6);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "violations=%lld max_tau2_min=%.6f w_class_fraction=%.2e",
                static_cast<long long>(report.violation_count), report.max_tau2_min,
                report.w_class_fraction);
  detail = buf;
  return report.violation_count == 0 && report.max_tau2_min <= 4.0 / 9.0 + 1e-6 &&
         report.w_class_fraction < 1e-3;
}

// 10. The family is about the weakest link: |0> x bell has none.
bool crit_counterexample_family(std::string& detail) {
  auto rep = robustness_profile(as_density(zero_tensor_bell()));
  char buf[96];
  std::snprintf(buf, sizeof(buf), "n3=%.2e tau2_avg=%.12f tau2_min=%.2e",
                rep.tripartite_negativity, rep.tau2_avg, rep.tau2_min);
  detail = buf;
  return std::abs(rep.tripartite_negativity) < 1e-9 &&
         std::abs(rep.tau2_avg - 1.0 / 3.0) < 1e-9 && std::abs(rep.tau2_min) < 1e-9;
}

// 11. Randomized property suites, zero tolerated failures.
bool crit_properties(std::string& detail) {
  int failures = 0;
  const int n = 120;

  // CKW monogamy on random pure states
  for (int i = 0; i < n; ++i) {
    auto psi = random_pure3(derive_seed(kMaster, 1100 + static_cast<std::uint64_t>(i)));
    auto rho = as_density(psi);
    double cap = 4.0 * partial_trace(rho, {"c"}).matrix().determinant().real();
    double used = tangle(partial_trace(rho, {"c", "e"})) +
                  tangle(partial_trace(rho, {"c", "f"}));
    if (used > cap + 1e-9) ++failures;
  }

  // local-unitary invariance of every reported measure
  auto urng = seeded_engine(derive_seed(kMaster, 1200));
  for (int i = 0; i < n; ++i) {
    auto psi = random_pure3(derive_seed(kMaster, 1300 + static_cast<std::uint64_t>(i)));
    auto rotated = apply_local_unitaries(
        psi, {random_su2(urng), random_su2(urng), random_su2(urng)});
    auto a = robustness_profile(as_density(psi));
    auto b = robustness_profile(as_density(rotated));
    bool same = std::abs(a.tripartite_negativity - b.tripartite_negativity) < 1e-8 &&
                std::abs(a.tau2_min - b.tau2_min) < 1e-7 &&
                std::abs(a.tau2_avg - b.tau2_avg) < 1e-7 &&
                std::abs(a.three_tangle.value_or(0) - b.three_tangle.value_or(0)) < 1e-7;
    if (!same) ++failures;
  }

  // partial trace preserves physicality: the constructor enforces hermiticity,
  // unit trace and positivity, so surviving construction is the check
  for (int i = 0; i < n; ++i) {
    auto rng = seeded_engine(derive_seed(kMaster, 1400 + static_cast<std::uint64_t>(i)));
    Matrix g(8, 8);
    for (int r = 0; r < 8; ++r)
      for (int c = 0; c < 8; ++c) g(r, c) = Complex(gaussian(rng), gaussian(rng));
    Matrix m = g * g.adjoint();
    m /= m.trace();
    DensityMatrix rho(m, {"c", "e", "f"});
    try {
      for (const auto& keep :
           {Labels{"c"}, Labels{"e"}, Labels{"f"}, Labels{"c", "e"}, Labels{"e", "f"}}) {
        auto red = partial_trace(rho, keep);
        if (std::abs(red.matrix().trace().real() - 1.0) > 1e-10) ++failures;
      }
    } catch (const std::exception&) {
      ++failures;
    }
  }

  // beamsplitter unitarity and photon-number conservation
  auto brng = seeded_engine(derive_seed(kMaster, 1500));
  const std::vector<OpticalMode> modes = {
      {"p", 'H'}, {"p", 'V'}, {"q", 'H'}, {"q", 'V'}};
  for (int i = 0; i < n; ++i) {
    auto occ_draw = [&brng] {
      std::vector<int> occ(4, 0);
      for (int photon = 0; photon < 3; ++photon) occ[brng() % 4]++;
      return occ;
    };
    auto st = FockState::single_term(modes, occ_draw(),
                                     Complex(gaussian(brng), gaussian(brng)));
    for (int rep = 0; rep < 4; ++rep) {
      st.add_term(occ_draw(), Complex(gaussian(brng), gaussian(brng)));
    }
    double n2 = st.norm2();
    if (n2 < 1e-9) continue;
    auto out = beamsplitter(st, "p", "q", "p", "q", uniform01(brng));
    if (std::abs(out.norm2() - n2) > 1e-9 * std::max(1.0, n2)) ++failures;
    if (out.photon_number() != 3) ++failures;
  }

  // balanced-splitter null for indistinguishable photon pairs
  auto hrng = seeded_engine(derive_seed(kMaster, 1600));
  for (int i = 0; i < n; ++i) {
    Complex amp = std::polar(0.25 + uniform01(hrng), 2.0 * kPi * uniform01(hrng));
    char pol = (hrng() & 1) ? 'H' : 'V';
    std::vector<int> occ(4, 0);
    occ[pol == 'H' ? 0 : 1] = 1;
    occ[pol == 'H' ? 2 : 3] = 1;
    auto st = FockState::single_term(modes, occ, amp);
    auto out = beamsplitter(st, "p", "q", "p", "q", 0.5);
    auto it = out.terms().find(occ);
    if (it != out.terms().end() && std::abs(it->second) > 1e-12) ++failures;
  }

  char buf[64];
  std::snprintf(buf, sizeof(buf), "%d suites x %d instances, failures=%d", 5, n, failures);
  detail = buf;
  return failures == 0;
}

const Criterion kCriteria[] = {
    {1, "w-state measure set", 1.0, crit_w_measures},
    {2, "ghz contrast", 1.0, crit_ghz},
    {3, "circuit endpoints", 1.0, crit_circuit_limits},
    {4, "pair-tangle symmetry sweep", 10.0, crit_symmetry_sweep},
    {5, "mems and werner reference plane", 5.0, crit_reference_plane},
    {6, "tomography fidelity", 300.0, crit_tomography},
    {7, "monte-carlo error scaling", 600.0, crit_error_scaling},
    {8, "iterative trajectory shape", 600.0, crit_trajectory},
    {9, "haar boundary study", 600.0, crit_haar_boundary},
    {10, "zero-tensor-bell profile", 1.0, crit_counterexample_family},
    {11, "randomized property suites", 60.0, crit_properties},
};

} // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  bool all_ok = true;
  for (const auto& crit : kCriteria) {
    if (!selected.empty() &&
        std::find(selected.begin(), selected.end(), crit.number) == selected.end()) {
      continue;
    }
    std::string detail;
    auto start = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      ok = crit.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool in_budget = elapsed < crit.budget_seconds;
    bool pass = ok && in_budget;
    all_ok &= pass;
    std::printf("%s criterion %2d: %-34s %s [%.2fs / budget %.0fs]\n",
                pass ? "PASS" : "FAIL", crit.number, crit.name, detail.c_str(), elapsed,
                crit.budget_seconds);
    if (!in_budget && ok) std::printf("     criterion %2d exceeded its runtime budget\n",
                                      crit.number);
  }
  return all_ok ? 0 : 1;
}

#include "entangle/optics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <set>
#include <stdexcept>

namespace entangle {

bool operator==(const OpticalMode& a, const OpticalMode& b) {
  return a.spatial == b.spatial && a.polarization == b.polarization;
}

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

void check_modes(const std::vector<OpticalMode>& modes) {
  if (modes.empty()) throw std::invalid_argument("FockState: empty mode list");
  std::set<std::pair<std::string, char>> seen;
  for (const auto& m : modes) {
    if (m.polarization != 'H' && m.polarization != 'V') {
      throw std::invalid_argument("FockState: polarization must be 'H' or 'V'");
    }
    if (!seen.insert({m.spatial, m.polarization}).second) {
      throw std::invalid_argument("FockState: duplicate mode " + m.spatial);
    }
  }
}

} // namespace

FockState::FockState(std::vector<OpticalMode> modes) : modes_(std::move(modes)) {
  check_modes(modes_);
  terms_[std::vector<int>(modes_.size(), 0)] = 1.0;
}

FockState FockState::single_term(std::vector<OpticalMode> modes,
                                 std::vector<int> occupation, Complex amplitude) {
  FockState s(std::move(modes));
  s.terms_.clear();
  s.add_term(std::move(occupation), amplitude);
  return s;
}

int FockState::mode_index(const std::string& spatial, char polarization) const {
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    if (modes_[i].spatial == spatial && modes_[i].polarization == polarization) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

double FockState::norm2() const {
  double n = 0.0;
  for (const auto& [occ, amp] : terms_) n += std::norm(amp);
  return n;
}

void FockState::add_term(std::vector<int> occupation, Complex amplitude) {
  if (occupation.size() != modes_.size()) {
    throw std::invalid_argument("FockState: occupation length mismatch");
  }
  for (int n : occupation) {
    if (n < 0) throw std::invalid_argument("FockState: negative occupation");
  }
  terms_[std::move(occupation)] += amplitude;
}

void FockState::prune(double tol) {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (std::abs(it->second) < tol) {
      it = terms_.erase(it);
    } else {
      ++it;
    }
  }
}

int FockState::photon_number() const {
  if (terms_.empty()) throw std::invalid_argument("FockState: no terms");
  int total = -1;
  for (const auto& [occ, amp] : terms_) {
    int n = 0;
    for (int k : occ) n += k;
    if (total < 0) total = n;
    if (n != total) {
      throw std::invalid_argument("FockState: mixed total photon number");
    }
  }
  return total;
}

FockState tensor_product(const FockState& a, const FockState& b) {
  std::vector<OpticalMode> modes = a.modes();
  modes.insert(modes.end(), b.modes().begin(), b.modes().end());
  // single_term validates mode disjointness; the zero seed term is pruned below
  FockState out =
      FockState::single_term(modes, std::vector<int>(modes.size(), 0), 0.0);
  for (const auto& [occ_a, amp_a] : a.terms()) {
    for (const auto& [occ_b, amp_b] : b.terms()) {
      std::vector<int> occ = occ_a;
      occ.insert(occ.end(), occ_b.begin(), occ_b.end());
      out.add_term(std::move(occ), amp_a * amp_b);
    }
  }
  out.prune();
  return out;
}

namespace {

// Applies the creation-operator substitution
//   a[i1] -> T00 a[o1] + T01 a[o2],  a[i2] -> T10 a[o1] + T11 a[o2]
// to every term. Output modes not among the inputs must be unoccupied.
FockState apply_two_mode_transform(const FockState& state, int i1, int i2, int o1,
                                   int o2, const Eigen::Matrix2cd& t) {
  const auto n_modes = state.modes().size();
  if (i1 < 0 || i2 < 0 || o1 < 0 || o2 < 0 || i1 == i2 || o1 == o2) {
    throw std::invalid_argument("two-mode transform: bad mode indices");
  }
  if ((t.adjoint() * t - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("two-mode transform: matrix is not unitary");
  }

  FockState out = FockState::single_term(state.modes(),
                                         std::vector<int>(n_modes, 0), 0.0);
  for (const auto& [occ, amp] : state.terms()) {
    const int n1 = occ[static_cast<std::size_t>(i1)];
    const int n2 = occ[static_cast<std::size_t>(i2)];
    std::vector<int> base = occ;
    base[static_cast<std::size_t>(i1)] = 0;
    base[static_cast<std::size_t>(i2)] = 0;
    for (int o : {o1, o2}) {
      if (o != i1 && o != i2 && base[static_cast<std::size_t>(o)] != 0) {
        throw std::invalid_argument("two-mode transform: output mode not empty");
      }
    }

    // expand (T00 x + T01 y)^n1 (T10 x + T11 y)^n2 by repeated convolution
    std::map<std::pair<int, int>, Complex> poly{{{0, 0}, 1.0}};
    auto multiply = [&poly](Complex cx, Complex cy) {
      std::map<std::pair<int, int>, Complex> next;
      for (const auto& [deg, c] : poly) {
        next[{deg.first + 1, deg.second}] += c * cx;
        next[{deg.first, deg.second + 1}] += c * cy;
      }
      poly = std::move(next);
    };
    for (int k = 0; k < n1; ++k) multiply(t(0, 0), t(0, 1));
    for (int k = 0; k < n2; ++k) multiply(t(1, 0), t(1, 1));

    const double in_norm = std::sqrt(factorial(n1) * factorial(n2));
    for (const auto& [deg, c] : poly) {
      std::vector<int> dest = base;
      dest[static_cast<std::size_t>(o1)] += deg.first;
      dest[static_cast<std::size_t>(o2)] += deg.second;
      double out_norm = std::sqrt(factorial(deg.first) * factorial(deg.second));
      out.add_term(std::move(dest), amp * c * out_norm / in_norm);
    }
  }
  out.prune();
  return out;
}

} // namespace

FockState prepare_qutrit(double theta) {
  if (theta < -1e-12 || theta > std::numbers::pi / 2 + 1e-12) {
    throw std::invalid_argument("prepare_qutrit: theta outside [0, pi/2]");
  }
  FockState two_photons = FockState::single_term(
      {{"a", 'H'}, {"a", 'V'}}, {2, 0}, 1.0);
  double c = std::cos(2.0 * theta), s = std::sin(2.0 * theta);
  Eigen::Matrix2cd hwp;
  hwp << c, s, s, -c;
  return apply_two_mode_transform(two_photons, 0, 1, 0, 1, hwp);
}

FockState beamsplitter(const FockState& state, const std::string& in1,
                       const std::string& in2, const std::string& out1,
                       const std::string& out2, double reflectivity) {
  if (reflectivity < 0.0 || reflectivity > 1.0) {
    throw std::invalid_argument("beamsplitter: reflectivity outside [0,1]");
  }
  double tr = std::sqrt(1.0 - reflectivity);
  double rf = std::sqrt(reflectivity);
  Eigen::Matrix2cd t;
  t << Complex(tr, 0.0), Complex(0.0, rf), Complex(0.0, rf), Complex(tr, 0.0);

  FockState current = state;
  for (char pol : {'H', 'V'}) {
    int i1 = current.mode_index(in1, pol);
    int i2 = current.mode_index(in2, pol);
    int o1 = current.mode_index(out1, pol);
    int o2 = current.mode_index(out2, pol);
    if (i1 < 0 || i2 < 0 || o1 < 0 || o2 < 0) {
      throw std::invalid_argument("beamsplitter: missing mode label");
    }
    current = apply_two_mode_transform(current, i1, i2, o1, o2, t);
  }
  return current;
}

UnnormalizedState post_select_single_photon(const FockState& state,
                                            const std::vector<std::string>& spatials) {
  const int n = static_cast<int>(spatials.size());
  if (n == 0) throw std::invalid_argument("post_select: no spatial modes listed");

  std::vector<std::pair<int, int>> hv(spatials.size());
  std::set<int> selected;
  for (int q = 0; q < n; ++q) {
    int h = state.mode_index(spatials[static_cast<std::size_t>(q)], 'H');
    int v = state.mode_index(spatials[static_cast<std::size_t>(q)], 'V');
    if (h < 0 || v < 0) {
      throw std::invalid_argument("post_select: unknown spatial mode " +
                                  spatials[static_cast<std::size_t>(q)]);
    }
    hv[static_cast<std::size_t>(q)] = {h, v};
    selected.insert(h);
    selected.insert(v);
  }

  Vector amps = Vector::Zero(Eigen::Index{1} << n);
  for (const auto& [occ, amp] : state.terms()) {
    bool keep = true;
    for (std::size_t m = 0; m < occ.size(); ++m) {
      if (!selected.count(static_cast<int>(m)) && occ[m] != 0) {
        keep = false;
        break;
      }
    }
    if (!keep) continue;
    int index = 0;
    for (int q = 0; q < n && keep; ++q) {
      auto [h, v] = hv[static_cast<std::size_t>(q)];
      int nh = occ[static_cast<std::size_t>(h)], nv = occ[static_cast<std::size_t>(v)];
      if (nh + nv != 1) {
        keep = false;
      } else if (nv == 1) {
        index |= 1 << (n - 1 - q); // V maps to |1>
      }
    }
    if (keep) amps[index] += amp;
  }
  Labels labels(spatials.begin(), spatials.end());
  return UnnormalizedState(std::move(amps), std::move(labels));
}

namespace {

// Canonical gauge for the three-qubit output: make the |000>, |100>, |110>,
// |101> amplitudes real non-negative, in that priority, using one global phase
// plus one Z-rotation phase per qubit. The family's own phase relation then
// lands |011> on the negative real axis.
Vector align_family_phases(const Vector& v) {
  if (v.size() != 8) throw std::invalid_argument("phase alignment expects 8 amplitudes");
  double tol = 1e-9 * v.cwiseAbs().maxCoeff();
  auto arg_of = [&](int i) { return std::arg(v[i]); };

  double g;
  if (std::abs(v[0]) > tol) {
    g = -arg_of(0);
  } else if (std::abs(v[4]) > tol) {
    g = -arg_of(4);
  } else if (std::abs(v[6]) > tol && std::abs(v[5]) > tol && std::abs(v[3]) > tol) {
    // |000> and |100> vanish only at the fully symmetric point; pin the gauge
    // from the remaining three amplitudes instead
    g = arg_of(3) - arg_of(6) - arg_of(5) - std::numbers::pi;
  } else {
    g = 0.0;
  }
  double p1 = std::abs(v[4]) > tol ? -arg_of(4) - g : 0.0;
  double p2 = std::abs(v[6]) > tol ? -arg_of(6) - g - p1 : 0.0;
  double p3 = std::abs(v[5]) > tol ? -arg_of(5) - g - p1 : 0.0;

  Vector out(8);
  for (int i = 0; i < 8; ++i) {
    double phase = g;
    if (i & 4) phase += p1;
    if (i & 2) phase += p2;
    if (i & 1) phase += p3;
    out[i] = v[i] * std::polar(1.0, phase);
  }
  return out;
}

} // namespace

CircuitOutcome run_circuit(double theta) {
  if (theta < -1e-12 || theta > std::numbers::pi / 4 + 1e-12) {
    throw std::invalid_argument("run_circuit: theta outside [0, pi/4]");
  }
  FockState qutrit = prepare_qutrit(theta);
  FockState herald =
      FockState::single_term({{"b", 'H'}, {"b", 'V'}}, {1, 0}, 1.0);
  FockState rest(std::vector<OpticalMode>{{"c", 'H'}, {"c", 'V'},
                                          {"d", 'H'}, {"d", 'V'},
                                          {"e", 'H'}, {"e", 'V'},
                                          {"f", 'H'}, {"f", 'V'}});
  FockState state = tensor_product(tensor_product(qutrit, herald), rest);
  if (state.photon_number() != 3) {
    throw std::logic_error("circuit input must carry exactly three photons");
  }

  state = beamsplitter(state, "a", "b", "c", "d", 0.5);
  state = beamsplitter(state, "d", "e", "e", "f", 0.5);

  UnnormalizedState raw = post_select_single_photon(state, {"c", "e", "f"});
  double success = raw.norm2();
  Vector aligned = align_family_phases(raw.amplitudes() / std::sqrt(success));
  return {PureState(std::move(aligned), raw.labels()), success, theta};
}

PureState ideal_family_state(double theta) {
  if (theta < -1e-12 || theta > std::numbers::pi / 4 + 1e-12) {
    throw std::invalid_argument("ideal_family_state: theta outside [0, pi/4]");
  }
  double c = std::cos(2.0 * theta), s = std::sin(2.0 * theta);
  double norm = std::sqrt(1.0 + 2.0 * s * s);
  Vector v = Vector::Zero(8);
  v[0] = c * c / norm;
  v[4] = 2.0 * c * s / norm;
  v[6] = s * s / norm;
  v[5] = s * s / norm;
  v[3] = -s * s / norm;
  return PureState(std::move(v), {"c", "e", "f"});
}

double ideal_success_probability(double theta) {
  double s = std::sin(2.0 * theta);
  return (1.0 + 2.0 * s * s) / 16.0;
}

std::vector<ThetaScanRow> theta_scan(const std::vector<double>& thetas) {
  std::vector<ThetaScanRow> rows;
  rows.reserve(thetas.size());
  for (double theta : thetas) {
    CircuitOutcome outcome = run_circuit(theta);
    ThetaScanRow row;
    row.theta = theta;
    row.success_probability = outcome.success_probability;
    row.report = robustness_profile(density(outcome.state));
    row.fidelity_vs_ideal = fidelity(outcome.state, ideal_family_state(theta));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::string fmt_g(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

} // namespace

void write_theta_scan_csv(std::ostream& out, const std::vector<ThetaScanRow>& rows) {
  out << "theta_deg,success_prob,n3,tau3,tau2_ce,tau2_cf,tau2_ef,tau2_min,"
         "tau2_avg,s_linear,fidelity_vs_ideal\n";
  for (const auto& r : rows) {
    if (!r.report.three_tangle) {
      throw std::logic_error("theta scan rows must come from pure circuit outputs");
    }
    out << fmt_g(r.theta * 180.0 / std::numbers::pi) << ','
        << fmt_g(r.success_probability) << ','
        << fmt_g(r.report.tripartite_negativity) << ','
        << fmt_g(*r.report.three_tangle) << ','
        << fmt_g(r.report.pair_tangles[0].value) << ','
        << fmt_g(r.report.pair_tangles[1].value) << ','
        << fmt_g(r.report.pair_tangles[2].value) << ','
        << fmt_g(r.report.tau2_min) << ',' << fmt_g(r.report.tau2_avg) << ','
        << fmt_g(r.report.linear_entropy) << ',' << fmt_g(r.fidelity_vs_ideal)
        << '\n';
  }
}

} // namespace entangle

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "entangle/measures.hpp"
#include "entangle/qcore.hpp"
#include "entangle/rng.hpp"

using namespace entangle;

namespace {

constexpr double kN3W = 0.9428090415820635; // 2 sqrt2 / 3

PureState random_pure(int num_qubits, std::uint64_t seed) {
  auto rng = seeded_engine(seed);
  int dim = 1 << num_qubits;
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = Complex(gaussian(rng), gaussian(rng));
  v.normalize();
  Labels labels;
  for (int q = 0; q < num_qubits; ++q) labels.push_back("q" + std::to_string(q));
  return PureState(v, std::move(labels));
}

// relabels the state so that qubit slot i carries the amplitude bits of perm[i]
PureState permute_qubits(const PureState& psi, const std::vector<int>& perm) {
  int n = psi.num_qubits();
  Vector out = Vector::Zero(psi.dim());
  for (int idx = 0; idx < psi.dim(); ++idx) {
    int src = 0;
    for (int slot = 0; slot < n; ++slot) {
      src |= bit_of(idx, slot, n) << (n - 1 - perm[slot]);
    }
    out[idx] = psi.amplitudes()[src];
  }
  return PureState(out, psi.labels());
}

} // namespace

TEST_CASE("concurrence of pure two-qubit states matches 2|ad - bc|") {
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    auto psi = random_pure(2, 1000 + seed);
    const auto& v = psi.amplitudes();
    double expected = 2.0 * std::abs(v[0] * v[3] - v[1] * v[2]);
    CHECK(concurrence(as_density(psi)) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("concurrence oracle values") {
  CHECK(concurrence(as_density(bell_state("psi+"))) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(concurrence(as_density(bell_state("phi-"))) == doctest::Approx(1.0).epsilon(1e-12));

  Vector prod = Vector::Zero(4);
  prod[0] = 1.0;
  CHECK(concurrence(as_density(PureState(prod, {"a", "b"}))) == 0.0);

  // rank-deficient mixed state must give an exact zero, not sqrt(eps) noise
  auto w = as_density(w_state());
  auto reduced = partial_trace(w, {"c", "e"});
  CHECK(tangle(reduced) == doctest::Approx(4.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("werner concurrence and linear entropy curves") {
  for (int i = 0; i <= 20; ++i) {
    double p = i / 20.0;
    auto rho = werner_state(p);
    double expected_c = std::max(0.0, (3.0 * p - 1.0) / 2.0);
    CHECK(concurrence(rho) == doctest::Approx(expected_c).epsilon(1e-10));
    CHECK(linear_entropy_unnormalized(rho) ==
          doctest::Approx(0.75 * (1.0 - p * p)).epsilon(1e-12));
  }
}

TEST_CASE("mems family hits the requested concurrence") {
  for (int i = 0; i <= 20; ++i) {
    double c = i / 20.0;
    CHECK(concurrence(mems_state(c)) == doctest::Approx(c).epsilon(1e-10));
  }
  CHECK_THROWS_AS(mems_state(1.5), std::invalid_argument);
}

TEST_CASE("mems at concurrence 2/3 is the reduced w state up to a local flip") {
  auto reduced = partial_trace(as_density(w_state()), {"e", "f"});
  Eigen::Matrix2cd x, id;
  x << 0, 1, 1, 0;
  id.setIdentity();
  auto flipped = apply_local_unitaries(reduced, {x, id});
  auto mems = mems_state(2.0 / 3.0);
  CHECK((flipped.matrix() - mems.matrix()).cwiseAbs().maxCoeff() < 1e-12);

  // spectra agree even before the flip
  Eigen::SelfAdjointEigenSolver<Matrix> ea(reduced.matrix()), eb(mems.matrix());
  CHECK((ea.eigenvalues() - eb.eigenvalues()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(ea.eigenvalues().maxCoeff() == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("three tangle separates the ghz and w classes") {
  CHECK(three_tangle(ghz_state()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(three_tangle(w_state()) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(three_tangle(zero_tensor_bell()) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(three_tangle(product_zero_state()) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("three tangle is invariant under qubit permutations") {
  const std::vector<std::vector<int>> perms = {
      {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto psi = random_pure(3, 2000 + seed);
    double base = three_tangle(psi);
    for (const auto& perm : perms) {
      CHECK(three_tangle(permute_qubits(psi, perm)) ==
            doctest::Approx(base).epsilon(2e-8));
    }
  }
}

TEST_CASE("monogamy holds on random pure three-qubit states") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto psi = random_pure(3, 3000 + seed);
    auto rho = as_density(psi);
    auto rho_a = partial_trace(rho, {"q0"});
    double tau_one_vs_rest =
        4.0 * (rho_a.matrix().determinant()).real(); // 4 det(rho_A) for pure states
    double tau_ab = tangle(partial_trace(rho, {"q0", "q1"}));
    double tau_ac = tangle(partial_trace(rho, {"q0", "q2"}));
    CHECK(tau_ab + tau_ac <= tau_one_vs_rest + 1e-9);
    double residual = three_tangle(psi);
    CHECK(residual == doctest::Approx(tau_one_vs_rest - tau_ab - tau_ac).epsilon(1e-8));
  }
}

TEST_CASE("entanglement measures are invariant under local unitaries") {
  auto rng = seeded_engine(77);
  for (int trial = 0; trial < 30; ++trial) {
    auto psi = random_pure(3, 4000 + static_cast<std::uint64_t>(trial));
    std::vector<Eigen::Matrix2cd> us;
    for (int q = 0; q < 3; ++q) {
      Eigen::Matrix2cd m;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) m(i, j) = Complex(gaussian(rng), gaussian(rng));
      Eigen::HouseholderQR<Eigen::Matrix2cd> qr(m);
      us.push_back(qr.householderQ());
    }
    auto rotated = apply_local_unitaries(psi, us);
    CHECK(three_tangle(rotated) == doctest::Approx(three_tangle(psi)).epsilon(2e-8));
    auto rho = as_density(psi);
    auto rho_rot = as_density(rotated);
    CHECK(tripartite_negativity(rho_rot) ==
          doctest::Approx(tripartite_negativity(rho)).epsilon(1e-9));
    CHECK(tangle(partial_trace(rho_rot, {"q0", "q1"})) ==
          doctest::Approx(tangle(partial_trace(rho, {"q0", "q1"}))).epsilon(1e-8));
  }
}

TEST_CASE("negativity oracle values") {
  auto bell = as_density(bell_state("psi+"));
  CHECK(negativity(bell, {"a"}) == doctest::Approx(1.0).epsilon(1e-12));

  Vector prod = Vector::Zero(4);
  prod[0] = 1.0;
  CHECK(negativity(as_density(PureState(prod, {"a", "b"})), {"a"}) ==
        doctest::Approx(0.0).epsilon(1e-12));

  auto w = as_density(w_state());
  CHECK(negativity(w, {"c"}) == doctest::Approx(kN3W).epsilon(1e-12));
  CHECK(negativity(w, {"e"}) == doctest::Approx(kN3W).epsilon(1e-12));
  // the complementary cut carries the same negativity
  CHECK(negativity(w, {"e", "f"}) == doctest::Approx(negativity(w, {"c"})).epsilon(1e-12));
}

TEST_CASE("tripartite negativity oracle values") {
  CHECK(tripartite_negativity(as_density(w_state())) == doctest::Approx(kN3W).epsilon(1e-12));
  CHECK(tripartite_negativity(as_density(ghz_state())) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(tripartite_negativity(as_density(zero_tensor_bell())) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(tripartite_negativity(as_density(product_zero_state())) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("w witness oracle values") {
  CHECK(w_witness(as_density(w_state())) == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));

  auto mixed = DensityMatrix(Matrix::Identity(8, 8) / 8.0, {"c", "e", "f"});
  CHECK(w_witness(mixed) == doctest::Approx(13.0 / 24.0).epsilon(1e-12));

  auto w = as_density(w_state());
  Matrix blend = 0.9 * w.matrix() + 0.1 * as_density(product_zero_state()).matrix();
  CHECK(w_witness(DensityMatrix(blend, {"c", "e", "f"})) ==
        doctest::Approx(2.0 / 3.0 - 0.9).epsilon(1e-12));
}

TEST_CASE("closed form residual tangle endpoints and midpoint") {
  CHECK(closed_form_residual_tangle(0.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(closed_form_residual_tangle(std::numbers::pi / 4.0) ==
        doctest::Approx(4.0 / 9.0).epsilon(1e-14));
  CHECK(closed_form_residual_tangle(std::numbers::pi / 12.0) ==
        doctest::Approx(1.0 / 9.0).epsilon(1e-14));
  CHECK_THROWS_AS(closed_form_residual_tangle(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(closed_form_residual_tangle(1.0), std::invalid_argument);
}

TEST_CASE("robustness profile of the w state") {
  auto rep = robustness_profile(as_density(w_state()));
  REQUIRE(rep.pair_tangles.size() == 3);
  CHECK(rep.pair_tangles[0].first == "c");
  CHECK(rep.pair_tangles[0].second == "e");
  for (const auto& p : rep.pair_tangles) {
    CHECK(p.value == doctest::Approx(4.0 / 9.0).epsilon(1e-12));
  }
  CHECK(rep.tau2_min == doctest::Approx(4.0 / 9.0).epsilon(1e-12));
  CHECK(rep.tau2_avg == doctest::Approx(4.0 / 9.0).epsilon(1e-12));
  REQUIRE(rep.three_tangle.has_value());
  CHECK(*rep.three_tangle == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(rep.tripartite_negativity == doctest::Approx(kN3W).epsilon(1e-12));
  CHECK(rep.linear_entropy == doctest::Approx(0.0).epsilon(1e-12));
  REQUIRE(rep.witness_value.has_value());
  CHECK(*rep.witness_value == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
  CHECK_FALSE(rep.fidelity_vs_target.has_value());
}

TEST_CASE("robustness profile against a target records the fidelity") {
  auto rep = robustness_profile(as_density(w_state()), StateVariant(w_state()));
  REQUIRE(rep.fidelity_vs_target.has_value());
  CHECK(*rep.fidelity_vs_target == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("profile of a separable-cut state") {
  auto rep = robustness_profile(as_density(zero_tensor_bell()));
  CHECK(rep.tripartite_negativity == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(rep.tau2_min == doctest::Approx(0.0).epsilon(1e-12));
  // one fully entangled pair among three
  CHECK(rep.tau2_avg == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("the three-tangle is withheld for strongly mixed states") {
  auto mixed = DensityMatrix(Matrix::Identity(8, 8) / 8.0, {"c", "e", "f"});
  auto rep = robustness_profile(mixed);
  CHECK_FALSE(rep.three_tangle.has_value());
}

TEST_CASE("report json carries the expected keys") {
  auto rep = robustness_profile(as_density(w_state()), StateVariant(w_state()));
  rep.error_bars["tau2_min"] = 0.01;
  auto j = report_to_json(rep);
  CHECK(j.contains("pair_tangles"));
  CHECK(j["pair_tangles"].contains("c:e"));
  CHECK(j.contains("tau2_min"));
  CHECK(j.contains("tau2_avg"));
  CHECK(j.contains("three_tangle"));
  CHECK(j.contains("tripartite_negativity"));
  CHECK(j.contains("linear_entropy"));
  CHECK(j.contains("fidelity_vs_target"));
  CHECK(j.contains("witness_value"));
  CHECK(j["error_bars"]["tau2_min"] == 0.01);
}

TEST_CASE("reference state lookup") {
  CHECK(std::holds_alternative<PureState>(reference_state("w")));
  CHECK(std::holds_alternative<PureState>(reference_state("GHZ")));
  CHECK(std::holds_alternative<DensityMatrix>(reference_state("mems", {0.5})));
  CHECK(std::holds_alternative<DensityMatrix>(reference_state("werner", {0.5})));
  CHECK(std::holds_alternative<PureState>(reference_state("psi+")));
  CHECK_THROWS_AS(reference_state("nope"), std::invalid_argument);
  CHECK_THROWS_AS(reference_state("mems"), std::invalid_argument);
}

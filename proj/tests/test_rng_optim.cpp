#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "entangle/optim.hpp"
#include "entangle/rng.hpp"

using namespace entangle;

TEST_CASE("splitmix64 matches the reference sequence") {
  // first three outputs of the reference generator seeded with 0
  CHECK(splitmix64(0) == 0xE220A8397B1DCDAFULL);
  CHECK(splitmix64(0x9E3779B97F4A7C15ULL) == 0x6E789E6AA1B965F4ULL);
  CHECK(splitmix64(2 * 0x9E3779B97F4A7C15ULL) == 0x06C45D188009454FULL);
  CHECK(derive_seed(0, 2) == splitmix64(2 * 0x9E3779B97F4A7C15ULL));
}

TEST_CASE("derive_seed separates streams and stays reproducible") {
  CHECK(derive_seed(42, 0) == derive_seed(42, 0));
  CHECK(derive_seed(42, 0) != derive_seed(42, 1));
  CHECK(derive_seed(42, 1) != derive_seed(43, 1));

  auto a = seeded_engine(7, 3);
  auto b = seeded_engine(7, 3);
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
}

TEST_CASE("uniform01 stays in [0,1) with a sane mean") {
  auto rng = seeded_engine(11);
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) {
    double u = uniform01(rng);
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / 20000 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("gaussian moments") {
  auto rng = seeded_engine(12);
  double sum = 0.0, sum2 = 0.0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    double g = gaussian(rng);
    sum += g;
    sum2 += g * g;
  }
  double mean = sum / n;
  double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(var == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("poisson moments on both sides of the algorithm switch") {
  for (double mean : {0.5, 5.0, 29.5, 30.5, 200.0}) {
    auto rng = seeded_engine(13, static_cast<std::uint64_t>(mean * 10));
    double sum = 0.0, sum2 = 0.0;
    const int n = 30000;
    for (int i = 0; i < n; ++i) {
      auto k = static_cast<double>(poisson(rng, mean));
      REQUIRE(k >= 0);
      sum += k;
      sum2 += k * k;
    }
    double m = sum / n;
    double var = sum2 / n - m * m;
    // mean and variance both equal the rate; 5 sigma statistical slack
    CHECK(std::abs(m - mean) < 5.0 * std::sqrt(mean / n));
    CHECK(var == doctest::Approx(mean).epsilon(0.08));
  }
}

TEST_CASE("poisson edge cases") {
  auto rng = seeded_engine(14);
  for (int i = 0; i < 100; ++i) CHECK(poisson(rng, 0.0) == 0);
  CHECK_THROWS_AS(poisson(rng, -1.0), std::invalid_argument);
}

TEST_CASE("bfgs minimizes a quadratic to machine precision") {
  Eigen::VectorXd target(3);
  target << 1.0, -2.0, 0.5;
  auto f = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    Eigen::VectorXd d = x - target;
    if (grad) *grad = 2.0 * d;
    return d.squaredNorm();
  };
  auto result = minimize_bfgs(f, Eigen::VectorXd::Zero(3));
  CHECK(result.converged);
  CHECK((result.x - target).norm() < 1e-6);
  CHECK(result.value < 1e-12);
}

TEST_CASE("bfgs handles the rosenbrock valley") {
  auto f = [](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    double a = 1.0 - x[0];
    double b = x[1] - x[0] * x[0];
    if (grad) {
      grad->resize(2);
      (*grad)[0] = -2.0 * a - 400.0 * x[0] * b;
      (*grad)[1] = 200.0 * b;
    }
    return a * a + 100.0 * b * b;
  };
  Eigen::VectorXd x0(2);
  x0 << -1.2, 1.0;
  auto result = minimize_bfgs(f, x0);
  CHECK(result.converged);
  CHECK(std::abs(result.x[0] - 1.0) < 1e-5);
  CHECK(std::abs(result.x[1] - 1.0) < 1e-5);
}

TEST_CASE("numeric gradient wrapper agrees with an analytic gradient") {
  auto value_only = [](const Eigen::VectorXd& x) {
    return x[0] * x[0] * x[0] + 2.0 * x[0] * x[1] + std::sin(x[1]);
  };
  auto wrapped = with_numeric_gradient(value_only);
  Eigen::VectorXd x(2);
  x << 0.7, -0.3;
  Eigen::VectorXd grad(2);
  wrapped(x, &grad);
  CHECK(grad[0] == doctest::Approx(3.0 * x[0] * x[0] + 2.0 * x[1]).epsilon(1e-6));
  CHECK(grad[1] == doctest::Approx(2.0 * x[0] + std::cos(x[1])).epsilon(1e-6));
}

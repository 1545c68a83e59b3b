#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "superrad/correlations.hpp"
#include "superrad/coupling.hpp"
#include "superrad/emitters.hpp"

using namespace superrad;

namespace {

DecayMatrix uniform_beta(int n, double beta) {
  return build_matrices(static_cast<std::size_t>(n), SingleModeBIC{1.0, beta}).decay;
}

double closed_sum(const Eigen::MatrixXd& g) {
  const double s = g.trace();
  return 1.0 + (g.squaredNorm() - 2.0 * g.diagonal().squaredNorm()) / (s * s);
}

EmitterArray random_free_space_lattice(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d_over_lambda(0.1, 3.0);
  LatticeSpec spec;
  spec.lattice_const_nm = d_over_lambda(rng) * 708.9;
  return build_square_lattice(spec, 708.9);
}

}  // namespace

TEST_CASE("direct evaluation on known matrices") {
  CHECK(g2_direct(build_matrices(9, IdealDicke{}).decay).value ==
        doctest::Approx(16.0 / 9.0).epsilon(1e-14));
  CHECK(g2_direct(build_matrices(2, Independent{}).decay).value == doctest::Approx(0.5).epsilon(1e-14));
  const double v = g2_direct(uniform_beta(121, 0.8179)).value;
  CHECK(std::abs(v - 1.6552) < 1e-4);
  CHECK(v == doctest::Approx(g2_bic_analytic(121, 0.8179)).epsilon(1e-12));
  CHECK_THROWS_AS(g2_direct(DecayMatrix(Eigen::MatrixXd::Ones(1, 1))), std::invalid_argument);
  Eigen::MatrixXd bad(2, 2);
  bad << 1, 1.5, 1.5, 1;
  CHECK_THROWS_AS(g2_direct(DecayMatrix(bad)), ValidationError);
}

TEST_CASE("spectral evaluation on known matrices") {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 3.0;
  CHECK(g2_spectral(DecayMatrix(d)).value == doctest::Approx(0.375).epsilon(1e-14));
  CHECK(g2_spectral(DecayMatrix(Eigen::MatrixXd::Ones(2, 2))).value ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(g2_spectral(uniform_beta(121, 0.8179)).value == doctest::Approx(1.6552).epsilon(1e-4));
  CHECK(g2_spectral(build_matrices(9, IdealDicke{}).decay).value ==
        doctest::Approx(16.0 / 9.0).epsilon(1e-13));
}

TEST_CASE("analytic limits") {
  const std::vector<double> ones9(9, 1.0);
  CHECK(g2_independent_limit(ones9) == doctest::Approx(8.0 / 9.0).epsilon(1e-15));
  CHECK(g2_dicke_limit(ones9) == doctest::Approx(16.0 / 9.0).epsilon(1e-15));
  const std::vector<double> unequal{1.0, 3.0};
  CHECK(g2_independent_limit(unequal) == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(g2_bic_analytic(9, 0.0) == doctest::Approx(8.0 / 9.0).epsilon(1e-15));
  CHECK(g2_bic_analytic(9, 1.0) == doctest::Approx(16.0 / 9.0).epsilon(1e-15));
  CHECK(g2_bic_analytic(121, 0.8179) == doctest::Approx(1.6552).epsilon(1e-4));
  CHECK_THROWS(g2_bic_analytic(0, 0.5));
  CHECK_THROWS(g2_bic_analytic(4, 1.5));
}

TEST_CASE("spectral and direct agree with the literal quadruple sum") {
  std::mt19937_64 rng(314159);
  std::uniform_int_distribution<int> size(2, 14);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = size(rng);
    const Eigen::MatrixXd g = oracle::random_physical(n, rng);
    const DecayMatrix m(g);
    const double ref = oracle::g2_quadruple(g);
    CHECK(std::abs(g2_direct(m).value - ref) <= 1e-12);
    CHECK(std::abs(g2_spectral(m).value - ref) <= 1e-10);
    CHECK(std::abs(closed_sum(g) - ref) <= 1e-12);
  }
}

TEST_CASE("uniform-beta matrices match the analytic curve") {
  for (int n_side = 1; n_side <= 11; n_side += 2) {
    const int n = n_side * n_side;
    if (n < 2) continue;
    for (double beta = 0.0; beta <= 1.0 + 1e-12; beta += 0.05) {
      const auto m = uniform_beta(n, std::min(beta, 1.0));
      CHECK(std::abs(g2_spectral(m).value - g2_bic_analytic(n, std::min(beta, 1.0))) <= 1e-12);
    }
  }
}

TEST_CASE("invariance under scaling and relabelling") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 10;
    const Eigen::MatrixXd g = oracle::random_physical(n, rng);
    const double base = g2_spectral(DecayMatrix(g)).value;
    CHECK(g2_spectral(DecayMatrix(3.7 * g)).value == doctest::Approx(base).epsilon(1e-12));
    CHECK(g2_spectral(DecayMatrix(1e-6 * g)).value == doctest::Approx(base).epsilon(1e-12));

    std::vector<std::size_t> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto permuted = DecayMatrix(g).subsample(perm);
    CHECK(g2_spectral(permuted).value == doctest::Approx(base).epsilon(1e-12));
    CHECK(g2_direct(permuted).value == doctest::Approx(g2_direct(DecayMatrix(g)).value).epsilon(1e-13));
  }
}

TEST_CASE("bounds") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = build_matrices(random_free_space_lattice(rng), FreeSpace{}).decay;
    const auto b = check_bounds(m);
    CHECK(b.ordered);
    CHECK(b.independent <= b.value + 1e-9);
    CHECK(b.value <= b.dicke + 1e-9);
  }
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = DecayMatrix(oracle::random_physical(2 + trial % 12, rng));
    CHECK(check_bounds(m).ordered);
  }
  const auto dicke = check_bounds(build_matrices(9, IdealDicke{}).decay);
  CHECK(dicke.value == doctest::Approx(dicke.dicke).epsilon(1e-13));
  const auto indep = check_bounds(build_matrices(9, Independent{}).decay);
  CHECK(indep.value == doctest::Approx(indep.independent).epsilon(1e-13));
  // Rank-one with unequal rates also saturates the upper bound.
  Eigen::VectorXd v(3);
  v << 1.0, 2.0, 0.5;
  const auto rank_one = check_bounds(DecayMatrix(v * v.transpose()));
  CHECK(rank_one.value == doctest::Approx(rank_one.dicke).epsilon(1e-12));
}

TEST_CASE("free-space decorrelation at large spacing") {
  LatticeSpec spec;
  spec.lattice_const_nm = 3.0 * 708.9;
  const auto m = build_matrices(build_square_lattice(spec, 708.9), FreeSpace{}).decay;
  CHECK(std::abs(g2_spectral(m).value - 8.0 / 9.0) < 0.02);
}

TEST_CASE("spectral decomposition") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 20;
    const Eigen::MatrixXd g = oracle::random_physical(n, rng);
    const auto s = decompose(DecayMatrix(g));
    CHECK((s.reconstruct() - g).cwiseAbs().maxCoeff() <= 1e-10 * g.cwiseAbs().maxCoeff());
    const Eigen::MatrixXd gram = s.eigenvectors.transpose() * s.eigenvectors;
    CHECK((gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(std::is_sorted(s.eigenvalues.data(), s.eigenvalues.data() + n));
    CHECK(s.eigenvalues.sum() == doctest::Approx(g.trace()).epsilon(1e-12));
    CHECK(g2_spectral(s).value == doctest::Approx(g2_spectral(DecayMatrix(g)).value).epsilon(1e-15));
  }
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "superrad/emitters.hpp"
#include "superrad/random.hpp"
#include "superrad/serialization.hpp"

using namespace superrad;

namespace {

const double kLambda = 708.9;

EmitterArray lattice(int n, double d = 400.0) {
  LatticeSpec spec;
  spec.n_side = n;
  spec.lattice_const_nm = d;
  spec.offset_x0_nm = 65.2;
  spec.height_nm = 104.0;
  return build_square_lattice(spec, kLambda);
}

}  // namespace

TEST_CASE("lattice geometry") {
  SUBCASE("3x3 centre") {
    const auto a = lattice(3);
    REQUIRE(a.size() == 9);
    const Vec3 c = a.positions_nm()[4];
    CHECK(c[0] == doctest::Approx(65.2).epsilon(1e-15));
    CHECK(c[1] == 0.0);
    CHECK(c[2] == 104.0);
    for (const auto& u : a.dipoles()) CHECK(u == Vec3{0.0, 1.0, 0.0});
    // i (x) is the slow index.
    CHECK(a.positions_nm()[0][0] == doctest::Approx(65.2 - 400.0));
    CHECK(a.positions_nm()[1][1] == doctest::Approx(0.0));
    CHECK(a.positions_nm()[2][1] == doctest::Approx(400.0));
  }
  SUBCASE("single emitter") {
    const auto a = lattice(1);
    REQUIRE(a.size() == 1);
    CHECK(a.positions_nm()[0] == Vec3{65.2, 0.0, 104.0});
  }
  SUBCASE("2x2 separations") {
    const auto a = lattice(2, 100.0);
    REQUIRE(a.size() == 4);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = i + 1; j < 4; ++j) {
        const double dx = std::abs(a.positions_nm()[i][0] - a.positions_nm()[j][0]);
        const double dy = std::abs(a.positions_nm()[i][1] - a.positions_nm()[j][1]);
        CHECK((dx == doctest::Approx(0.0) || dx == doctest::Approx(100.0).epsilon(1e-14)));
        CHECK((dy == doctest::Approx(0.0) || dy == doctest::Approx(100.0).epsilon(1e-14)));
        CHECK(dx + dy > 99.0);
      }
  }
  SUBCASE("invalid input") {
    CHECK_THROWS_AS(lattice(0), std::invalid_argument);
    CHECK_THROWS_AS(lattice(3, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(lattice(3, 0.0), std::invalid_argument);
    LatticeSpec spec;
    spec.lattice_const_nm = 0.0;
    spec.allow_coincident = true;
    CHECK(build_square_lattice(spec, kLambda).size() == 9);
    spec.lattice_const_nm = std::nan("");
    CHECK_THROWS(build_square_lattice(spec, kLambda));
  }
}

TEST_CASE("emitter array invariants") {
  CHECK_THROWS(EmitterArray({}, {}, kLambda));
  CHECK_THROWS(EmitterArray({{0, 0, 0}}, {{0, 1.001, 0}}, kLambda));
  CHECK_THROWS(EmitterArray({{0, 0, 0}, {0, 0, 0}}, {{0, 1, 0}, {0, 1, 0}}, kLambda));
  CHECK_THROWS(EmitterArray({{0, 0, 0}}, {{0, 1, 0}, {0, 1, 0}}, kLambda));
  CHECK_NOTHROW(EmitterArray({{0, 0, 0}, {0, 0, 0}}, {{0, 1, 0}, {0, 1, 0}}, kLambda, true));
  CHECK_THROWS(EmitterArray({{0, 0, 0}}, {{0, 1, 0}}, -5.0));
  const EmitterArray a({{0, 0, 0}}, {{0, 1, 0}}, 708.9);
  CHECK(a.omega0() == doctest::Approx(2.0 * M_PI * 299792458.0 / 708.9e-9));
}

TEST_CASE("filling fraction") {
  const auto full = lattice(5);
  RandomStream rng(11);
  CHECK(apply_filling_fraction(full, 1.0, rng) == full);
  CHECK(filled_count(25, 0.8) == 20);
  CHECK(filled_count(121, 0.2) == 24);
  CHECK(filled_count(10, 0.25) == 3);  // 2.5 rounds up
  CHECK(apply_filling_fraction(full, 0.8, rng).size() == 20);
  CHECK(apply_filling_fraction(lattice(11), 0.2, rng).size() == 24);
  CHECK_THROWS(apply_filling_fraction(full, 1.5, rng));

  const std::set<Vec3> sites(full.positions_nm().begin(), full.positions_nm().end());
  for (int trial = 0; trial < 200; ++trial) {
    const auto idx = draw_filling_subset(25, 0.6, rng);
    CHECK(std::is_sorted(idx.begin(), idx.end()));
    CHECK(std::adjacent_find(idx.begin(), idx.end()) == idx.end());
    const auto sub = full.subset(idx);
    for (const auto& p : sub.positions_nm()) CHECK(sites.count(p) == 1);
  }
  RandomStream r1(5), r2(5);
  CHECK(apply_filling_fraction(full, 0.5, r1) == apply_filling_fraction(full, 0.5, r2));
}

TEST_CASE("jitter grid") {
  const JitterGrid pos{10.0, 50};
  CHECK(pos.spacing() == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(pos.count() == 51);
  CHECK(pos.value(0) == -10.0);
  CHECK(pos.value(25) == 0.0);
  CHECK(pos.value(50) == 10.0);
  CHECK(JitterGrid{20.0, 50}.spacing() == doctest::Approx(0.8));
  const JitterGrid ang{30.0, 100};
  CHECK(ang.spacing() == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(JitterGrid{60.0, 100}.spacing() == doctest::Approx(1.2));
  CHECK(JitterGrid{90.0, 100}.spacing() == doctest::Approx(1.8));
}

TEST_CASE("position jitter") {
  const auto base = lattice(3);
  RandomStream rng(3);
  CHECK(apply_position_jitter(base, 0.0, 50, rng) == base);

  for (int trial = 0; trial < 1000; ++trial) {
    const auto moved = apply_position_jitter(base, 30.0, 50, rng);
    REQUIRE(moved.size() == base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
      const auto& p = moved.positions_nm()[i];
      const auto& q = base.positions_nm()[i];
      CHECK(std::hypot(p[0] - q[0], p[1] - q[1]) <= 30.0 * (1 + 1e-12));
      CHECK(p[2] == q[2]);
      CHECK(moved.dipoles()[i] == base.dipoles()[i]);
    }
  }
  RandomStream a(77), b(77);
  CHECK(apply_position_jitter(base, 20.0, 50, a) == apply_position_jitter(base, 20.0, 50, b));
}

TEST_CASE("orientation jitter") {
  const auto base = lattice(3);
  RandomStream rng(4);
  const auto same = apply_orientation_jitter(base, 0.0, 100, rng);
  for (const auto& u : same.dipoles()) CHECK(u == Vec3{0.0, 1.0, 0.0});

  const Vec3 u = rotated_dipole(90.0);
  CHECK(u[0] == -1.0);
  CHECK(u[1] == 0.0);
  CHECK(u[2] == 0.0);
  CHECK(rotated_dipole(0.0) == Vec3{0.0, 1.0, 0.0});

  for (int trial = 0; trial < 200; ++trial) {
    const auto r = apply_orientation_jitter(base, 60.0, 100, rng);
    REQUIRE(r.size() == base.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
      CHECK(std::abs(norm(r.dipoles()[i]) - 1.0) < 1e-12);
      CHECK(r.dipoles()[i][2] == 0.0);
      const double angle = std::atan2(-r.dipoles()[i][0], r.dipoles()[i][1]) * 180.0 / M_PI;
      CHECK(std::abs(angle) <= 60.0 + 1e-9);
      CHECK(r.positions_nm()[i] == base.positions_nm()[i]);
    }
  }
  RandomStream a(9), b(9);
  CHECK(apply_orientation_jitter(base, 30.0, 100, a) == apply_orientation_jitter(base, 30.0, 100, b));
  CHECK_THROWS(apply_orientation_jitter(base, 200.0, 100, rng));
}

TEST_CASE("random streams") {
  RandomStream a = RandomStream::derive(42, 7);
  RandomStream b = RandomStream::derive(42, 7);
  RandomStream c = RandomStream::derive(42, 8);
  const auto x = a.next_u64();
  CHECK(x == b.next_u64());
  CHECK(x != c.next_u64());
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto k = a.uniform_index(7);
    REQUIRE(k < 7);
    ++hist[k];
  }
  for (int h : hist) CHECK(std::abs(h - 10000) < 500);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("emitter json round trip") {
  RandomStream rng(21);
  const auto a = apply_orientation_jitter(lattice(3), 45.0, 100, rng);
  const auto doc = emitters_to_json(a);
  CHECK(doc.begin().key() == "lambda0_nm");
  const auto back = emitters_from_json(nlohmann::json::parse(doc.dump()));
  CHECK(back == a);
}

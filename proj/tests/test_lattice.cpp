#include <doctest.h>

#include <cmath>
#include <limits>

#include "fraclat/lattice.hpp"

using namespace fraclat;

TEST_SUITE("lattice") {

TEST_CASE("lq_norm small cases") {
  CHECK(lq_norm(LatticeFunction::delta(0), 2.0) == doctest::Approx(1.0));
  CHECK(lq_norm(LatticeFunction::delta(0) + LatticeFunction::delta(1), 1.0) == doctest::Approx(2.0));
  CHECK(lq_norm(LatticeFunction(Window(0, 1), {3.0, 4.0}), 2.0) == doctest::Approx(5.0));
  CHECK(lq_norm(LatticeFunction(Window(-2, 0), {1.0, -7.0, 2.0}), std::numeric_limits<double>::infinity()) == 7.0);
}

TEST_CASE("in_Ds for finite support") {
  CHECK(in_Ds(LatticeFunction::delta(1), 0.25));
  CHECK(in_Ds(LatticeFunction::zeros(Window(-3, 3)), 0.5));
  CHECK(in_Ds(LatticeFunction(Window(-100, 100), std::vector<double>(201, 1.0)), 0.9));
  CHECK_THROWS_AS(in_Ds(LatticeFunction::delta(0), 1.5), std::invalid_argument);
}

TEST_CASE("window algebra") {
  const Window a(-2, 3), b(5, 9);
  CHECK(a.width() == 6);
  CHECK(Window::hull(a, b) == Window(-2, 9));
  CHECK(a.expanded(4) == Window(-6, 7));
  CHECK_THROWS_AS(Window(3, 1), std::invalid_argument);
}

TEST_CASE("values outside the window are zero") {
  const LatticeFunction f(Window(2, 4), {1.0, 2.0, 3.0});
  CHECK(f(1) == 0.0);
  CHECK(f(3) == 2.0);
  CHECK(f(5) == 0.0);
  const LatticeFunction g = f.restricted(Window(0, 3));
  CHECK(g(2) == 1.0);
  CHECK(g(4) == 0.0);
}

TEST_CASE("json round trip") {
  const LatticeFunction f(Window(-1, 1), {0.25, -1.5, 2.0});
  const nlohmann::json j = f;
  const LatticeFunction g = j.get<LatticeFunction>();
  CHECK(g.window() == f.window());
  for (std::int64_t x = -1; x <= 1; ++x) CHECK(g(x) == f(x));
}

}

#include <catch2/catch_amalgamated.hpp>

#include <stokeshape/quadrature.hpp>

using namespace stokeshape;

namespace {

// ∫_T x^a y^b over the unit reference triangle = a! b! / (a+b+2)!
double monomial_integral(int a, int b) {
  auto fact = [](int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
  };
  return fact(a) * fact(b) / fact(a + b + 2);
}

}  // namespace

TEST_CASE("triangle rules integrate monomials exactly up to their degree", "[quadrature]") {
  for (int degree = 1; degree <= 6; ++degree) {
    const auto rule = triangle_rule(degree);
    double wsum = 0.0;
    for (const auto& q : rule) {
      wsum += q.w;
      CHECK(q.x >= 0.0);
      CHECK(q.y >= 0.0);
      CHECK(q.x + q.y <= 1.0 + 1e-14);
    }
    CHECK(wsum == Catch::Approx(0.5).epsilon(1e-14));
    for (int a = 0; a <= degree; ++a)
      for (int b = 0; a + b <= degree; ++b) {
        double acc = 0.0;
        for (const auto& q : rule) acc += q.w * std::pow(q.x, a) * std::pow(q.y, b);
        INFO("degree " << degree << " monomial x^" << a << " y^" << b);
        CHECK(acc == Catch::Approx(monomial_integral(a, b)).margin(1e-14));
      }
  }
}

TEST_CASE("edge rules are Gauss-exact on [0,1]", "[quadrature]") {
  for (int degree = 1; degree <= 7; ++degree) {
    const auto rule = edge_rule(degree);
    for (int p = 0; p <= degree; ++p) {
      double acc = 0.0;
      for (const auto& q : rule) acc += q.w * std::pow(q.t, p);
      INFO("degree " << degree << " power " << p);
      CHECK(acc == Catch::Approx(1.0 / (p + 1)).epsilon(1e-13));
    }
  }
}

TEST_CASE("requesting an unsupported rule throws", "[quadrature]") {
  CHECK_THROWS(triangle_rule(-1));
  CHECK_THROWS(triangle_rule(7));
  CHECK_THROWS(edge_rule(8));
}

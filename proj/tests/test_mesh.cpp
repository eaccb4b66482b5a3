#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "polyelast/mesh.hpp"
#include "polyelast/quadrature.hpp"

using namespace polyelast;

namespace {

// int over the unit tetrahedron of x^a y^b z^c = a! b! c! / (a+b+c+3)!.
double tet_monomial_integral(int a, int b, int c) {
  auto fact = [](int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
  };
  return fact(a) * fact(b) * fact(c) / fact(a + b + c + 3);
}

}  // namespace

TEST_CASE("order-1 rule is the centroid point with weight 1/6") {
  const QuadratureRule r = quadrature(1);
  REQUIRE(r.points.size() == 1);
  CHECK((r.points[0] - Eigen::Vector3d(0.25, 0.25, 0.25))
            .cwiseAbs()
            .maxCoeff() <= 1e-15);
  CHECK(r.weights[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
}

TEST_CASE("rules integrate monomials exactly up to their order") {
  for (int order = 1; order <= 6; ++order) {
    const QuadratureRule r = quadrature(order);
    for (int a = 0; a <= order; ++a)
      for (int b = 0; a + b <= order; ++b)
        for (int c = 0; a + b + c <= order; ++c) {
          double sum = 0.0;
          for (std::size_t q = 0; q < r.points.size(); ++q)
            sum += r.weights[q] * std::pow(r.points[q][0], a) *
                   std::pow(r.points[q][1], b) * std::pow(r.points[q][2], c);
          const double exact = tet_monomial_integral(a, b, c);
          CHECK(std::abs(sum - exact) <= 1e-14 * std::max(1.0, 1.0 / exact));
        }
  }
  // spot value pinned: int x over the unit tet = 1/24
  const QuadratureRule r = quadrature(2);
  double sum = 0.0;
  for (std::size_t q = 0; q < r.points.size(); ++q)
    sum += r.weights[q] * r.points[q][0];
  CHECK(sum == doctest::Approx(1.0 / 24.0).epsilon(1e-14));
}

TEST_CASE("invalid quadrature order is rejected") {
  CHECK_THROWS_AS(quadrature(0), std::invalid_argument);
  CHECK_THROWS_AS(quadrature(7), std::invalid_argument);
}

TEST_CASE("duffy rule stays exact beyond order 6") {
  const QuadratureRule r = duffy_rule(8);
  double sum = 0.0;
  for (std::size_t q = 0; q < r.points.size(); ++q)
    sum += r.weights[q] * std::pow(r.points[q][0], 5) *
           std::pow(r.points[q][1], 3);
  CHECK(sum == doctest::Approx(tet_monomial_integral(5, 3, 0)).epsilon(1e-12));
}

TEST_CASE("uniform mesh counts and volumes") {
  const TorusMesh m2 = TorusMesh::build_uniform(2);
  CHECK(m2.vertices.size() == 8);
  CHECK(m2.elements.size() == 48);
  const TorusMesh m3 = TorusMesh::build_uniform(3);
  CHECK(m3.vertices.size() == 27);
  CHECK(m3.elements.size() == 162);

  double vol = 0.0;
  for (const Element& e : m2.elements) {
    CHECK(e.det_jac > 0.0);
    vol += e.volume;
  }
  CHECK(vol == doctest::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(TorusMesh::build_uniform(1), std::invalid_argument);
}

TEST_CASE("vertex numbering is periodic") {
  const TorusMesh m = TorusMesh::build_uniform(3);
  CHECK(m.vertex_id(3, 1, 2) == m.vertex_id(0, 1, 2));
  CHECK(m.vertex_id(-1, 0, 0) == m.vertex_id(2, 0, 0));
  // every vertex id of every element is a valid lattice index
  for (const Element& e : m.elements)
    for (int v : e.vertex_ids) {
      CHECK(v >= 0);
      CHECK(v < 27);
    }
}

TEST_CASE("locate returns the containing element") {
  const TorusMesh m = TorusMesh::build_uniform(2);
  std::mt19937 rng(53);
  std::uniform_real_distribution<double> dist(-1.0, 2.0);  // exercises wrap
  for (int s = 0; s < 200; ++s) {
    const Eigen::Vector3d x(dist(rng), dist(rng), dist(rng));
    Eigen::Vector3d ref;
    const int e = m.locate(x, ref);
    CHECK(ref.minCoeff() >= -1e-12);
    CHECK(ref.sum() <= 1.0 + 1e-12);
    Eigen::Vector3d y = m.elements[e].origin + m.elements[e].jac * ref;
    for (int c = 0; c < 3; ++c) {
      double d = x[c] - y[c];
      d -= std::round(d);
      CHECK(std::abs(d) <= 1e-12);
    }
  }
}

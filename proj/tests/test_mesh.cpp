#include <catch2/catch_amalgamated.hpp>

#include <stokeshape/mesh.hpp>

using namespace stokeshape;

namespace {

// two triangles on the unit square, all four sides marked
TriMesh unit_square() {
  std::vector<Vec2> v = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  std::vector<std::array<int, 3>> t = {{0, 1, 2}, {0, 2, 3}};
  std::vector<BoundaryEdge> b = {{0, 1, BoundaryMarker::Wall},
                                 {1, 2, BoundaryMarker::Outflow},
                                 {2, 3, BoundaryMarker::Wall},
                                 {3, 0, BoundaryMarker::Inflow}};
  return TriMesh(std::move(v), std::move(t), std::move(b));
}

std::vector<Vec2> regular_polygon(int n, double r, Vec2 c = Vec2::Zero()) {
  std::vector<Vec2> pts(n);
  for (int i = 0; i < n; ++i) {
    const double th = 2.0 * std::acos(-1.0) * i / n;
    pts[i] = c + r * Vec2(std::cos(th), std::sin(th));
  }
  return pts;
}

}  // namespace

TEST_CASE("shoelace area and centroid on known polygons", "[mesh]") {
  const std::vector<Vec2> square = {{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  CHECK(polygon_signed_area(square) == Catch::Approx(4.0));
  CHECK(polygon_centroid(square).x() == Catch::Approx(1.0));
  CHECK(polygon_centroid(square).y() == Catch::Approx(1.0));

  std::vector<Vec2> reversed(square.rbegin(), square.rend());
  CHECK(polygon_signed_area(reversed) == Catch::Approx(-4.0));

  // 3-4-5 right triangle: centroid is the vertex average
  const std::vector<Vec2> tri = {{0, 0}, {3, 0}, {0, 4}};
  CHECK(polygon_signed_area(tri) == Catch::Approx(6.0));
  CHECK(polygon_centroid(tri).x() == Catch::Approx(1.0));
  CHECK(polygon_centroid(tri).y() == Catch::Approx(4.0 / 3.0));
}

TEST_CASE("construction normalizes orientation and validates", "[mesh]") {
  // clockwise triangle gets flipped to positive area
  std::vector<Vec2> v = {{0, 0}, {1, 0}, {0, 1}};
  std::vector<std::array<int, 3>> t = {{0, 2, 1}};
  std::vector<BoundaryEdge> b = {{0, 1, BoundaryMarker::Wall},
                                 {1, 2, BoundaryMarker::Wall},
                                 {2, 0, BoundaryMarker::Wall}};
  const TriMesh mesh(v, t, b);
  CHECK(mesh.signed_area(0) == Catch::Approx(0.5));
  CHECK(mesh.total_area() == Catch::Approx(0.5));

  SECTION("vertex index out of range") {
    auto bad = t;
    bad[0][1] = 7;
    CHECK_THROWS_WITH(TriMesh(v, bad, b), Catch::Matchers::ContainsSubstring("out of range"));
  }
  SECTION("degenerate element") {
    auto badv = v;
    badv[2] = {0.5, 0.0};  // collinear
    CHECK_THROWS_WITH(TriMesh(badv, t, b), Catch::Matchers::ContainsSubstring("area"));
  }
  SECTION("boundary edge missing a marker") {
    auto badb = b;
    badb.pop_back();
    CHECK_THROWS_WITH(TriMesh(v, t, badb), Catch::Matchers::ContainsSubstring("unmarked"));
  }
  SECTION("duplicate boundary edge") {
    auto badb = b;
    badb.push_back({1, 0, BoundaryMarker::Inflow});
    CHECK_THROWS_WITH(TriMesh(v, t, badb), Catch::Matchers::ContainsSubstring("duplicate"));
  }
}

TEST_CASE("interior edges may not carry boundary markers", "[mesh]") {
  std::vector<Vec2> v = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  std::vector<std::array<int, 3>> t = {{0, 1, 2}, {0, 2, 3}};
  std::vector<BoundaryEdge> b = {{0, 1, BoundaryMarker::Wall},
                                 {1, 2, BoundaryMarker::Wall},
                                 {2, 3, BoundaryMarker::Wall},
                                 {3, 0, BoundaryMarker::Wall},
                                 {0, 2, BoundaryMarker::Wall}};
  CHECK_THROWS_WITH(TriMesh(v, t, b), Catch::Matchers::ContainsSubstring("interior edge"));
}

TEST_CASE("vertex markers follow the dominance order", "[mesh]") {
  const TriMesh mesh = unit_square();
  const auto vm = mesh.vertex_markers();
  REQUIRE(vm.size() == 4);
  // vertex 1 touches Wall and Outflow -> Outflow wins; vertex 0 Wall+Inflow -> Inflow
  CHECK(*vm[0] == BoundaryMarker::Inflow);
  CHECK(*vm[1] == BoundaryMarker::Outflow);
  CHECK(*vm[2] == BoundaryMarker::Outflow);
  CHECK(*vm[3] == BoundaryMarker::Inflow);

  // marked_vertices is raw edge membership, without the dominance promotion
  const auto walls = mesh.marked_vertices({BoundaryMarker::Wall});
  CHECK(walls == std::vector<int>{0, 1, 2, 3});
  const auto in = mesh.marked_vertices({BoundaryMarker::Inflow});
  CHECK(in == std::vector<int>{0, 3});
}

TEST_CASE("loop from a polygon runs clockwise with outward normals", "[mesh]") {
  // CCW input must be reversed so the fluid sits on the left of the traversal
  const auto pts = regular_polygon(64, 0.5);
  const ObstacleLoop loop = ObstacleLoop::from_polygon(pts);
  REQUIRE(loop.closed);
  REQUIRE(loop.n_vertices() == 64);
  REQUIRE(loop.n_edges() == 64);
  CHECK(polygon_signed_area(loop.points) < 0.0);

  for (int e = 0; e < loop.n_edges(); ++e) {
    const Vec2 mid = loop.edge_midpoint(e);
    CHECK(loop.normals[e].norm() == Catch::Approx(1.0));
    // normals of a circle point radially away from the center
    CHECK(loop.normals[e].dot(mid.normalized()) > 0.99);
    CHECK(loop.lengths[e] ==
          Catch::Approx((loop.edge_end(e) - loop.edge_start(e)).norm()));
    // normal is orthogonal to its edge
    CHECK(std::abs(loop.normals[e].dot((loop.edge_end(e) - loop.edge_start(e)).normalized())) <
          1e-14);
  }
  CHECK(loop.perimeter() == Catch::Approx(64 * 2 * 0.5 * std::sin(std::acos(-1.0) / 64)));
}

TEST_CASE("triangle quality is scale and rotation invariant", "[mesh]") {
  const double q_equilateral = triangle_quality({0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2});
  CHECK(q_equilateral == Catch::Approx(1.0).margin(1e-12));

  // unit right triangle: singular values of the map to equilateral give sqrt(3)
  const double q_right = triangle_quality({0, 0}, {1, 0}, {0, 1});
  CHECK(q_right == Catch::Approx(std::sqrt(3.0)).epsilon(1e-12));

  // invariances
  const double s = 17.3, th = 0.7;
  const Eigen::Rotation2D<double> R(th);
  auto map = [&](const Vec2& p) { return Vec2(R * (s * p) + Vec2(5, -3)); };
  CHECK(triangle_quality(map({0, 0}), map({1, 0}), map({0, 1})) ==
        Catch::Approx(q_right).epsilon(1e-12));

  // degenerate triangle reports infinity
  CHECK(std::isinf(triangle_quality({0, 0}, {1, 0}, {2, 0})));

  const TriMesh mesh = unit_square();
  const QualityReport rep = element_quality(mesh);
  REQUIRE(rep.per_element.size() == 2);
  CHECK(rep.worst == Catch::Approx(std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("displacements move the obstacle but never the outer boundary", "[mesh]") {
  // square fluid region with a square hole: 8 outer + 4 inner vertices
  std::vector<Vec2> v = {{-2, -2}, {2, -2}, {2, 2}, {-2, 2},   // outer corners
                         {0, -2},  {2, 0},  {0, 2}, {-2, 0},   // outer midpoints
                         {-1, -1}, {1, -1}, {1, 1}, {-1, 1}};  // hole
  std::vector<std::array<int, 3>> t = {{0, 4, 8},  {4, 9, 8},  {4, 1, 9},  {1, 5, 9},
                                       {9, 5, 10}, {5, 2, 10}, {10, 2, 6}, {11, 10, 6},
                                       {6, 3, 11}, {3, 7, 11}, {11, 7, 8}, {7, 0, 8}};
  std::vector<BoundaryEdge> b;
  b.push_back({0, 4, BoundaryMarker::Wall});
  b.push_back({4, 1, BoundaryMarker::Wall});
  b.push_back({1, 5, BoundaryMarker::Outflow});
  b.push_back({5, 2, BoundaryMarker::Outflow});
  b.push_back({2, 6, BoundaryMarker::Wall});
  b.push_back({6, 3, BoundaryMarker::Wall});
  b.push_back({3, 7, BoundaryMarker::Inflow});
  b.push_back({7, 0, BoundaryMarker::Inflow});
  b.push_back({8, 9, BoundaryMarker::Obstacle});
  b.push_back({9, 10, BoundaryMarker::Obstacle});
  b.push_back({10, 11, BoundaryMarker::Obstacle});
  b.push_back({11, 8, BoundaryMarker::Obstacle});
  const TriMesh mesh(v, t, b);

  SECTION("loop extraction agrees with the hole geometry") {
    const ObstacleLoop loop = obstacle_loop(mesh);
    CHECK(loop.n_vertices() == 4);
    CHECK(std::abs(polygon_signed_area(loop.points)) == Catch::Approx(4.0));
    for (int e = 0; e < loop.n_edges(); ++e) CHECK(loop.adj_triangle[e] >= 0);
  }

  SECTION("valid deformation shrinks the hole") {
    std::vector<Vec2> d(v.size(), Vec2::Zero());
    for (int i = 8; i < 12; ++i) d[i] = -0.2 * v[i];
    const DeformResult res = apply_displacement(mesh, d, 1.0);
    REQUIRE(res.valid);
    CHECK(res.mesh->vertices()[8].x() == Catch::Approx(-0.8));
    CHECK(std::isfinite(res.worst_quality));
  }

  SECTION("outer-boundary motion is rejected") {
    std::vector<Vec2> d(v.size(), Vec2::Zero());
    d[0] = {0.1, 0.0};
    CHECK_THROWS_AS(apply_displacement(mesh, d, 1.0), std::invalid_argument);
  }

  SECTION("element inversion flags the result invalid") {
    std::vector<Vec2> d(v.size(), Vec2::Zero());
    d[8] = {0.0, -5.0};  // pushes the hole corner through the bottom wall
    const DeformResult res = apply_displacement(mesh, d, 1.0);
    CHECK_FALSE(res.valid);
    CHECK_FALSE(res.mesh.has_value());
  }
}

TEST_CASE("open marked chains are traversed end to end", "[mesh]") {
  const TriMesh mesh = unit_square();
  const ObstacleLoop chain = marked_chain(mesh, BoundaryMarker::Inflow);
  CHECK_FALSE(chain.closed);
  CHECK(chain.n_vertices() == 2);
  CHECK(chain.n_edges() == 1);
  // the two wall edges of this mesh are disconnected, so no chain exists
  CHECK_THROWS(marked_chain(mesh, BoundaryMarker::Wall));
  CHECK_THROWS(obstacle_loop(mesh));  // no obstacle edges at all
}

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <stokeshape/gmsh_io.hpp>
#include <stokeshape/mesh_gen.hpp>
#include <stokeshape/vtu_io.hpp>

using namespace stokeshape;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// unit square, two triangles, all four sides tagged
const char* kSquareMsh2 = R"($MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
4
1 0 0 0
2 1 0 0
3 1 1 0
4 0 1 0
$EndNodes
$Elements
6
1 1 2 3 1 1 2
2 1 2 2 2 2 3
3 1 2 3 3 3 4
4 1 2 1 4 4 1
5 2 2 10 1 1 2 3
6 2 2 10 1 1 3 4
$EndElements
)";

// the same mesh in MSH 4.1, physical tags carried by the curve entities
const char* kSquareMsh4 = R"($MeshFormat
4.1 0 8
$EndMeshFormat
$Entities
0 4 1 0
1 0 0 0 1 0 0 1 3 2 1 -2
2 1 0 0 1 1 0 1 2 2 2 -3
3 0 1 0 1 1 0 1 3 2 3 -4
4 0 0 0 0 1 0 1 1 2 4 -1
1 0 0 0 1 1 0 0 4 1 2 3 -4
$EndEntities
$Nodes
1 4 1 4
2 1 0 4
1
2
3
4
0 0 0
1 0 0
1 1 0
0 1 0
$EndNodes
$Elements
5 6 1 6
1 1 1 1
1 1 2
1 2 1 1
2 2 3
1 3 1 1
3 3 4
1 4 1 1
4 4 1
2 1 2 2
5 1 2 3
6 1 3 4
$EndElements
)";

void check_square(const TriMesh& mesh) {
  REQUIRE(mesh.n_vertices() == 4);
  REQUIRE(mesh.n_triangles() == 2);
  REQUIRE(mesh.boundary_edges().size() == 4);
  CHECK(mesh.total_area() == Catch::Approx(1.0));
  int n_wall = 0, n_in = 0, n_out = 0;
  for (const auto& e : mesh.boundary_edges()) {
    if (e.marker == BoundaryMarker::Wall) ++n_wall;
    if (e.marker == BoundaryMarker::Inflow) ++n_in;
    if (e.marker == BoundaryMarker::Outflow) ++n_out;
  }
  CHECK(n_wall == 2);
  CHECK(n_in == 1);
  CHECK(n_out == 1);
}

}  // namespace

TEST_CASE("MSH 2.2 files load with markers applied", "[io]") {
  const auto p = temp_file("stokeshape_square22.msh");
  write_text(p, kSquareMsh2);
  check_square(load_gmsh(p.string()));
}

TEST_CASE("MSH 4.1 files load through the entity physical tags", "[io]") {
  const auto p = temp_file("stokeshape_square41.msh");
  write_text(p, kSquareMsh4);
  check_square(load_gmsh(p.string()));
}

TEST_CASE("MSH parse failures carry messages", "[io]") {
  const auto p = temp_file("stokeshape_bad.msh");

  SECTION("binary files rejected") {
    write_text(p, "$MeshFormat\n2.2 1 8\n$EndMeshFormat\n");
    CHECK_THROWS_WITH(load_gmsh(p.string()), Catch::Matchers::ContainsSubstring("binary"));
  }
  SECTION("unknown version rejected") {
    write_text(p, "$MeshFormat\n3.0 0 8\n$EndMeshFormat\n");
    CHECK_THROWS_WITH(load_gmsh(p.string()), Catch::Matchers::ContainsSubstring("version"));
  }
  SECTION("unknown physical tag rejected") {
    std::string text = kSquareMsh2;
    // retag the inflow edge with an unmapped physical id
    const auto pos = text.find("4 1 2 1 4");
    text.replace(pos, 9, "4 1 2 9 4");
    write_text(p, text);
    CHECK_THROWS_WITH(load_gmsh(p.string()), Catch::Matchers::ContainsSubstring("physical tag 9"));
  }
  SECTION("dangling node reference rejected") {
    std::string text = kSquareMsh2;
    const auto pos = text.find("6 2 2 10 1 1 3 4");
    text.replace(pos, 16, "6 2 2 10 1 1 3 7");
    write_text(p, text);
    CHECK_THROWS_WITH(load_gmsh(p.string()), Catch::Matchers::ContainsSubstring("unknown node"));
  }
  SECTION("missing file") {
    CHECK_THROWS_WITH(load_gmsh("/nonexistent/nope.msh"),
                      Catch::Matchers::ContainsSubstring("cannot open"));
  }
}

TEST_CASE("MSH round trip preserves geometry, connectivity, and markers", "[io]") {
  ChannelMeshParams prm;
  prm.n_obstacle = 64;
  prm.h_far = 0.5;
  const TriMesh mesh = channel_mesh(prm);
  const auto p = temp_file("stokeshape_roundtrip.msh");
  write_msh22(mesh, p.string());
  const TriMesh back = load_gmsh(p.string());

  REQUIRE(back.n_vertices() == mesh.n_vertices());
  REQUIRE(back.n_triangles() == mesh.n_triangles());
  REQUIRE(back.boundary_edges().size() == mesh.boundary_edges().size());
  for (int v = 0; v < mesh.n_vertices(); ++v)
    CHECK((back.vertices()[v] - mesh.vertices()[v]).norm() == 0.0);  // exact: to_chars round trip
  for (int t = 0; t < mesh.n_triangles(); ++t) CHECK(back.triangles()[t] == mesh.triangles()[t]);
  std::multiset<std::tuple<int, int, int>> a, b;
  for (const auto& e : mesh.boundary_edges())
    a.emplace(std::min(e.a, e.b), std::max(e.a, e.b), static_cast<int>(e.marker));
  for (const auto& e : back.boundary_edges())
    b.emplace(std::min(e.a, e.b), std::max(e.a, e.b), static_cast<int>(e.marker));
  CHECK(a == b);
}

TEST_CASE("writing the same mesh twice is byte identical", "[io]") {
  ChannelMeshParams prm;
  prm.n_obstacle = 48;
  prm.h_far = 0.6;
  const TriMesh mesh = channel_mesh(prm);
  const auto p1 = temp_file("stokeshape_det1.msh"), p2 = temp_file("stokeshape_det2.msh");
  write_msh22(mesh, p1.string());
  write_msh22(mesh, p2.string());
  CHECK(read_text(p1) == read_text(p2));
  CHECK(!read_text(p1).empty());
}

TEST_CASE("VTU output holds points, cells, and named arrays", "[io]") {
  std::vector<Vec2> v = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  std::vector<std::array<int, 3>> t = {{0, 1, 2}, {0, 2, 3}};
  std::vector<BoundaryEdge> b = {{0, 1, BoundaryMarker::Wall},
                                 {1, 2, BoundaryMarker::Outflow},
                                 {2, 3, BoundaryMarker::Wall},
                                 {3, 0, BoundaryMarker::Inflow}};
  const TriMesh mesh(v, t, b);

  VtuFields fields;
  fields.point_scalars.emplace_back("pressure", std::vector<double>{1.0, 2.5, -3.0, 0.125});
  fields.point_vectors.emplace_back(
      "velocity", std::vector<Vec2>{{1, 0}, {0, 1}, {-1, 0}, {0.5, -0.5}});
  fields.cell_scalars.emplace_back("quality", std::vector<double>{1.7, 1.8});

  const auto p = temp_file("stokeshape_fields.vtu");
  write_vtu(mesh, fields, p.string());
  const RawVtu raw = read_vtu_raw(p.string());

  REQUIRE(raw.points.size() == 4);
  REQUIRE(raw.triangles.size() == 2);
  for (int i = 0; i < 4; ++i) CHECK((raw.points[i] - v[i]).norm() == 0.0);
  CHECK(raw.triangles[0] == std::array<int, 3>{0, 1, 2});
  CHECK(raw.triangles[1] == std::array<int, 3>{0, 2, 3});

  auto find = [&](const std::string& name) -> const std::vector<double>& {
    for (const auto& [n, vals] : raw.arrays)
      if (n == name) return vals;
    FAIL("missing array " + name);
    static std::vector<double> dummy;
    return dummy;
  };
  CHECK(find("pressure") == std::vector<double>{1.0, 2.5, -3.0, 0.125});
  CHECK(find("quality") == std::vector<double>{1.7, 1.8});
  const auto& vel = find("velocity");
  REQUIRE(vel.size() == 12);  // 3 components per point
  CHECK(vel[0] == 1.0);
  CHECK(vel[2] == 0.0);  // z padding
  CHECK(vel[9] == 0.5);
  CHECK(vel[10] == -0.5);

  SECTION("field length mismatches are rejected") {
    VtuFields bad;
    bad.point_scalars.emplace_back("short", std::vector<double>{1.0});
    CHECK_THROWS(write_vtu(mesh, bad, p.string()));
  }
}

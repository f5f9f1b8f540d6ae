#ifndef STOKESHAPE_GMSH_IO_HPP
#define STOKESHAPE_GMSH_IO_HPP

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "stokeshape/mesh.hpp"

namespace stokeshape {

/// Gmsh physical tag -> boundary marker. The built-in generator and the
/// sample configs use 1=inflow, 2=outflow, 3=wall, 4=obstacle.
using MarkerMap = std::map<int, BoundaryMarker>;

inline MarkerMap default_marker_map() {
  return {{1, BoundaryMarker::Inflow},
          {2, BoundaryMarker::Outflow},
          {3, BoundaryMarker::Wall},
          {4, BoundaryMarker::Obstacle}};
}

namespace detail {

inline int marker_tag(BoundaryMarker m) {
  switch (m) {
    case BoundaryMarker::Inflow: return 1;
    case BoundaryMarker::Outflow: return 2;
    case BoundaryMarker::Wall: return 3;
    case BoundaryMarker::Obstacle: return 4;
  }
  return 0;
}

[[noreturn]] inline void parse_fail(const std::string& path, const std::string& what) {
  throw std::runtime_error("gmsh parse error in '" + path + "': " + what);
}

template <typename T>
T next(std::istream& in, const std::string& path, const char* what) {
  T value;
  if (!(in >> value)) parse_fail(path, std::string("expected ") + what);
  return value;
}

inline void skip_section(std::istream& in, const std::string& path, const std::string& section) {
  std::string tok;
  const std::string end = "$End" + section;
  while (in >> tok)
    if (tok == end) return;
  parse_fail(path, "missing " + end);
}

struct RawGmsh {
  std::vector<Vec2> nodes;                      // compacted
  std::map<long long, int> id_to_index;         // gmsh node tag -> index
  std::vector<std::array<long long, 3>> tris;   // gmsh node tags
  std::vector<std::array<long long, 2>> lines;  // gmsh node tags
  std::vector<int> line_phys;                   // physical tag per line
};

inline void read_msh2(std::istream& in, const std::string& path, RawGmsh& raw) {
  std::string tok;
  while (in >> tok) {
    if (tok == "$Nodes") {
      const auto n = next<long long>(in, path, "node count");
      for (long long i = 0; i < n; ++i) {
        const auto id = next<long long>(in, path, "node id");
        const auto x = next<double>(in, path, "node x");
        const auto y = next<double>(in, path, "node y");
        next<double>(in, path, "node z");
        raw.id_to_index[id] = static_cast<int>(raw.nodes.size());
        raw.nodes.emplace_back(x, y);
      }
      skip_section(in, path, "Nodes");
    } else if (tok == "$Elements") {
      const auto n = next<long long>(in, path, "element count");
      for (long long i = 0; i < n; ++i) {
        next<long long>(in, path, "element id");
        const auto type = next<int>(in, path, "element type");
        const auto ntags = next<int>(in, path, "tag count");
        int phys = -1;
        for (int t = 0; t < ntags; ++t) {
          const auto tag = next<int>(in, path, "tag");
          if (t == 0) phys = tag;
        }
        if (type == 1) {
          std::array<long long, 2> line{next<long long>(in, path, "line node"),
                                        next<long long>(in, path, "line node")};
          if (phys < 0) parse_fail(path, "boundary line without physical tag");
          raw.lines.push_back(line);
          raw.line_phys.push_back(phys);
        } else if (type == 2) {
          raw.tris.push_back({next<long long>(in, path, "tri node"),
                              next<long long>(in, path, "tri node"),
                              next<long long>(in, path, "tri node")});
        } else if (type == 15) {
          next<long long>(in, path, "point node");
        } else {
          parse_fail(path, "unsupported element type " + std::to_string(type));
        }
      }
      skip_section(in, path, "Elements");
    } else if (!tok.empty() && tok[0] == '$' && tok.rfind("$End", 0) != 0) {
      skip_section(in, path, tok.substr(1));
    }
  }
}

inline void read_msh4(std::istream& in, const std::string& path, RawGmsh& raw) {
  std::string tok;
  // (dim, entity tag) -> first physical tag
  std::map<std::pair<int, int>, int> entity_phys;
  while (in >> tok) {
    if (tok == "$Entities") {
      const auto np = next<long long>(in, path, "point count");
      const auto nc = next<long long>(in, path, "curve count");
      const auto ns = next<long long>(in, path, "surface count");
      const auto nvol = next<long long>(in, path, "volume count");
      for (long long i = 0; i < np; ++i) {
        const auto tag = next<int>(in, path, "point tag");
        for (int k = 0; k < 3; ++k) next<double>(in, path, "coord");
        const auto nphys = next<long long>(in, path, "phys count");
        for (long long k = 0; k < nphys; ++k) {
          const auto p = next<int>(in, path, "phys tag");
          if (k == 0) entity_phys[{0, tag}] = p;
        }
      }
      auto read_dim = [&](int dim, long long count) {
        for (long long i = 0; i < count; ++i) {
          const auto tag = next<int>(in, path, "entity tag");
          for (int k = 0; k < 6; ++k) next<double>(in, path, "bbox");
          const auto nphys = next<long long>(in, path, "phys count");
          for (long long k = 0; k < nphys; ++k) {
            const auto p = next<int>(in, path, "phys tag");
            if (k == 0) entity_phys[{dim, tag}] = p;
          }
          const auto nbound = next<long long>(in, path, "bounding count");
          for (long long k = 0; k < nbound; ++k) next<int>(in, path, "bounding tag");
        }
      };
      read_dim(1, nc);
      read_dim(2, ns);
      read_dim(3, nvol);
      skip_section(in, path, "Entities");
    } else if (tok == "$Nodes") {
      const auto nblocks = next<long long>(in, path, "node block count");
      next<long long>(in, path, "node count");
      next<long long>(in, path, "min tag");
      next<long long>(in, path, "max tag");
      for (long long b = 0; b < nblocks; ++b) {
        next<int>(in, path, "entity dim");
        next<int>(in, path, "entity tag");
        next<int>(in, path, "parametric flag");
        const auto count = next<long long>(in, path, "block node count");
        std::vector<long long> tags(count);
        for (auto& t : tags) t = next<long long>(in, path, "node tag");
        for (long long i = 0; i < count; ++i) {
          const auto x = next<double>(in, path, "node x");
          const auto y = next<double>(in, path, "node y");
          next<double>(in, path, "node z");
          raw.id_to_index[tags[i]] = static_cast<int>(raw.nodes.size());
          raw.nodes.emplace_back(x, y);
        }
      }
      skip_section(in, path, "Nodes");
    } else if (tok == "$Elements") {
      const auto nblocks = next<long long>(in, path, "element block count");
      next<long long>(in, path, "element count");
      next<long long>(in, path, "min tag");
      next<long long>(in, path, "max tag");
      for (long long b = 0; b < nblocks; ++b) {
        const auto dim = next<int>(in, path, "entity dim");
        const auto etag = next<int>(in, path, "entity tag");
        const auto type = next<int>(in, path, "element type");
        const auto count = next<long long>(in, path, "block element count");
        for (long long i = 0; i < count; ++i) {
          next<long long>(in, path, "element tag");
          if (type == 1) {
            std::array<long long, 2> line{next<long long>(in, path, "line node"),
                                          next<long long>(in, path, "line node")};
            auto it = entity_phys.find({dim, etag});
            if (it == entity_phys.end())
              parse_fail(path, "boundary line on curve without physical tag");
            raw.lines.push_back(line);
            raw.line_phys.push_back(it->second);
          } else if (type == 2) {
            raw.tris.push_back({next<long long>(in, path, "tri node"),
                                next<long long>(in, path, "tri node"),
                                next<long long>(in, path, "tri node")});
          } else if (type == 15) {
            next<long long>(in, path, "point node");
          } else {
            parse_fail(path, "unsupported element type " + std::to_string(type));
          }
        }
      }
      skip_section(in, path, "Elements");
    } else if (!tok.empty() && tok[0] == '$' && tok.rfind("$End", 0) != 0) {
      skip_section(in, path, tok.substr(1));
    }
  }
}

}  // namespace detail

/// Loads a Gmsh MSH 2.2 or 4.1 ASCII file holding 2D triangles and tagged
/// boundary lines. Triangle orientation is normalized; all TriMesh
/// invariants are enforced.
inline TriMesh load_gmsh(const std::string& path, const MarkerMap& markers = default_marker_map()) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_gmsh: cannot open '" + path + "'");

  std::string tok;
  if (!(in >> tok) || tok != "$MeshFormat") detail::parse_fail(path, "missing $MeshFormat");
  const auto version = detail::next<std::string>(in, path, "version");
  const auto file_type = detail::next<int>(in, path, "file type");
  detail::next<int>(in, path, "data size");
  if (file_type != 0) detail::parse_fail(path, "binary MSH files are not supported");
  detail::skip_section(in, path, "MeshFormat");

  detail::RawGmsh raw;
  if (version.rfind("2.", 0) == 0)
    detail::read_msh2(in, path, raw);
  else if (version.rfind("4.", 0) == 0)
    detail::read_msh4(in, path, raw);
  else
    detail::parse_fail(path, "unsupported MSH version " + version);

  if (raw.tris.empty()) detail::parse_fail(path, "no triangles found");

  auto lookup = [&](long long id) {
    auto it = raw.id_to_index.find(id);
    if (it == raw.id_to_index.end())
      detail::parse_fail(path, "element references unknown node " + std::to_string(id));
    return it->second;
  };

  std::vector<std::array<int, 3>> tris;
  tris.reserve(raw.tris.size());
  for (const auto& t : raw.tris) tris.push_back({lookup(t[0]), lookup(t[1]), lookup(t[2])});

  std::vector<BoundaryEdge> edges;
  edges.reserve(raw.lines.size());
  for (std::size_t i = 0; i < raw.lines.size(); ++i) {
    auto it = markers.find(raw.line_phys[i]);
    if (it == markers.end())
      detail::parse_fail(path, "no boundary marker mapped for physical tag " +
                                   std::to_string(raw.line_phys[i]));
    edges.push_back({lookup(raw.lines[i][0]), lookup(raw.lines[i][1]), it->second});
  }

  return TriMesh(std::move(raw.nodes), std::move(tris), std::move(edges));
}

namespace detail {
inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}
}  // namespace detail

/// Writes the mesh in MSH 2.2 ASCII with boundary lines tagged by the fixed
/// physical ids 1=inflow, 2=outflow, 3=wall, 4=obstacle.
inline void write_msh22(const TriMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_msh22: cannot open '" + path + "'");
  out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";
  out << "$PhysicalNames\n4\n1 1 \"inflow\"\n1 2 \"outflow\"\n1 3 \"wall\"\n1 4 \"obstacle\"\n"
         "$EndPhysicalNames\n";
  out << "$Nodes\n" << mesh.n_vertices() << "\n";
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const Vec2& p = mesh.vertices()[v];
    out << (v + 1) << ' ' << detail::format_double(p.x()) << ' ' << detail::format_double(p.y())
        << " 0\n";
  }
  out << "$EndNodes\n$Elements\n"
      << (mesh.boundary_edges().size() + mesh.triangles().size()) << "\n";
  long long id = 1;
  for (const auto& e : mesh.boundary_edges()) {
    const int tag = detail::marker_tag(e.marker);
    out << id++ << " 1 2 " << tag << ' ' << tag << ' ' << (e.a + 1) << ' ' << (e.b + 1) << "\n";
  }
  for (const auto& t : mesh.triangles())
    out << id++ << " 2 2 10 10 " << (t[0] + 1) << ' ' << (t[1] + 1) << ' ' << (t[2] + 1) << "\n";
  out << "$EndElements\n";
  if (!out) throw std::runtime_error("write_msh22: write failure on '" + path + "'");
}

}  // namespace stokeshape

#endif  // STOKESHAPE_GMSH_IO_HPP

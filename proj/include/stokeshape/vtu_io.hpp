#ifndef STOKESHAPE_VTU_IO_HPP
#define STOKESHAPE_VTU_IO_HPP

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "stokeshape/mesh.hpp"

namespace stokeshape {

/// Named output fields attached to a mesh. Arrays are written in the order
/// given here, so identical inputs produce byte-identical files.
struct VtuFields {
  std::vector<std::pair<std::string, std::vector<double>>> point_scalars;
  std::vector<std::pair<std::string, std::vector<Vec2>>> point_vectors;
  std::vector<std::pair<std::string, std::vector<double>>> cell_scalars;
};

namespace detail {

inline void vtu_double(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  out.append(buf, ptr);
}

}  // namespace detail

/// Writes an ASCII .vtu (VTK unstructured grid) file with linear triangles.
inline void write_vtu(const TriMesh& mesh, const VtuFields& fields, const std::string& path) {
  const int np = mesh.n_vertices();
  const int nc = mesh.n_triangles();
  for (const auto& [name, data] : fields.point_scalars)
    if (static_cast<int>(data.size()) != np)
      throw std::invalid_argument("write_vtu: point scalar '" + name + "' has wrong length");
  for (const auto& [name, data] : fields.point_vectors)
    if (static_cast<int>(data.size()) != np)
      throw std::invalid_argument("write_vtu: point vector '" + name + "' has wrong length");
  for (const auto& [name, data] : fields.cell_scalars)
    if (static_cast<int>(data.size()) != nc)
      throw std::invalid_argument("write_vtu: cell scalar '" + name + "' has wrong length");

  std::string out;
  out.reserve(static_cast<std::size_t>(np) * 48 + static_cast<std::size_t>(nc) * 24 + 1024);
  out += "<?xml version=\"1.0\"?>\n";
  out += "<VTKFile type=\"UnstructuredGrid\" version=\"0.1\" byte_order=\"LittleEndian\">\n";
  out += "<UnstructuredGrid>\n";
  out += "<Piece NumberOfPoints=\"" + std::to_string(np) + "\" NumberOfCells=\"" +
         std::to_string(nc) + "\">\n";

  out += "<Points>\n<DataArray type=\"Float64\" NumberOfComponents=\"3\" format=\"ascii\">\n";
  for (const Vec2& p : mesh.vertices()) {
    detail::vtu_double(out, p.x());
    out += ' ';
    detail::vtu_double(out, p.y());
    out += " 0\n";
  }
  out += "</DataArray>\n</Points>\n";

  out += "<Cells>\n<DataArray type=\"Int32\" Name=\"connectivity\" format=\"ascii\">\n";
  for (const auto& t : mesh.triangles())
    out += std::to_string(t[0]) + ' ' + std::to_string(t[1]) + ' ' + std::to_string(t[2]) + '\n';
  out += "</DataArray>\n<DataArray type=\"Int32\" Name=\"offsets\" format=\"ascii\">\n";
  for (int c = 1; c <= nc; ++c) {
    out += std::to_string(3 * c);
    out += '\n';
  }
  out += "</DataArray>\n<DataArray type=\"UInt8\" Name=\"types\" format=\"ascii\">\n";
  for (int c = 0; c < nc; ++c) out += "5\n";
  out += "</DataArray>\n</Cells>\n";

  out += "<PointData>\n";
  for (const auto& [name, data] : fields.point_scalars) {
    out += "<DataArray type=\"Float64\" Name=\"" + name + "\" format=\"ascii\">\n";
    for (double v : data) {
      detail::vtu_double(out, v);
      out += '\n';
    }
    out += "</DataArray>\n";
  }
  for (const auto& [name, data] : fields.point_vectors) {
    out += "<DataArray type=\"Float64\" Name=\"" + name +
           "\" NumberOfComponents=\"3\" format=\"ascii\">\n";
    for (const Vec2& v : data) {
      detail::vtu_double(out, v.x());
      out += ' ';
      detail::vtu_double(out, v.y());
      out += " 0\n";
    }
    out += "</DataArray>\n";
  }
  out += "</PointData>\n<CellData>\n";
  for (const auto& [name, data] : fields.cell_scalars) {
    out += "<DataArray type=\"Float64\" Name=\"" + name + "\" format=\"ascii\">\n";
    for (double v : data) {
      detail::vtu_double(out, v);
      out += '\n';
    }
    out += "</DataArray>\n";
  }
  out += "</CellData>\n</Piece>\n</UnstructuredGrid>\n</VTKFile>\n";

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_vtu: cannot open '" + path + "'");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("write_vtu: write failure on '" + path + "'");
}

/// A data array pulled back out of a .vtu file, plus the raw geometry.
/// Only intended to reread this writer's own output in tests.
struct RawVtu {
  std::vector<Vec2> points;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::pair<std::string, std::vector<double>>> arrays;  // flat values, doc order
};

inline RawVtu read_vtu_raw(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_vtu_raw: cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string text = ss.str();

  RawVtu raw;
  std::size_t pos = 0;
  while (true) {
    const auto open = text.find("<DataArray", pos);
    if (open == std::string::npos) break;
    const auto open_end = text.find('>', open);
    const auto close = text.find("</DataArray>", open_end);
    if (open_end == std::string::npos || close == std::string::npos)
      throw std::runtime_error("read_vtu_raw: malformed DataArray in '" + path + "'");
    const std::string head = text.substr(open, open_end - open);
    std::string name;
    if (const auto n = head.find("Name=\""); n != std::string::npos) {
      const auto e = head.find('"', n + 6);
      name = head.substr(n + 6, e - (n + 6));
    }
    std::istringstream body(text.substr(open_end + 1, close - open_end - 1));
    std::vector<double> values;
    double v;
    while (body >> v) values.push_back(v);

    const auto points_open = text.rfind("<Points>", open);
    const auto points_close = text.rfind("</Points>", open);
    const bool in_points =
        points_open != std::string::npos &&
        (points_close == std::string::npos || points_close < points_open);
    if (in_points && name.empty()) {
      for (std::size_t i = 0; i + 2 < values.size() + 1; i += 3)
        raw.points.emplace_back(values[i], values[i + 1]);
    } else if (name == "connectivity") {
      for (std::size_t i = 0; i + 2 < values.size() + 1; i += 3)
        raw.triangles.push_back({static_cast<int>(values[i]), static_cast<int>(values[i + 1]),
                                 static_cast<int>(values[i + 2])});
    } else if (name == "offsets" || name == "types") {
      // implied by the triangle list
    } else {
      raw.arrays.emplace_back(name, std::move(values));
    }
    pos = close + 1;
  }
  if (raw.points.empty() || raw.triangles.empty())
    throw std::runtime_error("read_vtu_raw: no geometry found in '" + path + "'");
  return raw;
}

}  // namespace stokeshape

#endif  // STOKESHAPE_VTU_IO_HPP

#ifndef STOKESHAPE_MESH_GEN_HPP
#define STOKESHAPE_MESH_GEN_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "stokeshape/mesh.hpp"

namespace stokeshape {

namespace detail {

struct DelTri {
  int v[3];
  bool alive;
  double cx, cy, r2;  // circumcenter and squared radius
};

inline DelTri make_del_tri(int a, int b, int c, const std::vector<Vec2>& pts) {
  const long double ax = pts[a].x(), ay = pts[a].y();
  const long double bx = pts[b].x(), by = pts[b].y();
  const long double cx = pts[c].x(), cy = pts[c].y();
  const long double d = 2.0L * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
  if (std::abs(static_cast<double>(d)) < 1e-30)
    throw std::runtime_error("delaunay: degenerate triangle encountered");
  const long double a2 = ax * ax + ay * ay;
  const long double b2 = bx * bx + by * by;
  const long double c2 = cx * cx + cy * cy;
  const long double ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d;
  const long double uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d;
  const long double dx = ax - ux, dy = ay - uy;
  return DelTri{{a, b, c}, true, static_cast<double>(ux), static_cast<double>(uy),
                static_cast<double>(dx * dx + dy * dy)};
}

}  // namespace detail

/// Delaunay triangulation by incremental insertion (Bowyer-Watson). The
/// candidate scan is brute force over live triangles, which is plenty for
/// the point counts used here and keeps the code short and deterministic.
inline std::vector<std::array<int, 3>> delaunay(const std::vector<Vec2>& points) {
  const int n = static_cast<int>(points.size());
  if (n < 3) throw std::invalid_argument("delaunay: need at least 3 points");

  double lo_x = points[0].x(), hi_x = lo_x, lo_y = points[0].y(), hi_y = lo_y;
  for (const Vec2& p : points) {
    lo_x = std::min(lo_x, p.x());
    hi_x = std::max(hi_x, p.x());
    lo_y = std::min(lo_y, p.y());
    hi_y = std::max(hi_y, p.y());
  }
  const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1.0});
  const double mx = 0.5 * (lo_x + hi_x), my = 0.5 * (lo_y + hi_y);

  std::vector<Vec2> pts(points);
  pts.emplace_back(mx - 40.0 * span, my - 25.0 * span);
  pts.emplace_back(mx + 40.0 * span, my - 25.0 * span);
  pts.emplace_back(mx, my + 45.0 * span);

  std::vector<detail::DelTri> tris;
  tris.reserve(static_cast<std::size_t>(2 * n + 16));
  tris.push_back(detail::make_del_tri(n, n + 1, n + 2, pts));

  std::vector<int> bad;
  std::map<std::pair<int, int>, std::pair<int, int>> edges;  // sorted pair -> (count, directed a)
  for (int i = 0; i < n; ++i) {
    const double px = pts[i].x(), py = pts[i].y();
    bad.clear();
    edges.clear();
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
      if (!tris[t].alive) continue;
      const double dx = px - tris[t].cx, dy = py - tris[t].cy;
      if (dx * dx + dy * dy < tris[t].r2) bad.push_back(t);
    }
    if (bad.empty()) throw std::runtime_error("delaunay: insertion point outside triangulation");
    for (int t : bad) {
      tris[t].alive = false;
      for (int e = 0; e < 3; ++e) {
        const int a = tris[t].v[e], b = tris[t].v[(e + 1) % 3];
        auto key = std::minmax(a, b);
        auto [it, inserted] = edges.try_emplace(key, 1, a);
        if (!inserted) ++it->second.first;
      }
    }
    for (const auto& [key, info] : edges) {
      if (info.first != 1) continue;  // interior to the cavity
      const int a = info.second;
      const int b = (key.first == a) ? key.second : key.first;
      tris.push_back(detail::make_del_tri(a, b, i, pts));
    }
  }

  std::vector<std::array<int, 3>> out;
  out.reserve(tris.size());
  for (const auto& t : tris) {
    if (!t.alive) continue;
    if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;
    out.push_back({t.v[0], t.v[1], t.v[2]});
  }
  return out;
}

/// Channel-with-circular-obstacle generator. The point cloud is mirror
/// symmetric about the x axis and graded: rings around the circle start at
/// the obstacle edge length and grow geometrically until they hand over to
/// a uniform hex background lattice.
struct ChannelMeshParams {
  double x_min = -3.0, x_max = 6.0;
  double y_min = -2.0, y_max = 2.0;
  Vec2 center{0.0, 0.0};
  double radius = 0.5;
  int n_obstacle = 160;  // circle segments; kept even for symmetry
  double growth = 1.25;  // ring spacing growth factor
  double h_far = 0.22;   // background target spacing
};

inline ChannelMeshParams paper_scale_channel_params() {
  ChannelMeshParams p;
  p.n_obstacle = 633;
  p.h_far = 0.135;
  return p;
}

inline TriMesh channel_mesh(const ChannelMeshParams& prm) {
  if (prm.n_obstacle < 8) throw std::invalid_argument("channel_mesh: n_obstacle too small");
  if (prm.growth <= 1.0) throw std::invalid_argument("channel_mesh: growth must exceed 1");
  if (prm.h_far <= 0.0) throw std::invalid_argument("channel_mesh: h_far must be positive");
  const int n_circ = prm.n_obstacle + (prm.n_obstacle % 2);  // force even
  const double pi = std::acos(-1.0);
  const double h0 = 2.0 * pi * prm.radius / n_circ;

  std::vector<Vec2> pts;
  std::vector<int> circle_ids;

  // obstacle ring (exactly on the circle) and graded outer rings
  double r = prm.radius;
  double h = h0;
  int ring = 0;
  const double r_limit = 0.6 * std::min({prm.y_max - prm.center.y(), prm.center.y() - prm.y_min,
                                         prm.x_max - prm.center.x(), prm.center.x() - prm.x_min});
  while (true) {
    int nk = (ring == 0) ? n_circ : static_cast<int>(std::lround(2.0 * pi * r / h));
    nk += nk % 2;
    if (nk < 8) break;
    for (int j = 0; j < nk; ++j) {
      const double th = 2.0 * pi * j / nk;
      pts.emplace_back(prm.center.x() + r * std::cos(th), prm.center.y() + r * std::sin(th));
      if (ring == 0) circle_ids.push_back(static_cast<int>(pts.size()) - 1);
    }
    h *= prm.growth;
    r += h;
    ++ring;
    if (h >= prm.h_far || r > r_limit) break;
  }
  const double r_graded = r;  // lattice keeps clear of the rings inside this radius

  // channel boundary points
  const double hx = prm.x_max - prm.x_min, hy = prm.y_max - prm.y_min;
  const int nx = std::max(2, static_cast<int>(std::lround(hx / prm.h_far)));
  int ny = std::max(2, static_cast<int>(std::lround(hy / prm.h_far)));
  ny += ny % 2;
  for (int i = 0; i <= nx; ++i) {
    const double x = prm.x_min + hx * i / nx;
    pts.emplace_back(x, prm.y_min);
    pts.emplace_back(x, prm.y_max);
  }
  for (int j = 1; j < ny; ++j) {
    const double y = prm.y_min + hy * j / ny;
    pts.emplace_back(prm.x_min, y);
    pts.emplace_back(prm.x_max, y);
  }

  // hex lattice background, rows mirrored across the x axis
  const double dy = prm.h_far * std::sqrt(3.0) / 2.0;
  const int n_rows = static_cast<int>(std::floor((prm.y_max - 0.55 * prm.h_far) / dy));
  for (int m = -n_rows; m <= n_rows; ++m) {
    const double y = m * dy;
    if (y < prm.y_min + 0.55 * prm.h_far || y > prm.y_max - 0.55 * prm.h_far) continue;
    const double off = (std::abs(m) % 2 == 1) ? 0.5 * prm.h_far : 0.0;
    for (double x = prm.x_min + 0.55 * prm.h_far + off; x < prm.x_max - 0.5 * prm.h_far;
         x += prm.h_far) {
      const double d = (Vec2(x, y) - prm.center).norm();
      if (d < r_graded + 0.55 * prm.h_far) continue;
      pts.emplace_back(x, y);
    }
  }

  const auto all_tris = delaunay(pts);

  // drop triangles inside the obstacle: all three vertices on the circle
  // means the triangle lies within the hole polygon
  auto on_circle = [&](int v) {
    return std::abs((pts[v] - prm.center).norm() - prm.radius) < 1e-9 * prm.radius;
  };
  std::vector<std::array<int, 3>> keep;
  keep.reserve(all_tris.size());
  for (const auto& t : all_tris)
    if (!(on_circle(t[0]) && on_circle(t[1]) && on_circle(t[2]))) keep.push_back(t);

  // recover the boundary: edges with exactly one adjacent triangle
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& t : keep)
    for (int e = 0; e < 3; ++e) ++edge_count[std::minmax(t[e], t[(e + 1) % 3])];

  const double tol = 1e-9 * std::max(hx, hy);
  std::vector<BoundaryEdge> bedges;
  for (const auto& [key, count] : edge_count) {
    if (count != 1) continue;
    const Vec2& pa = pts[key.first];
    const Vec2& pb = pts[key.second];
    BoundaryMarker m;
    if (on_circle(key.first) && on_circle(key.second))
      m = BoundaryMarker::Obstacle;
    else if (std::abs(pa.x() - prm.x_min) < tol && std::abs(pb.x() - prm.x_min) < tol)
      m = BoundaryMarker::Inflow;
    else if (std::abs(pa.x() - prm.x_max) < tol && std::abs(pb.x() - prm.x_max) < tol)
      m = BoundaryMarker::Outflow;
    else if ((std::abs(pa.y() - prm.y_min) < tol && std::abs(pb.y() - prm.y_min) < tol) ||
             (std::abs(pa.y() - prm.y_max) < tol && std::abs(pb.y() - prm.y_max) < tol))
      m = BoundaryMarker::Wall;
    else
      throw std::runtime_error("channel_mesh: unclassifiable boundary edge");
    bedges.push_back({key.first, key.second, m});
  }

  return TriMesh(std::move(pts), keep, std::move(bedges));
}

/// Structured triangulated rectangle, mainly for solver verification on
/// simple geometries. Cells are split along alternating diagonals.
struct RectMeshParams {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  int nx = 8, ny = 8;
  BoundaryMarker left = BoundaryMarker::Inflow;
  BoundaryMarker right = BoundaryMarker::Outflow;
  BoundaryMarker bottom = BoundaryMarker::Wall;
  BoundaryMarker top = BoundaryMarker::Wall;
};

inline TriMesh rect_mesh(const RectMeshParams& prm) {
  if (prm.nx < 1 || prm.ny < 1) throw std::invalid_argument("rect_mesh: need nx, ny >= 1");
  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(prm.nx + 1) * (prm.ny + 1));
  for (int j = 0; j <= prm.ny; ++j)
    for (int i = 0; i <= prm.nx; ++i)
      pts.emplace_back(prm.x0 + (prm.x1 - prm.x0) * i / prm.nx,
                       prm.y0 + (prm.y1 - prm.y0) * j / prm.ny);
  auto id = [&](int i, int j) { return j * (prm.nx + 1) + i; };

  std::vector<std::array<int, 3>> tris;
  tris.reserve(static_cast<std::size_t>(2 * prm.nx) * prm.ny);
  for (int j = 0; j < prm.ny; ++j)
    for (int i = 0; i < prm.nx; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      if ((i + j) % 2 == 0) {
        tris.push_back({a, b, c});
        tris.push_back({a, c, d});
      } else {
        tris.push_back({a, b, d});
        tris.push_back({b, c, d});
      }
    }

  std::vector<BoundaryEdge> bedges;
  for (int i = 0; i < prm.nx; ++i) {
    bedges.push_back({id(i, 0), id(i + 1, 0), prm.bottom});
    bedges.push_back({id(i, prm.ny), id(i + 1, prm.ny), prm.top});
  }
  for (int j = 0; j < prm.ny; ++j) {
    bedges.push_back({id(0, j), id(0, j + 1), prm.left});
    bedges.push_back({id(prm.nx, j), id(prm.nx, j + 1), prm.right});
  }
  return TriMesh(std::move(pts), std::move(tris), std::move(bedges));
}

}  // namespace stokeshape

#endif  // STOKESHAPE_MESH_GEN_HPP

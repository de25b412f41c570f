#include "polyb/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "hash.hpp"

namespace polyb {

namespace {

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

int orientation(const Point& a, const Point& b, const Point& c, double tol) {
  const double v = cross(b - a, c - a);
  if (v > tol) return 1;
  if (v < -tol) return -1;
  return 0;
}

bool on_segment(const Point& a, const Point& b, const Point& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

bool segments_intersect(const Point& p1, const Point& p2, const Point& q1, const Point& q2,
                        double tol) {
  const int o1 = orientation(p1, p2, q1, tol);
  const int o2 = orientation(p1, p2, q2, tol);
  const int o3 = orientation(q1, q2, p1, tol);
  const int o4 = orientation(q1, q2, p2, tol);
  if (o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

void tag_rectangle_boundary(PolygonalMesh& mesh, const Rectangle& domain) {
  const double tol = 1e-12 * std::max(domain.width(), domain.height());
  for (auto& be : mesh.boundary_edges) {
    const auto& loop = mesh.cells[be.cell];
    const Point& a = mesh.vertices[loop[be.local_edge]];
    const Point& b = mesh.vertices[loop[(be.local_edge + 1) % loop.size()]];
    const Point mid = 0.5 * (a + b);
    if (std::abs(mid.y() - domain.lo.y()) < tol) {
      be.tag = BoundaryTag::bottom;
    } else if (std::abs(mid.x() - domain.hi.x()) < tol) {
      be.tag = BoundaryTag::right;
    } else if (std::abs(mid.y() - domain.hi.y()) < tol) {
      be.tag = BoundaryTag::top;
    } else if (std::abs(mid.x() - domain.lo.x()) < tol) {
      be.tag = BoundaryTag::left;
    }
  }
}

void check_generator_args(int n, const Rectangle& domain) {
  if (n < 1) throw MeshError("mesh generator: subdivisions must be >= 1");
  if (!(domain.width() > 0.0) || !(domain.height() > 0.0)) {
    throw MeshError("mesh generator: domain must have positive area");
  }
}

PolygonalMesh grid_vertices(int n, const Rectangle& domain) {
  PolygonalMesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      mesh.vertices.emplace_back(domain.lo.x() + domain.width() * i / n,
                                 domain.lo.y() + domain.height() * j / n);
    }
  }
  return mesh;
}

}  // namespace

std::string to_string(MeshFamily family) {
  switch (family) {
    case MeshFamily::triangles: return "triangles";
    case MeshFamily::squares: return "squares";
    case MeshFamily::distorted_quads: return "distorted";
    case MeshFamily::nonconvex_cells: return "nonconvex";
    case MeshFamily::voronoi: return "voronoi";
  }
  return "unknown";
}

MeshFamily mesh_family_from_string(const std::string& name) {
  if (name == "triangles") return MeshFamily::triangles;
  if (name == "squares") return MeshFamily::squares;
  if (name == "distorted" || name == "distorted-quads") return MeshFamily::distorted_quads;
  if (name == "nonconvex" || name == "nonconvex-cells") return MeshFamily::nonconvex_cells;
  if (name == "voronoi") return MeshFamily::voronoi;
  throw MeshError("unknown mesh family '" + name + "'");
}

std::vector<Point> PolygonalMesh::cell_polygon(int cell) const {
  std::vector<Point> poly;
  poly.reserve(cells[cell].size());
  for (int v : cells[cell]) poly.push_back(vertices[v]);
  return poly;
}

double signed_area(const std::vector<Point>& polygon) {
  double a = 0.0;
  const std::size_t m = polygon.size();
  for (std::size_t i = 0; i < m; ++i) a += cross(polygon[i], polygon[(i + 1) % m]);
  return 0.5 * a;
}

bool is_simple_polygon(const std::vector<Point>& polygon) {
  const std::size_t m = polygon.size();
  if (m < 3) return false;
  double scale = 0.0;
  for (const auto& p : polygon) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      if ((polygon[i] - polygon[j]).norm() <= 1e-14 * std::max(scale, 1.0)) return false;
    }
  }
  // Square of a length scale; keeps the collinearity test relative.
  const double tol = 1e-14 * std::max(scale * scale, 1e-300);
  for (std::size_t i = 0; i < m; ++i) {
    const Point& a = polygon[i];
    const Point& b = polygon[(i + 1) % m];
    for (std::size_t j = i + 1; j < m; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == m - 1);
      const Point& c = polygon[j];
      const Point& d = polygon[(j + 1) % m];
      if (adjacent) {
        // Adjacent edges share one vertex; they must not fold back onto each other.
        const Point& shared = (j == i + 1) ? b : a;
        const Point& p = (j == i + 1) ? a : b;
        const Point& q = (j == i + 1) ? d : c;
        if (orientation(p, shared, q, tol) == 0 && (p - shared).dot(q - shared) > 0.0) return false;
        continue;
      }
      if (segments_intersect(a, b, c, d, tol)) return false;
    }
  }
  return true;
}

CellGeometry cell_geometry(const std::vector<Point>& polygon) {
  CellGeometry g;
  const std::size_t m = polygon.size();
  double a = 0.0;
  Point c = Point::Zero();
  for (std::size_t i = 0; i < m; ++i) {
    const Point& p = polygon[i];
    const Point& q = polygon[(i + 1) % m];
    const double w = cross(p, q);
    a += w;
    c += w * (p + q);
  }
  g.area = 0.5 * a;
  g.barycenter = c / (3.0 * a);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      g.diameter = std::max(g.diameter, (polygon[i] - polygon[j]).norm());
    }
  }
  g.edge_lengths.resize(m);
  g.normals.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Point t = polygon[(i + 1) % m] - polygon[i];
    const double len = t.norm();
    g.edge_lengths[i] = len;
    g.normals[i] = Point(t.y(), -t.x()) / len;
  }
  return g;
}

std::vector<int> finalize_mesh(PolygonalMesh& mesh, bool fix_orientation) {
  std::vector<int> reoriented;
  const int nv = mesh.num_vertices();
  for (int c = 0; c < mesh.num_cells(); ++c) {
    auto& loop = mesh.cells[c];
    std::ostringstream where;
    where << "cell " << c;
    if (loop.size() < 3) throw MeshError(where.str() + " has fewer than 3 vertices");
    for (int v : loop) {
      if (v < 0 || v >= nv) throw MeshError(where.str() + " references a missing vertex");
    }
    auto sorted = loop;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw MeshError(where.str() + " repeats a vertex index");
    }
    auto poly = mesh.cell_polygon(c);
    if (!is_simple_polygon(poly)) throw MeshError(where.str() + " is not a simple polygon");
    const double area = signed_area(poly);
    if (area < 0.0) {
      if (!fix_orientation) throw MeshError(where.str() + " is clockwise");
      std::reverse(loop.begin(), loop.end());
      reoriented.push_back(c);
    } else if (!(area > 0.0)) {
      throw MeshError(where.str() + " has zero area");
    }
  }

  mesh.edges.clear();
  mesh.edge_cells.clear();
  mesh.cell_edges.assign(mesh.cells.size(), {});
  std::map<std::pair<int, int>, int> edge_ids;
  std::vector<std::array<int, 2>> edge_dirs;  // directed use counts: [a<b, a>b]
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& loop = mesh.cells[c];
    const int m = static_cast<int>(loop.size());
    mesh.cell_edges[c].resize(m);
    for (int j = 0; j < m; ++j) {
      const int a = loop[j];
      const int b = loop[(j + 1) % m];
      const auto key = std::minmax(a, b);
      auto [it, inserted] = edge_ids.try_emplace({key.first, key.second}, mesh.num_edges());
      if (inserted) {
        mesh.edges.push_back({key.first, key.second});
        mesh.edge_cells.push_back({c, -1});
        edge_dirs.push_back({0, 0});
      } else {
        auto& ec = mesh.edge_cells[it->second];
        if (ec[1] != -1) {
          throw MeshError("edge (" + std::to_string(a) + "," + std::to_string(b) +
                          ") is shared by more than two cells, including cell " + std::to_string(c));
        }
        ec[1] = c;
      }
      ++edge_dirs[it->second][a < b ? 0 : 1];
      mesh.cell_edges[c][j] = it->second;
    }
  }
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (edge_dirs[e][0] > 1 || edge_dirs[e][1] > 1) {
      throw MeshError("cells " + std::to_string(mesh.edge_cells[e][0]) + " and " +
                      std::to_string(mesh.edge_cells[e][1]) +
                      " traverse a shared edge in the same direction");
    }
  }

  mesh.boundary_edges.clear();
  mesh.boundary_vertex.assign(mesh.vertices.size(), 0);
  mesh.boundary_edge.assign(mesh.edges.size(), 0);
  std::vector<char> used(mesh.vertices.size(), 0);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    for (int v : mesh.cells[c]) used[v] = 1;
    for (int j = 0; j < static_cast<int>(mesh.cells[c].size()); ++j) {
      const int e = mesh.cell_edges[c][j];
      if (mesh.edge_cells[e][1] == -1) {
        mesh.boundary_edges.push_back({c, j, BoundaryTag::unknown});
        mesh.boundary_edge[e] = 1;
        mesh.boundary_vertex[mesh.edges[e][0]] = 1;
        mesh.boundary_vertex[mesh.edges[e][1]] = 1;
      }
    }
  }
  for (int v = 0; v < nv; ++v) {
    if (!used[v]) throw MeshError("vertex " + std::to_string(v) + " is not used by any cell");
  }
  return reoriented;
}

PolygonalMesh generate_structured(MeshFamily family, int n, const Rectangle& domain) {
  check_generator_args(n, domain);
  PolygonalMesh mesh = grid_vertices(n, domain);
  const auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  const double hx = domain.width() / n;
  const double hy = domain.height() / n;

  switch (family) {
    case MeshFamily::squares:
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
          mesh.cells.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
        }
      }
      break;
    case MeshFamily::triangles:
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
          mesh.cells.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
          mesh.cells.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
        }
      }
      break;
    case MeshFamily::distorted_quads:
      for (int j = 1; j < n; ++j) {
        for (int i = 1; i < n; ++i) {
          const std::uint64_t key = detail::mix_key(static_cast<std::uint64_t>(i),
                                                    static_cast<std::uint64_t>(j));
          const double radius = 0.3 * detail::unit_double(detail::splitmix64(key));
          const double angle = 2.0 * M_PI * detail::unit_double(detail::splitmix64(key ^ 0x5bd1e995ULL));
          mesh.vertices[vid(i, j)] += Point(radius * hx * std::cos(angle), radius * hy * std::sin(angle));
        }
      }
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
          mesh.cells.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
        }
      }
      break;
    case MeshFamily::nonconvex_cells: {
      // Every edge gets a midpoint vertex. Interior midpoints of vertical edges
      // move in +x and those of horizontal edges in +y, so each cell is indented
      // on its left and bottom sides and bulges on the opposite sides.
      constexpr double shift = 0.25;
      const int base_h = mesh.num_vertices();            // horizontal edge (i,j)-(i+1,j)
      const int base_v = base_h + n * (n + 1);           // vertical edge (i,j)-(i,j+1)
      const auto hmid = [&](int i, int j) { return base_h + j * n + i; };
      const auto vmid = [&](int i, int j) { return base_v + j * (n + 1) + i; };
      for (int j = 0; j <= n; ++j) {
        for (int i = 0; i < n; ++i) {
          Point p = 0.5 * (mesh.vertices[vid(i, j)] + mesh.vertices[vid(i + 1, j)]);
          if (j > 0 && j < n) p.y() += shift * hy;
          mesh.vertices.push_back(p);
        }
      }
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i <= n; ++i) {
          Point p = 0.5 * (mesh.vertices[vid(i, j)] + mesh.vertices[vid(i, j + 1)]);
          if (i > 0 && i < n) p.x() += shift * hx;
          mesh.vertices.push_back(p);
        }
      }
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
          mesh.cells.push_back({vid(i, j), hmid(i, j), vid(i + 1, j), vmid(i + 1, j), vid(i + 1, j + 1),
                                hmid(i, j + 1), vid(i, j + 1), vmid(i, j)});
        }
      }
      break;
    }
    case MeshFamily::voronoi:
      throw MeshError("generate_structured: use generate_voronoi for the voronoi family");
  }
  mesh.domain_descriptor = to_string(family) + ":n=" + std::to_string(n);
  finalize_mesh(mesh);
  tag_rectangle_boundary(mesh, domain);
  return mesh;
}

PolygonalMesh generate_family(MeshFamily family, int n, const Rectangle& domain, std::uint64_t seed) {
  if (family == MeshFamily::voronoi) {
    check_generator_args(n, domain);
    auto mesh = generate_voronoi(n * n, domain, 3, seed);
    tag_rectangle_boundary(mesh, domain);
    return mesh;
  }
  return generate_structured(family, n, domain);
}

MeshMetrics mesh_metrics(const PolygonalMesh& mesh) {
  MeshMetrics metrics;
  metrics.cells.reserve(mesh.cells.size());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    metrics.cells.push_back(cell_geometry(mesh.cell_polygon(c)));
    metrics.h = std::max(metrics.h, metrics.cells.back().diameter);
  }
  return metrics;
}

RegularityReport check_regularity(const PolygonalMesh& mesh, double delta0) {
  RegularityReport report;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto poly = mesh.cell_polygon(c);
    const auto g = cell_geometry(poly);
    const double min_edge = *std::min_element(g.edge_lengths.begin(), g.edge_lengths.end());
    const double edge_ratio = min_edge / g.diameter;

    // Signed distance from the barycenter to each edge line; a non-positive
    // value means the cell is not star-shaped about its barycenter.
    double radius = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < poly.size(); ++j) {
      const double d = g.normals[j].dot(poly[j] - g.barycenter);
      radius = std::min(radius, d);
    }
    const double inscribed_ratio = std::max(radius, 0.0) / g.diameter;

    if (edge_ratio < report.min_edge_ratio || report.worst_edge_cell < 0) {
      report.min_edge_ratio = edge_ratio;
      report.worst_edge_cell = c;
    }
    if (inscribed_ratio < report.min_inscribed_ratio || report.worst_inscribed_cell < 0) {
      report.min_inscribed_ratio = inscribed_ratio;
      report.worst_inscribed_cell = c;
    }
    if (edge_ratio < delta0 || inscribed_ratio < delta0) report.flagged_cells.push_back(c);
  }
  return report;
}

PolygonalMesh scaled_mesh(const PolygonalMesh& mesh, double factor) {
  PolygonalMesh out = mesh;
  for (auto& v : out.vertices) v *= factor;
  return out;
}

}  // namespace polyb

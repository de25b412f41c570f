#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace polyb {

using Point = Eigen::Vector2d;

/// Raised for malformed input geometry or topology.
class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Rectangle {
  Point lo{0.0, 0.0};
  Point hi{1.0, 1.0};

  double width() const { return hi.x() - lo.x(); }
  double height() const { return hi.y() - lo.y(); }
  double area() const { return width() * height(); }
};

enum class MeshFamily { triangles, squares, distorted_quads, nonconvex_cells, voronoi };

std::string to_string(MeshFamily family);
MeshFamily mesh_family_from_string(const std::string& name);

/// Boundary tags for rectangle-generated meshes; loaded meshes use `unknown`.
enum class BoundaryTag : int { unknown = 0, bottom = 1, right = 2, top = 3, left = 4 };

struct BoundaryEdge {
  int cell;
  int local_edge;
  BoundaryTag tag;
};

/// Polygonal tiling of a 2D domain.
///
/// Cells are counter-clockwise vertex loops. Local edge j of a cell joins its
/// local vertices j and j+1 (cyclic). The edge tables are filled by
/// `finalize_mesh` and are consistent with `cells` afterwards.
struct PolygonalMesh {
  std::vector<Point> vertices;
  std::vector<std::vector<int>> cells;
  std::vector<BoundaryEdge> boundary_edges;
  std::string domain_descriptor;

  // Undirected edges, stored with edges[e][0] < edges[e][1].
  std::vector<std::array<int, 2>> edges;
  // Incident cells per edge; second entry is -1 on the boundary.
  std::vector<std::array<int, 2>> edge_cells;
  // cell_edges[c][j] is the global id of local edge j of cell c.
  std::vector<std::vector<int>> cell_edges;
  std::vector<char> boundary_vertex;
  std::vector<char> boundary_edge;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_cells() const { return static_cast<int>(cells.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
  std::vector<Point> cell_polygon(int cell) const;
};

struct CellGeometry {
  double diameter = 0.0;
  double area = 0.0;
  Point barycenter = Point::Zero();
  std::vector<double> edge_lengths;
  std::vector<Point> normals;  // outward unit normals, one per local edge
};

struct MeshMetrics {
  double h = 0.0;
  std::vector<CellGeometry> cells;
};

struct RegularityReport {
  double min_inscribed_ratio = 1.0;
  double min_edge_ratio = 1.0;
  int worst_inscribed_cell = -1;
  int worst_edge_cell = -1;
  std::vector<int> flagged_cells;
};

double signed_area(const std::vector<Point>& polygon);
bool is_simple_polygon(const std::vector<Point>& polygon);
CellGeometry cell_geometry(const std::vector<Point>& polygon);

/// Validates the cells, rebuilds the edge tables and tags boundary edges.
/// Clockwise cells are reversed when `fix_orientation` is set; otherwise they
/// are rejected. Returns the ids of re-oriented cells.
std::vector<int> finalize_mesh(PolygonalMesh& mesh, bool fix_orientation = false);

PolygonalMesh generate_structured(MeshFamily family, int n, const Rectangle& domain = {});
PolygonalMesh generate_voronoi(int n_seeds, const Rectangle& domain, int lloyd_iters, std::uint64_t seed);
/// Clipped Voronoi diagram of given (distinct) sites with Lloyd sweeps.
PolygonalMesh voronoi_from_sites(std::vector<Point> sites, const Rectangle& domain, int lloyd_iters = 0);

/// Dispatches to the structured generators or to `generate_voronoi` with
/// n*n seeds, three Lloyd sweeps and the given seed.
PolygonalMesh generate_family(MeshFamily family, int n, const Rectangle& domain = {},
                              std::uint64_t seed = 7);

MeshMetrics mesh_metrics(const PolygonalMesh& mesh);
RegularityReport check_regularity(const PolygonalMesh& mesh, double delta0);

PolygonalMesh scaled_mesh(const PolygonalMesh& mesh, double factor);

}  // namespace polyb

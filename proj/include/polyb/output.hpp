#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "polyb/verification.hpp"

namespace polyb {

/// Full-precision float formatting used by every CSV writer ("%.17e").
std::string format_double(double x);

void write_convergence_header(std::ostream& out);
void write_convergence_row(std::ostream& out, const ConvergenceRow& row);
void write_convergence_csv(std::ostream& out, const ConvergenceTable& table);
/// Fixed-width table for terminals.
void print_convergence_table(std::ostream& out, const ConvergenceTable& table);

void write_equivalence_csv(std::ostream& out, const EquivalenceReport& report);

/// Two-column `quantity,value` file: iteration count, one row per Picard
/// increment, DoF counts and any extra diagnostics.
void write_summary_csv(std::ostream& out, const Discretization& disc, const SolutionState& state,
                       const std::vector<std::pair<std::string, double>>& extra = {});

/// Legacy ASCII VTK 3.0 unstructured grid of VTK_POLYGON cells. Point data are the
/// vertex DoFs of u1, u2, p, theta; cell data `umag` is the magnitude of the cell
/// mean of Pi0_k u.
void write_vtk(std::ostream& out, const Discretization& disc, const SolutionState& state,
               const std::string& title = "polyboussinesq solution");

/// Finds the cell containing a point. Cells are bucketed on a uniform grid
/// over the mesh bounding box; points on shared edges go to the lowest cell id.
class PointLocator {
 public:
  explicit PointLocator(const PolygonalMesh& mesh);
  /// -1 when the point lies outside every cell.
  int locate(const Point& x) const;

 private:
  const PolygonalMesh* mesh_;
  Point lo_, hi_;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> buckets_;

  int bucket(double v, double lo, double hi, int n) const;
};

/// Pi0_k of a scalar DoF vector sampled at the centers of an n x n grid over the
/// mesh bounding box (NaN outside the mesh).
Eigen::MatrixXd sample_projected(const Discretization& disc, const Eigen::VectorXd& field, int n);

/// |f(x, y) + f(lo + hi - x, y)| / |f| over the n x n sampling grid. Zero for a
/// field that is odd under reflection about the vertical midline.
double mirror_symmetry_residual(const Discretization& disc, const Eigen::VectorXd& field, int n = 64);

}  // namespace polyb

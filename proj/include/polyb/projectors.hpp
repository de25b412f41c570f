#pragma once

#include <array>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "polyb/mesh.hpp"
#include "polyb/polybasis.hpp"

namespace polyb {

class ProjectorError : public std::runtime_error {
 public:
  ProjectorError(int cell, const std::string& what)
      : std::runtime_error("cell " + std::to_string(cell) + ": " + what), cell_(cell) {}
  int cell() const { return cell_; }

 private:
  int cell_;
};

/// Per-cell degrees of freedom of the order-k space.
///
/// Local ordering: vertex values (one per vertex, in loop order), then k-1
/// interior Gauss-Lobatto values per edge (edge j runs from local vertex j to
/// j+1), then the scaled moments (1/|E|) int psi m for m in M_{k-2}(E).
struct DofLayout {
  int order = 1;
  int num_vertices = 0;

  int num_edge_dofs() const { return num_vertices * (order - 1); }
  int num_moments() const { return poly_dim(order - 2); }
  int size() const { return num_vertices * order + order * (order - 1) / 2; }
  int edge_dof(int edge, int j) const { return num_vertices + edge * (order - 1) + j; }
  int moment_dof(int m) const { return num_vertices * order + m; }
};

/// Interior Gauss-Lobatto abscissae on [0, 1] for an order-k edge trace.
std::vector<double> edge_nodes(int order);

enum class Projection { nabla_k, l2_k, l2_km1, grad_km1, grad_k };

/// Matrices of the enhanced local space of one cell.
///
/// Every projector is a map from local DoF values to coefficients in the
/// scaled monomial basis of the cell (graded lexicographic order). For the
/// gradient projections there is one matrix per Cartesian component.
struct LocalElementOps {
  int cell = -1;
  int order = 1;
  DofLayout layout;
  CellGeometry geometry;
  MonomialBasisd basis{1, Point::Zero(), 1.0};

  QuadratureRule quadrature;          // volumetric rule, exactness 2k+2
  Eigen::MatrixXd basis_at_quad;      // dim P_k x n_quad
  std::vector<Point> dof_points;      // vertex and edge nodes; moment DoFs excluded

  Eigen::MatrixXd dof_matrix;         // D: N x dim P_k, DoFs of each monomial
  Eigen::MatrixXd mass;               // H: dim P_k x dim P_k
  Eigen::MatrixXd moments;            // C: dim P_k x N, int psi m (enhanced)
  Eigen::MatrixXd pi_nabla;           // dim P_k x N
  Eigen::MatrixXd pi_nabla_km1;       // dim P_{k-1} x N (boundary average for k = 1)
  Eigen::MatrixXd pi0_k;              // dim P_k x N
  Eigen::MatrixXd pi0_km1;            // dim P_{k-1} x N
  std::array<Eigen::MatrixXd, 2> grad_km1;  // dim P_{k-1} x N each
  std::array<Eigen::MatrixXd, 2> grad_k;    // dim P_k x N each
  Eigen::MatrixXd stabilizer;         // S_base = (I - D Pi)^T (I - D Pi)

  int num_dofs() const { return layout.size(); }
  int dim_k() const { return poly_dim(order); }
  int dim_km1() const { return poly_dim(order - 1); }

  /// Pads coefficients of a degree k-1 polynomial into the degree-k basis.
  Eigen::MatrixXd embed_km1(const Eigen::MatrixXd& coeffs_km1) const;
  /// Integral of a field over the cell, DoF-computable (first row of C).
  Eigen::RowVectorXd integral_row() const { return moments.row(0); }
};

LocalElementOps build_local_element(const std::vector<Point>& polygon, int k, int cell_id = -1);
LocalElementOps build_local_element(const PolygonalMesh& mesh, int cell, int k);

/// Applies one of the projectors to a local DoF vector. `component` selects
/// the Cartesian direction for the gradient projections.
Eigen::VectorXd project(const LocalElementOps& ops, const Eigen::VectorXd& dofs, Projection which,
                        int component = 0);

/// DoF interpolant of a scalar function: point values at vertex/edge nodes
/// and quadrature moments (1/|E|) int f m.
Eigen::VectorXd interpolate(const LocalElementOps& ops, const std::function<double(const Point&)>& f);

/// Evaluates a coefficient vector of the cell's monomial basis at x.
double evaluate(const LocalElementOps& ops, const Eigen::VectorXd& coeffs, const Point& x);

}  // namespace polyb

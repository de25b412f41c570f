#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "polyb/forms.hpp"
#include "polyb/mesh.hpp"
#include "polyb/problems.hpp"
#include "polyb/projectors.hpp"

namespace polyb {

/// Global numbering of one scalar order-k field: vertex DoFs, then k-1 DoFs
/// per edge, then the cell-private moments.
struct DofMap {
  int order = 1;
  int num_vertex_dofs = 0;
  int num_edge_dofs = 0;
  int num_moment_dofs = 0;
  std::vector<std::vector<int>> cell_dofs;  // local -> global
  std::vector<char> boundary;               // per global DoF
  std::vector<Point> nodes;                 // location of nodal DoFs (vertex and edge)

  int size() const { return num_vertex_dofs + num_edge_dofs + num_moment_dofs; }
  int num_nodal() const { return num_vertex_dofs + num_edge_dofs; }
};

DofMap build_dof_map(const PolygonalMesh& mesh, int k);

/// Number of worker threads for element loops, from POLYB_THREADS (default 1).
int worker_threads();

/// Mesh, element operators and the solution-independent local matrices.
struct Discretization {
  PolygonalMesh mesh;
  int order = 1;
  StabilizationParams params;
  DofMap dofs;
  std::vector<LocalElementOps> elements;
  std::vector<LpsMatrices> lps;
  std::vector<Eigen::MatrixXd> divergence;

  int num_scalar() const { return dofs.size(); }
  double h() const;
  Eigen::VectorXd gather(const Eigen::VectorXd& global, int cell) const;
};

Discretization discretize(const PolygonalMesh& mesh, int k, const StabilizationParams& params = {});

enum class SystemKind { momentum, transport };

/// Assembled sparse system. Momentum unknowns are ordered u1 | u2 | p | lambda.
struct GlobalSystem {
  SystemKind kind = SystemKind::momentum;
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
  int block_size = 0;  // scalar DoFs per field
  std::vector<int> dirichlet_rows;
};

/// Interpolates nodal boundary data; moment DoFs stay zero.
Eigen::VectorXd nodal_interpolant(const DofMap& dofs, const ScalarField& f);

GlobalSystem assemble_momentum_system(const Discretization& disc, const ProblemSpec& problem,
                                      const Eigen::VectorXd& theta_n, const Eigen::VectorXd& u1_n,
                                      const Eigen::VectorXd& u2_n, bool apply_dirichlet = true);

GlobalSystem assemble_transport_system(const Discretization& disc, const ProblemSpec& problem,
                                       const Eigen::VectorXd& theta_n, const Eigen::VectorXd& u1_n,
                                       const Eigen::VectorXd& u2_n, bool apply_dirichlet = true);

class SingularMatrixError : public std::runtime_error {
 public:
  SingularMatrixError(const std::string& what, int pivot) : std::runtime_error(what), pivot_(pivot) {}
  /// Column of the original matrix where factorization broke down (-1 if unknown).
  int pivot() const { return pivot_; }

 private:
  int pivot_;
};

struct LinearSolveResult {
  Eigen::VectorXd x;
  double residual = 0.0;  // |Ax - b|_inf / (|A|_inf |x|_inf + |b|_inf)
};

LinearSolveResult solve_linear(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b);
/// Bordered system [[K, c], [d^T, e]] whose block K has a one-dimensional kernel
/// not orthogonal to e_pin; only K + a e_pin e_pin^T is factored.
LinearSolveResult solve_bordered(const Eigen::SparseMatrix<double>& M, const Eigen::VectorXd& b, int pin);
/// Momentum systems go through solve_bordered (pinning the first pressure DoF);
/// constrained rows take their right-hand-side values exactly.
LinearSolveResult solve_linear(const GlobalSystem& s);

struct SolutionState {
  Eigen::VectorXd u1, u2, p, theta;
  double mean_multiplier = 0.0;
  int iteration_count = 0;
  std::vector<double> increment_history;
  double max_linear_residual = 0.0;
};

struct PicardOptions {
  double tol = 1e-6;
  int max_iter = 50;
};

class PicardError : public std::runtime_error {
 public:
  PicardError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), history_(std::move(history)) {}
  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

/// Combined relative l2 increment used as the stopping metric.
double picard_increment(const SolutionState& prev, const SolutionState& next);

SolutionState picard_solve(const Discretization& disc, const ProblemSpec& problem, const PicardOptions& options = {});

}  // namespace polyb

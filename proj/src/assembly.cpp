#include "polyb/assembly.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

#include <Eigen/SparseLU>

namespace polyb {

DofMap build_dof_map(const PolygonalMesh& mesh, int k) {
  if (k < 1 || k > 2) throw std::invalid_argument("build_dof_map: supported orders are 1 and 2");
  DofMap map;
  map.order = k;
  map.num_vertex_dofs = mesh.num_vertices();
  map.num_edge_dofs = mesh.num_edges() * (k - 1);
  const int nm = poly_dim(k - 2);
  map.num_moment_dofs = mesh.num_cells() * nm;
  map.boundary.assign(static_cast<std::size_t>(map.size()), 0);
  map.nodes.resize(static_cast<std::size_t>(map.num_nodal()));

  for (int v = 0; v < mesh.num_vertices(); ++v) {
    map.boundary[v] = mesh.boundary_vertex[v];
    map.nodes[v] = mesh.vertices[v];
  }
  const auto tnodes = edge_nodes(k);
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Point& a = mesh.vertices[mesh.edges[e][0]];
    const Point& b = mesh.vertices[mesh.edges[e][1]];
    for (int j = 0; j < k - 1; ++j) {
      const int g = map.num_vertex_dofs + e * (k - 1) + j;
      map.boundary[g] = mesh.boundary_edge[e];
      map.nodes[g] = a + tnodes[j] * (b - a);
    }
  }

  map.cell_dofs.resize(mesh.cells.size());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& loop = mesh.cells[c];
    const int m = static_cast<int>(loop.size());
    DofLayout layout{k, m};
    auto& dofs = map.cell_dofs[c];
    dofs.resize(layout.size());
    for (int j = 0; j < m; ++j) dofs[j] = loop[j];
    for (int j = 0; j < m; ++j) {
      const int e = mesh.cell_edges[c][j];
      const bool forward = mesh.edges[e][0] == loop[j];
      for (int i = 0; i < k - 1; ++i) {
        const int gi = forward ? i : k - 2 - i;
        dofs[layout.edge_dof(j, i)] = map.num_vertex_dofs + e * (k - 1) + gi;
      }
    }
    for (int b = 0; b < nm; ++b) dofs[layout.moment_dof(b)] = map.num_nodal() + c * nm + b;
  }
  return map;
}

int worker_threads() {
  if (const char* env = std::getenv("POLYB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return std::min(n, 256);
  }
  return 1;
}

namespace {

// Runs fn(c) for every cell, splitting contiguous ranges across workers.
template <class Fn>
void for_each_cell(int num_cells, Fn&& fn) {
  const int threads = std::min(worker_threads(), std::max(1, num_cells));
  if (threads == 1) {
    for (int c = 0; c < num_cells; ++c) fn(c);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (int c = t * num_cells / threads; c < (t + 1) * num_cells / threads; ++c) fn(c);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

using Triplets = std::vector<Eigen::Triplet<double>>;

void add_block(Triplets& out, const std::vector<int>& rows, int row_offset, const std::vector<int>& cols,
               int col_offset, const Eigen::MatrixXd& M) {
  for (int i = 0; i < M.rows(); ++i) {
    for (int j = 0; j < M.cols(); ++j) {
      if (M(i, j) != 0.0) out.emplace_back(rows[i] + row_offset, cols[j] + col_offset, M(i, j));
    }
  }
}

void require_finite(const Eigen::MatrixXd& M, int cell, const char* what) {
  if (!M.allFinite()) {
    throw std::runtime_error(std::string("assembly: non-finite ") + what + " on cell " + std::to_string(cell));
  }
}

// Concatenates per-cell triplets in cell order, drops constrained rows and
// inserts identity rows for them.
Eigen::SparseMatrix<double> finish_matrix(int size, std::vector<Triplets>& per_cell, const std::vector<char>& constrained,
                                          const std::vector<Eigen::Triplet<double>>& extra) {
  Triplets all;
  std::size_t total = extra.size();
  for (const auto& t : per_cell) total += t.size();
  all.reserve(total + constrained.size());
  for (auto& t : per_cell) {
    for (const auto& e : t) {
      if (!constrained[e.row()]) all.push_back(e);
    }
    Triplets().swap(t);
  }
  for (const auto& e : extra) {
    if (!constrained[e.row()]) all.push_back(e);
  }
  for (int r = 0; r < size; ++r) {
    if (constrained[r]) all.emplace_back(r, r, 1.0);
  }
  Eigen::SparseMatrix<double> A(size, size);
  A.setFromTriplets(all.begin(), all.end());
  A.makeCompressed();
  return A;
}

}  // namespace

double Discretization::h() const {
  double h = 0.0;
  for (const auto& e : elements) h = std::max(h, e.geometry.diameter);
  return h;
}

Eigen::VectorXd Discretization::gather(const Eigen::VectorXd& global, int cell) const {
  const auto& idx = dofs.cell_dofs[cell];
  Eigen::VectorXd local(static_cast<int>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) local(static_cast<int>(i)) = global(idx[i]);
  return local;
}

Discretization discretize(const PolygonalMesh& mesh, int k, const StabilizationParams& params) {
  params.validate();
  Discretization disc;
  disc.mesh = mesh;
  disc.order = k;
  disc.params = params;
  disc.dofs = build_dof_map(mesh, k);
  const int nc = mesh.num_cells();
  disc.elements.resize(nc);
  disc.lps.resize(nc);
  disc.divergence.resize(nc);
  for_each_cell(nc, [&](int c) {
    disc.elements[c] = build_local_element(mesh, c, k);
    disc.lps[c] = local_lps_terms(disc.elements[c], params);
    disc.divergence[c] = local_divergence(disc.elements[c]);
  });
  return disc;
}

Eigen::VectorXd nodal_interpolant(const DofMap& dofs, const ScalarField& f) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dofs.size());
  if (!f) return v;
  for (int i = 0; i < dofs.num_nodal(); ++i) v(i) = f(dofs.nodes[i]);
  return v;
}

GlobalSystem assemble_momentum_system(const Discretization& disc, const ProblemSpec& problem,
                                      const Eigen::VectorXd& theta_n, const Eigen::VectorXd& u1_n,
                                      const Eigen::VectorXd& u2_n, bool apply_dirichlet) {
  const int n = disc.num_scalar();
  const int size = 3 * n + 1;
  const int lambda = 3 * n;
  const int nc = disc.mesh.num_cells();
  if (static_cast<int>(disc.elements.size()) != nc) throw std::logic_error("assembly: elements not built");

  GlobalSystem sys;
  sys.kind = SystemKind::momentum;
  sys.block_size = n;
  sys.rhs = Eigen::VectorXd::Zero(size);
  std::vector<Triplets> per_cell(static_cast<std::size_t>(nc));
  std::vector<Eigen::VectorXd> loads1(nc), loads2(nc);

  for_each_cell(nc, [&](int c) {
    const auto& ops = disc.elements[c];
    const auto& dofs = disc.dofs.cell_dofs[c];
    const Eigen::VectorXd theta = disc.gather(theta_n, c);
    Eigen::MatrixXd Auu = local_scalar_diffusion(ops, theta, problem.coeff.mu, "viscosity") + disc.lps[c].L1;
    if (problem.convective) {
      Auu += local_scalar_convection_skew(ops, disc.gather(u1_n, c), disc.gather(u2_n, c));
    }
    require_finite(Auu, c, "velocity block");
    const Eigen::MatrixXd& B = disc.divergence[c];
    const int N = ops.num_dofs();
    auto& t = per_cell[c];
    t.reserve(static_cast<std::size_t>(7 * N * N + 2 * N));
    add_block(t, dofs, 0, dofs, 0, Auu);
    add_block(t, dofs, n, dofs, n, Auu);
    add_block(t, dofs, 0, dofs, 2 * n, -B.leftCols(N).transpose());
    add_block(t, dofs, n, dofs, 2 * n, -B.rightCols(N).transpose());
    add_block(t, dofs, 2 * n, dofs, 0, B.leftCols(N));
    add_block(t, dofs, 2 * n, dofs, n, B.rightCols(N));
    add_block(t, dofs, 2 * n, dofs, 2 * n, disc.lps[c].L2);
    const Eigen::RowVectorXd mean = ops.integral_row();
    for (int i = 0; i < N; ++i) {
      t.emplace_back(2 * n + dofs[i], lambda, mean(i));
      t.emplace_back(lambda, 2 * n + dofs[i], mean(i));
    }
    const LocalLoads loads = local_loads(ops, problem.coeff, problem.f, nullptr, theta);
    loads1[c] = loads.body[0] + loads.buoyancy[0];
    loads2[c] = loads.body[1] + loads.buoyancy[1];
    require_finite(loads1[c], c, "load");
    require_finite(loads2[c], c, "load");
  });
  for (int c = 0; c < nc; ++c) {
    const auto& dofs = disc.dofs.cell_dofs[c];
    for (std::size_t i = 0; i < dofs.size(); ++i) {
      sys.rhs(dofs[i]) += loads1[c](static_cast<int>(i));
      sys.rhs(n + dofs[i]) += loads2[c](static_cast<int>(i));
    }
  }

  std::vector<char> constrained(static_cast<std::size_t>(size), 0);
  if (apply_dirichlet) {
    const auto u_at = [&](int i) -> Eigen::Vector2d {
      return problem.u_dirichlet ? problem.u_dirichlet(disc.dofs.nodes[i]) : Eigen::Vector2d::Zero();
    };
    for (int i = 0; i < disc.dofs.num_nodal(); ++i) {
      if (!disc.dofs.boundary[i]) continue;
      const Eigen::Vector2d g = u_at(i);
      for (int comp = 0; comp < 2; ++comp) {
        constrained[comp * n + i] = 1;
        sys.rhs(comp * n + i) = g(comp);
        sys.dirichlet_rows.push_back(comp * n + i);
      }
    }
  }
  sys.matrix = finish_matrix(size, per_cell, constrained, {});
  return sys;
}

GlobalSystem assemble_transport_system(const Discretization& disc, const ProblemSpec& problem,
                                       const Eigen::VectorXd& theta_n, const Eigen::VectorXd& u1_n,
                                       const Eigen::VectorXd& u2_n, bool apply_dirichlet) {
  const int n = disc.num_scalar();
  const int nc = disc.mesh.num_cells();
  if (static_cast<int>(disc.elements.size()) != nc) throw std::logic_error("assembly: elements not built");

  GlobalSystem sys;
  sys.kind = SystemKind::transport;
  sys.block_size = n;
  sys.rhs = Eigen::VectorXd::Zero(n);
  std::vector<Triplets> per_cell(static_cast<std::size_t>(nc));
  std::vector<Eigen::VectorXd> heat(nc);

  for_each_cell(nc, [&](int c) {
    const auto& ops = disc.elements[c];
    const Eigen::VectorXd theta = disc.gather(theta_n, c);
    Eigen::MatrixXd A = local_scalar_diffusion(ops, theta, problem.coeff.kappa, "conductivity") + disc.lps[c].LT;
    if (problem.convective) {
      A += local_scalar_convection_skew(ops, disc.gather(u1_n, c), disc.gather(u2_n, c));
    }
    require_finite(A, c, "temperature block");
    add_block(per_cell[c], disc.dofs.cell_dofs[c], 0, disc.dofs.cell_dofs[c], 0, A);
    heat[c] = local_loads(ops, problem.coeff, nullptr, problem.Q, theta).heat;
    require_finite(heat[c], c, "heat load");
  });
  for (int c = 0; c < nc; ++c) {
    const auto& dofs = disc.dofs.cell_dofs[c];
    for (std::size_t i = 0; i < dofs.size(); ++i) sys.rhs(dofs[i]) += heat[c](static_cast<int>(i));
  }

  std::vector<char> constrained(static_cast<std::size_t>(n), 0);
  if (apply_dirichlet) {
    for (int i = 0; i < disc.dofs.num_nodal(); ++i) {
      if (!disc.dofs.boundary[i]) continue;
      constrained[i] = 1;
      sys.rhs(i) = problem.theta_dirichlet ? problem.theta_dirichlet(disc.dofs.nodes[i]) : 0.0;
      sys.dirichlet_rows.push_back(i);
    }
  }
  sys.matrix = finish_matrix(n, per_cell, constrained, {});
  return sys;
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Factor = Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>;

void factor_or_throw(Factor& lu, const SpMat& A) {
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() == Eigen::Success) return;
  const std::string msg = lu.lastErrorMessage();
  int pivot = -1;
  const auto pos = msg.find_last_of(' ');
  if (pos != std::string::npos) {
    const int permuted = std::atoi(msg.c_str() + pos + 1) - 1;
    const auto& perm = lu.colsPermutation().indices();
    for (int j = 0; j < perm.size(); ++j) {
      if (perm(j) == permuted) pivot = j;
    }
  }
  throw SingularMatrixError("solve_linear: factorization failed: " + msg, pivot);
}

Eigen::VectorXd checked(const Factor& lu, const Eigen::VectorXd& b) {
  Eigen::VectorXd x = lu.solve(b);
  if (lu.info() != Eigen::Success || !x.allFinite()) {
    throw SingularMatrixError("solve_linear: solve produced non-finite values", -1);
  }
  return x;
}

double relative_residual(const SpMat& A, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
  // Infinity norm of A: maximal absolute row sum.
  Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(A.rows());
  for (int k = 0; k < A.outerSize(); ++k) {
    for (SpMat::InnerIterator it(A, k); it; ++it) row_sums(it.row()) += std::abs(it.value());
  }
  const double denom = row_sums.maxCoeff() * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>();
  const double num = (A * x - b).lpNorm<Eigen::Infinity>();
  return denom > 0.0 ? num / denom : num;
}

}  // namespace

LinearSolveResult solve_linear(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b) {
  if (A.rows() != A.cols() || A.rows() != b.size()) throw std::invalid_argument("solve_linear: dimension mismatch");
  Factor lu;
  factor_or_throw(lu, A);
  LinearSolveResult out;
  out.x = checked(lu, b);
  out.residual = relative_residual(A, out.x, b);
  return out;
}

// The saddle block K (everything but the last row/column) is singular only
// through the constant pressure mode, so K + a e_j e_j^T with j a pressure DoF
// is regular. The bordered solution follows from three solves with that one
// factorization and a 2x2 system for (lambda, x_j). The dense border never
// enters the factorization.
LinearSolveResult solve_bordered(const Eigen::SparseMatrix<double>& M, const Eigen::VectorXd& b, int pin) {
  if (M.rows() != M.cols() || M.rows() != b.size()) throw std::invalid_argument("solve_bordered: dimension mismatch");
  const int s = static_cast<int>(M.rows()) - 1;
  if (pin < 0 || pin >= s) throw std::invalid_argument("solve_bordered: pin outside the block");

  SpMat K(s, s);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(s), d = Eigen::VectorXd::Zero(s);
  double corner = 0.0, alpha = 0.0;
  {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(M.nonZeros()));
    for (int k = 0; k < M.outerSize(); ++k) {
      for (SpMat::InnerIterator it(M, k); it; ++it) {
        const int r = static_cast<int>(it.row()), col = static_cast<int>(it.col());
        if (r < s && col < s) {
          t.emplace_back(r, col, it.value());
          if (r == pin) alpha = std::max(alpha, std::abs(it.value()));
        } else if (r < s) {
          c(r) = it.value();
        } else if (col < s) {
          d(col) = it.value();
        } else {
          corner = it.value();
        }
      }
    }
    if (alpha == 0.0) alpha = 1.0;
    t.emplace_back(pin, pin, alpha);
    K.setFromTriplets(t.begin(), t.end());
  }

  Factor lu;
  factor_or_throw(lu, K);
  Eigen::VectorXd ej = Eigen::VectorXd::Zero(s);
  ej(pin) = 1.0;
  const Eigen::VectorXd z0 = checked(lu, b.head(s));
  const Eigen::VectorXd zc = checked(lu, c);
  const Eigen::VectorXd zj = checked(lu, ej);

  // x = z0 - lambda zc + alpha xj zj, with x(pin) = xj and d.x + corner lambda = b(s).
  Eigen::Matrix2d S;
  S << zc(pin), 1.0 - alpha * zj(pin),
      d.dot(zc) - corner, -alpha * d.dot(zj);
  const Eigen::Vector2d rhs(z0(pin), d.dot(z0) - b(s));
  const Eigen::FullPivLU<Eigen::Matrix2d> small(S);
  if (!small.isInvertible()) throw SingularMatrixError("solve_bordered: degenerate border", s);
  const Eigen::Vector2d lx = small.solve(rhs);

  LinearSolveResult out;
  out.x.resize(s + 1);
  out.x.head(s) = z0 - lx(0) * zc + alpha * lx(1) * zj;
  out.x(s) = lx(0);
  if (!out.x.allFinite()) throw SingularMatrixError("solve_bordered: non-finite solution", -1);
  out.residual = relative_residual(M, out.x, b);
  return out;
}

LinearSolveResult solve_linear(const GlobalSystem& s) {
  LinearSolveResult r = s.kind == SystemKind::momentum && s.matrix.rows() == 3 * s.block_size + 1
                            ? solve_bordered(s.matrix, s.rhs, 2 * s.block_size)
                            : solve_linear(s.matrix, s.rhs);
  // Constrained rows are identity rows: take their values verbatim rather than
  // through the factorization.
  for (int row : s.dirichlet_rows) r.x(row) = s.rhs(row);
  return r;
}

}  // namespace polyb

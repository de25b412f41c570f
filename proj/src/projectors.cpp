#include "polyb/projectors.hpp"

#include <cmath>

namespace polyb {

std::vector<double> edge_nodes(int order) {
  switch (order) {
    case 1:
      return {};
    case 2:
      return {0.5};
    case 3:
      return {0.5 - std::sqrt(5.0) / 10.0, 0.5 + std::sqrt(5.0) / 10.0};
    default:
      throw std::invalid_argument("edge_nodes: unsupported order " + std::to_string(order));
  }
}

namespace {

// Lagrange basis on the edge nodes (0, interior..., 1) evaluated at t.
Eigen::VectorXd edge_lagrange(const std::vector<double>& nodes, double t) {
  const int n = static_cast<int>(nodes.size());
  Eigen::VectorXd l = Eigen::VectorXd::Ones(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j != i) l(i) *= (t - nodes[j]) / (nodes[i] - nodes[j]);
    }
  }
  return l;
}

// Local DoF index of trace node `i` on local edge `e` (0 = start vertex, last = end vertex).
int trace_dof(const DofLayout& layout, int e, int i) {
  const int last = layout.order;
  if (i == 0) return e;
  if (i == last) return (e + 1) % layout.num_vertices;
  return layout.edge_dof(e, i - 1);
}

// One traversal of the boundary, calling visit(edge, quadrature point, weight,
// trace row) where the trace row maps local DoFs to the value of psi there.
template <class Visit>
void for_each_boundary_point(const std::vector<Point>& poly, const DofLayout& layout, int exactness,
                             Visit&& visit) {
  std::vector<double> nodes{0.0};
  for (double t : edge_nodes(layout.order)) nodes.push_back(t);
  nodes.push_back(1.0);
  const int m = layout.num_vertices;
  const int n = layout.size();
  const auto gl = gauss_legendre(std::max(1, (exactness + 2) / 2));
  for (int e = 0; e < m; ++e) {
    const Point& a = poly[e];
    const Point& b = poly[(e + 1) % m];
    const double len = (b - a).norm();
    for (int q = 0; q < gl.nodes.size(); ++q) {
      const double t = gl.nodes(q);
      const Eigen::VectorXd lag = edge_lagrange(nodes, t);
      Eigen::RowVectorXd trace = Eigen::RowVectorXd::Zero(n);
      for (int i = 0; i < lag.size(); ++i) trace(trace_dof(layout, e, i)) += lag(i);
      visit(e, Point(a + t * (b - a)), gl.weights(q) * len, trace);
    }
  }
}

Eigen::MatrixXd checked_solve(const Eigen::MatrixXd& G, const Eigen::MatrixXd& rhs, int cell, const char* what) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(G);
  if (!(lu.rcond() > 1e-14)) throw ProjectorError(cell, std::string("singular ") + what + " Gram matrix");
  return lu.solve(rhs);
}

// Energy projector onto P_r (r <= k) with the boundary-average closure.
Eigen::MatrixXd energy_projector(const LocalElementOps& ops, const std::vector<Point>& poly, int r) {
  const int nr = poly_dim(r);
  const int n = ops.num_dofs();
  const double h = ops.geometry.diameter;
  const double area = ops.geometry.area;
  const auto& normals = ops.geometry.normals;
  MonomialBasisd basis(r, ops.geometry.barycenter, h);

  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(nr, n);
  double perimeter = 0.0;
  for (double l : ops.geometry.edge_lengths) perimeter += l;
  for_each_boundary_point(poly, ops.layout, 2 * ops.order + 1,
                          [&](int e, const Point& x, double w, const Eigen::RowVectorXd& trace) {
                            B.row(0) += (w / perimeter) * trace;
                            const Eigen::Matrix2Xd grads = basis.gradients(x);
                            for (int a = 1; a < nr; ++a) B.row(a) += w * grads.col(a).dot(normals[e]) * trace;
                          });
  if (r >= 2) {
    const Eigen::MatrixXd Dx = derivative_matrix(r, 0, h);
    const Eigen::MatrixXd Dy = derivative_matrix(r, 1, h);
    const Eigen::MatrixXd L = Dx * Dx + Dy * Dy;
    for (int a = 1; a < nr; ++a) {
      for (int b = 0; b < poly_dim(r - 2); ++b) {
        if (L(b, a) != 0.0) B(a, ops.layout.moment_dof(b)) -= L(b, a) * area;
      }
    }
  }
  const Eigen::MatrixXd G = B * ops.dof_matrix.leftCols(nr);
  return checked_solve(G, B, ops.cell, "energy");
}

// Projected gradient onto P_r, component `dir`, by parts against moments of degree < r.
Eigen::MatrixXd gradient_projector(const LocalElementOps& ops, const std::vector<Point>& poly, int r, int dir) {
  const int nr = poly_dim(r);
  const Eigen::MatrixXd Dd = derivative_matrix(r, dir, ops.geometry.diameter);
  Eigen::MatrixXd E = -Dd.transpose() * ops.moments.topRows(nr);
  const auto& normals = ops.geometry.normals;
  for_each_boundary_point(poly, ops.layout, 2 * ops.order + 1,
                          [&](int e, const Point& x, double w, const Eigen::RowVectorXd& trace) {
                            const Eigen::VectorXd m = ops.basis.values(x).head(nr);
                            E += (w * normals[e](dir)) * m * trace;
                          });
  return checked_solve(ops.mass.topLeftCorner(nr, nr), E, ops.cell, "mass");
}

}  // namespace

Eigen::MatrixXd LocalElementOps::embed_km1(const Eigen::MatrixXd& coeffs_km1) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim_k(), coeffs_km1.cols());
  out.topRows(coeffs_km1.rows()) = coeffs_km1;
  return out;
}

LocalElementOps build_local_element(const std::vector<Point>& polygon, int k, int cell_id) {
  if (k < 1 || k > 2) throw std::invalid_argument("build_local_element: supported orders are 1 and 2");
  LocalElementOps ops;
  ops.cell = cell_id;
  ops.order = k;
  ops.layout = DofLayout{k, static_cast<int>(polygon.size())};
  ops.geometry = cell_geometry(polygon);
  if (!(ops.geometry.area > 0.0)) throw ProjectorError(cell_id, "non-positive area");
  ops.basis = monomial_basis(k, ops.geometry);

  const int n = ops.num_dofs();
  const int nk = ops.dim_k();
  const int nkm1 = ops.dim_km1();
  const int nm = ops.layout.num_moments();
  const int m = ops.layout.num_vertices;
  const double area = ops.geometry.area;

  ops.quadrature = polygon_quadrature(polygon, 2 * k + 2);
  ops.basis_at_quad.resize(nk, ops.quadrature.size());
  ops.mass = Eigen::MatrixXd::Zero(nk, nk);
  for (int q = 0; q < ops.quadrature.size(); ++q) {
    ops.basis_at_quad.col(q) = ops.basis.values(ops.quadrature.points.col(q));
    ops.mass += ops.quadrature.weights(q) * ops.basis_at_quad.col(q) * ops.basis_at_quad.col(q).transpose();
  }

  // Nodal points: vertices, then interior edge nodes.
  ops.dof_points.assign(polygon.begin(), polygon.end());
  const auto tnodes = edge_nodes(k);
  for (int e = 0; e < m; ++e) {
    for (double t : tnodes) ops.dof_points.push_back(polygon[e] + t * (polygon[(e + 1) % m] - polygon[e]));
  }

  ops.dof_matrix.resize(n, nk);
  for (std::size_t i = 0; i < ops.dof_points.size(); ++i) {
    ops.dof_matrix.row(static_cast<int>(i)) = ops.basis.values(ops.dof_points[i]).transpose();
  }
  for (int b = 0; b < nm; ++b) ops.dof_matrix.row(ops.layout.moment_dof(b)) = ops.mass.row(b) / area;

  ops.pi_nabla = energy_projector(ops, polygon, k);

  // Moments: low-degree ones are DoFs, the rest come from the enhancement.
  ops.moments = ops.mass * ops.pi_nabla;
  for (int b = 0; b < nm; ++b) {
    ops.moments.row(b).setZero();
    ops.moments(b, ops.layout.moment_dof(b)) = area;
  }
  ops.pi0_k = checked_solve(ops.mass, ops.moments, cell_id, "mass");
  ops.pi0_km1 = checked_solve(ops.mass.topLeftCorner(nkm1, nkm1), ops.moments.topRows(nkm1), cell_id, "mass");

  for (int d = 0; d < 2; ++d) {
    ops.grad_km1[d] = gradient_projector(ops, polygon, k - 1, d);
    ops.grad_k[d] = gradient_projector(ops, polygon, k, d);
  }

  if (k == 1) {
    ops.pi_nabla_km1 = Eigen::MatrixXd::Zero(1, n);
    double perimeter = 0.0;
    for (int e = 0; e < m; ++e) {
      const double len = ops.geometry.edge_lengths[e];
      perimeter += len;
      ops.pi_nabla_km1(0, e) += 0.5 * len;
      ops.pi_nabla_km1(0, (e + 1) % m) += 0.5 * len;
    }
    ops.pi_nabla_km1 /= perimeter;
  } else {
    ops.pi_nabla_km1 = energy_projector(ops, polygon, k - 1);
  }

  const Eigen::MatrixXd fluct = Eigen::MatrixXd::Identity(n, n) - ops.dof_matrix * ops.pi_nabla;
  ops.stabilizer = fluct.transpose() * fluct;
  return ops;
}

LocalElementOps build_local_element(const PolygonalMesh& mesh, int cell, int k) {
  return build_local_element(mesh.cell_polygon(cell), k, cell);
}

Eigen::VectorXd project(const LocalElementOps& ops, const Eigen::VectorXd& dofs, Projection which, int component) {
  if (dofs.size() != ops.num_dofs()) {
    throw std::invalid_argument("project: expected " + std::to_string(ops.num_dofs()) + " DoF values, got " +
                                std::to_string(dofs.size()));
  }
  if (component < 0 || component > 1) throw std::invalid_argument("project: component must be 0 or 1");
  switch (which) {
    case Projection::nabla_k:
      return ops.pi_nabla * dofs;
    case Projection::l2_k:
      return ops.pi0_k * dofs;
    case Projection::l2_km1:
      return ops.pi0_km1 * dofs;
    case Projection::grad_km1:
      return ops.grad_km1[component] * dofs;
    case Projection::grad_k:
      return ops.grad_k[component] * dofs;
  }
  return {};
}

Eigen::VectorXd interpolate(const LocalElementOps& ops, const std::function<double(const Point&)>& f) {
  Eigen::VectorXd v(ops.num_dofs());
  for (std::size_t i = 0; i < ops.dof_points.size(); ++i) v(static_cast<int>(i)) = f(ops.dof_points[i]);
  const int nm = ops.layout.num_moments();
  if (nm > 0) {
    Eigen::VectorXd mom = Eigen::VectorXd::Zero(nm);
    for (int q = 0; q < ops.quadrature.size(); ++q) {
      mom += ops.quadrature.weights(q) * f(ops.quadrature.points.col(q)) * ops.basis_at_quad.col(q).head(nm);
    }
    v.tail(nm) = mom / ops.geometry.area;
  }
  return v;
}

double evaluate(const LocalElementOps& ops, const Eigen::VectorXd& coeffs, const Point& x) {
  return ops.basis.values(x).head(coeffs.size()).dot(coeffs);
}

}  // namespace polyb

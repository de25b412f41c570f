#include "polyb/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <limits>
#include <ostream>

namespace polyb {

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17e", x);
  return buf;
}

void write_convergence_header(std::ostream& out) {
  out << "level,h,dofs,iterations";
  for (const char* name : kErrorNames) out << ',' << name << ",rate_" << name;
  out << '\n';
}

void write_convergence_row(std::ostream& out, const ConvergenceRow& row) {
  out << row.level << ',' << format_double(row.h) << ',' << row.dofs << ',' << row.iterations;
  for (int e = 0; e < kNumErrors; ++e) out << ',' << format_double(row.errors[e]) << ',' << format_double(row.rates[e]);
  out << '\n';
}

void write_convergence_csv(std::ostream& out, const ConvergenceTable& table) {
  write_convergence_header(out);
  for (const auto& row : table.rows) write_convergence_row(out, row);
}

void print_convergence_table(std::ostream& out, const ConvergenceTable& table) {
  const auto flags = out.flags();
  out << std::setw(6) << "n" << std::setw(10) << "h" << std::setw(9) << "dofs" << std::setw(5) << "itr";
  for (const char* name : kErrorNames) out << std::setw(12) << name << std::setw(6) << "rate";
  out << '\n';
  for (const auto& r : table.rows) {
    out << std::setw(6) << r.level << std::setw(10) << std::fixed << std::setprecision(4) << r.h << std::setw(9)
        << r.dofs << std::setw(5) << r.iterations;
    for (int e = 0; e < kNumErrors; ++e) {
      out << std::setw(12) << std::scientific << std::setprecision(4) << r.errors[e];
      if (std::isnan(r.rates[e])) {
        out << std::setw(6) << "--";
      } else {
        out << std::setw(6) << std::fixed << std::setprecision(2) << r.rates[e];
      }
    }
    out << '\n';
  }
  out.flags(flags);
}

void write_equivalence_csv(std::ostream& out, const EquivalenceReport& report) {
  out << "level,h,min_ratio,max_ratio,spread\n";
  for (const auto& lv : report.levels) {
    out << lv.level << ',' << format_double(lv.h) << ',' << format_double(lv.min_ratio) << ','
        << format_double(lv.max_ratio) << ',' << format_double(lv.spread) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const Discretization& disc, const SolutionState& state,
                       const std::vector<std::pair<std::string, double>>& extra) {
  const int n = disc.num_scalar();
  out << "quantity,value\n";
  out << "iterations," << state.iteration_count << '\n';
  for (std::size_t i = 0; i < state.increment_history.size(); ++i) {
    out << "increment_" << i + 1 << ',' << format_double(state.increment_history[i]) << '\n';
  }
  out << "cells," << disc.mesh.num_cells() << '\n';
  out << "vertices," << disc.mesh.num_vertices() << '\n';
  out << "scalar_dofs," << n << '\n';
  out << "velocity_dofs," << 2 * n << '\n';
  out << "pressure_dofs," << n << '\n';
  out << "temperature_dofs," << n << '\n';
  out << "momentum_unknowns," << 3 * n + 1 << '\n';
  out << "h," << format_double(disc.h()) << '\n';
  out << "mean_multiplier," << format_double(state.mean_multiplier) << '\n';
  out << "max_linear_residual," << format_double(state.max_linear_residual) << '\n';
  for (const auto& [key, value] : extra) out << key << ',' << format_double(value) << '\n';
}

namespace {

void write_point_scalars(std::ostream& out, const char* name, const Eigen::VectorXd& v, int nv) {
  out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (int i = 0; i < nv; ++i) out << format_double(v(i)) << '\n';
}

}  // namespace

void write_vtk(std::ostream& out, const Discretization& disc, const SolutionState& state, const std::string& title) {
  const auto& mesh = disc.mesh;
  const int nv = mesh.num_vertices(), nc = mesh.num_cells();
  std::size_t conn = 0;
  for (const auto& cell : mesh.cells) conn += cell.size() + 1;

  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << nv << " double\n";
  for (const auto& x : mesh.vertices) out << format_double(x.x()) << ' ' << format_double(x.y()) << " 0\n";
  out << "CELLS " << nc << ' ' << conn << '\n';
  for (const auto& cell : mesh.cells) {
    out << cell.size();
    for (int v : cell) out << ' ' << v;
    out << '\n';
  }
  out << "CELL_TYPES " << nc << '\n';
  for (int c = 0; c < nc; ++c) out << "7\n";  // VTK_POLYGON

  out << "POINT_DATA " << nv << '\n';
  write_point_scalars(out, "u1", state.u1, nv);
  write_point_scalars(out, "u2", state.u2, nv);
  write_point_scalars(out, "p", state.p, nv);
  write_point_scalars(out, "theta", state.theta, nv);

  out << "CELL_DATA " << nc << "\nSCALARS umag double 1\nLOOKUP_TABLE default\n";
  for (int c = 0; c < nc; ++c) {
    const auto& ops = disc.elements[c];
    const Eigen::RowVectorXd mean = ops.integral_row() / ops.geometry.area;
    // Pi0_k preserves cell means, so the mean of the projection is the DoF integral.
    const double a = mean.dot(disc.gather(state.u1, c));
    const double b = mean.dot(disc.gather(state.u2, c));
    out << format_double(std::hypot(a, b)) << '\n';
  }
}

namespace {

bool on_segment(const Point& p, const Point& a, const Point& b, double tol) {
  const Point d = b - a;
  const double len2 = d.squaredNorm();
  const double t = std::clamp((p - a).dot(d) / len2, 0.0, 1.0);
  return (a + t * d - p).norm() <= tol;
}

bool inside_polygon(const PolygonalMesh& mesh, int c, const Point& p, double tol) {
  const auto& loop = mesh.cells[c];
  const std::size_t m = loop.size();
  bool in = false;
  for (std::size_t i = 0, j = m - 1; i < m; j = i++) {
    const Point& a = mesh.vertices[loop[i]];
    const Point& b = mesh.vertices[loop[j]];
    if (on_segment(p, a, b, tol)) return true;
    if ((a.y() > p.y()) != (b.y() > p.y()) && p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x()) {
      in = !in;
    }
  }
  return in;
}

}  // namespace

PointLocator::PointLocator(const PolygonalMesh& mesh) : mesh_(&mesh) {
  lo_ = hi_ = mesh.vertices.front();
  for (const auto& v : mesh.vertices) {
    lo_ = lo_.cwiseMin(v);
    hi_ = hi_.cwiseMax(v);
  }
  const int side = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.num_cells()))));
  nx_ = ny_ = side;
  buckets_.assign(static_cast<std::size_t>(nx_ * ny_), {});
  for (int c = 0; c < mesh.num_cells(); ++c) {
    Point clo = mesh.vertices[mesh.cells[c][0]], chi = clo;
    for (int v : mesh.cells[c]) {
      clo = clo.cwiseMin(mesh.vertices[v]);
      chi = chi.cwiseMax(mesh.vertices[v]);
    }
    const int i0 = bucket(clo.x(), lo_.x(), hi_.x(), nx_), i1 = bucket(chi.x(), lo_.x(), hi_.x(), nx_);
    const int j0 = bucket(clo.y(), lo_.y(), hi_.y(), ny_), j1 = bucket(chi.y(), lo_.y(), hi_.y(), ny_);
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) buckets_[static_cast<std::size_t>(j * nx_ + i)].push_back(c);
    }
  }
}

int PointLocator::bucket(double v, double lo, double hi, int n) const {
  const int b = static_cast<int>(std::floor((v - lo) / (hi - lo) * n));
  return std::clamp(b, 0, n - 1);
}

int PointLocator::locate(const Point& x) const {
  const double tol = 1e-12 * (hi_ - lo_).norm();
  if ((x.array() < lo_.array() - tol).any() || (x.array() > hi_.array() + tol).any()) return -1;
  const int i = bucket(x.x(), lo_.x(), hi_.x(), nx_), j = bucket(x.y(), lo_.y(), hi_.y(), ny_);
  for (int c : buckets_[static_cast<std::size_t>(j * nx_ + i)]) {
    if (inside_polygon(*mesh_, c, x, tol)) return c;
  }
  return -1;
}

Eigen::MatrixXd sample_projected(const Discretization& disc, const Eigen::VectorXd& field, int n) {
  if (n < 1) throw std::invalid_argument("sample_projected: grid size must be positive");
  const PointLocator locator(disc.mesh);
  Point lo = disc.mesh.vertices.front(), hi = lo;
  for (const auto& v : disc.mesh.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  Eigen::MatrixXd s(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const Point x(lo.x() + (i + 0.5) / n * (hi.x() - lo.x()), lo.y() + (j + 0.5) / n * (hi.y() - lo.y()));
      const int c = locator.locate(x);
      if (c < 0) {
        s(i, j) = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      const auto& ops = disc.elements[c];
      s(i, j) = evaluate(ops, ops.pi0_k * disc.gather(field, c), x);
    }
  }
  return s;
}

double mirror_symmetry_residual(const Discretization& disc, const Eigen::VectorXd& field, int n) {
  const Eigen::MatrixXd s = sample_projected(disc, field, n);
  double num = 0.0, den = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double a = s(i, j), b = s(n - 1 - i, j);
      if (std::isnan(a) || std::isnan(b)) continue;
      num += (a + b) * (a + b);
      den += a * a;
    }
  }
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

}  // namespace polyb

#include "polyb/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hash.hpp"

namespace polyb {

Eigen::VectorXd interpolate_global(const Discretization& disc, const ScalarField& f) {
  Eigen::VectorXd v = nodal_interpolant(disc.dofs, f);
  if (disc.order < 2) return v;
  for (int c = 0; c < disc.mesh.num_cells(); ++c) {
    const auto& ops = disc.elements[c];
    const Eigen::VectorXd local = interpolate(ops, f);
    const auto& dofs = disc.dofs.cell_dofs[c];
    for (int b = 0; b < ops.layout.num_moments(); ++b) {
      const int i = ops.layout.moment_dof(b);
      v(dofs[i]) = local(i);
    }
  }
  return v;
}

namespace {

double domain_area(const Discretization& disc) {
  double a = 0.0;
  for (const auto& e : disc.elements) a += e.geometry.area;
  return a;
}

double exact_pressure_mean(const Discretization& disc, const ProblemSpec& problem, int exactness) {
  double s = 0.0;
  for (int c = 0; c < disc.mesh.num_cells(); ++c) {
    s += polygon_quadrature(disc.mesh.cell_polygon(c), exactness).integrate(problem.exact->p);
  }
  return s / domain_area(disc);
}

}  // namespace

SolutionState interpolated_state(const Discretization& disc, const ProblemSpec& problem) {
  if (!problem.exact) throw std::invalid_argument("interpolated_state: problem has no exact fields");
  const auto& ex = *problem.exact;
  const double pmean = exact_pressure_mean(disc, problem, 2 * disc.order + 4);
  SolutionState s;
  s.u1 = interpolate_global(disc, [&](const Point& x) { return ex.u(x)(0); });
  s.u2 = interpolate_global(disc, [&](const Point& x) { return ex.u(x)(1); });
  s.p = interpolate_global(disc, [&](const Point& x) { return ex.p(x) - pmean; });
  s.theta = interpolate_global(disc, ex.theta);
  return s;
}

ErrorReport compute_errors(const Discretization& disc, const SolutionState& solution, const ProblemSpec& problem,
                           int quad_boost) {
  if (!problem.exact) throw std::invalid_argument("compute_errors: problem '" + problem.name + "' has no exact fields");
  const auto& ex = *problem.exact;
  const int exactness = 2 * disc.order + 2 + quad_boost;
  const double pmean = exact_pressure_mean(disc, problem, exactness);
  std::array<double, kNumErrors> num{}, den{};

  for (int c = 0; c < disc.mesh.num_cells(); ++c) {
    const auto& ops = disc.elements[c];
    const Eigen::VectorXd u1 = disc.gather(solution.u1, c), u2 = disc.gather(solution.u2, c);
    const Eigen::VectorXd p = disc.gather(solution.p, c), t = disc.gather(solution.theta, c);
    const Eigen::VectorXd nab1 = ops.pi_nabla * u1, nab2 = ops.pi_nabla * u2, nabt = ops.pi_nabla * t;
    const Eigen::VectorXd l1 = ops.pi0_k * u1, l2 = ops.pi0_k * u2, lp = ops.pi0_k * p, lt = ops.pi0_k * t;
    const QuadratureRule rule = polygon_quadrature(disc.mesh.cell_polygon(c), exactness);
    for (int q = 0; q < rule.size(); ++q) {
      const Point x = rule.points.col(q);
      const double w = rule.weights(q);
      const Eigen::VectorXd m = ops.basis.values(x);
      const Eigen::Matrix2Xd gm = ops.basis.gradients(x);
      const Eigen::Vector2d u = ex.u(x);
      const Eigen::Matrix2d G = ex.grad_u(x);
      const Eigen::Vector2d gt = ex.grad_theta(x);
      const double pe = ex.p(x) - pmean, te = ex.theta(x);

      num[u_h1] += w * ((G.row(0).transpose() - gm * nab1).squaredNorm() + (G.row(1).transpose() - gm * nab2).squaredNorm());
      den[u_h1] += w * G.squaredNorm();
      num[u_l2] += w * (std::pow(u(0) - m.dot(l1), 2) + std::pow(u(1) - m.dot(l2), 2));
      den[u_l2] += w * u.squaredNorm();
      num[p_l2] += w * std::pow(pe - m.dot(lp), 2);
      den[p_l2] += w * pe * pe;
      num[theta_h1] += w * (gt - gm * nabt).squaredNorm();
      den[theta_h1] += w * gt.squaredNorm();
      num[theta_l2] += w * std::pow(te - m.dot(lt), 2);
      den[theta_l2] += w * te * te;
    }
  }
  ErrorReport r;
  for (int i = 0; i < kNumErrors; ++i) {
    r.numerator[i] = std::sqrt(num[i]);
    r.denominator[i] = std::sqrt(den[i]);
    r.relative[i] = r.denominator[i] > 1e-12 ? r.numerator[i] / r.denominator[i] : r.numerator[i];
  }
  return r;
}

void ConvergenceTable::compute_rates() {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int e = 0; e < kNumErrors; ++e) {
      if (i == 0) {
        rows[i].rates[e] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      const auto& a = rows[i - 1];
      const auto& b = rows[i];
      rows[i].rates[e] = std::log(a.errors[e] / b.errors[e]) / std::log(a.h / b.h);
    }
  }
}

ConvergenceTable convergence_study(const ProblemSpec& problem, MeshFamily family, const std::vector<int>& levels, int k,
                                   const StudyOptions& options) {
  if (levels.size() < 2) throw std::invalid_argument("convergence_study: need at least two levels");
  ConvergenceTable table;
  for (int n : levels) {
    const PolygonalMesh mesh = generate_family(family, n, problem.domain, options.seed);
    const Discretization disc = discretize(mesh, k, options.params);
    SolutionState state;
    try {
      state = picard_solve(disc, problem, options.picard);
    } catch (const PicardError& e) {
      throw StudyError(std::string(e.what()) + " at level " + std::to_string(n), n);
    } catch (const SingularMatrixError& e) {
      throw StudyError(std::string(e.what()) + " at level " + std::to_string(n), n);
    }
    ConvergenceRow row;
    row.level = n;
    row.h = disc.h();
    row.dofs = 4 * disc.num_scalar() + 1;
    row.errors = compute_errors(disc, state, problem);
    row.iterations = state.iteration_count;
    table.rows.push_back(row);
    table.compute_rates();
    if (options.on_row) options.on_row(table.rows.back());
  }
  return table;
}

double pressure_form(const Discretization& disc, const Eigen::VectorXd& q, bool mass_based) {
  double s = 0.0;
  for (int c = 0; c < disc.mesh.num_cells(); ++c) {
    const Eigen::VectorXd ql = disc.gather(q, c);
    s += ql.dot((mass_based ? disc.lps[c].L2star : disc.lps[c].L2) * ql);
  }
  return s;
}

std::vector<double> equivalence_ratios(const Discretization& disc, int n_samples, std::uint64_t seed, int* resampled) {
  if (n_samples < 1) throw std::invalid_argument("equivalence probe: need at least one sample");
  detail::HashStream rng(seed);
  std::vector<double> ratios;
  int redraws = 0;
  while (static_cast<int>(ratios.size()) < n_samples) {
    Eigen::VectorXd q(disc.num_scalar());
    for (int i = 0; i < q.size(); ++i) q(i) = rng.uniform(-1.0, 1.0);
    const double l2 = pressure_form(disc, q, false);
    if (!(l2 >= 1e-14)) {
      if (++redraws > 100 * n_samples) throw std::runtime_error("equivalence probe: degenerate samples");
      continue;
    }
    ratios.push_back(pressure_form(disc, q, true) / l2);
  }
  if (resampled) *resampled = redraws;
  return ratios;
}

EquivalenceReport stabilization_equivalence_probe(MeshFamily family, const std::vector<int>& levels, int k,
                                                  int n_samples, std::uint64_t seed,
                                                  const StabilizationParams& params, const Rectangle& domain) {
  if (levels.empty()) throw std::invalid_argument("equivalence probe: no levels");
  EquivalenceReport report;
  report.min_ratio = std::numeric_limits<double>::infinity();
  report.max_ratio = 0.0;
  for (int n : levels) {
    const Discretization disc = discretize(generate_family(family, n, domain, seed), k, params);
    EquivalenceLevel lv;
    lv.level = n;
    lv.h = disc.h();
    lv.ratios = equivalence_ratios(disc, n_samples, detail::mix_key(seed, static_cast<std::uint64_t>(n)), &lv.resampled);
    std::vector<double> sorted = lv.ratios;
    std::sort(sorted.begin(), sorted.end());
    lv.min_ratio = sorted.front();
    lv.max_ratio = sorted.back();
    const std::size_t mid = sorted.size() / 2;
    lv.median_ratio = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    lv.spread = lv.max_ratio / lv.min_ratio;
    report.min_ratio = std::min(report.min_ratio, lv.min_ratio);
    report.max_ratio = std::max(report.max_ratio, lv.max_ratio);
    report.levels.push_back(std::move(lv));
  }
  report.spread = report.max_ratio / report.min_ratio;
  double mmin = std::numeric_limits<double>::infinity(), mmax = 0.0;
  for (const auto& lv : report.levels) {
    mmin = std::min(mmin, lv.median_ratio);
    mmax = std::max(mmax, lv.median_ratio);
  }
  report.median_variation = (mmax - mmin) / mmin;
  return report;
}

}  // namespace polyb

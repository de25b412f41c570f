#include <cmath>
#include <sstream>

#include "polyb/assembly.hpp"

namespace polyb {

double picard_increment(const SolutionState& prev, const SolutionState& next) {
  const double du = std::sqrt((next.u1 - prev.u1).squaredNorm() + (next.u2 - prev.u2).squaredNorm());
  const double dp = (next.p - prev.p).norm();
  const double dt = (next.theta - prev.theta).norm();
  const double nu = std::sqrt(next.u1.squaredNorm() + next.u2.squaredNorm());
  return (du + dp + dt) / (nu + next.p.norm() + next.theta.norm() + 1e-14);
}

SolutionState picard_solve(const Discretization& disc, const ProblemSpec& problem, const PicardOptions& options) {
  const int n = disc.num_scalar();
  SolutionState state;
  state.u1 = state.u2 = state.p = state.theta = Eigen::VectorXd::Zero(n);

  for (int it = 1; it <= options.max_iter; ++it) {
    SolutionState next;
    const auto mom = solve_linear(assemble_momentum_system(disc, problem, state.theta, state.u1, state.u2));
    next.u1 = mom.x.segment(0, n);
    next.u2 = mom.x.segment(n, n);
    next.p = mom.x.segment(2 * n, n);
    next.mean_multiplier = mom.x(3 * n);
    const auto tr = solve_linear(assemble_transport_system(disc, problem, state.theta, state.u1, state.u2));
    next.theta = tr.x;

    const double eta = picard_increment(state, next);
    next.increment_history = std::move(state.increment_history);
    next.increment_history.push_back(eta);
    next.iteration_count = it;
    next.max_linear_residual = std::max({state.max_linear_residual, mom.residual, tr.residual});
    state = std::move(next);
    if (!std::isfinite(eta)) {
      throw PicardError("picard: non-finite increment at iteration " + std::to_string(it), state.increment_history);
    }
    if (eta <= options.tol) return state;
  }
  std::ostringstream msg;
  msg << "picard: no convergence after " << options.max_iter << " iterations (last increment "
      << state.increment_history.back() << ")";
  throw PicardError(msg.str(), state.increment_history);
}

}  // namespace polyb

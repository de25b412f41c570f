#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "polyb/assembly.hpp"

namespace polyb {

enum ErrorKind { u_h1 = 0, u_l2 = 1, p_l2 = 2, theta_h1 = 3, theta_l2 = 4 };
inline constexpr int kNumErrors = 5;
inline const std::array<const char*, kNumErrors> kErrorNames = {"Eu_H1", "Eu_L2", "Ep_L2", "Etheta_H1", "Etheta_L2"};

/// Relative errors; absolute numerators and exact-field denominators are kept
/// for diagnostics. When a denominator vanishes the absolute error is reported.
struct ErrorReport {
  std::array<double, kNumErrors> relative{};
  std::array<double, kNumErrors> numerator{};
  std::array<double, kNumErrors> denominator{};

  double operator[](int i) const { return relative[static_cast<std::size_t>(i)]; }
};

/// Numerators use Pi_nabla_k (H1) and Pi0_k (L2) of the discrete fields; the
/// exact pressure is shifted to zero mean.
ErrorReport compute_errors(const Discretization& disc, const SolutionState& solution, const ProblemSpec& problem,
                           int quad_boost = 2);

/// Global DoF interpolant of a scalar function.
Eigen::VectorXd interpolate_global(const Discretization& disc, const ScalarField& f);

/// State made of the interpolants of the exact fields (pressure shifted to zero mean).
SolutionState interpolated_state(const Discretization& disc, const ProblemSpec& problem);

struct ConvergenceRow {
  int level = 0;
  double h = 0.0;
  int dofs = 0;
  ErrorReport errors;
  std::array<double, kNumErrors> rates{};  // NaN on the first row
  int iterations = 0;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  /// Recomputes rates = log(e_i / e_{i+1}) / log(h_i / h_{i+1}).
  void compute_rates();
  double last_rate(int kind) const { return rows.back().rates[static_cast<std::size_t>(kind)]; }
};

struct StudyOptions {
  StabilizationParams params;
  PicardOptions picard;
  std::uint64_t seed = 7;
  // Called after every completed level (for streaming output).
  std::function<void(const ConvergenceRow&)> on_row;
};

class StudyError : public std::runtime_error {
 public:
  StudyError(const std::string& what, int level) : std::runtime_error(what), level_(level) {}
  int level() const { return level_; }

 private:
  int level_;
};

ConvergenceTable convergence_study(const ProblemSpec& problem, MeshFamily family, const std::vector<int>& levels, int k,
                                   const StudyOptions& options = {});

struct EquivalenceLevel {
  int level = 0;
  double h = 0.0;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double median_ratio = 0.0;
  double spread = 0.0;  // max / min
  int resampled = 0;
  std::vector<double> ratios;
};

struct EquivalenceReport {
  std::vector<EquivalenceLevel> levels;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double spread = 0.0;            // across all levels
  double median_variation = 0.0;  // (max median - min median) / min median
};

/// Pressure-form ratios L2*(q,q) / L2(q,q) for pseudo-random global q.
double pressure_form(const Discretization& disc, const Eigen::VectorXd& q, bool mass_based);

EquivalenceReport stabilization_equivalence_probe(MeshFamily family, const std::vector<int>& levels, int k,
                                                  int n_samples, std::uint64_t seed,
                                                  const StabilizationParams& params = {},
                                                  const Rectangle& domain = {});

/// Ratios for a fixed mesh; exposed for the scaling invariance checks.
std::vector<double> equivalence_ratios(const Discretization& disc, int n_samples, std::uint64_t seed,
                                       int* resampled = nullptr);

}  // namespace polyb

#pragma once

#include <functional>
#include <stdexcept>

#include <Eigen/Dense>

#include "polyb/projectors.hpp"

namespace polyb {

/// Temperature-dependent viscosity and conductivity plus buoyancy data.
struct CoefficientModel {
  std::function<double(double)> mu = [](double) { return 1.0; };
  std::function<double(double)> dmu = [](double) { return 0.0; };
  std::function<double(double)> kappa = [](double) { return 1.0; };
  std::function<double(double)> dkappa = [](double) { return 0.0; };
  double alpha = 0.0;
  Eigen::Vector2d g = Eigen::Vector2d::Zero();

  // Declared bounds; diagnostics only.
  double mu_lo = 0.0, mu_hi = 0.0;
  double kappa_lo = 0.0, kappa_hi = 0.0;

  static CoefficientModel constant(double mu, double kappa);
};

/// tau_1 = c1 h_E, tau_2 = c2 h_E^tau2_power, tau_T = cT h_E.
struct StabilizationParams {
  double c1 = 1.0;
  double c2 = 1.0;
  double cT = 1.0;
  double tau2_power = 2.0;
  // Weight |E| on the dofi-dofi part of the mass-based pressure term (false: unit weight).
  bool area_weighted_l2star = true;

  double tau1(double h) const { return c1 * h; }
  double tau2(double h) const;
  double tauT(double h) const { return cT * h; }
  void validate() const;
};

class CoefficientError : public std::runtime_error {
 public:
  CoefficientError(int cell, const std::string& what)
      : std::runtime_error("cell " + std::to_string(cell) + ": " + what), cell_(cell) {}
  int cell() const { return cell_; }

 private:
  int cell_;
};

/// Scalar diffusion matrix (N x N) with coefficient c(Pi0_k theta):
/// sum_d (G_d)^T H^c_{k-1} G_d + c(mean of Pi0_k theta) S_base.
Eigen::MatrixXd local_scalar_diffusion(const LocalElementOps& ops, const Eigen::VectorXd& theta_dofs,
                                       const std::function<double(double)>& coefficient, const char* name);

/// Velocity stiffness, block-diagonal over the two components (2N x 2N).
Eigen::MatrixXd local_velocity_stiffness(const LocalElementOps& ops, const Eigen::VectorXd& theta_dofs,
                                         const CoefficientModel& coeff);

Eigen::MatrixXd local_temperature_stiffness(const LocalElementOps& ops, const Eigen::VectorXd& theta_dofs,
                                            const CoefficientModel& coeff);

/// Divergence coupling (N x 2N): q^T B [v1; v2] = int Pi0_{k-1}(div v) Pi0_k q.
Eigen::MatrixXd local_divergence(const LocalElementOps& ops);

enum class ConvectionTarget { velocity, temperature };

/// Skew-symmetrized convection with advecting field Pi0_k a, rows indexed by the
/// test function. Scalar (N x N) for temperature, block-diagonal (2N x 2N) for velocity.
Eigen::MatrixXd local_convection_skew(const LocalElementOps& ops, const Eigen::VectorXd& a1,
                                      const Eigen::VectorXd& a2, ConvectionTarget target);
Eigen::MatrixXd local_scalar_convection_skew(const LocalElementOps& ops, const Eigen::VectorXd& a1,
                                             const Eigen::VectorXd& a2);

/// Local projection stabilization matrices of one cell. L1 acts on each
/// velocity component separately.
struct LpsMatrices {
  Eigen::MatrixXd L1;
  Eigen::MatrixXd L2;
  Eigen::MatrixXd L2star;
  Eigen::MatrixXd LT;
  Eigen::MatrixXd S_p;
};

/// Sum over components of (r grad)^T H (r grad), r = Pi0_k - Pi0_{k-1}.
Eigen::MatrixXd gradient_fluctuation(const LocalElementOps& ops);

LpsMatrices local_lps_terms(const LocalElementOps& ops, const StabilizationParams& params);

struct LocalLoads {
  Eigen::VectorXd buoyancy[2];
  Eigen::VectorXd body[2];
  Eigen::VectorXd heat;
};

using VectorField = std::function<Eigen::Vector2d(const Point&)>;
using ScalarField = std::function<double(const Point&)>;

/// Load vectors against Pi0_k of the test functions. Null f or Q give zero loads.
LocalLoads local_loads(const LocalElementOps& ops, const CoefficientModel& coeff, const VectorField& f,
                       const ScalarField& Q, const Eigen::VectorXd& theta_dofs);

}  // namespace polyb

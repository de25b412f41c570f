#include "polyb/forms.hpp"

#include <cmath>

namespace polyb {

CoefficientModel CoefficientModel::constant(double mu, double kappa) {
  CoefficientModel c;
  c.mu = [mu](double) { return mu; };
  c.kappa = [kappa](double) { return kappa; };
  c.mu_lo = c.mu_hi = mu;
  c.kappa_lo = c.kappa_hi = kappa;
  return c;
}

double StabilizationParams::tau2(double h) const {
  return tau2_power == 2.0 ? c2 * h * h : c2 * std::pow(h, tau2_power);
}

void StabilizationParams::validate() const {
  if (!(c1 > 0.0) || !(c2 > 0.0) || !(cT > 0.0)) {
    throw std::invalid_argument("stabilization multipliers must be positive");
  }
  if (!(tau2_power > 0.0)) throw std::invalid_argument("tau2 power must be positive");
}

namespace {

Eigen::MatrixXd block_diag2(const Eigen::MatrixXd& a) {
  const auto n = a.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * n, 2 * a.cols());
  out.topLeftCorner(n, a.cols()) = a;
  out.bottomRightCorner(n, a.cols()) = a;
  return out;
}

double checked(double value, int cell, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw CoefficientError(cell, std::string(name) + " evaluated to " + std::to_string(value));
  }
  return value;
}

Eigen::MatrixXd dofi(const Eigen::MatrixXd& D, const Eigen::MatrixXd& P) {
  const Eigen::MatrixXd r = Eigen::MatrixXd::Identity(D.rows(), P.cols()) - D * P;
  return r.transpose() * r;
}

}  // namespace

Eigen::MatrixXd local_scalar_diffusion(const LocalElementOps& ops, const Eigen::VectorXd& theta_dofs,
                                       const std::function<double(double)>& coefficient, const char* name) {
  const int nkm1 = ops.dim_km1();
  const Eigen::VectorXd theta = ops.pi0_k * theta_dofs;
  Eigen::MatrixXd Hc = Eigen::MatrixXd::Zero(nkm1, nkm1);
  for (int q = 0; q < ops.quadrature.size(); ++q) {
    const auto m = ops.basis_at_quad.col(q);
    const double c = checked(coefficient(m.dot(theta)), ops.cell, name);
    Hc += (ops.quadrature.weights(q) * c) * m.head(nkm1) * m.head(nkm1).transpose();
  }
  const double mean = ops.mass.row(0).dot(theta) / ops.geometry.area;
  const double c0 = checked(coefficient(mean), ops.cell, name);
  Eigen::MatrixXd K = c0 * ops.stabilizer;
  for (int d = 0; d < 2; ++d) K += ops.grad_km1[d].transpose() * Hc * ops.grad_km1[d];
  return K;
}

Eigen::MatrixXd local_velocity_stiffness(const LocalElementOps& ops, const Eigen::VectorXd& theta_dofs,
                                         const CoefficientModel& coeff) {
  return block_diag2(local_scalar_diffusion(ops, theta_dofs, coeff.mu, "viscosity"));
}

Eigen::MatrixXd local_temperature_stiffness(const LocalElementOps& ops, const Eigen::VectorXd& theta_dofs,
                                            const CoefficientModel& coeff) {
  return local_scalar_diffusion(ops, theta_dofs, coeff.kappa, "conductivity");
}

Eigen::MatrixXd local_divergence(const LocalElementOps& ops) {
  const int n = ops.num_dofs();
  const int nkm1 = ops.dim_km1();
  const Eigen::MatrixXd left = ops.pi0_k.transpose() * ops.mass.leftCols(nkm1);
  Eigen::MatrixXd B(n, 2 * n);
  B.leftCols(n) = left * ops.grad_km1[0];
  B.rightCols(n) = left * ops.grad_km1[1];
  return B;
}

Eigen::MatrixXd local_scalar_convection_skew(const LocalElementOps& ops, const Eigen::VectorXd& a1,
                                             const Eigen::VectorXd& a2) {
  const int nkm1 = ops.dim_km1();
  const Eigen::VectorXd c1 = ops.pi0_k * a1;
  const Eigen::VectorXd c2 = ops.pi0_k * a2;
  // W(beta, gamma) collects weights of m_k(beta) * a_j * m_{k-1}(gamma) per direction.
  Eigen::MatrixXd W1 = Eigen::MatrixXd::Zero(ops.dim_k(), nkm1);
  Eigen::MatrixXd W2 = Eigen::MatrixXd::Zero(ops.dim_k(), nkm1);
  for (int q = 0; q < ops.quadrature.size(); ++q) {
    const auto m = ops.basis_at_quad.col(q);
    const double w = ops.quadrature.weights(q);
    W1 += (w * m.dot(c1)) * m * m.head(nkm1).transpose();
    W2 += (w * m.dot(c2)) * m * m.head(nkm1).transpose();
  }
  const Eigen::MatrixXd C = ops.pi0_k.transpose() * (W1 * ops.grad_km1[0] + W2 * ops.grad_km1[1]);
  return 0.5 * (C - C.transpose());
}

Eigen::MatrixXd local_convection_skew(const LocalElementOps& ops, const Eigen::VectorXd& a1,
                                      const Eigen::VectorXd& a2, ConvectionTarget target) {
  const Eigen::MatrixXd C = local_scalar_convection_skew(ops, a1, a2);
  return target == ConvectionTarget::velocity ? block_diag2(C) : C;
}

Eigen::MatrixXd gradient_fluctuation(const LocalElementOps& ops) {
  const int n = ops.num_dofs();
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(n, n);
  for (int d = 0; d < 2; ++d) {
    const Eigen::MatrixXd r = ops.grad_k[d] - ops.embed_km1(ops.grad_km1[d]);
    F += r.transpose() * ops.mass * r;
  }
  return F;
}

LpsMatrices local_lps_terms(const LocalElementOps& ops, const StabilizationParams& params) {
  const double h = ops.geometry.diameter;
  const int nkm1 = ops.dim_km1();
  const Eigen::MatrixXd F = gradient_fluctuation(ops);
  const Eigen::MatrixXd Dkm1 = ops.dof_matrix.leftCols(nkm1);

  LpsMatrices out;
  out.S_p = dofi(Dkm1, ops.pi_nabla_km1);
  out.L1 = params.tau1(h) * (F + ops.stabilizer);
  out.L2 = params.tau2(h) * (F + out.S_p);
  out.LT = params.tauT(h) * (F + ops.stabilizer);

  const Eigen::MatrixXd r0 = ops.pi0_k - ops.embed_km1(ops.pi0_km1);
  const double w = params.area_weighted_l2star ? ops.geometry.area : 1.0;
  out.L2star = r0.transpose() * ops.mass * r0 + w * dofi(Dkm1, ops.pi0_km1);
  return out;
}

LocalLoads local_loads(const LocalElementOps& ops, const CoefficientModel& coeff, const VectorField& f,
                       const ScalarField& Q, const Eigen::VectorXd& theta_dofs) {
  const int nk = ops.dim_k();
  const Eigen::VectorXd theta_moments = ops.mass * (ops.pi0_k * theta_dofs);
  LocalLoads out;
  for (int i = 0; i < 2; ++i) {
    out.buoyancy[i] = (coeff.alpha * coeff.g(i)) * (ops.pi0_k.transpose() * theta_moments);
  }
  Eigen::VectorXd fm1 = Eigen::VectorXd::Zero(nk), fm2 = Eigen::VectorXd::Zero(nk), qm = Eigen::VectorXd::Zero(nk);
  for (int q = 0; q < ops.quadrature.size(); ++q) {
    const Point x = ops.quadrature.points.col(q);
    const double w = ops.quadrature.weights(q);
    const auto m = ops.basis_at_quad.col(q);
    if (f) {
      const Eigen::Vector2d fx = f(x);
      fm1 += (w * fx(0)) * m;
      fm2 += (w * fx(1)) * m;
    }
    if (Q) qm += (w * Q(x)) * m;
  }
  out.body[0] = ops.pi0_k.transpose() * fm1;
  out.body[1] = ops.pi0_k.transpose() * fm2;
  out.heat = ops.pi0_k.transpose() * qm;
  return out;
}

}  // namespace polyb

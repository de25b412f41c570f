#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polyb/forms.hpp"
#include "polyb/mesh.hpp"

namespace polyb {

/// Dense bivariate polynomial sum c(i, j) x^i y^j.
class Poly2 {
 public:
  Poly2() : c_(Eigen::MatrixXd::Zero(1, 1)) {}
  explicit Poly2(Eigen::MatrixXd coeffs) : c_(std::move(coeffs)) {}
  static Poly2 constant(double v);
  static Poly2 x();
  static Poly2 y();

  double operator()(const Point& p) const;
  Poly2 dx() const;
  Poly2 dy() const;
  int degree() const;
  const Eigen::MatrixXd& coeffs() const { return c_; }

  friend Poly2 operator+(const Poly2& a, const Poly2& b);
  friend Poly2 operator-(const Poly2& a, const Poly2& b);
  friend Poly2 operator*(const Poly2& a, const Poly2& b);
  friend Poly2 operator*(double s, const Poly2& a);
  friend Poly2 operator+(const Poly2& a, double s) { return a + constant(s); }
  friend Poly2 operator-(const Poly2& a, double s) { return a - constant(s); }
  friend Poly2 operator+(double s, const Poly2& a) { return constant(s) + a; }
  friend Poly2 operator-(double s, const Poly2& a) { return constant(s) - a; }
  Poly2 operator-() const { return Poly2(-c_); }

 private:
  Eigen::MatrixXd c_;
};

/// Closed-form exact fields with the derivatives the forcing needs.
/// grad_u(i, j) = d u_i / d x_j.
struct ExactFields {
  VectorField u;
  std::function<Eigen::Matrix2d(const Point&)> grad_u;
  VectorField lap_u;
  ScalarField p;
  VectorField grad_p;
  ScalarField theta;
  VectorField grad_theta;
  ScalarField lap_theta;
};

struct ProblemParameters {
  double nu = 1.0;
  double kappa = 1.0;
  double pr = 0.5;
  double ra = 2000.0;
};

struct ProblemSpec {
  std::string name;
  CoefficientModel coeff;
  Rectangle domain;
  VectorField f;
  ScalarField Q;
  VectorField u_dirichlet;      // null means homogeneous
  ScalarField theta_dirichlet;  // null means homogeneous
  std::optional<ExactFields> exact;
  bool convective = true;
  ProblemParameters params;
};

/// Forcing from exact fields:
///   f = -mu(t) lap u - mu'(t) (grad u) grad t + (grad u) u + grad p - alpha t g
///   Q = -kappa(t) lap t - kappa'(t) |grad t|^2 + u . grad t
/// with the convective terms dropped when `problem.convective` is false.
/// Boundary data default to the exact traces.
void attach_manufactured_data(ProblemSpec& problem);

struct DerivativeCheck {
  double max_rel_error = 0.0;
  std::string worst;
};

/// Compares supplied derivatives with central differences at pseudo-random
/// points of the domain.
DerivativeCheck check_derivatives(const ExactFields& fields, const Rectangle& domain, int samples = 200,
                                  double step = 1e-5);

/// Strong residual of problem (P) at pseudo-random points, relative to the
/// magnitude of the individual terms.
double strong_residual(const ProblemSpec& problem, int samples = 1000);

ProblemSpec example1();
ProblemSpec example2(double nu, double kappa);
ProblemSpec example3(double kappa);
ProblemSpec cavity(double pr, double ra);
/// Constant coefficients, divergence-free u in [P_k]^2, p = 0, theta in P_k, no convection.
ProblemSpec patch_problem(int k);
ProblemSpec zero_problem();

/// Dispatch by id: example1, example2, example3, cavity, patch1, patch2, zero.
ProblemSpec manufactured_problem(const std::string& id, const ProblemParameters& params = {});

}  // namespace polyb

#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "polyb/mesh.hpp"

namespace polyb {

/// Dimension of P_k in two variables; zero for k < 0.
constexpr int poly_dim(int k) { return k < 0 ? 0 : (k + 1) * (k + 2) / 2; }

struct Exponent {
  int px;
  int py;
};

/// Graded lexicographic exponents up to `degree`: 1, x, y, x^2, xy, y^2, ...
std::vector<Exponent> monomial_exponents(int degree);

/// Coefficient-space derivative of scaled monomials: if c holds coefficients
/// in the degree-`degree` basis, `derivative_matrix(degree, dir, h) * c`
/// holds the coefficients of the derivative along `dir` (0 = x, 1 = y).
Eigen::MatrixXd derivative_matrix(int degree, int dir, double h);

/// Scaled monomials ((x - center) / h)^d with |d| <= degree.
template <class Scalar>
class MonomialBasis {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Point2 = Eigen::Matrix<Scalar, 2, 1>;
  using Gradients = Eigen::Matrix<Scalar, 2, Eigen::Dynamic>;

  MonomialBasis(int degree, const Point2& center, Scalar h)
      : degree_(degree), center_(center), h_(h), exps_(monomial_exponents(degree)) {}

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(exps_.size()); }
  const Point2& center() const { return center_; }
  Scalar scale() const { return h_; }
  const std::vector<Exponent>& exponents() const { return exps_; }

  Vector values(const Point2& x) const {
    const Point2 s = (x - center_) / h_;
    Vector out(size());
    for (int a = 0; a < size(); ++a) out(a) = ipow(s.x(), exps_[a].px) * ipow(s.y(), exps_[a].py);
    return out;
  }

  Gradients gradients(const Point2& x) const {
    const Point2 s = (x - center_) / h_;
    Gradients out(2, size());
    for (int a = 0; a < size(); ++a) {
      const auto [px, py] = exps_[a];
      out(0, a) = px == 0 ? Scalar(0) : Scalar(px) * ipow(s.x(), px - 1) * ipow(s.y(), py) / h_;
      out(1, a) = py == 0 ? Scalar(0) : Scalar(py) * ipow(s.x(), px) * ipow(s.y(), py - 1) / h_;
    }
    return out;
  }

  Vector laplacians(const Point2& x) const {
    const Point2 s = (x - center_) / h_;
    Vector out(size());
    for (int a = 0; a < size(); ++a) {
      const auto [px, py] = exps_[a];
      Scalar v(0);
      if (px >= 2) v += Scalar(px * (px - 1)) * ipow(s.x(), px - 2) * ipow(s.y(), py);
      if (py >= 2) v += Scalar(py * (py - 1)) * ipow(s.x(), px) * ipow(s.y(), py - 2);
      out(a) = v / (h_ * h_);
    }
    return out;
  }

 private:
  static Scalar ipow(Scalar base, int e) {
    Scalar r(1);
    for (int i = 0; i < e; ++i) r *= base;
    return r;
  }

  int degree_;
  Point2 center_;
  Scalar h_;
  std::vector<Exponent> exps_;
};

using MonomialBasisd = MonomialBasis<double>;

/// Basis for a cell of the supported element orders (k = 1 or 2).
MonomialBasisd monomial_basis(int k, const CellGeometry& cell);

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QuadratureRule {
  Eigen::Matrix2Xd points;
  Eigen::VectorXd weights;
  int exactness = 0;

  int size() const { return static_cast<int>(weights.size()); }
  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (int q = 0; q < size(); ++q) s += weights(q) * f(Point(points.col(q)));
    return s;
  }
};

/// Gauss-Legendre nodes and weights on [0, 1].
struct GaussLegendre {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
GaussLegendre gauss_legendre(int n_points);

/// Symmetric positive-weight rule on triangle abc exact to `exactness`.
QuadratureRule triangle_quadrature(const Point& a, const Point& b, const Point& c, int exactness);

/// Sub-triangulates the polygon (fan from the barycenter when the polygon is
/// star-shaped about it, ear clipping otherwise) and applies triangle rules.
QuadratureRule polygon_quadrature(const std::vector<Point>& polygon, int exactness);

/// Gauss-Legendre rule on segment ab exact to `exactness`; weights are lengths.
QuadratureRule edge_quadrature(const Point& a, const Point& b, int exactness);

}  // namespace polyb

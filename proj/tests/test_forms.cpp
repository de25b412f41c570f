#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "polyb/forms.hpp"

using namespace polyb;

namespace {

const std::vector<Point> kUnitSquare{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
const std::vector<Point> kPentagon{{0, 0}, {1, 0}, {1.3, 0.8}, {0.5, 1.4}, {-0.2, 0.7}};
const std::vector<Point> kDart{{0, 0}, {1, 0.3}, {0.45, 0.45}, {0.2, 1.1}};  // non-convex

Eigen::VectorXd dofs_of(const LocalElementOps& ops, const std::function<double(const Point&)>& f) {
  return interpolate(ops, f);
}

Eigen::VectorXd random_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(n);
  for (auto& x : v) x = normal(rng);
  return v;
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

// Local scaled coordinate xi = (x - x_E) / h_E.
double xi(const LocalElementOps& ops, const Point& x) { return (x - ops.geometry.barycenter).x() / ops.geometry.diameter; }
double eta(const LocalElementOps& ops, const Point& x) { return (x - ops.geometry.barycenter).y() / ops.geometry.diameter; }

}  // namespace

TEST(Stiffness, UnitSquareXiEntry) {
  const LocalElementOps ops = build_local_element(kUnitSquare, 1);
  const Eigen::VectorXd theta = Eigen::VectorXd::Random(4);
  const Eigen::MatrixXd A = local_velocity_stiffness(ops, theta, CoefficientModel::constant(1.0, 1.0));
  const Eigen::VectorXd v = dofs_of(ops, [&](const Point& x) { return xi(ops, x); });
  EXPECT_NEAR(v.dot(A.topLeftCorner(4, 4) * v), 0.5, 1e-14);
  EXPECT_NEAR(v.dot(A.bottomRightCorner(4, 4) * v), 0.5, 1e-14);
  EXPECT_LE(max_abs(A.topRightCorner(4, 4)), 0.0);

  const Eigen::MatrixXd T = local_temperature_stiffness(ops, theta, CoefficientModel::constant(1.0, 1.0));
  EXPECT_NEAR(v.dot(T * v), 0.5, 1e-14);
}

TEST(Stiffness, ConstantsInKernel) {
  for (int k : {1, 2}) {
    const LocalElementOps ops = build_local_element(kPentagon, k);
    const int n = ops.num_dofs();
    const Eigen::VectorXd theta = Eigen::VectorXd::Constant(n, 0.3);
    const Eigen::MatrixXd A = local_velocity_stiffness(ops, theta, CoefficientModel::constant(2.0, 1.0));
    EXPECT_LE((A * Eigen::VectorXd::Ones(2 * n)).norm(), 1e-13);
    const Eigen::MatrixXd T = local_temperature_stiffness(ops, theta, CoefficientModel::constant(1.0, 3.0));
    EXPECT_LE((T * Eigen::VectorXd::Ones(n)).norm(), 1e-13);
  }
}

TEST(Stiffness, NonlinearCoefficientsAtZeroTemperature) {
  CoefficientModel model = CoefficientModel::constant(1.0, 1.0);
  model.mu = [](double t) { return std::exp(-t); };
  model.kappa = [](double t) { return 1.0 + t * t + std::sin(t) * std::sin(t); };
  for (int k : {1, 2}) {
    const LocalElementOps ops = build_local_element(kDart, k);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(ops.num_dofs());
    const auto ref = CoefficientModel::constant(1.0, 1.0);
    EXPECT_LE(max_abs(local_velocity_stiffness(ops, zero, model) - local_velocity_stiffness(ops, zero, ref)), 1e-15);
    EXPECT_LE(max_abs(local_temperature_stiffness(ops, zero, model) - local_temperature_stiffness(ops, zero, ref)),
              1e-15);
  }
}

TEST(Stiffness, ScalesLinearlyWithConstantViscosity) {
  const LocalElementOps ops = build_local_element(kDart, 2);
  const Eigen::VectorXd theta = Eigen::VectorXd::Zero(ops.num_dofs());
  const Eigen::MatrixXd A1 = local_velocity_stiffness(ops, theta, CoefficientModel::constant(1.0, 1.0));
  const Eigen::MatrixXd A10 = local_velocity_stiffness(ops, theta, CoefficientModel::constant(10.0, 1.0));
  EXPECT_LE(max_abs(A10 - 10.0 * A1), 1e-13 * max_abs(A10));
}

TEST(Stiffness, CoercivityWitness) {
  std::mt19937_64 rng(3);
  for (const auto& poly : {kUnitSquare, kPentagon, kDart}) {
    for (int k : {1, 2}) {
      const LocalElementOps ops = build_local_element(poly, k);
      const int n = ops.num_dofs();
      const Eigen::MatrixXd A =
          local_velocity_stiffness(ops, Eigen::VectorXd::Zero(n), CoefficientModel::constant(1.0, 1.0));
      EXPECT_LE(max_abs(A - A.transpose()), 1e-12 * max_abs(A));
      for (int s = 0; s < 1000; ++s) {
        const Eigen::VectorXd x = random_vector(2 * n, rng);
        EXPECT_GT(x.dot(A * x), 0.0);
      }
      // Null space is exactly the componentwise constants.
      const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A).eigenvalues();
      EXPECT_LE(std::abs(ev(1)), 1e-12 * ev.maxCoeff());
      EXPECT_GT(ev(2), 1e-6 * ev.maxCoeff());
    }
  }
}

TEST(Stiffness, RejectsNonPositiveCoefficient) {
  const LocalElementOps ops = build_local_element(kUnitSquare, 1, 12);
  CoefficientModel model = CoefficientModel::constant(1.0, 1.0);
  model.mu = [](double t) { return t; };
  try {
    local_velocity_stiffness(ops, Eigen::VectorXd::Constant(4, -1.0), model);
    FAIL() << "expected CoefficientError";
  } catch (const CoefficientError& e) {
    EXPECT_EQ(e.cell(), 12);
  }
}

TEST(Divergence, XiAgainstConstant) {
  const LocalElementOps ops = build_local_element(kUnitSquare, 1);
  const Eigen::MatrixXd B = local_divergence(ops);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(8);
  v.head(4) = dofs_of(ops, [&](const Point& x) { return xi(ops, x); });
  EXPECT_NEAR(Eigen::VectorXd::Ones(4).dot(B * v), 1.0 / std::sqrt(2.0), 1e-14);
}

TEST(Divergence, RigidTranslationAndDivergenceOracle) {
  std::mt19937_64 rng(8);
  for (int k : {1, 2}) {
    const LocalElementOps ops = build_local_element(kDart, k);
    const int n = ops.num_dofs();
    const Eigen::MatrixXd B = local_divergence(ops);
    Eigen::VectorXd translation(2 * n);
    translation << Eigen::VectorXd::Constant(n, 0.7), Eigen::VectorXd::Constant(n, -1.3);
    EXPECT_LE((B * translation).norm(), 1e-13);

    // Direct quadrature of Pi0_{k-1}(div v) Pi0_k q.
    const Eigen::VectorXd v = random_vector(2 * n, rng), q = random_vector(n, rng);
    const Eigen::VectorXd d0 = project(ops, v.head(n), Projection::grad_km1, 0);
    const Eigen::VectorXd d1 = project(ops, v.tail(n), Projection::grad_km1, 1);
    const Eigen::VectorXd qc = project(ops, q, Projection::l2_k);
    const QuadratureRule rule = polygon_quadrature(kDart, 2 * k + 2);
    const double oracle = rule.integrate([&](const Point& x) {
      const Eigen::VectorXd m = ops.basis.values(x);
      return (d0 + d1).dot(m.head(ops.dim_km1())) * qc.dot(m);
    });
    EXPECT_NEAR(q.dot(B * v), oracle, 1e-12 * std::max(1.0, std::abs(oracle)));
  }
}

TEST(Convection, ZeroFieldAndSkewSymmetry) {
  std::mt19937_64 rng(21);
  for (const auto& poly : {kUnitSquare, kPentagon, kDart}) {
    for (int k : {1, 2}) {
      const LocalElementOps ops = build_local_element(poly, k);
      const int n = ops.num_dofs();
      const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
      EXPECT_EQ(max_abs(local_convection_skew(ops, zero, zero, ConvectionTarget::velocity)), 0.0);
      for (auto target : {ConvectionTarget::velocity, ConvectionTarget::temperature}) {
        const Eigen::MatrixXd C =
            local_convection_skew(ops, random_vector(n, rng), random_vector(n, rng), target);
        EXPECT_LE(max_abs(C + C.transpose()), 1e-12 * max_abs(C));
        const Eigen::VectorXd z = random_vector(C.rows(), rng);
        EXPECT_LE(std::abs(z.dot(C * z)), 1e-13 * max_abs(C) * z.squaredNorm());
      }
    }
  }
}

TEST(Convection, MatchesQuadratureOfProjectedFactors) {
  std::mt19937_64 rng(4);
  for (int k : {1, 2}) {
    const LocalElementOps ops = build_local_element(kPentagon, k);
    const int n = ops.num_dofs();
    const Eigen::VectorXd a1 = random_vector(n, rng), a2 = random_vector(n, rng);
    const Eigen::VectorXd w = random_vector(n, rng), z = random_vector(n, rng);
    const QuadratureRule rule = polygon_quadrature(kPentagon, 3 * k + 1);
    // c(a; w, z) = int (Pi0_k a . Pi0_{k-1} grad w) Pi0_k z
    auto c = [&](const Eigen::VectorXd& wv, const Eigen::VectorXd& zv) {
      const Eigen::VectorXd A1 = project(ops, a1, Projection::l2_k), A2 = project(ops, a2, Projection::l2_k);
      const Eigen::VectorXd G1 = project(ops, wv, Projection::grad_km1, 0);
      const Eigen::VectorXd G2 = project(ops, wv, Projection::grad_km1, 1);
      const Eigen::VectorXd Z = project(ops, zv, Projection::l2_k);
      return rule.integrate([&](const Point& x) {
        const Eigen::VectorXd m = ops.basis.values(x);
        const auto mk1 = m.head(ops.dim_km1());
        return (A1.dot(m) * G1.dot(mk1) + A2.dot(m) * G2.dot(mk1)) * Z.dot(m);
      });
    };
    const Eigen::MatrixXd C = local_scalar_convection_skew(ops, a1, a2);
    EXPECT_NEAR(z.dot(C * w), 0.5 * (c(w, z) - c(z, w)), 1e-12);
  }
}

TEST(Convection, ConstantFieldOnUnitSquare) {
  // a = (1, 0), w = xi, z = eta: 1/2 [int (1/h) eta - int 0 * xi] = 0 with a centered eta.
  const LocalElementOps ops = build_local_element(kUnitSquare, 1);
  const Eigen::MatrixXd C =
      local_scalar_convection_skew(ops, Eigen::VectorXd::Ones(4), Eigen::VectorXd::Zero(4));
  const Eigen::VectorXd w = dofs_of(ops, [&](const Point& x) { return xi(ops, x); });
  const Eigen::VectorXd z = dofs_of(ops, [&](const Point& x) { return eta(ops, x); });
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(4);
  EXPECT_NEAR(z.dot(C * w), 0.0, 1e-15);
  // w = xi, z = 1: 1/2 int d(xi)/dx = |E| / (2 h).
  EXPECT_NEAR(one.dot(C * w), 0.5 / std::sqrt(2.0), 1e-14);
}

TEST(Lps, SymmetricPositiveSemidefinite) {
  StabilizationParams params;
  for (const auto& poly : {kUnitSquare, kPentagon, kDart}) {
    for (int k : {1, 2}) {
      const LocalElementOps ops = build_local_element(poly, k);
      const LpsMatrices L = local_lps_terms(ops, params);
      for (const Eigen::MatrixXd* M : {&L.L1, &L.L2, &L.L2star, &L.LT, &L.S_p}) {
        const double scale = std::max(max_abs(*M), 1e-300);
        EXPECT_LE(max_abs(*M - M->transpose()), 1e-12 * scale);
        EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(*M).eigenvalues().minCoeff(), -1e-12 * scale);
      }
    }
  }
}

TEST(Lps, KernelsOnLowDegreePolynomials) {
  StabilizationParams params;
  std::mt19937_64 rng(12);
  for (const auto& poly : {kUnitSquare, kPentagon, kDart}) {
    for (int k : {1, 2}) {
      const LocalElementOps ops = build_local_element(poly, k);
      const LpsMatrices L = local_lps_terms(ops, params);
      const double s1 = max_abs(L.L1), s2 = max_abs(L.L2);
      for (int a = 0; a < ops.dim_k(); ++a) {
        const Eigen::VectorXd w = ops.dof_matrix.col(a);
        EXPECT_LE(std::abs(w.dot(L.L1 * w)), 1e-12 * s1);
        EXPECT_LE(std::abs(w.dot(L.LT * w)), 1e-12 * s1);
        if (a < ops.dim_km1()) {
          EXPECT_LE(std::abs(w.dot(L.L2 * w)), 1e-12 * s2);
          EXPECT_LE(std::abs(w.dot(L.L2star * w)), 1e-12 * max_abs(L.L2star));
        }
      }
      // A generic DoF vector is not a polynomial (for k = 2 or polygons with more than three vertices).
      const Eigen::VectorXd v = random_vector(ops.num_dofs(), rng);
      EXPECT_GT(v.dot(L.L1 * v), 1e-8 * s1);
      EXPECT_GT(v.dot(L.L2 * v), 1e-8 * s2);
      EXPECT_GT(v.dot(L.L2star * v), 0.0);
    }
  }
}

TEST(Lps, ParameterScaling) {
  const LocalElementOps ops = build_local_element(kPentagon, 1);
  StabilizationParams p;
  p.c1 = 1.0;
  p.c2 = 1.0;
  p.cT = 1.0;
  StabilizationParams q = p;
  q.c1 = 3.0;
  q.c2 = 0.5;
  q.cT = 7.0;
  const LpsMatrices a = local_lps_terms(ops, p), b = local_lps_terms(ops, q);
  EXPECT_LE(max_abs(b.L1 - 3.0 * a.L1), 1e-14 * max_abs(b.L1));
  EXPECT_LE(max_abs(b.L2 - 0.5 * a.L2), 1e-14 * max_abs(a.L2));
  EXPECT_LE(max_abs(b.LT - 7.0 * a.LT), 1e-14 * max_abs(b.LT));
  EXPECT_EQ(b.L2star, a.L2star);
  const double h = ops.geometry.diameter;
  EXPECT_DOUBLE_EQ(p.tau2(h), h * h);
  p.tau2_power = 1.0;
  EXPECT_DOUBLE_EQ(p.tau2(h), h);
}

TEST(Lps, ValidateRejectsNonPositive) {
  StabilizationParams p;
  EXPECT_NO_THROW(p.validate());
  p.c2 = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = StabilizationParams{};
  p.tau2_power = -1.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Loads, ZeroData) {
  const LocalElementOps ops = build_local_element(kPentagon, 2);
  const LocalLoads l = local_loads(ops, CoefficientModel::constant(1.0, 1.0), nullptr, nullptr,
                                   Eigen::VectorXd::Zero(ops.num_dofs()));
  EXPECT_EQ(l.body[0].norm() + l.body[1].norm() + l.heat.norm() + l.buoyancy[0].norm() + l.buoyancy[1].norm(), 0.0);
}

TEST(Loads, ConstantHeatSourceAndCenteredBodyForce) {
  const LocalElementOps ops = build_local_element(kUnitSquare, 1);
  const LocalLoads l = local_loads(
      ops, CoefficientModel::constant(1.0, 1.0), [](const Point&) { return Eigen::Vector2d(1.0, 0.0); },
      [](const Point&) { return 1.0; }, Eigen::VectorXd::Zero(4));
  EXPECT_NEAR(Eigen::VectorXd::Ones(4).dot(l.heat), 1.0, 1e-14);
  const Eigen::VectorXd v = dofs_of(ops, [&](const Point& x) { return xi(ops, x); });
  EXPECT_NEAR(v.dot(l.body[0]), 0.0, 1e-15);
  EXPECT_EQ(l.body[1].norm(), 0.0);
}

TEST(Loads, BuoyancyUsesProjectedTemperature) {
  const LocalElementOps ops = build_local_element(kDart, 2);
  CoefficientModel model = CoefficientModel::constant(1.0, 1.0);
  model.alpha = 2.0;
  model.g = Eigen::Vector2d(0.0, -1.0);
  // theta = 1 + x: int alpha g_y theta * 1 over the cell.
  const Eigen::VectorXd theta = dofs_of(ops, [](const Point& x) { return 1.0 + x.x(); });
  const LocalLoads l = local_loads(ops, model, nullptr, nullptr, theta);
  const double oracle = -2.0 * polygon_quadrature(kDart, 2).integrate([](const Point& x) { return 1.0 + x.x(); });
  EXPECT_NEAR(Eigen::VectorXd::Ones(ops.num_dofs()).dot(l.buoyancy[1]), oracle, 1e-13);
  EXPECT_EQ(l.buoyancy[0].norm(), 0.0);
}

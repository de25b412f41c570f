#include "polyb/problems.hpp"

#include <cmath>
#include <limits>

#include "hash.hpp"

namespace polyb {

// ---------------------------------------------------------------- Poly2

Poly2 Poly2::constant(double v) { return Poly2(Eigen::MatrixXd::Constant(1, 1, v)); }

Poly2 Poly2::x() {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2, 1);
  c(1, 0) = 1.0;
  return Poly2(c);
}

Poly2 Poly2::y() {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(1, 2);
  c(0, 1) = 1.0;
  return Poly2(c);
}

double Poly2::operator()(const Point& p) const {
  // Horner in y for each power of x, then in x.
  double result = 0.0;
  for (int i = static_cast<int>(c_.rows()) - 1; i >= 0; --i) {
    double row = 0.0;
    for (int j = static_cast<int>(c_.cols()) - 1; j >= 0; --j) row = row * p.y() + c_(i, j);
    result = result * p.x() + row;
  }
  return result;
}

Poly2 Poly2::dx() const {
  if (c_.rows() == 1) return constant(0.0);
  Eigen::MatrixXd d(c_.rows() - 1, c_.cols());
  for (int i = 1; i < c_.rows(); ++i) d.row(i - 1) = i * c_.row(i);
  return Poly2(d);
}

Poly2 Poly2::dy() const {
  if (c_.cols() == 1) return constant(0.0);
  Eigen::MatrixXd d(c_.rows(), c_.cols() - 1);
  for (int j = 1; j < c_.cols(); ++j) d.col(j - 1) = j * c_.col(j);
  return Poly2(d);
}

int Poly2::degree() const {
  int deg = -1;
  for (int i = 0; i < c_.rows(); ++i) {
    for (int j = 0; j < c_.cols(); ++j) {
      if (c_(i, j) != 0.0) deg = std::max(deg, i + j);
    }
  }
  return deg;
}

Poly2 operator+(const Poly2& a, const Poly2& b) {
  const auto r = std::max(a.c_.rows(), b.c_.rows());
  const auto c = std::max(a.c_.cols(), b.c_.cols());
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(r, c);
  s.topLeftCorner(a.c_.rows(), a.c_.cols()) += a.c_;
  s.topLeftCorner(b.c_.rows(), b.c_.cols()) += b.c_;
  return Poly2(s);
}

Poly2 operator-(const Poly2& a, const Poly2& b) { return a + (-b); }

Poly2 operator*(const Poly2& a, const Poly2& b) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(a.c_.rows() + b.c_.rows() - 1, a.c_.cols() + b.c_.cols() - 1);
  for (int i = 0; i < a.c_.rows(); ++i) {
    for (int j = 0; j < a.c_.cols(); ++j) {
      if (a.c_(i, j) != 0.0) s.block(i, j, b.c_.rows(), b.c_.cols()) += a.c_(i, j) * b.c_;
    }
  }
  return Poly2(s);
}

Poly2 operator*(double s, const Poly2& a) { return Poly2(s * a.c_); }

// ---------------------------------------------------------------- helpers

namespace {

constexpr double kPi = 3.14159265358979323846;

struct PolyVelocity {
  Poly2 u1, u2;
};

void set_polynomial_velocity(ExactFields& ex, const PolyVelocity& v) {
  const Poly2 u1x = v.u1.dx(), u1y = v.u1.dy(), u2x = v.u2.dx(), u2y = v.u2.dy();
  const Poly2 lap1 = u1x.dx() + u1y.dy(), lap2 = u2x.dx() + u2y.dy();
  ex.u = [v](const Point& x) { return Eigen::Vector2d(v.u1(x), v.u2(x)); };
  ex.grad_u = [u1x, u1y, u2x, u2y](const Point& x) {
    Eigen::Matrix2d g;
    g << u1x(x), u1y(x), u2x(x), u2y(x);
    return g;
  };
  ex.lap_u = [lap1, lap2](const Point& x) { return Eigen::Vector2d(lap1(x), lap2(x)); };
}

void set_polynomial_pressure(ExactFields& ex, const Poly2& p) {
  const Poly2 px = p.dx(), py = p.dy();
  ex.p = [p](const Point& x) { return p(x); };
  ex.grad_p = [px, py](const Point& x) { return Eigen::Vector2d(px(x), py(x)); };
}

void set_polynomial_temperature(ExactFields& ex, const Poly2& t) {
  const Poly2 tx = t.dx(), ty = t.dy();
  const Poly2 lap = tx.dx() + ty.dy();
  ex.theta = [t](const Point& x) { return t(x); };
  ex.grad_theta = [tx, ty](const Point& x) { return Eigen::Vector2d(tx(x), ty(x)); };
  ex.lap_theta = [lap](const Point& x) { return lap(x); };
}

// u = [c x^2 y (x-1)^2 (y-1)(2y-1), -c x y^2 (x-1)(2x-1)(y-1)^2]
PolyVelocity cubic_cell_velocity(double c) {
  const Poly2 X = Poly2::x(), Y = Poly2::y();
  const Poly2 xm = X - 1.0, ym = Y - 1.0;
  return {c * (X * X * Y * xm * xm * ym * (2.0 * Y - 1.0)),
          -c * (X * Y * Y * xm * (2.0 * X - 1.0) * ym * ym)};
}

Point sample_point(detail::HashStream& rng, const Rectangle& d) {
  return {rng.uniform(d.lo.x(), d.hi.x()), rng.uniform(d.lo.y(), d.hi.y())};
}

double rel(double approx, double exact) {
  return std::abs(approx - exact) / std::max(1.0, std::abs(exact));
}

// Hand-derived derivatives must agree with finite differences before use.
void verify_derivatives(const ProblemSpec& pb, double step) {
  const auto check = check_derivatives(*pb.exact, pb.domain, 100, step);
  if (check.max_rel_error > 1e-5) {
    throw std::logic_error(pb.name + ": supplied " + check.worst + " disagrees with finite differences (" +
                           std::to_string(check.max_rel_error) + ")");
  }
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(name) + " must be positive, got " + std::to_string(v));
  }
}

}  // namespace

// ---------------------------------------------------------------- forcing

void attach_manufactured_data(ProblemSpec& problem) {
  if (!problem.exact) throw std::invalid_argument("attach_manufactured_data: problem has no exact fields");
  const ExactFields ex = *problem.exact;
  const CoefficientModel c = problem.coeff;
  const bool convective = problem.convective;
  problem.f = [ex, c, convective](const Point& x) {
    const double t = ex.theta(x);
    const Eigen::Matrix2d G = ex.grad_u(x);
    Eigen::Vector2d f = -c.mu(t) * ex.lap_u(x) - c.dmu(t) * (G * ex.grad_theta(x)) + ex.grad_p(x) - c.alpha * t * c.g;
    if (convective) f += G * ex.u(x);
    return f;
  };
  problem.Q = [ex, c, convective](const Point& x) {
    const double t = ex.theta(x);
    const Eigen::Vector2d gt = ex.grad_theta(x);
    double q = -c.kappa(t) * ex.lap_theta(x) - c.dkappa(t) * gt.squaredNorm();
    if (convective) q += ex.u(x).dot(gt);
    return q;
  };
  problem.u_dirichlet = ex.u;
  problem.theta_dirichlet = ex.theta;
}

DerivativeCheck check_derivatives(const ExactFields& ex, const Rectangle& domain, int samples, double step) {
  DerivativeCheck out;
  detail::HashStream rng{20240917};
  const auto note = [&](double err, const char* what) {
    if (err > out.max_rel_error) {
      out.max_rel_error = err;
      out.worst = what;
    }
  };
  const Point ex_{step, 0.0}, ey_{0.0, step};
  for (int s = 0; s < samples; ++s) {
    const Point x = sample_point(rng, domain);
    const Eigen::Matrix2d G = ex.grad_u(x);
    const Eigen::Vector2d dux = (ex.u(x + ex_) - ex.u(x - ex_)) / (2 * step);
    const Eigen::Vector2d duy = (ex.u(x + ey_) - ex.u(x - ey_)) / (2 * step);
    for (int i = 0; i < 2; ++i) {
      note(rel(dux(i), G(i, 0)), "grad u");
      note(rel(duy(i), G(i, 1)), "grad u");
    }
    const Eigen::Vector2d lap =
        (ex.grad_u(x + ex_).col(0) - ex.grad_u(x - ex_).col(0) + ex.grad_u(x + ey_).col(1) - ex.grad_u(x - ey_).col(1)) /
        (2 * step);
    const Eigen::Vector2d lap_u = ex.lap_u(x);
    for (int i = 0; i < 2; ++i) note(rel(lap(i), lap_u(i)), "lap u");
    const Eigen::Vector2d gp = ex.grad_p(x);
    note(rel((ex.p(x + ex_) - ex.p(x - ex_)) / (2 * step), gp(0)), "grad p");
    note(rel((ex.p(x + ey_) - ex.p(x - ey_)) / (2 * step), gp(1)), "grad p");
    const Eigen::Vector2d gt = ex.grad_theta(x);
    note(rel((ex.theta(x + ex_) - ex.theta(x - ex_)) / (2 * step), gt(0)), "grad theta");
    note(rel((ex.theta(x + ey_) - ex.theta(x - ey_)) / (2 * step), gt(1)), "grad theta");
    const double lt = (ex.grad_theta(x + ex_)(0) - ex.grad_theta(x - ex_)(0) + ex.grad_theta(x + ey_)(1) -
                       ex.grad_theta(x - ey_)(1)) /
                      (2 * step);
    note(rel(lt, ex.lap_theta(x)), "lap theta");
  }
  return out;
}

double strong_residual(const ProblemSpec& problem, int samples) {
  if (!problem.exact) throw std::invalid_argument("strong_residual: problem has no exact fields");
  const ExactFields& ex = *problem.exact;
  const CoefficientModel& c = problem.coeff;
  // Divergence of the fluxes mu(theta) grad u and kappa(theta) grad theta by
  // nested central differences of the field values, Richardson-extrapolated.
  const auto residuals = [&](const Point& x, double h, Eigen::Vector2d& ru, double& rt) {
    const Point e[2] = {Point(h, 0.0), Point(0.0, h)};
    const auto du = [&](const Point& y, int j) { return Eigen::Vector2d((ex.u(y + e[j]) - ex.u(y - e[j])) / (2 * h)); };
    const auto dt = [&](const Point& y, int j) { return (ex.theta(y + e[j]) - ex.theta(y - e[j])) / (2 * h); };
    Eigen::Vector2d div_u = Eigen::Vector2d::Zero();
    double div_t = 0.0;
    for (int j = 0; j < 2; ++j) {
      const Point xp = x + e[j], xm = x - e[j];
      div_u += (c.mu(ex.theta(xp)) * du(xp, j) - c.mu(ex.theta(xm)) * du(xm, j)) / (2 * h);
      div_t += (c.kappa(ex.theta(xp)) * dt(xp, j) - c.kappa(ex.theta(xm)) * dt(xm, j)) / (2 * h);
    }
    Eigen::Matrix2d G;
    G << du(x, 0), du(x, 1);
    const Eigen::Vector2d gp((ex.p(x + e[0]) - ex.p(x - e[0])) / (2 * h), (ex.p(x + e[1]) - ex.p(x - e[1])) / (2 * h));
    const Eigen::Vector2d gt(dt(x, 0), dt(x, 1));
    ru = -div_u + gp - c.alpha * ex.theta(x) * c.g - problem.f(x);
    rt = -div_t - problem.Q(x);
    if (problem.convective) {
      ru += G * ex.u(x);
      rt += ex.u(x).dot(gt);
    }
  };
  // Richardson estimate from steps h and h/2.
  const auto extrapolated = [&](const Point& x, double h, Eigen::Vector2d& ru, double& rt) {
    Eigen::Vector2d ru1, ru2;
    double rt1, rt2;
    residuals(x, h, ru1, rt1);
    residuals(x, h / 2, ru2, rt2);
    ru = (4 * ru2 - ru1) / 3;
    rt = (4 * rt2 - rt1) / 3;
  };
  const double length = (problem.domain.hi - problem.domain.lo).norm();
  detail::HashStream rng{99};
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Point x = sample_point(rng, problem.domain);
    const double t = ex.theta(x);
    // Each term at its natural size; the flux terms enter through |flux| / L so
    // that fields with vanishing second derivatives keep a meaningful scale.
    const double scale_u = (c.mu(t) * ex.lap_u(x)).norm() + c.mu(t) * ex.grad_u(x).norm() / length +
                           (ex.grad_u(x) * ex.u(x)).norm() + ex.grad_p(x).norm() +
                           std::abs(c.alpha * t) * c.g.norm() + problem.f(x).norm() + 1e-12;
    const double scale_t = std::abs(c.kappa(t) * ex.lap_theta(x)) + c.kappa(t) * ex.grad_theta(x).norm() / length +
                           std::abs(problem.Q(x)) + ex.grad_theta(x).squaredNorm() * std::abs(c.dkappa(t)) + 1e-12;
    // Step ladder: a consistent forcing drives the residual to round-off at some
    // step (coarser for smooth fields, finer across steep layers); a wrong one
    // leaves a step-independent residual. Keep the smallest estimate.
    double best = std::numeric_limits<double>::infinity();
    for (int level = 0; level < 14; ++level) {
      Eigen::Vector2d ru;
      double rt;
      extrapolated(x, 1e-2 * length * std::pow(0.5, level), ru, rt);
      best = std::min(best, std::max(ru.norm() / scale_u, std::abs(rt) / scale_t));
    }
    worst = std::max(worst, best);
  }
  return worst;
}

// ---------------------------------------------------------------- problems

ProblemSpec example1() {
  ProblemSpec pb;
  pb.name = "example1";
  pb.coeff.mu = [](double t) { return std::exp(-t); };
  pb.coeff.dmu = [](double t) { return -std::exp(-t); };
  pb.coeff.kappa = [](double t) { return 1.0 + t * t + std::sin(t) * std::sin(t); };
  pb.coeff.dkappa = [](double t) { return 2.0 * t + std::sin(2.0 * t); };
  pb.coeff.alpha = 1.0;
  pb.coeff.g = Eigen::Vector2d(0.0, 1.0);
  pb.coeff.mu_lo = std::exp(-10.0);
  pb.coeff.mu_hi = std::exp(10.0);
  pb.coeff.kappa_lo = 1.0;
  pb.coeff.kappa_hi = 102.0;

  const Poly2 X = Poly2::x(), Y = Poly2::y();
  ExactFields ex;
  set_polynomial_velocity(ex, cubic_cell_velocity(10.0));
  set_polynomial_pressure(ex, 10.0 * ((2.0 * X - 1.0) * (2.0 * Y - 1.0)));
  set_polynomial_temperature(ex, 10.0 * (X * Y * (X - 1.0) * (Y - 1.0) * (X - Y) * (2.0 * X * Y - X - Y - 1.0)));
  pb.exact = ex;
  attach_manufactured_data(pb);
  verify_derivatives(pb, 1e-5);
  return pb;
}

ProblemSpec example2(double nu, double kappa) {
  require_positive(nu, "nu");
  require_positive(kappa, "kappa");
  ProblemSpec pb;
  pb.name = "example2";
  pb.params.nu = nu;
  pb.params.kappa = kappa;
  pb.coeff.mu = [nu](double t) { return nu / (1.0 + t * t); };
  pb.coeff.dmu = [nu](double t) { return -2.0 * nu * t / ((1.0 + t * t) * (1.0 + t * t)); };
  pb.coeff.kappa = [kappa](double t) { return kappa * std::sqrt(1.0 + t * t); };
  pb.coeff.dkappa = [kappa](double t) { return kappa * t / std::sqrt(1.0 + t * t); };
  pb.coeff.alpha = 1.0;
  pb.coeff.g = Eigen::Vector2d(0.0, 1.0);
  pb.coeff.mu_lo = nu / 1.25;
  pb.coeff.mu_hi = nu;
  pb.coeff.kappa_lo = kappa;
  pb.coeff.kappa_hi = kappa * std::sqrt(1.25);

  const Poly2 X = Poly2::x(), Y = Poly2::y();
  const Poly2 x2m = X * X - 1.0, y2m = Y * Y - 1.0;
  ExactFields ex;
  set_polynomial_velocity(ex, {4.0 * (Y * x2m * x2m * y2m), -4.0 * (X * x2m * y2m * y2m)});
  const double pi2 = kPi * kPi;
  ex.p = [pi2](const Point& x) { return pi2 * std::sin(2 * kPi * x.x()) * std::sin(2 * kPi * x.y()); };
  ex.grad_p = [pi2](const Point& x) {
    const double sx = std::sin(2 * kPi * x.x()), cx = std::cos(2 * kPi * x.x());
    const double sy = std::sin(2 * kPi * x.y()), cy = std::cos(2 * kPi * x.y());
    return Eigen::Vector2d(2 * kPi * pi2 * cx * sy, 2 * kPi * pi2 * sx * cy);
  };
  ex.theta = [](const Point& x) { return std::exp(-x.squaredNorm()) - 0.5; };
  ex.grad_theta = [](const Point& x) { return Eigen::Vector2d(-2.0 * std::exp(-x.squaredNorm()) * x); };
  ex.lap_theta = [](const Point& x) {
    const double r2 = x.squaredNorm();
    return (4.0 * r2 - 4.0) * std::exp(-r2);
  };
  pb.exact = ex;
  attach_manufactured_data(pb);
  verify_derivatives(pb, 1e-5);
  return pb;
}

ProblemSpec example3(double kappa) {
  require_positive(kappa, "kappa");
  ProblemSpec pb;
  pb.name = "example3";
  pb.params.kappa = kappa;
  pb.coeff.mu = [](double t) { return std::sqrt(1.0 + t * t); };
  pb.coeff.dmu = [](double t) { return t / std::sqrt(1.0 + t * t); };
  pb.coeff.kappa = [kappa](double t) { return kappa * std::exp(t); };
  pb.coeff.dkappa = [kappa](double t) { return kappa * std::exp(t); };
  pb.coeff.alpha = 1.0;
  pb.coeff.g = Eigen::Vector2d(0.0, 1.0);
  pb.coeff.mu_lo = 1.0;
  pb.coeff.mu_hi = std::sqrt(2.0);
  pb.coeff.kappa_lo = kappa;
  pb.coeff.kappa_hi = kappa * std::exp(1.0);

  ExactFields ex;
  set_polynomial_velocity(ex, cubic_cell_velocity(2.0));
  ex.p = [](const Point& x) { return std::exp(x.y()) * std::pow(x.x() - 0.5, 3); };
  ex.grad_p = [](const Point& x) {
    const double a = x.x() - 0.5, e = std::exp(x.y());
    return Eigen::Vector2d(3.0 * e * a * a, e * a * a * a);
  };

  // theta = b s with b = 16xy(1-x)(1-y), s = 1/2 + atan(c phi)/pi,
  // phi = 1/16 - (x-1/2)^2 - (y-1/2)^2, c = 2 kappa^(-1/2).
  const Poly2 X = Poly2::x(), Y = Poly2::y();
  const Poly2 b = 16.0 * (X * Y * (1.0 - X) * (1.0 - Y));
  const Poly2 bx = b.dx(), by = b.dy(), blap = bx.dx() + by.dy();
  const double c = 2.0 / std::sqrt(kappa);
  struct Layer {
    double s, sx, sy, slap;
  };
  const auto layer = [c](const Point& x) {
    const double ax = x.x() - 0.5, ay = x.y() - 0.5;
    const double phi = 0.0625 - ax * ax - ay * ay;
    const double d = 1.0 + c * c * phi * phi;
    const double px = -2.0 * ax, py = -2.0 * ay;
    Layer l;
    l.s = 0.5 + std::atan(c * phi) / kPi;
    l.sx = c / kPi * px / d;
    l.sy = c / kPi * py / d;
    l.slap = c / kPi * (-4.0 / d - 2.0 * c * c * phi * (px * px + py * py) / (d * d));
    return l;
  };
  ex.theta = [b, layer](const Point& x) { return b(x) * layer(x).s; };
  ex.grad_theta = [b, bx, by, layer](const Point& x) {
    const Layer l = layer(x);
    return Eigen::Vector2d(bx(x) * l.s + b(x) * l.sx, by(x) * l.s + b(x) * l.sy);
  };
  ex.lap_theta = [b, bx, by, blap, layer](const Point& x) {
    const Layer l = layer(x);
    return blap(x) * l.s + 2.0 * (bx(x) * l.sx + by(x) * l.sy) + b(x) * l.slap;
  };
  pb.exact = ex;
  attach_manufactured_data(pb);
  // The layer width scales like sqrt(kappa); so must the difference step.
  verify_derivatives(pb, 1e-5 * std::min(1.0, 10.0 * std::sqrt(kappa)));
  return pb;
}

ProblemSpec cavity(double pr, double ra) {
  require_positive(pr, "Pr");
  require_positive(ra, "Ra");
  ProblemSpec pb;
  pb.name = "cavity";
  pb.params.pr = pr;
  pb.params.ra = ra;
  pb.coeff = CoefficientModel::constant(pr, 1.0);
  pb.coeff.alpha = pr * ra;
  pb.coeff.g = Eigen::Vector2d(0.0, 1.0);
  pb.f = [](const Point&) { return Eigen::Vector2d::Zero().eval(); };
  pb.Q = [](const Point&) { return 0.0; };
  pb.u_dirichlet = nullptr;
  // Vanishes on x = 0, x = 1 and y = 1, so one formula covers the whole boundary.
  pb.theta_dirichlet = [](const Point& x) { return 0.5 * (1.0 - std::cos(2 * kPi * x.x())) * (1.0 - x.y()); };
  return pb;
}

ProblemSpec patch_problem(int k) {
  if (k < 1 || k > 2) throw std::invalid_argument("patch_problem: supported orders are 1 and 2");
  ProblemSpec pb;
  pb.name = "patch" + std::to_string(k);
  pb.convective = false;
  pb.coeff = CoefficientModel::constant(1.0, 1.0);
  pb.coeff.alpha = 1.0;
  pb.coeff.g = Eigen::Vector2d(0.0, 1.0);

  const Poly2 X = Poly2::x(), Y = Poly2::y();
  // Stream function psi, u = (psi_y, -psi_x) is divergence-free.
  Poly2 psi = X * X + 2.0 * (X * Y) - 0.5 * (Y * Y) + 0.3 * X - 0.7 * Y;
  Poly2 theta = 1.0 + X - 2.0 * Y;
  if (k == 2) {
    psi = psi + X * X * X + X * X * Y - 2.0 * (X * Y * Y) + 0.5 * (Y * Y * Y);
    theta = theta + X * X - X * Y + 0.5 * (Y * Y);
  }
  ExactFields ex;
  set_polynomial_velocity(ex, {psi.dy(), -psi.dx()});
  set_polynomial_pressure(ex, Poly2::constant(0.0));
  set_polynomial_temperature(ex, theta);
  pb.exact = ex;
  attach_manufactured_data(pb);
  return pb;
}

ProblemSpec zero_problem() {
  ProblemSpec pb;
  pb.name = "zero";
  pb.coeff = CoefficientModel::constant(1.0, 1.0);
  pb.f = [](const Point&) { return Eigen::Vector2d::Zero().eval(); };
  pb.Q = [](const Point&) { return 0.0; };
  ExactFields ex;
  set_polynomial_velocity(ex, {Poly2::constant(0.0), Poly2::constant(0.0)});
  set_polynomial_pressure(ex, Poly2::constant(0.0));
  set_polynomial_temperature(ex, Poly2::constant(0.0));
  pb.exact = ex;
  pb.u_dirichlet = ex.u;
  pb.theta_dirichlet = ex.theta;
  return pb;
}

ProblemSpec manufactured_problem(const std::string& id, const ProblemParameters& params) {
  if (id == "example1") return example1();
  if (id == "example2") return example2(params.nu, params.kappa);
  if (id == "example3") return example3(params.kappa);
  if (id == "cavity") return cavity(params.pr, params.ra);
  if (id == "patch1") return patch_problem(1);
  if (id == "patch2") return patch_problem(2);
  if (id == "zero") return zero_problem();
  throw std::invalid_argument("unknown problem '" + id + "'");
}

}  // namespace polyb

#include <algorithm>
#include <array>
#include <cmath>

#include "polyb/polybasis.hpp"

namespace polyb {

std::vector<Exponent> monomial_exponents(int degree) {
  std::vector<Exponent> out;
  out.reserve(static_cast<std::size_t>(poly_dim(degree)));
  for (int d = 0; d <= degree; ++d) {
    for (int py = 0; py <= d; ++py) out.push_back({d - py, py});
  }
  return out;
}

Eigen::MatrixXd derivative_matrix(int degree, int dir, double h) {
  const auto exps = monomial_exponents(degree);
  const int n = static_cast<int>(exps.size());
  const auto index_of = [&](int px, int py) {
    const int d = px + py;
    return poly_dim(d - 1) + py;
  };
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    const auto [px, py] = exps[a];
    if (dir == 0 && px > 0) D(index_of(px - 1, py), a) = px / h;
    if (dir == 1 && py > 0) D(index_of(px, py - 1), a) = py / h;
  }
  return D;
}

MonomialBasisd monomial_basis(int k, const CellGeometry& cell) {
  if (k < 1 || k > 2) throw std::invalid_argument("monomial_basis: supported orders are 1 and 2");
  return MonomialBasisd(k, cell.barycenter, cell.diameter);
}

GaussLegendre gauss_legendre(int n) {
  if (n < 1) throw QuadratureError("gauss_legendre: need at least one point");
  GaussLegendre rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const auto legendre = [n](double x, double& pn, double& dpn) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    pn = p1;
    dpn = n * (x * p1 - p0) / (x * x - 1.0);
  };
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pn = 0.0, dpn = 1.0;
    for (int it = 0; it < 100; ++it) {
      legendre(x, pn, dpn);
      const double dx = pn / dpn;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre(x, pn, dpn);
    rule.nodes(n - 1 - i) = 0.5 * (x + 1.0);
    rule.weights(n - 1 - i) = 1.0 / ((1.0 - x * x) * dpn * dpn);
  }
  return rule;
}

namespace {

struct BaryPoint {
  std::array<double, 3> l;
  double w;
};

// Symmetric rules on the reference triangle with weights normalized to 1.
// Orbits: centroid, (a, a, 1-2a), and (a, b, 1-a-b) with all permutations.
std::vector<BaryPoint> expand(std::initializer_list<std::tuple<int, double, double, double>> orbits) {
  std::vector<BaryPoint> pts;
  for (const auto& [kind, a, b, w] : orbits) {
    if (kind == 1) {
      pts.push_back({{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, w});
    } else if (kind == 3) {
      const double c = 1.0 - 2.0 * a;
      pts.push_back({{a, a, c}, w});
      pts.push_back({{a, c, a}, w});
      pts.push_back({{c, a, a}, w});
    } else {
      const double c = 1.0 - a - b;
      pts.push_back({{a, b, c}, w});
      pts.push_back({{a, c, b}, w});
      pts.push_back({{b, a, c}, w});
      pts.push_back({{b, c, a}, w});
      pts.push_back({{c, a, b}, w});
      pts.push_back({{c, b, a}, w});
    }
  }
  return pts;
}

const std::vector<BaryPoint>& symmetric_rule(int exactness) {
  static const std::vector<BaryPoint> deg1 = expand({{1, 0.0, 0.0, 1.0}});
  static const std::vector<BaryPoint> deg2 = expand({{3, 1.0 / 6.0, 0.0, 1.0 / 3.0}});
  static const std::vector<BaryPoint> deg4 =
      expand({{3, 0.445948490915965, 0.0, 0.223381589678011}, {3, 0.091576213509771, 0.0, 0.109951743655322}});
  static const std::vector<BaryPoint> deg5 = expand({{1, 0.0, 0.0, 0.225},
                                                     {3, 0.470142064105115, 0.0, 0.132394152788506},
                                                     {3, 0.101286507323456, 0.0, 0.125939180544827}});
  static const std::vector<BaryPoint> deg6 =
      expand({{3, 0.249286745170910, 0.0, 0.116786275726379},
              {3, 0.063089014491502, 0.0, 0.050844906370207},
              {6, 0.053145049844817, 0.310352451033784, 0.082851075618374}});
  static const std::vector<BaryPoint> deg8 =
      expand({{1, 0.0, 0.0, 0.144315607677787},
              {3, 0.459292588292723, 0.0, 0.095091634267285},
              {3, 0.170569307751760, 0.0, 0.103217370534718},
              {3, 0.050547228317031, 0.0, 0.032458497623198},
              {6, 0.008394777409958, 0.263112829634638, 0.027230314174435}});
  if (exactness <= 1) return deg1;
  if (exactness == 2) return deg2;
  if (exactness <= 4) return deg4;  // the 3rd-degree symmetric rule has a negative weight
  if (exactness == 5) return deg5;
  if (exactness == 6) return deg6;
  return deg8;
}

// Collapsed Gauss-Legendre rule for exactness beyond the tabulated ones.
QuadratureRule collapsed_rule(const Point& a, const Point& b, const Point& c, int exactness) {
  const int n = (exactness + 3) / 2;
  const auto gl = gauss_legendre(n);
  const double area2 = std::abs((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
  QuadratureRule rule;
  rule.points.resize(2, n * n);
  rule.weights.resize(n * n);
  rule.exactness = exactness;
  int q = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j, ++q) {
      const double u = gl.nodes(i);
      const double v = gl.nodes(j) * (1.0 - u);
      rule.points.col(q) = a + u * (b - a) + v * (c - a);
      rule.weights(q) = gl.weights(i) * gl.weights(j) * (1.0 - u) * area2;
    }
  }
  return rule;
}

double cross2(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

// Ear clipping for a simple counter-clockwise polygon.
std::vector<std::array<int, 3>> ear_clip(const std::vector<Point>& poly) {
  std::vector<int> idx(poly.size());
  for (std::size_t i = 0; i < poly.size(); ++i) idx[i] = static_cast<int>(i);
  std::vector<std::array<int, 3>> tris;
  const auto inside = [&](const Point& p, const Point& a, const Point& b, const Point& c) {
    return cross2(b - a, p - a) >= 0.0 && cross2(c - b, p - b) >= 0.0 && cross2(a - c, p - c) >= 0.0;
  };
  while (idx.size() > 3) {
    bool clipped = false;
    const std::size_t m = idx.size();
    for (std::size_t i = 0; i < m; ++i) {
      const int ip = idx[(i + m - 1) % m], ic = idx[i], in = idx[(i + 1) % m];
      const Point &a = poly[ip], &b = poly[ic], &c = poly[in];
      if (cross2(b - a, c - b) <= 0.0) continue;
      bool ear = true;
      for (std::size_t j = 0; j < m && ear; ++j) {
        const int o = idx[j];
        if (o == ip || o == ic || o == in) continue;
        if (inside(poly[o], a, b, c)) ear = false;
      }
      if (!ear) continue;
      tris.push_back({ip, ic, in});
      idx.erase(idx.begin() + static_cast<long>(i));
      clipped = true;
      break;
    }
    if (!clipped) throw QuadratureError("polygon_quadrature: ear clipping failed (self-intersecting polygon?)");
  }
  tris.push_back({idx[0], idx[1], idx[2]});
  return tris;
}

void append(QuadratureRule& rule, const QuadratureRule& part) {
  const int n0 = rule.size();
  rule.points.conservativeResize(2, n0 + part.size());
  rule.weights.conservativeResize(n0 + part.size());
  rule.points.rightCols(part.size()) = part.points;
  rule.weights.tail(part.size()) = part.weights;
}

}  // namespace

QuadratureRule triangle_quadrature(const Point& a, const Point& b, const Point& c, int exactness) {
  if (exactness > 8) return collapsed_rule(a, b, c, exactness);
  const auto& ref = symmetric_rule(exactness);
  const double area = 0.5 * std::abs(cross2(b - a, c - a));
  QuadratureRule rule;
  rule.points.resize(2, static_cast<int>(ref.size()));
  rule.weights.resize(static_cast<int>(ref.size()));
  rule.exactness = exactness;
  for (std::size_t q = 0; q < ref.size(); ++q) {
    const auto& [l, w] = ref[q];
    rule.points.col(static_cast<int>(q)) = l[0] * a + l[1] * b + l[2] * c;
    rule.weights(static_cast<int>(q)) = w * area;
  }
  return rule;
}

QuadratureRule polygon_quadrature(const std::vector<Point>& polygon, int exactness) {
  if (!is_simple_polygon(polygon)) throw QuadratureError("polygon_quadrature: polygon is not simple");
  const auto geom = cell_geometry(polygon);
  const std::size_t m = polygon.size();
  QuadratureRule rule;
  rule.points.resize(2, 0);
  rule.weights.resize(0);
  rule.exactness = exactness;

  bool star = true;
  for (std::size_t j = 0; j < m; ++j) {
    const double tri = cross2(polygon[j] - geom.barycenter, polygon[(j + 1) % m] - geom.barycenter);
    if (!(tri > 1e-14 * geom.diameter * geom.diameter)) star = false;
  }
  if (star) {
    for (std::size_t j = 0; j < m; ++j) {
      append(rule, triangle_quadrature(geom.barycenter, polygon[j], polygon[(j + 1) % m], exactness));
    }
  } else {
    for (const auto& t : ear_clip(polygon)) {
      append(rule, triangle_quadrature(polygon[t[0]], polygon[t[1]], polygon[t[2]], exactness));
    }
  }
  return rule;
}

QuadratureRule edge_quadrature(const Point& a, const Point& b, int exactness) {
  const int n = std::max(1, (exactness + 2) / 2);
  const auto gl = gauss_legendre(n);
  const double len = (b - a).norm();
  QuadratureRule rule;
  rule.points.resize(2, n);
  rule.weights = gl.weights * len;
  rule.exactness = 2 * n - 1;
  for (int q = 0; q < n; ++q) rule.points.col(q) = a + gl.nodes(q) * (b - a);
  return rule;
}

}  // namespace polyb

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "hash.hpp"
#include "polyb/mesh.hpp"

namespace polyb {

namespace {

using Polygon = std::vector<Point>;

// Keeps the part of `poly` closer to `site` than to `other`.
Polygon clip_bisector(const Polygon& poly, const Point& site, const Point& other) {
  const Point normal = other - site;
  const double offset = normal.dot(0.5 * (site + other));
  Polygon out;
  out.reserve(poly.size() + 1);
  const std::size_t m = poly.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Point& p = poly[i];
    const Point& q = poly[(i + 1) % m];
    const double dp = normal.dot(p) - offset;
    const double dq = normal.dot(q) - offset;
    if (dp <= 0.0) out.push_back(p);
    if ((dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0)) {
      const double t = dp / (dp - dq);
      out.push_back(p + t * (q - p));
    }
  }
  return out;
}

Polygon voronoi_cell(const std::vector<Point>& sites, std::size_t i, const Rectangle& domain,
                     const std::vector<std::size_t>& order_scratch) {
  Polygon cell{domain.lo, Point(domain.hi.x(), domain.lo.y()), domain.hi,
               Point(domain.lo.x(), domain.hi.y())};
  const Point& site = sites[i];
  for (std::size_t j : order_scratch) {
    if (j == i) continue;
    double reach = 0.0;
    for (const auto& p : cell) reach = std::max(reach, (p - site).norm());
    // Sites farther than twice the current cell radius cannot cut the cell.
    if ((sites[j] - site).norm() > 2.0 * reach) break;
    cell = clip_bisector(cell, site, sites[j]);
    if (cell.size() < 3) break;
  }
  return cell;
}

Point polygon_centroid(const Polygon& poly) {
  double a = 0.0;
  Point c = Point::Zero();
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const Point& p = poly[k];
    const Point& q = poly[(k + 1) % poly.size()];
    const double w = p.x() * q.y() - p.y() * q.x();
    a += w;
    c += w * (p + q);
  }
  return c / (3.0 * a);
}

std::vector<Polygon> voronoi_cells(const std::vector<Point>& sites, const Rectangle& domain) {
  std::vector<Polygon> cells(sites.size());
  std::vector<std::size_t> order(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double da = (sites[a] - sites[i]).squaredNorm();
      const double db = (sites[b] - sites[i]).squaredNorm();
      return da < db || (da == db && a < b);
    });
    cells[i] = voronoi_cell(sites, i, domain, order);
  }
  return cells;
}

// Welds coordinates closer than `tol` into shared vertices.
class VertexWelder {
 public:
  explicit VertexWelder(double tol) : tol_(tol) {}

  int insert(const Point& p, std::vector<Point>& vertices) {
    const long long bx = static_cast<long long>(std::floor(p.x() / tol_));
    const long long by = static_cast<long long>(std::floor(p.y() / tol_));
    for (long long dx = -1; dx <= 1; ++dx) {
      for (long long dy = -1; dy <= 1; ++dy) {
        auto it = buckets_.find(key(bx + dx, by + dy));
        if (it == buckets_.end()) continue;
        for (int v : it->second) {
          if ((vertices[v] - p).norm() <= tol_) return v;
        }
      }
    }
    const int id = static_cast<int>(vertices.size());
    vertices.push_back(p);
    buckets_[key(bx, by)].push_back(id);
    return id;
  }

 private:
  static std::uint64_t key(long long x, long long y) {
    return detail::mix_key(static_cast<std::uint64_t>(x), static_cast<std::uint64_t>(y));
  }
  double tol_;
  std::unordered_map<std::uint64_t, std::vector<int>> buckets_;
};

}  // namespace

PolygonalMesh generate_voronoi(int n_seeds, const Rectangle& domain, int lloyd_iters, std::uint64_t seed) {
  if (n_seeds < 1) throw MeshError("generate_voronoi: at least one seed is required");
  if (!(domain.width() > 0.0) || !(domain.height() > 0.0)) {
    throw MeshError("generate_voronoi: domain must have positive area");
  }
  const double scale = std::max(domain.width(), domain.height());

  detail::HashStream rng(seed);
  std::vector<Point> sites(static_cast<std::size_t>(n_seeds));
  for (auto& s : sites) {
    s.x() = domain.lo.x() + domain.width() * rng.uniform();
    s.y() = domain.lo.y() + domain.height() * rng.uniform();
  }

  // Coincident seeds would produce empty cells; nudge them apart.
  const double jitter = 1e-6 * scale / std::sqrt(static_cast<double>(n_seeds));
  {
    VertexWelder welder(1e-12 * scale);
    std::vector<Point> seen;
    for (auto& s : sites) {
      while (welder.insert(s, seen) != static_cast<int>(seen.size()) - 1) {
        s += Point(rng.uniform(-jitter, jitter), rng.uniform(-jitter, jitter));
        s = s.cwiseMax(domain.lo).cwiseMin(domain.hi);
      }
    }
  }

  PolygonalMesh mesh = voronoi_from_sites(std::move(sites), domain, lloyd_iters);
  mesh.domain_descriptor = "voronoi:seeds=" + std::to_string(n_seeds) + ":lloyd=" +
                           std::to_string(lloyd_iters) + ":seed=" + std::to_string(seed);
  return mesh;
}

PolygonalMesh voronoi_from_sites(std::vector<Point> sites, const Rectangle& domain, int lloyd_iters) {
  if (sites.empty()) throw MeshError("voronoi_from_sites: at least one site is required");
  if (!(domain.width() > 0.0) || !(domain.height() > 0.0)) {
    throw MeshError("voronoi_from_sites: domain must have positive area");
  }
  const double scale = std::max(domain.width(), domain.height());
  std::vector<Polygon> cells = voronoi_cells(sites, domain);
  for (int it = 0; it < lloyd_iters; ++it) {
    for (std::size_t i = 0; i < sites.size(); ++i) sites[i] = polygon_centroid(cells[i]);
    cells = voronoi_cells(sites, domain);
  }

  PolygonalMesh mesh;
  VertexWelder welder(1e-10 * scale);
  for (const auto& poly : cells) {
    std::vector<int> loop;
    for (const auto& p : poly) {
      const int v = welder.insert(p, mesh.vertices);
      if (loop.empty() || loop.back() != v) loop.push_back(v);
    }
    while (loop.size() > 1 && loop.front() == loop.back()) loop.pop_back();
    if (loop.size() >= 3) mesh.cells.push_back(std::move(loop));
  }
  mesh.domain_descriptor = "voronoi:sites=" + std::to_string(sites.size());
  finalize_mesh(mesh);
  return mesh;
}

}  // namespace polyb

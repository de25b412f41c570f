#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "polyb/mesh.hpp"
#include "polyb/mesh_io.hpp"

using namespace polyb;

namespace {

// Shoelace area, written out independently of signed_area().
double shoelace(const PolygonalMesh& m, int c) {
  double a = 0.0;
  const auto& loop = m.cells[c];
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Point& p = m.vertices[loop[i]];
    const Point& q = m.vertices[loop[(i + 1) % loop.size()]];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

double total_area(const PolygonalMesh& m) {
  double a = 0.0;
  for (int c = 0; c < m.num_cells(); ++c) a += shoelace(m, c);
  return a;
}

// Every interior undirected edge must be used by exactly two cells.
void expect_conforming(const PolygonalMesh& m) {
  std::map<std::pair<int, int>, int> count;
  for (const auto& loop : m.cells) {
    for (std::size_t i = 0; i < loop.size(); ++i) {
      int a = loop[i], b = loop[(i + 1) % loop.size()];
      if (a > b) std::swap(a, b);
      ++count[{a, b}];
    }
  }
  int boundary = 0;
  for (const auto& [edge, n] : count) {
    EXPECT_LE(n, 2);
    if (n == 1) ++boundary;
  }
  EXPECT_EQ(boundary, static_cast<int>(m.boundary_edges.size()));
}

PolygonalMesh read_string(const std::string& text, std::vector<std::string>* warnings = nullptr) {
  std::istringstream in(text);
  return read_mesh(in, warnings);
}

}  // namespace

TEST(Structured, SquaresCountsAndAreas) {
  const auto m = generate_structured(MeshFamily::squares, 5);
  EXPECT_EQ(m.num_cells(), 25);
  EXPECT_EQ(m.num_vertices(), 36);
  for (int c = 0; c < m.num_cells(); ++c) EXPECT_NEAR(shoelace(m, c), 0.04, 1e-15);
}

TEST(Structured, TrianglesCountsAndAreas) {
  const auto m = generate_structured(MeshFamily::triangles, 2);
  EXPECT_EQ(m.num_cells(), 8);
  for (int c = 0; c < m.num_cells(); ++c) EXPECT_NEAR(shoelace(m, c), 0.125, 1e-15);
  EXPECT_NEAR(total_area(m), 1.0, 1e-14);
}

TEST(Structured, DistortedKeepsBoundary) {
  const auto m = generate_structured(MeshFamily::distorted_quads, 4);
  const auto ref = generate_structured(MeshFamily::squares, 4);
  EXPECT_EQ(m.num_cells(), 16);
  EXPECT_NEAR(total_area(m), 1.0, 1e-10);
  ASSERT_EQ(m.num_vertices(), ref.num_vertices());
  double max_shift = 0.0;
  for (int v = 0; v < m.num_vertices(); ++v) {
    const double shift = (m.vertices[v] - ref.vertices[v]).norm();
    if (m.boundary_vertex[v]) {
      EXPECT_EQ(shift, 0.0);
    } else {
      max_shift = std::max(max_shift, std::max(std::abs(m.vertices[v].x() - ref.vertices[v].x()),
                                                std::abs(m.vertices[v].y() - ref.vertices[v].y())));
    }
  }
  EXPECT_GT(max_shift, 0.0);
  EXPECT_LE(max_shift, 0.3 / 4 + 1e-15);
}

TEST(Structured, NonconvexInteriorCellsAreConcave) {
  const auto m = generate_structured(MeshFamily::nonconvex_cells, 6);
  EXPECT_NEAR(total_area(m), 1.0, 1e-12);
  int interior = 0;
  for (int c = 0; c < m.num_cells(); ++c) {
    bool touches_boundary = false;
    for (int v : m.cells[c]) touches_boundary |= m.boundary_vertex[v] != 0;
    if (touches_boundary) continue;
    ++interior;
    bool reflex = false;
    const auto& loop = m.cells[c];
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const Point& a = m.vertices[loop[i]];
      const Point& b = m.vertices[loop[(i + 1) % loop.size()]];
      const Point& d = m.vertices[loop[(i + 2) % loop.size()]];
      const Point u = b - a, w = d - b;
      reflex |= u.x() * w.y() - u.y() * w.x() < -1e-14;
    }
    EXPECT_TRUE(reflex) << "cell " << c;
  }
  EXPECT_GT(interior, 0);
}

TEST(Structured, InvariantsAllFamilies) {
  const Rectangle dom{{-1.0, 0.5}, {2.0, 1.5}};
  for (auto fam : {MeshFamily::triangles, MeshFamily::squares, MeshFamily::distorted_quads,
                   MeshFamily::nonconvex_cells, MeshFamily::voronoi}) {
    const auto m = generate_family(fam, 7, dom, 3);
    EXPECT_NEAR(total_area(m), dom.area(), 1e-10 * dom.area()) << to_string(fam);
    for (int c = 0; c < m.num_cells(); ++c) EXPECT_GT(shoelace(m, c), 0.0);
    expect_conforming(m);
    const auto again = generate_family(fam, 7, dom, 3);
    EXPECT_EQ(again.cells, m.cells);
    for (int v = 0; v < m.num_vertices(); ++v) EXPECT_EQ(again.vertices[v], m.vertices[v]);
  }
}

TEST(Structured, RejectsBadArguments) {
  EXPECT_THROW(generate_structured(MeshFamily::squares, 0), MeshError);
  EXPECT_THROW(generate_structured(MeshFamily::squares, 3, Rectangle{{0, 0}, {0, 1}}), MeshError);
}

TEST(Voronoi, SingleSeedIsTheDomain) {
  const auto m = generate_voronoi(1, Rectangle{}, 0, 11);
  ASSERT_EQ(m.num_cells(), 1);
  EXPECT_NEAR(shoelace(m, 0), 1.0, 1e-14);
  EXPECT_EQ(m.cells[0].size(), 4u);
}

TEST(Voronoi, QuadrantSeedsGiveSquares) {
  const auto m = voronoi_from_sites({{0.25, 0.25}, {0.75, 0.25}, {0.25, 0.75}, {0.75, 0.75}}, Rectangle{});
  ASSERT_EQ(m.num_cells(), 4);
  for (int c = 0; c < 4; ++c) {
    EXPECT_NEAR(shoelace(m, c), 0.25, 1e-14);
    EXPECT_EQ(m.cells[c].size(), 4u);
  }
  expect_conforming(m);
}

TEST(Voronoi, SixtyFourSeeds) {
  const auto m = generate_voronoi(64, Rectangle{}, 3, 7);
  EXPECT_EQ(m.num_cells(), 64);
  EXPECT_NEAR(total_area(m), 1.0, 1e-10);
  expect_conforming(m);
  EXPECT_THROW(generate_voronoi(0, Rectangle{}, 0, 7), MeshError);
}

TEST(MeshIO, SingleQuad) {
  const auto m = read_string("polymesh 1\n4 1\n0 0\n1 0\n1 1\n0 1\n4 0 1 2 3\n");
  EXPECT_EQ(m.num_cells(), 1);
  EXPECT_EQ(m.boundary_edges.size(), 4u);
}

TEST(MeshIO, ClockwiseCellIsReoriented) {
  std::vector<std::string> warnings;
  const auto m = read_string("polymesh 1\n4 1\n0 0\n1 0\n1 1\n0 1\n4 0 3 2 1\n", &warnings);
  EXPECT_GT(shoelace(m, 0), 0.0);
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(MeshIO, RoundTrip) {
  const auto m = generate_structured(MeshFamily::distorted_quads, 5);
  std::ostringstream out;
  write_mesh(out, m);
  const auto back = read_string(out.str());
  EXPECT_EQ(back.cells, m.cells);
  ASSERT_EQ(back.num_vertices(), m.num_vertices());
  for (int v = 0; v < m.num_vertices(); ++v) EXPECT_EQ(back.vertices[v], m.vertices[v]);
}

TEST(MeshIO, ToleratesWhitespaceAndReportsErrors) {
  EXPECT_NO_THROW(read_string("polymesh 1\n\n3   1\n0 0\n 1 0\n0\t1\n3 0 1 2"));
  try {
    read_string("polymesh 1\n3 1\n0 0\n1 x\n0 1\n3 0 1 2\n");
    FAIL() << "expected a parse error";
  } catch (const MeshError& e) {
    EXPECT_NE(std::string(e.what()).find("line"), std::string::npos);
  }
  EXPECT_THROW(read_string("polymesh 1\n3 1\n0 0\n1 0\n0 1\n3 0 1 7\n"), MeshError);
}

TEST(Regularity, UnitSquare) {
  const auto m = generate_structured(MeshFamily::squares, 1);
  const auto r = check_regularity(m, 0.0);
  EXPECT_NEAR(r.min_edge_ratio, 1.0 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(r.min_inscribed_ratio, 0.5 / std::sqrt(2.0), 1e-14);
}

TEST(Regularity, EquilateralTriangle) {
  const auto m = read_string("polymesh 1\n3 1\n0 0\n1 0\n0.5 0.86602540378443864676\n3 0 1 2\n");
  EXPECT_NEAR(check_regularity(m, 0.0).min_edge_ratio, 1.0, 1e-14);
}

TEST(Regularity, SliverFlagged) {
  const auto m = read_string("polymesh 1\n4 1\n0 0\n1 0\n1 0.01\n0 0.01\n4 0 1 2 3\n");
  const auto r = check_regularity(m, 0.1);
  ASSERT_EQ(r.flagged_cells.size(), 1u);
}

TEST(Regularity, SquaresRatiosIndependentOfN) {
  const auto a = check_regularity(generate_structured(MeshFamily::squares, 3), 0.0);
  const auto b = check_regularity(generate_structured(MeshFamily::squares, 17), 0.0);
  EXPECT_NEAR(a.min_edge_ratio, b.min_edge_ratio, 1e-12);
  EXPECT_NEAR(a.min_inscribed_ratio, b.min_inscribed_ratio, 1e-12);
}

TEST(Metrics, MeshSize) {
  EXPECT_NEAR(mesh_metrics(generate_structured(MeshFamily::squares, 5)).h, std::sqrt(2.0) / 5, 1e-15);
  EXPECT_NEAR(mesh_metrics(generate_structured(MeshFamily::triangles, 1)).h, std::sqrt(2.0), 1e-15);

  const auto m = generate_voronoi(64, Rectangle{}, 3, 7);
  double h = 0.0;
  for (const auto& loop : m.cells) {
    for (int a : loop) {
      for (int b : loop) h = std::max(h, (m.vertices[a] - m.vertices[b]).norm());
    }
  }
  EXPECT_DOUBLE_EQ(mesh_metrics(m).h, h);
}

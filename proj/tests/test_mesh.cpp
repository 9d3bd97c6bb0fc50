#include <map>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "orlicz_elastica/mesh.hpp"
#include "orlicz_elastica/tensorfield.hpp"

namespace oe = orlicz_elastica;
using oe::BoundaryTag;

namespace {

const char* kSquare = R"(# unit square, two triangles
nodes 4
0 0
1 0
0 1
1 1
elements 2
0 1 3
0 3 2
boundary 4
0 1 D
1 3 D
3 2 N
2 0 N
)";

}  // namespace

TEST(GenerateRectangle, SingleCell) {
  const auto m = oe::generate_rectangle(1, 1);
  EXPECT_EQ(m.num_nodes(), 4);
  EXPECT_EQ(m.num_elements(), 2);
  ASSERT_EQ(m.boundary_edges().size(), 4u);
  for (const auto& be : m.boundary_edges()) EXPECT_EQ(be.tag, BoundaryTag::dirichlet);
}

TEST(GenerateRectangle, AreaPartition) {
  const auto m = oe::generate_rectangle(2, 2);
  double s = 0.0;
  for (int e = 0; e < m.num_elements(); ++e) s += m.geometry(e).area;
  EXPECT_NEAR(s, 1.0, 1e-15);
}

TEST(GenerateRectangle, InteriorValenceSix) {
  const auto m = oe::generate_rectangle(8, 8);
  std::map<int, int> valence;
  for (const auto& t : m.elements()) {
    for (int v : t) ++valence[v];
  }
  int interior = 0;
  for (int j = 1; j < 8; ++j) {
    for (int i = 1; i < 8; ++i) {
      EXPECT_EQ(valence[j * 9 + i], 6);
      EXPECT_FALSE(m.on_boundary(j * 9 + i));
      ++interior;
    }
  }
  EXPECT_EQ(interior, 49);
}

TEST(GenerateRectangle, NodeNumberingAndExtent) {
  const auto m = oe::generate_rectangle(4, 2, {-1.0, 3.0, 0.0, 0.5});
  EXPECT_EQ(m.num_nodes(), 15);
  EXPECT_EQ(m.num_elements(), 16);
  EXPECT_DOUBLE_EQ(m.node(2 * 5 + 3)[0], 2.0);
  EXPECT_DOUBLE_EQ(m.node(2 * 5 + 3)[1], 0.5);
  EXPECT_NEAR(m.total_area(), 2.0, 1e-14);
  EXPECT_NEAR(m.diameter(), std::hypot(4.0, 0.5), 1e-14);
  EXPECT_THROW(oe::generate_rectangle(0, 2), oe::InvalidParameter);
}

TEST(GenerateRectangle, SideTagsAreApplied) {
  oe::SideTags tags;
  tags.right = BoundaryTag::neumann;
  tags.top = BoundaryTag::neumann;
  const auto m = oe::generate_rectangle(3, 3, {}, tags);
  for (const auto& be : m.boundary_edges()) {
    const auto& p = m.node(be.a);
    const auto& q = m.node(be.b);
    const bool right = p[0] == 1.0 && q[0] == 1.0;
    const bool top = p[1] == 1.0 && q[1] == 1.0;
    EXPECT_EQ(be.tag, right || top ? BoundaryTag::neumann : BoundaryTag::dirichlet);
  }
}

TEST(MeshInvariants, AreaMatchesPolygonAndGradientsSumToZero) {
  const auto m = oe::generate_rectangle(7, 5, {0.0, 3.0, -1.0, 2.0});
  double s = 0.0;
  for (int e = 0; e < m.num_elements(); ++e) {
    s += m.geometry(e).area;
    const auto& g = m.geometry(e).grad;
    EXPECT_NEAR(g[0][0] + g[1][0] + g[2][0], 0.0, 1e-13);
    EXPECT_NEAR(g[0][1] + g[1][1] + g[2][1], 0.0, 1e-13);
  }
  EXPECT_NEAR(s, m.polygon_area(), 1e-12 * m.polygon_area());
  EXPECT_NEAR(m.polygon_area(), 9.0, 1e-12);
}

TEST(MeshInvariants, EdgesAndNormals) {
  const auto m = oe::generate_rectangle(2, 2);
  int boundary = 0;
  for (const auto& e : m.edges()) {
    EXPECT_NEAR(std::hypot(e.normal[0], e.normal[1]), 1.0, 1e-15);
    if (e.second == -1) {
      ++boundary;
      // Outward: the normal points away from the barycenter of the owning element.
      const auto c = m.barycenter(e.first);
      const auto& p = m.node(e.a);
      EXPECT_GT((p[0] - c[0]) * e.normal[0] + (p[1] - c[1]) * e.normal[1], 0.0);
    }
  }
  EXPECT_EQ(boundary, 8);
  EXPECT_EQ(m.edges().size(), 16u);
  EXPECT_NEAR(m.distance_to_boundary({0.5, 0.25}), 0.25, 1e-15);
  EXPECT_NEAR(m.max_edge_length(), std::sqrt(0.5), 1e-15);
}

TEST(LoadMesh, RoundTripsGeneratedSquare) {
  const auto g = oe::generate_rectangle(1, 1);
  std::stringstream ss;
  oe::write_mesh(ss, g);
  const auto m = oe::parse_mesh(ss);
  ASSERT_EQ(m.num_nodes(), g.num_nodes());
  ASSERT_EQ(m.num_elements(), g.num_elements());
  for (int i = 0; i < m.num_nodes(); ++i) EXPECT_EQ(m.node(i), g.node(i));
  for (int e = 0; e < m.num_elements(); ++e) EXPECT_EQ(m.element(e), g.element(e));
}

TEST(LoadMesh, HandWrittenFileMatchesGeneratorUpToOrdering) {
  std::istringstream in(kSquare);
  const auto m = oe::parse_mesh(in);
  const auto g = oe::generate_rectangle(1, 1);
  std::set<std::set<std::pair<double, double>>> a, b;
  for (const auto& t : m.elements()) {
    std::set<std::pair<double, double>> tri;
    for (int v : t) tri.insert({m.node(v)[0], m.node(v)[1]});
    a.insert(tri);
  }
  for (const auto& t : g.elements()) {
    std::set<std::pair<double, double>> tri;
    for (int v : t) tri.insert({g.node(v)[0], g.node(v)[1]});
    b.insert(tri);
  }
  EXPECT_EQ(a, b);
}

TEST(LoadMesh, ClockwiseTriangleIsNamed) {
  std::string text = kSquare;
  text.replace(text.find("0 3 2"), 5, "0 2 3");
  std::istringstream in(text);
  try {
    oe::parse_mesh(in);
    FAIL() << "expected an orientation error";
  } catch (const oe::OrientationError& e) {
    EXPECT_EQ(e.element(), 1);
    EXPECT_NE(std::string(e.what()).find("element 1"), std::string::npos);
  }
}

TEST(LoadMesh, MissingTagIsRejected) {
  std::string text = kSquare;
  text.replace(text.find("boundary 4"), 10, "boundary 3");
  text.erase(text.find("2 0 N"));
  std::istringstream in(text);
  EXPECT_THROW(oe::parse_mesh(in), oe::UntaggedEdgeError);
}

TEST(LoadMesh, ParseErrorsCarryLineNumbers) {
  auto line_of = [](const std::string& text) {
    std::istringstream in(text);
    try {
      oe::parse_mesh(in);
    } catch (const oe::ParseError& e) {
      return e.line();
    }
    return -1;
  };
  std::string bad_node = kSquare;
  bad_node.replace(bad_node.find("1 0\n"), 4, "1 x\n");
  EXPECT_EQ(line_of(bad_node), 4);
  std::string bad_tag = kSquare;
  bad_tag.replace(bad_tag.find("3 2 N"), 5, "3 2 Q");
  EXPECT_EQ(line_of(bad_tag), 13);
  std::string bad_index = kSquare;
  bad_index.replace(bad_index.find("0 1 3"), 5, "0 1 9");
  EXPECT_EQ(line_of(bad_index), 8);
  EXPECT_EQ(line_of("nodes 2\n0 0\n"), 2);
  EXPECT_EQ(line_of(std::string(kSquare) + "extra\n"), 15);
}

TEST(LoadMesh, MissingFile) { EXPECT_THROW(oe::load_mesh("/nonexistent/mesh.txt"), oe::Error); }

TEST(LoadMesh, TaggedInteriorEdgeIsRejected) {
  std::string text = kSquare;
  text.replace(text.find("boundary 4"), 10, "boundary 5");
  text += "0 3 D\n";
  std::istringstream in(text);
  EXPECT_THROW(oe::parse_mesh(in), oe::MeshError);
}

TEST(DofMap, ClampedSquareHasNoRigidModes) {
  const auto m = oe::generate_rectangle(4, 4);
  const auto d = oe::build_dofmap(m);
  EXPECT_FALSE(d.has_rigid_modes());
  for (int i = 0; i < m.num_nodes(); ++i) {
    for (int c = 0; c < 2; ++c) EXPECT_EQ(d.is_dirichlet(d.dof(i, c)), m.on_boundary(i));
  }
  EXPECT_EQ(d.num_free(), 2 * 9);
  for (int k = 0; k < d.num_free(); ++k) EXPECT_EQ(d.free_index(d.free_dofs()[k]), k);
  EXPECT_EQ(d.dof(3, 1), m.num_nodes() + 3);
}

TEST(DofMap, TractionFreeSquareHasThreeOrthonormalModes) {
  const auto m = oe::generate_rectangle(5, 3, {0.0, 2.0, 0.0, 1.0}, oe::SideTags::all(BoundaryTag::neumann));
  const auto d = oe::build_dofmap(m);
  ASSERT_TRUE(d.has_rigid_modes());
  const auto& modes = *d.rigid_mode_basis();
  ASSERT_EQ(modes.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(d.l2_inner(modes[i], modes[j]), i == j ? 1.0 : 0.0, 1e-13);
  }
  EXPECT_EQ(d.num_free(), d.num_dofs());
  EXPECT_NEAR(d.lumped_mass().sum(), 2.0, 1e-14);

  for (const auto& rho : modes) {
    const oe::DisplacementField f(m.num_nodes(), rho);
    for (const auto& s : oe::compute_strain(m, f)) EXPECT_LT(s.sym.cwiseAbs().maxCoeff(), 1e-13);
  }
  Eigen::VectorXd v = modes[2] * 3.0 + modes[0];
  d.project_out_rigid(v);
  EXPECT_LT(v.norm(), 1e-13);
  Eigen::VectorXd r = Eigen::VectorXd::LinSpaced(d.num_dofs(), -1.0, 2.0);
  d.project_dual_out_rigid(r);
  for (const auto& rho : modes) EXPECT_NEAR(r.dot(rho), 0.0, 1e-12);
}

TEST(DofMap, MixedBoundaryPinsOnlyDirichletNodes) {
  oe::SideTags tags = oe::SideTags::all(BoundaryTag::neumann);
  tags.left = BoundaryTag::dirichlet;
  const auto m = oe::generate_rectangle(3, 3, {}, tags);
  const auto d = oe::build_dofmap(m);
  EXPECT_FALSE(d.has_rigid_modes());
  for (int i = 0; i < m.num_nodes(); ++i) EXPECT_EQ(d.is_dirichlet(d.dof(i, 0)), m.node(i)[0] == 0.0);
}

TEST(DofMap, RotationHasZeroStrainOnAnyMesh) {
  std::istringstream in(kSquare);
  const auto m = oe::parse_mesh(in);
  const auto u = oe::DisplacementField::interpolate(m, [](double x, double y) { return std::array<double, 2>{-y, x}; });
  for (const auto& s : oe::compute_strain(m, u)) EXPECT_EQ(s.sym.norm(), 0.0);
}

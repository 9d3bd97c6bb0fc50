#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"

namespace orlicz_elastica {

inline constexpr int kDim = 2;

using Point = std::array<double, 2>;
using Triangle = std::array<int, 3>;

enum class BoundaryTag { dirichlet, neumann };

struct BoundaryEdge {
  int a = 0;
  int b = 0;
  BoundaryTag tag = BoundaryTag::dirichlet;
};

/// Per-element P1 data: area and the constant gradients of the barycentric coordinates.
struct ElementGeometry {
  double area = 0.0;
  std::array<Point, 3> grad{};
};

/// Mesh edge with its adjacent elements. `second` is -1 on the boundary; otherwise the
/// unit normal points from `first` into `second`.
struct Edge {
  int a = 0;
  int b = 0;
  int first = -1;
  int second = -1;
  Point normal{};
  double length = 0.0;
};

/// Conforming triangulation of a polygon with every boundary edge tagged Dirichlet or
/// Neumann. Construction validates orientation and tagging; instances are immutable.
class Mesh {
 public:
  Mesh(std::vector<Point> nodes, std::vector<Triangle> elements, std::vector<BoundaryEdge> boundary)
      : nodes_(std::move(nodes)), elements_(std::move(elements)), boundary_(std::move(boundary)) {
    build_geometry();
    build_edges();
  }

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_elements() const { return static_cast<int>(elements_.size()); }
  const std::vector<Point>& nodes() const { return nodes_; }
  const Point& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  const std::vector<Triangle>& elements() const { return elements_; }
  const Triangle& element(int e) const { return elements_[static_cast<std::size_t>(e)]; }
  const ElementGeometry& geometry(int e) const { return geometry_[static_cast<std::size_t>(e)]; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_; }
  const std::vector<Edge>& edges() const { return edges_; }
  bool on_boundary(int node) const { return on_boundary_[static_cast<std::size_t>(node)]; }

  Point barycenter(int e) const {
    const auto& t = element(e);
    Point c{0.0, 0.0};
    for (int v : t) {
      c[0] += node(v)[0] / 3.0;
      c[1] += node(v)[1] / 3.0;
    }
    return c;
  }

  double total_area() const {
    double a = 0.0;
    for (const auto& g : geometry_) a += g.area;
    return a;
  }

  /// Shoelace area of the polygon traced by the boundary edges.
  double polygon_area() const {
    double a = 0.0;
    for (const auto& e : edges_) {
      if (e.second != -1) continue;
      // a -> b runs counterclockwise around the only adjacent element
      const auto& p = node(e.a);
      const auto& q = node(e.b);
      a += 0.5 * (p[0] * q[1] - q[0] * p[1]);
    }
    return a;
  }

  /// Diagonal of the bounding box.
  double diameter() const {
    double xmin = nodes_[0][0], xmax = xmin, ymin = nodes_[0][1], ymax = ymin;
    for (const auto& p : nodes_) {
      xmin = std::min(xmin, p[0]);
      xmax = std::max(xmax, p[0]);
      ymin = std::min(ymin, p[1]);
      ymax = std::max(ymax, p[1]);
    }
    return std::hypot(xmax - xmin, ymax - ymin);
  }

  /// Euclidean distance from a point to the polygon boundary.
  double distance_to_boundary(const Point& x) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : edges_) {
      if (e.second != -1) continue;
      const auto& p = node(e.a);
      const auto& q = node(e.b);
      const double dx = q[0] - p[0], dy = q[1] - p[1];
      double s = ((x[0] - p[0]) * dx + (x[1] - p[1]) * dy) / (dx * dx + dy * dy);
      s = std::clamp(s, 0.0, 1.0);
      best = std::min(best, std::hypot(x[0] - p[0] - s * dx, x[1] - p[1] - s * dy));
    }
    return best;
  }

  /// Largest element edge length.
  double max_edge_length() const {
    double h = 0.0;
    for (const auto& e : edges_) h = std::max(h, e.length);
    return h;
  }

 private:
  void build_geometry() {
    if (nodes_.empty() || elements_.empty()) throw MeshError("mesh needs at least one node and one element");
    const int n = num_nodes();
    geometry_.resize(elements_.size());
    for (std::size_t e = 0; e < elements_.size(); ++e) {
      const auto& t = elements_[e];
      for (int v : t) {
        if (v < 0 || v >= n) throw MeshError("element " + std::to_string(e) + " references missing node " + std::to_string(v));
      }
      const Point& p0 = nodes_[static_cast<std::size_t>(t[0])];
      const Point& p1 = nodes_[static_cast<std::size_t>(t[1])];
      const Point& p2 = nodes_[static_cast<std::size_t>(t[2])];
      const double twice_area = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
      if (!(twice_area > 0.0)) throw OrientationError(static_cast<int>(e));
      auto& g = geometry_[e];
      g.area = 0.5 * twice_area;
      g.grad[0] = {(p1[1] - p2[1]) / twice_area, (p2[0] - p1[0]) / twice_area};
      g.grad[1] = {(p2[1] - p0[1]) / twice_area, (p0[0] - p2[0]) / twice_area};
      g.grad[2] = {(p0[1] - p1[1]) / twice_area, (p1[0] - p0[0]) / twice_area};
    }
  }

  void build_edges() {
    std::map<std::pair<int, int>, int> index;
    for (std::size_t e = 0; e < elements_.size(); ++e) {
      const auto& t = elements_[e];
      for (int k = 0; k < 3; ++k) {
        const int a = t[static_cast<std::size_t>(k)];
        const int b = t[static_cast<std::size_t>((k + 1) % 3)];
        const auto key = std::minmax(a, b);
        auto [it, inserted] = index.try_emplace({key.first, key.second}, static_cast<int>(edges_.size()));
        if (inserted) {
          Edge edge;
          edge.a = a;
          edge.b = b;
          edge.first = static_cast<int>(e);
          const Point& p = nodes_[static_cast<std::size_t>(a)];
          const Point& q = nodes_[static_cast<std::size_t>(b)];
          edge.length = std::hypot(q[0] - p[0], q[1] - p[1]);
          // a -> b is counterclockwise in `first`, so (dy, -dx) points out of it.
          edge.normal = {(q[1] - p[1]) / edge.length, -(q[0] - p[0]) / edge.length};
          edges_.push_back(edge);
        } else {
          auto& edge = edges_[static_cast<std::size_t>(it->second)];
          if (edge.second != -1) {
            throw MeshError("edge (" + std::to_string(a) + ", " + std::to_string(b) + ") shared by more than two elements");
          }
          edge.second = static_cast<int>(e);
        }
      }
    }

    on_boundary_.assign(nodes_.size(), false);
    std::map<std::pair<int, int>, int> tag_count;
    for (const auto& be : boundary_) {
      const auto key = std::minmax(be.a, be.b);
      auto it = index.find({key.first, key.second});
      if (it == index.end() || edges_[static_cast<std::size_t>(it->second)].second != -1) {
        throw MeshError("tagged edge (" + std::to_string(be.a) + ", " + std::to_string(be.b) + ") is not a boundary edge");
      }
      if (++tag_count[{key.first, key.second}] > 1) {
        throw MeshError("boundary edge (" + std::to_string(be.a) + ", " + std::to_string(be.b) + ") tagged twice");
      }
    }
    for (const auto& edge : edges_) {
      if (edge.second != -1) continue;
      const auto key = std::minmax(edge.a, edge.b);
      if (!tag_count.contains({key.first, key.second})) throw UntaggedEdgeError(edge.a, edge.b);
      on_boundary_[static_cast<std::size_t>(edge.a)] = true;
      on_boundary_[static_cast<std::size_t>(edge.b)] = true;
    }
  }

  std::vector<Point> nodes_;
  std::vector<Triangle> elements_;
  std::vector<BoundaryEdge> boundary_;
  std::vector<ElementGeometry> geometry_;
  std::vector<Edge> edges_;
  std::vector<bool> on_boundary_;
};

struct Extent {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
};

struct SideTags {
  BoundaryTag left = BoundaryTag::dirichlet;
  BoundaryTag right = BoundaryTag::dirichlet;
  BoundaryTag bottom = BoundaryTag::dirichlet;
  BoundaryTag top = BoundaryTag::dirichlet;

  static SideTags all(BoundaryTag t) { return {t, t, t, t}; }
};

/// Structured triangulation of a rectangle: nx x ny cells, each split along the
/// (x0,y0)-(x1,y1) diagonal, 2 nx ny triangles. Node (i, j) has index j (nx+1) + i.
inline Mesh generate_rectangle(int nx, int ny, const Extent& extent = {}, const SideTags& tags = {}) {
  if (nx < 1 || ny < 1) throw InvalidParameter("generate_rectangle: nx, ny must be >= 1");
  if (!(extent.x1 > extent.x0) || !(extent.y1 > extent.y0)) throw InvalidParameter("generate_rectangle: degenerate extent");
  std::vector<Point> nodes;
  nodes.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      nodes.push_back({extent.x0 + (extent.x1 - extent.x0) * i / nx, extent.y0 + (extent.y1 - extent.y0) * j / ny});
    }
  }
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  std::vector<Triangle> elements;
  elements.reserve(static_cast<std::size_t>(2 * nx * ny));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      elements.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      elements.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  std::vector<BoundaryEdge> boundary;
  for (int i = 0; i < nx; ++i) boundary.push_back({id(i, 0), id(i + 1, 0), tags.bottom});
  for (int j = 0; j < ny; ++j) boundary.push_back({id(nx, j), id(nx, j + 1), tags.right});
  for (int i = nx; i > 0; --i) boundary.push_back({id(i, ny), id(i - 1, ny), tags.top});
  for (int j = ny; j > 0; --j) boundary.push_back({id(0, j), id(0, j - 1), tags.left});
  return Mesh(std::move(nodes), std::move(elements), std::move(boundary));
}

// ---------------------------------------------------------------------------
// Text mesh format
//
//   # comment
//   nodes N
//   x y            (N lines)
//   elements M
//   i j k          (M lines, 0-based, counterclockwise)
//   boundary B
//   i j TAG        (B lines, TAG in {D, N})
// ---------------------------------------------------------------------------

inline Mesh parse_mesh(std::istream& in) {
  std::vector<std::pair<int, std::string>> lines;
  std::string raw;
  for (int no = 1; std::getline(in, raw); ++no) {
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
    lines.emplace_back(no, raw);
  }
  std::size_t cursor = 0;
  int last_line = lines.empty() ? 1 : lines.back().first;

  auto header = [&](const std::string& keyword) -> int {
    if (cursor >= lines.size()) throw ParseError("expected '" + keyword + " <count>', got end of file", last_line);
    const auto& [no, text] = lines[cursor++];
    std::istringstream ss(text);
    std::string word;
    long count = -1;
    std::string extra;
    if (!(ss >> word >> count) || word != keyword || count < 0 || (ss >> extra)) {
      throw ParseError("expected '" + keyword + " <count>'", no);
    }
    return static_cast<int>(count);
  };
  auto next = [&](const std::string& what) -> std::pair<int, std::istringstream> {
    if (cursor >= lines.size()) throw ParseError("unexpected end of file while reading " + what, last_line);
    const auto& [no, text] = lines[cursor++];
    return {no, std::istringstream(text)};
  };

  std::vector<Point> nodes(static_cast<std::size_t>(header("nodes")));
  for (auto& p : nodes) {
    auto [no, ss] = next("nodes");
    std::string extra;
    if (!(ss >> p[0] >> p[1]) || (ss >> extra)) throw ParseError("expected 'x y'", no);
  }
  std::vector<Triangle> elements(static_cast<std::size_t>(header("elements")));
  for (auto& t : elements) {
    auto [no, ss] = next("elements");
    std::string extra;
    if (!(ss >> t[0] >> t[1] >> t[2]) || (ss >> extra)) throw ParseError("expected 'i j k'", no);
    for (int v : t) {
      if (v < 0 || v >= static_cast<int>(nodes.size())) throw ParseError("node index " + std::to_string(v) + " out of range", no);
    }
  }
  std::vector<BoundaryEdge> boundary(static_cast<std::size_t>(header("boundary")));
  for (auto& be : boundary) {
    auto [no, ss] = next("boundary");
    std::string tag, extra;
    if (!(ss >> be.a >> be.b >> tag) || (ss >> extra)) throw ParseError("expected 'i j TAG'", no);
    if (tag == "D") {
      be.tag = BoundaryTag::dirichlet;
    } else if (tag == "N") {
      be.tag = BoundaryTag::neumann;
    } else {
      throw ParseError("boundary tag must be D or N, got '" + tag + "'", no);
    }
  }
  if (cursor != lines.size()) throw ParseError("trailing content after boundary section", lines[cursor].first);
  return Mesh(std::move(nodes), std::move(elements), std::move(boundary));
}

inline Mesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open mesh file '" + path + "'");
  return parse_mesh(in);
}

inline void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << std::setprecision(17);
  out << "nodes " << mesh.num_nodes() << "\n";
  for (const auto& p : mesh.nodes()) out << p[0] << " " << p[1] << "\n";
  out << "elements " << mesh.num_elements() << "\n";
  for (const auto& t : mesh.elements()) out << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "boundary " << mesh.boundary_edges().size() << "\n";
  for (const auto& be : mesh.boundary_edges()) {
    out << be.a << " " << be.b << " " << (be.tag == BoundaryTag::dirichlet ? 'D' : 'N') << "\n";
  }
}

/// Degree-of-freedom layout: dof(node, c) = c * num_nodes + node.
class DofMap {
 public:
  explicit DofMap(const Mesh& mesh) : num_nodes_(mesh.num_nodes()) {
    const auto nd = static_cast<std::size_t>(kDim * num_nodes_);
    dirichlet_mask_.assign(nd, false);
    for (const auto& be : mesh.boundary_edges()) {
      if (be.tag != BoundaryTag::dirichlet) continue;
      for (int c = 0; c < kDim; ++c) {
        dirichlet_mask_[static_cast<std::size_t>(dof(be.a, c))] = true;
        dirichlet_mask_[static_cast<std::size_t>(dof(be.b, c))] = true;
      }
    }
    free_index_.assign(nd, -1);
    for (int d = 0; d < num_dofs(); ++d) {
      if (!dirichlet_mask_[static_cast<std::size_t>(d)]) {
        free_index_[static_cast<std::size_t>(d)] = static_cast<int>(free_dofs_.size());
        free_dofs_.push_back(d);
      }
    }

    lumped_mass_ = Eigen::VectorXd::Zero(num_nodes_);
    for (int e = 0; e < mesh.num_elements(); ++e) {
      for (int v : mesh.element(e)) lumped_mass_[v] += mesh.geometry(e).area / 3.0;
    }

    if (free_dofs_.size() == nd) build_rigid_modes(mesh);
  }

  int num_nodes() const { return num_nodes_; }
  int num_dofs() const { return kDim * num_nodes_; }
  int num_free() const { return static_cast<int>(free_dofs_.size()); }
  int dof(int node, int component) const { return component * num_nodes_ + node; }
  bool is_dirichlet(int dof) const { return dirichlet_mask_[static_cast<std::size_t>(dof)]; }
  const std::vector<bool>& dirichlet_mask() const { return dirichlet_mask_; }
  const std::vector<int>& free_dofs() const { return free_dofs_; }
  /// Position of `dof` among the free dofs, -1 for Dirichlet dofs.
  int free_index(int dof) const { return free_index_[static_cast<std::size_t>(dof)]; }
  const Eigen::VectorXd& lumped_mass() const { return lumped_mass_; }

  /// Translations and the infinitesimal rotation, orthonormal in the lumped L2 product.
  /// Present only when no edge is Dirichlet.
  const std::optional<std::vector<Eigen::VectorXd>>& rigid_mode_basis() const { return rigid_modes_; }
  bool has_rigid_modes() const { return rigid_modes_.has_value(); }

  double l2_inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
    double s = 0.0;
    for (int c = 0; c < kDim; ++c) {
      s += (lumped_mass_.array() * u.segment(c * num_nodes_, num_nodes_).array() *
            v.segment(c * num_nodes_, num_nodes_).array())
               .sum();
    }
    return s;
  }

  /// Removes the rigid-mode components of a nodal field (no-op without rigid modes).
  void project_out_rigid(Eigen::VectorXd& u) const {
    if (!rigid_modes_) return;
    for (const auto& rho : *rigid_modes_) u -= l2_inner(u, rho) * rho;
  }

  /// Dual counterpart: makes a load/residual vector annihilate every rigid mode.
  void project_dual_out_rigid(Eigen::VectorXd& r) const {
    if (!rigid_modes_) return;
    for (const auto& rho : *rigid_modes_) {
      const double pairing = r.dot(rho);
      for (int c = 0; c < kDim; ++c) {
        r.segment(c * num_nodes_, num_nodes_).array() -=
            pairing * lumped_mass_.array() * rho.segment(c * num_nodes_, num_nodes_).array();
      }
    }
  }

 private:
  void build_rigid_modes(const Mesh& mesh) {
    std::vector<Eigen::VectorXd> modes(3, Eigen::VectorXd::Zero(num_dofs()));
    for (int i = 0; i < num_nodes_; ++i) {
      const auto& p = mesh.node(i);
      modes[0][dof(i, 0)] = 1.0;
      modes[1][dof(i, 1)] = 1.0;
      modes[2][dof(i, 0)] = -p[1];
      modes[2][dof(i, 1)] = p[0];
    }
    // Modified Gram-Schmidt, two passes.
    for (std::size_t k = 0; k < modes.size(); ++k) {
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t j = 0; j < k; ++j) modes[k] -= l2_inner(modes[k], modes[j]) * modes[j];
      }
      modes[k] /= std::sqrt(l2_inner(modes[k], modes[k]));
    }
    rigid_modes_ = std::move(modes);
  }

  int num_nodes_;
  std::vector<bool> dirichlet_mask_;
  std::vector<int> free_dofs_;
  std::vector<int> free_index_;
  Eigen::VectorXd lumped_mass_;
  std::optional<std::vector<Eigen::VectorXd>> rigid_modes_;
};

inline DofMap build_dofmap(const Mesh& mesh) { return DofMap(mesh); }

}  // namespace orlicz_elastica

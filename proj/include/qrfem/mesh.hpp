// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <set>
#include <vector>

namespace qrfem {

using Index = std::size_t;
using Point = Eigen::Vector2d;

inline constexpr Index invalid_index = std::numeric_limits<Index>::max();

enum class BoundaryPart : std::uint8_t { None, Gamma0, Gamma1 };

enum class Side : std::uint8_t { Left, Right, Bottom, Top };

/// Region tags stored per triangle as a bit set.
enum class Region : std::uint8_t { OmegaData = 1U << 0U, InteriorG = 1U << 1U };

/// Closed axis-aligned rectangle [x0,x1] x [y0,y1].
struct Box {
  double x0 = 0.0;
  double x1 = 1.0;
  double y0 = 0.0;
  double y1 = 1.0;

  [[nodiscard]] bool contains(const Point& p) const noexcept {
    return p.x() >= x0 && p.x() <= x1 && p.y() >= y0 && p.y() <= y1;
  }
  [[nodiscard]] bool within(const Box& other) const noexcept {
    return x0 >= other.x0 && x1 <= other.x1 && y0 >= other.y0 && y1 <= other.y1;
  }
};

struct Facet {
  std::array<Index, 2> vertices{};
  /// cells[0] is always set; cells[1] is invalid_index on the boundary.
  std::array<Index, 2> cells{invalid_index, invalid_index};
  /// Local facet number inside each adjacent cell (facet i is opposite vertex i).
  std::array<int, 2> local{-1, -1};
  /// Unit normal, equal to the outward normal of cells[0].
  Point normal = Point::Zero();
  double length = 0.0;
  BoundaryPart tag = BoundaryPart::None;
  /// Square side this facet lies on; meaningful only on the boundary.
  Side side = Side::Left;

  [[nodiscard]] bool is_boundary() const noexcept { return cells[1] == invalid_index; }
};

/// Conforming triangulation of the unit square. Immutable once built; tagging
/// returns a modified copy.
class TriangleMesh {
 public:
  static TriangleMesh structured(std::size_t nx, std::size_t ny);

  [[nodiscard]] std::size_t num_vertices() const noexcept { return vertices_.size(); }
  [[nodiscard]] std::size_t num_cells() const noexcept { return cells_.size(); }
  [[nodiscard]] std::size_t num_facets() const noexcept { return facets_.size(); }
  [[nodiscard]] std::size_t nx() const noexcept { return nx_; }
  [[nodiscard]] std::size_t ny() const noexcept { return ny_; }

  [[nodiscard]] const Point& vertex(Index v) const { return vertices_[v]; }
  [[nodiscard]] const std::array<Index, 3>& cell(Index c) const { return cells_[c]; }
  [[nodiscard]] const Facet& facet(Index f) const { return facets_[f]; }
  [[nodiscard]] const std::vector<Facet>& facets() const noexcept { return facets_; }
  /// Facet opposite each local vertex.
  [[nodiscard]] const std::array<Index, 3>& cell_facets(Index c) const { return cell_facets_[c]; }

  [[nodiscard]] double area(Index c) const { return areas_[c]; }
  [[nodiscard]] double diameter(Index c) const { return diameters_[c]; }
  [[nodiscard]] Point barycenter(Index c) const;
  /// Global mesh size: largest triangle diameter.
  [[nodiscard]] double h() const noexcept { return h_; }
  [[nodiscard]] double min_diameter() const noexcept { return h_min_; }

  /// Gradients of the three barycentric coordinates (constant per cell).
  [[nodiscard]] const std::array<Point, 3>& barycentric_gradients(Index c) const {
    return bary_grads_[c];
  }
  [[nodiscard]] Point map_to_physical(Index c, const Eigen::Vector3d& bary) const;
  /// Outward unit normal of local facet i of cell c.
  [[nodiscard]] Point outward_normal(Index c, int local_facet) const;

  [[nodiscard]] bool has_region(Index c, Region r) const {
    return (region_bits_[c] & static_cast<std::uint8_t>(r)) != 0;
  }
  [[nodiscard]] std::size_t count_region(Region r) const;
  [[nodiscard]] std::size_t count_boundary(BoundaryPart part) const;

  friend TriangleMesh tag_boundary(TriangleMesh mesh, const std::set<Side>& gamma0);
  friend TriangleMesh tag_region(TriangleMesh mesh, const Box& box, Region tag);

 private:
  TriangleMesh() = default;

  std::size_t nx_ = 0;
  std::size_t ny_ = 0;
  std::vector<Point> vertices_;
  std::vector<std::array<Index, 3>> cells_;
  std::vector<std::array<Index, 3>> cell_facets_;
  std::vector<Facet> facets_;
  std::vector<double> areas_;
  std::vector<double> diameters_;
  std::vector<std::array<Point, 3>> bary_grads_;
  std::vector<std::uint8_t> region_bits_;
  double h_ = 0.0;
  double h_min_ = 0.0;
};

/// Structured nx-by-ny mesh of [0,1]^2, each cell split along its
/// lower-left to upper-right diagonal. Throws std::invalid_argument on zero sizes.
[[nodiscard]] TriangleMesh build_structured_mesh(std::size_t nx, std::size_t ny);

/// Boundary facets on the listed sides become Gamma0, all others Gamma1.
[[nodiscard]] TriangleMesh tag_boundary(TriangleMesh mesh, const std::set<Side>& gamma0);

/// Adds `tag` to every triangle whose barycenter lies in `box`.
[[nodiscard]] TriangleMesh tag_region(TriangleMesh mesh, const Box& box, Region tag);

/// Plain-text dump: vertex lines, triangle lines, facet tag lines, region lines.
void write_mesh(std::ostream& out, const TriangleMesh& mesh);

}  // namespace qrfem

// SPDX-License-Identifier: Apache-2.0
#include "qrfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

namespace qrfem {

namespace {

Side side_of(const Point& a, const Point& b) {
  constexpr double tol = 1e-12;
  if (std::abs(a.x()) < tol && std::abs(b.x()) < tol) return Side::Left;
  if (std::abs(a.x() - 1.0) < tol && std::abs(b.x() - 1.0) < tol) return Side::Right;
  if (std::abs(a.y()) < tol && std::abs(b.y()) < tol) return Side::Bottom;
  return Side::Top;
}

}  // namespace

TriangleMesh TriangleMesh::structured(std::size_t nx, std::size_t ny) {
  if (nx == 0 || ny == 0) {
    throw std::invalid_argument("structured mesh needs nx, ny >= 1");
  }
  TriangleMesh m;
  m.nx_ = nx;
  m.ny_ = ny;
  m.vertices_.reserve((nx + 1) * (ny + 1));
  for (std::size_t j = 0; j <= ny; ++j) {
    for (std::size_t i = 0; i <= nx; ++i) {
      m.vertices_.emplace_back(static_cast<double>(i) / static_cast<double>(nx),
                               static_cast<double>(j) / static_cast<double>(ny));
    }
  }
  const auto vid = [nx](std::size_t i, std::size_t j) { return j * (nx + 1) + i; };
  m.cells_.reserve(2 * nx * ny);
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const Index a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
      m.cells_.push_back({a, b, c});
      m.cells_.push_back({a, c, d});
    }
  }

  const std::size_t nc = m.cells_.size();
  m.areas_.resize(nc);
  m.diameters_.resize(nc);
  m.bary_grads_.resize(nc);
  m.region_bits_.assign(nc, 0);
  m.cell_facets_.resize(nc);
  for (Index c = 0; c < nc; ++c) {
    const auto& t = m.cells_[c];
    const Point& p0 = m.vertices_[t[0]];
    const Point& p1 = m.vertices_[t[1]];
    const Point& p2 = m.vertices_[t[2]];
    const Point e1 = p1 - p0;
    const Point e2 = p2 - p0;
    const double det = e1.x() * e2.y() - e1.y() * e2.x();
    m.areas_[c] = 0.5 * det;
    m.diameters_[c] = std::max({(p1 - p0).norm(), (p2 - p1).norm(), (p0 - p2).norm()});
    // grad(lambda_i) = rot(p_{i+2} - p_{i+1}) / det, rotated by -90 degrees.
    for (int i = 0; i < 3; ++i) {
      const Point& pa = m.vertices_[t[(i + 1) % 3]];
      const Point& pb = m.vertices_[t[(i + 2) % 3]];
      const Point edge = pb - pa;
      m.bary_grads_[c][i] = Point(-edge.y(), edge.x()) / det;
    }
  }
  const auto [dmin, dmax] = std::minmax_element(m.diameters_.begin(), m.diameters_.end());
  m.h_ = *dmax;
  m.h_min_ = *dmin;

  std::map<std::pair<Index, Index>, Index> lookup;
  for (Index c = 0; c < nc; ++c) {
    const auto& t = m.cells_[c];
    for (int i = 0; i < 3; ++i) {
      Index va = t[(i + 1) % 3];
      Index vb = t[(i + 2) % 3];
      const auto key = std::minmax(va, vb);
      auto it = lookup.find(key);
      if (it == lookup.end()) {
        Facet f;
        f.vertices = {key.first, key.second};
        f.cells[0] = c;
        f.local[0] = i;
        f.length = (m.vertices_[va] - m.vertices_[vb]).norm();
        f.normal = m.outward_normal(c, i);
        lookup.emplace(key, m.facets_.size());
        m.cell_facets_[c][i] = m.facets_.size();
        m.facets_.push_back(f);
      } else {
        Facet& f = m.facets_[it->second];
        f.cells[1] = c;
        f.local[1] = i;
        m.cell_facets_[c][i] = it->second;
      }
    }
  }
  for (Facet& f : m.facets_) {
    if (f.is_boundary()) {
      f.side = side_of(m.vertices_[f.vertices[0]], m.vertices_[f.vertices[1]]);
      f.tag = BoundaryPart::Gamma1;
    }
  }
  return m;
}

Point TriangleMesh::barycenter(Index c) const {
  const auto& t = cells_[c];
  return (vertices_[t[0]] + vertices_[t[1]] + vertices_[t[2]]) / 3.0;
}

Point TriangleMesh::map_to_physical(Index c, const Eigen::Vector3d& bary) const {
  const auto& t = cells_[c];
  return bary[0] * vertices_[t[0]] + bary[1] * vertices_[t[1]] + bary[2] * vertices_[t[2]];
}

Point TriangleMesh::outward_normal(Index c, int local_facet) const {
  const Point g = bary_grads_[c][local_facet];
  return -g / g.norm();
}

std::size_t TriangleMesh::count_region(Region r) const {
  return static_cast<std::size_t>(std::count_if(
      region_bits_.begin(), region_bits_.end(),
      [r](std::uint8_t bits) { return (bits & static_cast<std::uint8_t>(r)) != 0; }));
}

std::size_t TriangleMesh::count_boundary(BoundaryPart part) const {
  return static_cast<std::size_t>(std::count_if(
      facets_.begin(), facets_.end(),
      [part](const Facet& f) { return f.is_boundary() && f.tag == part; }));
}

TriangleMesh build_structured_mesh(std::size_t nx, std::size_t ny) {
  return TriangleMesh::structured(nx, ny);
}

TriangleMesh tag_boundary(TriangleMesh mesh, const std::set<Side>& gamma0) {
  for (Facet& f : mesh.facets_) {
    if (!f.is_boundary()) continue;
    f.tag = gamma0.contains(f.side) ? BoundaryPart::Gamma0 : BoundaryPart::Gamma1;
  }
  return mesh;
}

TriangleMesh tag_region(TriangleMesh mesh, const Box& box, Region tag) {
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    if (box.contains(mesh.barycenter(c))) {
      mesh.region_bits_[c] |= static_cast<std::uint8_t>(tag);
    }
  }
  return mesh;
}

void write_mesh(std::ostream& out, const TriangleMesh& mesh) {
  out << "vertices " << mesh.num_vertices() << '\n';
  for (Index v = 0; v < mesh.num_vertices(); ++v) {
    out << mesh.vertex(v).x() << ' ' << mesh.vertex(v).y() << '\n';
  }
  out << "triangles " << mesh.num_cells() << '\n';
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.cell(c);
    out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  }
  out << "boundary_facets " << mesh.count_boundary(BoundaryPart::Gamma0) +
                                   mesh.count_boundary(BoundaryPart::Gamma1)
      << '\n';
  for (const Facet& f : mesh.facets()) {
    if (!f.is_boundary()) continue;
    out << f.vertices[0] << ' ' << f.vertices[1] << ' '
        << (f.tag == BoundaryPart::Gamma0 ? "gamma0" : "gamma1") << '\n';
  }
  out << "regions " << mesh.num_cells() << '\n';
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    out << (mesh.has_region(c, Region::OmegaData) ? 1 : 0) << ' '
        << (mesh.has_region(c, Region::InteriorG) ? 1 : 0) << '\n';
  }
}

}  // namespace qrfem

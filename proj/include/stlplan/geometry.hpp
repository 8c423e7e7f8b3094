#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "stlplan/errors.hpp"

namespace stlplan {

using Vec3 = Eigen::Vector3d;

/// Half-space n·x <= offset with a unit normal.
struct Face {
  Vec3 normal = Vec3::UnitX();
  double offset = 0.0;

  /// Signed distance to the face plane, positive on the inner side.
  [[nodiscard]] double inner_margin(const Vec3& x) const { return offset - normal.dot(x); }

  friend bool operator==(const Face& a, const Face& b) {
    return a.normal == b.normal && a.offset == b.offset;
  }
};

struct Box {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Ones();

  friend bool operator==(const Box& a, const Box& b) { return a.min == b.min && a.max == b.max; }
};

struct ConvexPolyhedron {
  std::vector<Face> faces;

  friend bool operator==(const ConvexPolyhedron&, const ConvexPolyhedron&) = default;
};

namespace detail {

inline Face make_face(const Vec3& normal, double offset) {
  const double n = normal.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw InvalidArgument("face normal must be non-zero and finite");
  return Face{normal / n, offset / n};
}

/// Enumerates the vertices of {x : n_i·x <= d_i} by intersecting every face triple.
inline std::vector<Vec3> enumerate_vertices(const std::vector<Face>& faces, double tol = 1e-9) {
  std::vector<Vec3> vertices;
  const std::size_t m = faces.size();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      for (std::size_t k = j + 1; k < m; ++k) {
        Eigen::Matrix3d a;
        a.row(0) = faces[i].normal.transpose();
        a.row(1) = faces[j].normal.transpose();
        a.row(2) = faces[k].normal.transpose();
        if (std::abs(a.determinant()) < 1e-12) continue;
        const Vec3 x = a.partialPivLu().solve(Vec3(faces[i].offset, faces[j].offset, faces[k].offset));
        const bool inside = std::all_of(faces.begin(), faces.end(), [&](const Face& f) {
          return f.inner_margin(x) >= -tol * std::max(1.0, std::abs(f.offset));
        });
        if (!inside) continue;
        const bool duplicate = std::any_of(vertices.begin(), vertices.end(),
                                           [&](const Vec3& v) { return (v - x).norm() < 1e-9; });
        if (!duplicate) vertices.push_back(x);
      }
    }
  }
  return vertices;
}

}  // namespace detail

/// Convex region given either as an axis-aligned box or as an intersection of half-spaces.
class Region {
 public:
  using Shape = std::variant<Box, ConvexPolyhedron>;

  Region() : Region("", Box{}) {}

  Region(std::string name, Box box) : name_(std::move(name)), shape_(box) {
    for (int j = 0; j < 3; ++j) {
      if (!(box.min[j] < box.max[j]))
        throw ValidationError("region '" + name_ + "': box min must be below max on every axis");
    }
    faces_.reserve(6);
    for (int j = 0; j < 3; ++j) {
      faces_.push_back(Face{-Vec3::Unit(j), -box.min[j]});
      faces_.push_back(Face{Vec3::Unit(j), box.max[j]});
    }
  }

  /// Faces are normalized; the polyhedron must be non-empty and bounded.
  Region(std::string name, const std::vector<Face>& raw_faces) : name_(std::move(name)) {
    if (raw_faces.size() < 4) throw ValidationError("region '" + name_ + "': polyhedron needs at least 4 faces");
    ConvexPolyhedron poly;
    for (const auto& f : raw_faces) poly.faces.push_back(detail::make_face(f.normal, f.offset));
    if (detail::enumerate_vertices(poly.faces).empty())
      throw ValidationError("region '" + name_ + "': polyhedron is empty or has no vertices");
    // Bounded iff the recession cone {d : n_i·d <= 0} is {0}; clip it to the unit cube and
    // look for a non-zero vertex.
    std::vector<Face> cone;
    for (const auto& f : poly.faces) cone.push_back(Face{f.normal, 0.0});
    for (int j = 0; j < 3; ++j) {
      cone.push_back(Face{Vec3::Unit(j), 1.0});
      cone.push_back(Face{-Vec3::Unit(j), 1.0});
    }
    for (const auto& v : detail::enumerate_vertices(cone)) {
      if (v.norm() > 1e-9) throw ValidationError("region '" + name_ + "': polyhedron is unbounded");
    }
    faces_ = poly.faces;
    shape_ = ConvexPolyhedron{raw_faces};
  }

  [[nodiscard]] const std::string& name() const { return name_; }
  [[nodiscard]] const Shape& shape() const { return shape_; }
  [[nodiscard]] const std::vector<Face>& faces() const { return faces_; }
  [[nodiscard]] bool is_box() const { return std::holds_alternative<Box>(shape_); }

  /// min over faces of the inner margin; positive strictly inside.
  [[nodiscard]] double inside_margin(const Vec3& x) const {
    double best = faces_.front().inner_margin(x);
    for (std::size_t i = 1; i < faces_.size(); ++i) best = std::min(best, faces_[i].inner_margin(x));
    return best;
  }

  /// Index of the face attaining inside_margin.
  [[nodiscard]] std::size_t closest_face(const Vec3& x) const {
    std::size_t arg = 0;
    double best = faces_.front().inner_margin(x);
    for (std::size_t i = 1; i < faces_.size(); ++i) {
      const double m = faces_[i].inner_margin(x);
      if (m < best) {
        best = m;
        arg = i;
      }
    }
    return arg;
  }

  [[nodiscard]] bool contains(const Vec3& x) const { return inside_margin(x) >= 0.0; }

  [[nodiscard]] std::vector<Vec3> vertices() const { return detail::enumerate_vertices(faces_); }

  [[nodiscard]] Vec3 center() const {
    const auto vs = vertices();
    Vec3 c = Vec3::Zero();
    for (const auto& v : vs) c += v;
    return c / static_cast<double>(vs.size());
  }

  friend bool operator==(const Region& a, const Region& b) {
    return a.name_ == b.name_ && a.shape_ == b.shape_;
  }

 private:
  std::string name_;
  Shape shape_;
  std::vector<Face> faces_;
};

/// True when every vertex of `inner` lies in `outer`.
inline bool region_within(const Region& inner, const Region& outer, double tol = 1e-9) {
  const auto vs = inner.vertices();
  return std::all_of(vs.begin(), vs.end(), [&](const Vec3& v) { return outer.inside_margin(v) >= -tol; });
}

/// True when the two regions share an interior point (vertex test on the stacked faces).
inline bool regions_overlap(const Region& a, const Region& b) {
  std::vector<Face> faces = a.faces();
  faces.insert(faces.end(), b.faces().begin(), b.faces().end());
  const auto vs = detail::enumerate_vertices(faces);
  if (vs.empty()) return false;
  Vec3 c = Vec3::Zero();
  for (const auto& v : vs) c += v;
  c /= static_cast<double>(vs.size());
  return a.inside_margin(c) > 1e-9 && b.inside_margin(c) > 1e-9;
}

}  // namespace stlplan

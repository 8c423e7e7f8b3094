#pragma once

#include <cmath>
#include <memory>
#include <set>
#include <utility>
#include <variant>
#include <vector>

#include "stlplan/errors.hpp"
#include "stlplan/geometry.hpp"
#include "stlplan/trace.hpp"

namespace stlplan {

// ---------------------------------------------------------------------------
// Predicates
// ---------------------------------------------------------------------------

/// mu = normal·s - offset, s being the chosen channel of one drone.
struct AffineHalfspace {
  std::size_t drone = 0;
  Channel channel = Channel::Position;
  Vec3 normal = Vec3::UnitX();
  double offset = 0.0;
};

/// mu = min over the region's faces of the inner margin (positive inside).
struct InsideRegion {
  std::size_t drone = 0;
  Channel channel = Channel::Position;
  Region region;
};

/// mu = max over the region's faces of the outer margin (positive outside).
struct OutsideRegion {
  std::size_t drone = 0;
  Region region;
};

/// mu = |p_i - p_h| - delta.
struct PairDistance {
  std::size_t drone_i = 0;
  std::size_t drone_h = 1;
  double delta = 1.0;
};

using Predicate = std::variant<AffineHalfspace, InsideRegion, OutsideRegion, PairDistance>;

inline void check_predicate(const Predicate& p) {
  if (const auto* a = std::get_if<AffineHalfspace>(&p)) {
    if (!(a->normal.norm() > 0.0)) throw InvalidArgument("affine predicate normal must be non-zero");
  } else if (const auto* d = std::get_if<PairDistance>(&p)) {
    if (!(d->delta > 0.0)) throw InvalidArgument("pair distance delta must be positive");
    if (d->drone_i == d->drone_h) throw InvalidArgument("pair distance needs two distinct drones");
  }
}

/// Value of a predicate at sample k.
inline double predicate_value(const Predicate& pred, const Trace& trace, std::ptrdiff_t k) {
  return std::visit(
      [&](const auto& p) -> double {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, AffineHalfspace>) {
          return p.normal.dot(trace.channel(p.channel, k, p.drone)) - p.offset;
        } else if constexpr (std::is_same_v<P, InsideRegion>) {
          return p.region.inside_margin(trace.channel(p.channel, k, p.drone));
        } else if constexpr (std::is_same_v<P, OutsideRegion>) {
          const Vec3& x = trace.position(k, p.drone);
          double best = -p.region.faces().front().inner_margin(x);
          for (const auto& f : p.region.faces()) best = std::max(best, -f.inner_margin(x));
          return best;
        } else {
          return (trace.position(k, p.drone_i) - trace.position(k, p.drone_h)).norm() - p.delta;
        }
      },
      pred);
}

/// Adds weight · d(mu)/d(sample k) into grad. At ties between faces the first active face is used;
/// at coincident positions the pair-distance gradient is 0.
inline void predicate_gradient(const Predicate& pred, const Trace& trace, std::ptrdiff_t k, double weight,
                               TraceGradient& grad) {
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, AffineHalfspace>) {
          grad.channel(p.channel, k, p.drone) += weight * p.normal;
        } else if constexpr (std::is_same_v<P, InsideRegion>) {
          const auto& x = trace.channel(p.channel, k, p.drone);
          grad.channel(p.channel, k, p.drone) -= weight * p.region.faces()[p.region.closest_face(x)].normal;
        } else if constexpr (std::is_same_v<P, OutsideRegion>) {
          const Vec3& x = trace.position(k, p.drone);
          const auto& faces = p.region.faces();
          std::size_t arg = 0;
          double best = -faces.front().inner_margin(x);
          for (std::size_t i = 1; i < faces.size(); ++i) {
            const double m = -faces[i].inner_margin(x);
            if (m > best) {
              best = m;
              arg = i;
            }
          }
          grad.position(k, p.drone) += weight * faces[arg].normal;
        } else {
          const Vec3 diff = trace.position(k, p.drone_i) - trace.position(k, p.drone_h);
          const double n = diff.norm();
          if (n == 0.0) return;
          const Vec3 g = weight * diff / n;
          grad.position(k, p.drone_i) += g;
          grad.position(k, p.drone_h) -= g;
        }
      },
      pred);
}

/// (drone, axis) pairs the predicate reads. Velocity-channel reads are reported on the same axis.
inline std::set<std::pair<std::size_t, int>> predicate_support(const Predicate& pred) {
  std::set<std::pair<std::size_t, int>> out;
  const auto add_normal = [&](std::size_t drone, const Vec3& n) {
    for (int j = 0; j < 3; ++j)
      if (n[j] != 0.0) out.insert({drone, j});
  };
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, AffineHalfspace>) {
          add_normal(p.drone, p.normal);
        } else if constexpr (std::is_same_v<P, InsideRegion> || std::is_same_v<P, OutsideRegion>) {
          for (const auto& f : p.region.faces()) add_normal(p.drone, f.normal);
        } else {
          for (int j = 0; j < 3; ++j) {
            out.insert({p.drone_i, j});
            out.insert({p.drone_h, j});
          }
        }
      },
      pred);
  return out;
}

// ---------------------------------------------------------------------------
// Formula AST
// ---------------------------------------------------------------------------

class Formula;

namespace node {
struct Pred {
  Predicate predicate;
};
struct Not {
  std::shared_ptr<const Formula> sub;
};
struct And {
  std::vector<Formula> subs;
};
struct Or {
  std::vector<Formula> subs;
};
struct Always {
  Interval interval;
  std::shared_ptr<const Formula> sub;
};
struct Eventually {
  Interval interval;
  std::shared_ptr<const Formula> sub;
};
struct Until {
  Interval interval;
  std::shared_ptr<const Formula> left;
  std::shared_ptr<const Formula> right;
};
}  // namespace node

/// Immutable STL formula; copies share structure.
class Formula {
 public:
  using Node = std::variant<node::Pred, node::Not, node::And, node::Or, node::Always, node::Eventually, node::Until>;

  [[nodiscard]] const Node& get() const { return *node_; }

  template <class T>
  [[nodiscard]] const T* as() const {
    return std::get_if<T>(node_.get());
  }

  static Formula make(Node n) { return Formula(std::make_shared<const Node>(std::move(n))); }

 private:
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

namespace detail {
inline void check_interval(const Interval& i) {
  if (!(i.lower >= 0.0) || !(i.lower <= i.upper) || !std::isfinite(i.upper))
    throw InvalidArgument("temporal interval must satisfy 0 <= a <= b");
}
}  // namespace detail

inline Formula pred(Predicate p) {
  check_predicate(p);
  return Formula::make(node::Pred{std::move(p)});
}
inline Formula negate(Formula f) { return Formula::make(node::Not{std::make_shared<const Formula>(std::move(f))}); }
inline Formula conj(std::vector<Formula> fs) {
  if (fs.empty()) throw InvalidArgument("conjunction needs at least one operand");
  return Formula::make(node::And{std::move(fs)});
}
inline Formula disj(std::vector<Formula> fs) {
  if (fs.empty()) throw InvalidArgument("disjunction needs at least one operand");
  return Formula::make(node::Or{std::move(fs)});
}
inline Formula always(Interval i, Formula f) {
  detail::check_interval(i);
  return Formula::make(node::Always{i, std::make_shared<const Formula>(std::move(f))});
}
inline Formula eventually(Interval i, Formula f) {
  detail::check_interval(i);
  return Formula::make(node::Eventually{i, std::make_shared<const Formula>(std::move(f))});
}
inline Formula until(Interval i, Formula left, Formula right) {
  detail::check_interval(i);
  return Formula::make(node::Until{i, std::make_shared<const Formula>(std::move(left)),
                                   std::make_shared<const Formula>(std::move(right))});
}

/// Calls fn on every predicate of the formula.
template <class Fn>
void for_each_predicate(const Formula& f, Fn&& fn) {
  std::visit(
      [&](const auto& n) {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, node::Pred>) {
          fn(n.predicate);
        } else if constexpr (std::is_same_v<N, node::And> || std::is_same_v<N, node::Or>) {
          for (const auto& s : n.subs) for_each_predicate(s, fn);
        } else if constexpr (std::is_same_v<N, node::Until>) {
          for_each_predicate(*n.left, fn);
          for_each_predicate(*n.right, fn);
        } else {
          for_each_predicate(*n.sub, fn);
        }
      },
      f.get());
}

/// Largest drone index referenced, plus one.
inline std::size_t drones_referenced(const Formula& f) {
  std::size_t q = 0;
  for_each_predicate(f, [&](const Predicate& p) {
    std::visit(
        [&](const auto& x) {
          if constexpr (std::is_same_v<std::decay_t<decltype(x)>, PairDistance>)
            q = std::max({q, x.drone_i + 1, x.drone_h + 1});
          else
            q = std::max(q, x.drone + 1);
        },
        p);
  });
  return q;
}

/// Shape statistics used by the smooth/exact gap bound: depth counts nested
/// max/min aggregations, arity is the largest aggregated set size on `grid`.
struct FormulaShape {
  int depth = 0;
  std::ptrdiff_t arity = 1;
};

inline FormulaShape formula_shape(const Formula& f, const TimeGrid& grid) {
  return std::visit(
      [&](const auto& n) -> FormulaShape {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, node::Pred>) {
          return {};
        } else if constexpr (std::is_same_v<N, node::Not>) {
          return formula_shape(*n.sub, grid);
        } else if constexpr (std::is_same_v<N, node::And> || std::is_same_v<N, node::Or>) {
          FormulaShape s{0, static_cast<std::ptrdiff_t>(n.subs.size())};
          int d = 0;
          for (const auto& x : n.subs) {
            const auto c = formula_shape(x, grid);
            d = std::max(d, c.depth);
            s.arity = std::max(s.arity, c.arity);
          }
          s.depth = d + (n.subs.size() > 1 ? 1 : 0);
          return s;
        } else if constexpr (std::is_same_v<N, node::Until>) {
          const auto l = formula_shape(*n.left, grid);
          const auto r = formula_shape(*n.right, grid);
          const auto w = interval_to_indices(n.interval, grid);
          // outer max over the window, inner min over {right} + prefix of left
          return {std::max(l.depth, r.depth) + 2, std::max({l.arity, r.arity, w.last + 2})};
        } else {
          auto s = formula_shape(*n.sub, grid);
          const auto w = interval_to_indices(n.interval, grid);
          if (w.size() > 1) ++s.depth;
          s.arity = std::max(s.arity, w.size());
          return s;
        }
      },
      f.get());
}

}  // namespace stlplan

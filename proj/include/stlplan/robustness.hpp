#pragma once

#include <span>
#include <string>
#include <vector>

#include "stlplan/errors.hpp"
#include "stlplan/formula.hpp"
#include "stlplan/lse.hpp"
#include "stlplan/trace.hpp"

namespace stlplan {

/// Robustness signal of one formula node over the sample range [first, first + values.size()),
/// together with the child signals it was computed from. Kept for the reverse pass.
struct Evaluation {
  std::ptrdiff_t first = 0;
  std::vector<double> values;
  std::vector<Evaluation> children;
};

namespace detail {

struct Window {
  std::ptrdiff_t lo;
  std::ptrdiff_t hi;
};

inline Window relative_window(const Interval& interval, const TimeGrid& grid, std::ptrdiff_t last) {
  const Window w{grid.index_of(interval.lower), grid.index_of(interval.upper)};
  if (last + w.hi > grid.steps())
    throw HorizonOverflow("window [" + std::to_string(interval.lower) + ", " + std::to_string(interval.upper) +
                          "] shifted to t = " + std::to_string(grid.time(last)) + " s exceeds the horizon " +
                          std::to_string(grid.horizon()) + " s");
  return w;
}

template <class Sem>
Evaluation forward(const Formula& f, const Trace& trace, std::ptrdiff_t first, std::ptrdiff_t last, const Sem& sem) {
  Evaluation out;
  out.first = first;
  const std::size_t n = static_cast<std::size_t>(last - first + 1);
  out.values.resize(n);
  std::vector<double> scratch;

  std::visit(
      [&](const auto& nd) {
        using N = std::decay_t<decltype(nd)>;
        if constexpr (std::is_same_v<N, node::Pred>) {
          for (std::size_t i = 0; i < n; ++i)
            out.values[i] = predicate_value(nd.predicate, trace, first + static_cast<std::ptrdiff_t>(i));
        } else if constexpr (std::is_same_v<N, node::Not>) {
          out.children.push_back(forward(*nd.sub, trace, first, last, sem));
          for (std::size_t i = 0; i < n; ++i) out.values[i] = -out.children[0].values[i];
        } else if constexpr (std::is_same_v<N, node::And> || std::is_same_v<N, node::Or>) {
          for (const auto& s : nd.subs) out.children.push_back(forward(s, trace, first, last, sem));
          scratch.resize(nd.subs.size());
          for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < scratch.size(); ++j) scratch[j] = out.children[j].values[i];
            if constexpr (std::is_same_v<N, node::And>) {
              out.values[i] = sem.min(scratch);
            } else {
              // not(and(not ...))
              for (double& x : scratch) x = -x;
              out.values[i] = -sem.min(scratch);
            }
          }
        } else if constexpr (std::is_same_v<N, node::Always> || std::is_same_v<N, node::Eventually>) {
          const Window w = relative_window(nd.interval, trace.grid(), last);
          out.children.push_back(forward(*nd.sub, trace, first + w.lo, last + w.hi, sem));
          const auto& child = out.children[0].values;
          const std::size_t len = static_cast<std::size_t>(w.hi - w.lo + 1);
          for (std::size_t i = 0; i < n; ++i) {
            const std::span<const double> win(child.data() + i, len);
            if constexpr (std::is_same_v<N, node::Always>)
              out.values[i] = sem.min(win);
            else
              out.values[i] = sem.max(win);
          }
        } else {  // Until
          const Window w = relative_window(nd.interval, trace.grid(), last);
          out.children.push_back(forward(*nd.left, trace, first, last + w.hi, sem));
          out.children.push_back(forward(*nd.right, trace, first + w.lo, last + w.hi, sem));
          const auto& left = out.children[0].values;
          const auto& right = out.children[1].values;
          std::vector<double> outer(static_cast<std::size_t>(w.hi - w.lo + 1));
          for (std::size_t i = 0; i < n; ++i) {
            for (std::ptrdiff_t d = w.lo; d <= w.hi; ++d) {
              // min(right(k'), min over k'' in [k, k'] of left(k''))
              scratch.assign(left.begin() + static_cast<std::ptrdiff_t>(i),
                             left.begin() + static_cast<std::ptrdiff_t>(i) + d + 1);
              scratch.push_back(right[i + static_cast<std::size_t>(d - w.lo)]);
              outer[static_cast<std::size_t>(d - w.lo)] = sem.min(scratch);
            }
            out.values[i] = sem.max(outer);
          }
        }
      },
      f.get());
  return out;
}

template <class Sem>
void backward(const Formula& f, const Evaluation& ev, std::span<const double> adjoint, const Trace& trace,
              TraceGradient& grad, const Sem& sem) {
  const std::size_t n = ev.values.size();
  std::vector<double> scratch;
  std::vector<double> weights;

  std::visit(
      [&](const auto& nd) {
        using N = std::decay_t<decltype(nd)>;
        if constexpr (std::is_same_v<N, node::Pred>) {
          for (std::size_t i = 0; i < n; ++i)
            if (adjoint[i] != 0.0)
              predicate_gradient(nd.predicate, trace, ev.first + static_cast<std::ptrdiff_t>(i), adjoint[i], grad);
        } else if constexpr (std::is_same_v<N, node::Not>) {
          std::vector<double> adj(adjoint.begin(), adjoint.end());
          for (double& a : adj) a = -a;
          backward(*nd.sub, ev.children[0], adj, trace, grad, sem);
        } else if constexpr (std::is_same_v<N, node::And> || std::is_same_v<N, node::Or>) {
          const std::size_t m = nd.subs.size();
          std::vector<std::vector<double>> adj(m, std::vector<double>(n, 0.0));
          scratch.resize(m);
          weights.resize(m);
          for (std::size_t i = 0; i < n; ++i) {
            if (adjoint[i] == 0.0) continue;
            for (std::size_t j = 0; j < m; ++j) scratch[j] = ev.children[j].values[i];
            if constexpr (std::is_same_v<N, node::And>) {
              sem.min_weights(scratch, ev.values[i], weights);
            } else {
              for (double& x : scratch) x = -x;
              sem.min_weights(scratch, -ev.values[i], weights);
            }
            for (std::size_t j = 0; j < m; ++j) adj[j][i] += adjoint[i] * weights[j];
          }
          for (std::size_t j = 0; j < m; ++j) backward(nd.subs[j], ev.children[j], adj[j], trace, grad, sem);
        } else if constexpr (std::is_same_v<N, node::Always> || std::is_same_v<N, node::Eventually>) {
          const auto& child = ev.children[0];
          const std::size_t len = child.values.size() - n + 1;
          std::vector<double> adj(child.values.size(), 0.0);
          weights.resize(len);
          for (std::size_t i = 0; i < n; ++i) {
            if (adjoint[i] == 0.0) continue;
            const std::span<const double> win(child.values.data() + i, len);
            if constexpr (std::is_same_v<N, node::Always>)
              sem.min_weights(win, ev.values[i], weights);
            else
              sem.max_weights(win, ev.values[i], weights);
            for (std::size_t j = 0; j < len; ++j) adj[i + j] += adjoint[i] * weights[j];
          }
          backward(*nd.sub, child, adj, trace, grad, sem);
        } else {  // Until
          const auto& lev = ev.children[0];
          const auto& rev = ev.children[1];
          const std::ptrdiff_t lo = rev.first - ev.first;
          const std::ptrdiff_t hi = lo + static_cast<std::ptrdiff_t>(rev.values.size() - n);
          std::vector<double> ladj(lev.values.size(), 0.0);
          std::vector<double> radj(rev.values.size(), 0.0);
          const std::size_t span_len = static_cast<std::size_t>(hi - lo + 1);
          std::vector<double> outer(span_len);
          std::vector<double> outer_w(span_len);
          for (std::size_t i = 0; i < n; ++i) {
            if (adjoint[i] == 0.0) continue;
            for (std::ptrdiff_t d = lo; d <= hi; ++d) {
              scratch.assign(lev.values.begin() + static_cast<std::ptrdiff_t>(i),
                             lev.values.begin() + static_cast<std::ptrdiff_t>(i) + d + 1);
              scratch.push_back(rev.values[i + static_cast<std::size_t>(d - lo)]);
              outer[static_cast<std::size_t>(d - lo)] = sem.min(scratch);
            }
            sem.max_weights(outer, ev.values[i], outer_w);
            for (std::ptrdiff_t d = lo; d <= hi; ++d) {
              const double wo = adjoint[i] * outer_w[static_cast<std::size_t>(d - lo)];
              if (wo == 0.0) continue;
              scratch.assign(lev.values.begin() + static_cast<std::ptrdiff_t>(i),
                             lev.values.begin() + static_cast<std::ptrdiff_t>(i) + d + 1);
              scratch.push_back(rev.values[i + static_cast<std::size_t>(d - lo)]);
              weights.resize(scratch.size());
              sem.min_weights(scratch, outer[static_cast<std::size_t>(d - lo)], weights);
              for (std::ptrdiff_t e = 0; e <= d; ++e)
                ladj[i + static_cast<std::size_t>(e)] += wo * weights[static_cast<std::size_t>(e)];
              radj[i + static_cast<std::size_t>(d - lo)] += wo * weights.back();
            }
          }
          backward(*nd.left, lev, ladj, trace, grad, sem);
          backward(*nd.right, rev, radj, trace, grad, sem);
        }
      },
      f.get());
}

inline void check_sample(const Trace& trace, std::ptrdiff_t k) {
  if (k < 0 || k >= trace.sample_count())
    throw OutOfRange("sample index " + std::to_string(k) + " is outside the trace");
}

inline void check_scale(double c) {
  if (!(c >= 1.0) || !std::isfinite(c)) throw InvalidArgument("LSE scale c must be >= 1");
}

}  // namespace detail

/// Robustness signal over [first, last] under the chosen semantics.
template <class Sem>
Evaluation evaluate(const Formula& f, const Trace& trace, std::ptrdiff_t first, std::ptrdiff_t last, const Sem& sem) {
  detail::check_sample(trace, first);
  detail::check_sample(trace, last);
  return detail::forward(f, trace, first, last, sem);
}

/// Exact robustness at sample k.
inline double robustness(const Formula& f, const Trace& trace, std::ptrdiff_t k) {
  return evaluate(f, trace, k, k, ExactSemantics{}).values[0];
}

/// LSE-smoothed robustness at sample k.
inline double smooth_robustness(const Formula& f, const Trace& trace, std::ptrdiff_t k, double c) {
  detail::check_scale(c);
  return evaluate(f, trace, k, k, SmoothSemantics{c}).values[0];
}

struct SmoothGradient {
  double value = 0.0;
  TraceGradient gradient;
};

/// Smooth robustness at k and its gradient with respect to every position/velocity sample.
inline SmoothGradient smooth_robustness_gradient(const Formula& f, const Trace& trace, std::ptrdiff_t k, double c) {
  detail::check_scale(c);
  const SmoothSemantics sem{c};
  const Evaluation ev = evaluate(f, trace, k, k, sem);
  SmoothGradient out{ev.values[0], TraceGradient(trace.grid(), trace.drone_count())};
  const double seed = 1.0;
  detail::backward(f, ev, std::span<const double>(&seed, 1), trace, out.gradient, sem);
  return out;
}

}  // namespace stlplan

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fraclat {

/// Nodes and weights of an integration rule.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }

  template <class F>
  double integrate(F&& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
    return acc;
  }

  /// Appends `rule` (on [-1,1]) mapped affinely onto [a, b].
  void append_mapped(const QuadratureRule& rule, double a, double b);
};

/// n-point Gauss-Legendre rule on [-1, 1]. Results are cached per n.
const QuadratureRule& gauss_legendre(std::size_t n);

/// Composite Gauss-Legendre rule on [a, b] with the given panel boundaries.
QuadratureRule composite_rule(std::span<const double> breaks, std::size_t nodes_per_panel);

}  // namespace fraclat

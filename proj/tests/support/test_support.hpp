#pragma once

// Shared oracles for the test suites.  Everything here is deliberately
// independent of the library's internals: plain quadrature, finite
// differences and dense linear algebra, used to cross-check the real
// implementations.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "tfn/autodiff.hpp"
#include "tfn/nd_array.hpp"
#include "tfn/random.hpp"

namespace tfn::test {

/// Gauss-Legendre nodes/weights on [-1, 1] via Newton iteration; exact for
/// polynomials up to degree 2n-1.
struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline Quadrature gauss_legendre(int n) {
  Quadrature q;
  q.nodes.resize(static_cast<size_t>(n));
  q.weights.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    q.nodes[static_cast<size_t>(i)] = x;
    q.weights[static_cast<size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return q;
}

/// Integrates f(direction) over the unit sphere with a product rule
/// (Gauss-Legendre in cos(theta), uniform in phi); exact for spherical
/// polynomials well past l = 8.
inline double sphere_integral(const std::function<double(double, double, double)>& f,
                              int n_theta = 24, int n_phi = 64) {
  const Quadrature q = gauss_legendre(n_theta);
  double total = 0.0;
  for (int i = 0; i < n_theta; ++i) {
    const double ct = q.nodes[static_cast<size_t>(i)];
    const double st = std::sqrt(1.0 - ct * ct);
    double ring = 0.0;
    for (int j = 0; j < n_phi; ++j) {
      const double phi = 2.0 * M_PI * j / n_phi;
      ring += f(st * std::cos(phi), st * std::sin(phi), ct);
    }
    total += q.weights[static_cast<size_t>(i)] * ring * (2.0 * M_PI / n_phi);
  }
  return total;
}

/// Solves the square system A x = b by Gaussian elimination with partial
/// pivoting (row-major A, n x n).
inline std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b, int n) {
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int row = col + 1; row < n; ++row) {
      if (std::abs(a[static_cast<size_t>(row * n + col)]) > std::abs(a[static_cast<size_t>(pivot * n + col)])) pivot = row;
    }
    if (std::abs(a[static_cast<size_t>(pivot * n + col)]) < 1e-14) throw std::runtime_error("solve_dense: singular");
    if (pivot != col) {
      for (int k = 0; k < n; ++k) std::swap(a[static_cast<size_t>(col * n + k)], a[static_cast<size_t>(pivot * n + k)]);
      std::swap(b[static_cast<size_t>(col)], b[static_cast<size_t>(pivot)]);
    }
    for (int row = col + 1; row < n; ++row) {
      const double f = a[static_cast<size_t>(row * n + col)] / a[static_cast<size_t>(col * n + col)];
      for (int k = col; k < n; ++k) a[static_cast<size_t>(row * n + k)] -= f * a[static_cast<size_t>(col * n + k)];
      b[static_cast<size_t>(row)] -= f * b[static_cast<size_t>(col)];
    }
  }
  std::vector<double> x(static_cast<size_t>(n));
  for (int row = n - 1; row >= 0; --row) {
    double acc = b[static_cast<size_t>(row)];
    for (int k = row + 1; k < n; ++k) acc -= a[static_cast<size_t>(row * n + k)] * x[static_cast<size_t>(k)];
    x[static_cast<size_t>(row)] = acc / a[static_cast<size_t>(row * n + row)];
  }
  return x;
}

/// Central-difference gradient check against the tape's adjoints for a
/// scalar-valued graph builder.  Returns the worst relative error over every
/// input element (absolute error when both are tiny).
using GraphBuilder = std::function<ad::Var(ad::Tape&, const std::vector<ad::Var>&)>;

inline double gradient_check(const GraphBuilder& build, std::vector<NdArray> inputs, double h = 1e-6) {
  auto eval = [&](const std::vector<NdArray>& values) {
    ad::Tape tape;
    std::vector<ad::Var> vars;
    vars.reserve(values.size());
    for (const NdArray& v : values) vars.push_back(tape.leaf(v));
    return tape.value(build(tape, vars))[0];
  };

  ad::Tape tape;
  std::vector<ad::Var> vars;
  for (const NdArray& v : inputs) vars.push_back(tape.leaf(v));
  const ad::Var loss = build(tape, vars);
  tape.backward(loss);

  double worst = 0.0;
  for (size_t i = 0; i < inputs.size(); ++i) {
    const NdArray grad = tape.grad(vars[i]);
    for (int64_t k = 0; k < inputs[i].size(); ++k) {
      std::vector<NdArray> plus = inputs, minus = inputs;
      plus[i][k] += h;
      minus[i][k] -= h;
      const double numeric = (eval(plus) - eval(minus)) / (2.0 * h);
      const double analytic = grad[k];
      const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-8});
      worst = std::max(worst, std::abs(numeric - analytic) / scale);
    }
  }
  return worst;
}

inline NdArray random_array(std::vector<int64_t> shape, RandomEngine& rng, double lo = -1.0,
                            double hi = 1.0) {
  NdArray out(std::move(shape));
  for (int64_t i = 0; i < out.size(); ++i) out[i] = rng.uniform(lo, hi);
  return out;
}

}  // namespace tfn::test

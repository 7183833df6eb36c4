#pragma once

#include <functional>
#include <vector>

#include "daeobs/linalg.h"

namespace daeobs {

/// Vector-valued signal sampled on a strictly increasing time grid; one
/// column of `values` per grid point.
struct SampledSignal {
  std::vector<double> times;
  Matrix values;

  SampledSignal() = default;
  /// Throws InputError unless times is strictly increasing and
  /// values.cols() == times.size().
  SampledSignal(std::vector<double> times, Matrix values);

  static SampledSignal zeros(std::vector<double> times, int dim);

  int dim() const { return static_cast<int>(values.rows()); }
  int size() const { return static_cast<int>(times.size()); }
  Vector at(int i) const { return values.col(i); }
  /// Uniform step; throws InputError on a non-uniform grid.
  double step() const;
  bool is_uniform(double rel_tol = 1e-6) const;
};

using InputFunction = std::function<Vector(double)>;

/// n_steps + 1 equally spaced points on [0, t1].
std::vector<double> uniform_grid(double t1, int n_steps);

/// min(1e-3, 0.01/‖A‖₂).
double default_step(const Matrix& a);

/// Classical RK4 for ẋ = Ax + Bu on the grid of `u`, with u linearly
/// interpolated at half steps. Throws InputError on a non-uniform grid or a
/// dimension mismatch.
SampledSignal integrate_lti(const Matrix& a, const Matrix& b, const Vector& x0,
                            const SampledSignal& u);

/// RK4 with an input evaluated exactly at every stage.
SampledSignal integrate_lti(const Matrix& a, const Matrix& b, const Vector& x0,
                            const std::vector<double>& grid,
                            const InputFunction& u);

/// Samples an input function on a grid.
SampledSignal sample(const InputFunction& u, const std::vector<double>& grid);

/// Pointwise affine map y(t) = C·x(t) + D·u(t); u may be empty (D·u omitted).
SampledSignal output_map(const Matrix& c, const SampledSignal& x,
                         const Matrix& d, const SampledSignal& u);

/// Composite Simpson quadrature of a scalar series on a uniform grid
/// (3/8 rule on the last three intervals when the interval count is odd).
double simpson(const std::vector<double>& times, const Vector& integrand);

/// Composite trapezoid quadrature.
double trapezoid(const std::vector<double>& times, const Vector& integrand);

/// Per-sample quadratic form s(t)ᵀ·W·s(t).
Vector quadratic_series(const SampledSignal& s, const Matrix& w);

}  // namespace daeobs

#include "daeobs/signal.h"

#include <cmath>

#include <fmt/format.h>

#include "daeobs/errors.h"

namespace daeobs {

SampledSignal::SampledSignal(std::vector<double> t, Matrix v)
    : times(std::move(t)), values(std::move(v)) {
  if (static_cast<Eigen::Index>(times.size()) != values.cols()) {
    throw InputError(fmt::format("signal has {} time points but {} samples",
                                 times.size(), values.cols()));
  }
  for (size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw InputError("signal time grid must be strictly increasing");
    }
  }
}

SampledSignal SampledSignal::zeros(std::vector<double> t, int dim) {
  const auto n = static_cast<Eigen::Index>(t.size());
  return SampledSignal(std::move(t), Matrix::Zero(dim, n));
}

bool SampledSignal::is_uniform(double rel_tol) const {
  if (times.size() < 2) return true;
  const double h = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  for (size_t i = 1; i < times.size(); ++i) {
    if (std::abs(times[i] - times[i - 1] - h) > rel_tol * h) return false;
  }
  return true;
}

double SampledSignal::step() const {
  if (times.size() < 2) throw InputError("signal needs at least two samples");
  if (!is_uniform()) throw InputError("signal grid is not uniform");
  return (times.back() - times.front()) / static_cast<double>(times.size() - 1);
}

std::vector<double> uniform_grid(double t1, int n_steps) {
  if (n_steps < 1 || !(t1 > 0.0)) {
    throw InputError("uniform_grid needs t1 > 0 and at least one step");
  }
  std::vector<double> grid(n_steps + 1);
  for (int i = 0; i <= n_steps; ++i) grid[i] = t1 * i / n_steps;
  return grid;
}

double default_step(const Matrix& a) {
  const double norm = spectral_norm(a);
  return norm > 0.0 ? std::min(1e-3, 0.01 / norm) : 1e-3;
}

namespace {

void check_dims(const Matrix& a, const Matrix& b, const Vector& x0, int input_dim) {
  if (a.rows() != a.cols() || x0.size() != a.rows() || b.rows() != a.rows()) {
    throw InputError("integrate_lti: inconsistent state dimensions");
  }
  if (b.cols() != input_dim) {
    throw InputError(fmt::format("integrate_lti: B has {} columns, input has {}",
                                 b.cols(), input_dim));
  }
}

template <typename InputAt>
SampledSignal rk4(const Matrix& a, const Matrix& b, const Vector& x0,
                  const std::vector<double>& grid, InputAt&& input_at) {
  const int n = static_cast<int>(grid.size());
  Matrix xs(a.rows(), n);
  Vector x = x0;
  xs.col(0) = x;
  for (int i = 0; i + 1 < n; ++i) {
    const double h = grid[i + 1] - grid[i];
    const auto [u0, um, u1] = input_at(i);
    const Vector k1 = a * x + b * u0;
    const Vector k2 = a * (x + 0.5 * h * k1) + b * um;
    const Vector k3 = a * (x + 0.5 * h * k2) + b * um;
    const Vector k4 = a * (x + h * k3) + b * u1;
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    xs.col(i + 1) = x;
  }
  return SampledSignal(grid, std::move(xs));
}

}  // namespace

SampledSignal integrate_lti(const Matrix& a, const Matrix& b, const Vector& x0,
                            const SampledSignal& u) {
  check_dims(a, b, x0, u.dim());
  if (u.size() >= 2) u.step();  // rejects non-uniform grids
  return rk4(a, b, x0, u.times, [&](int i) {
    Vector u0 = u.values.col(i);
    Vector u1 = u.values.col(i + 1);
    Vector um = 0.5 * (u0 + u1);
    return std::tuple{std::move(u0), std::move(um), std::move(u1)};
  });
}

SampledSignal integrate_lti(const Matrix& a, const Matrix& b, const Vector& x0,
                            const std::vector<double>& grid,
                            const InputFunction& u) {
  check_dims(a, b, x0, static_cast<int>(b.cols()));
  for (size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw InputError("integrate_lti: time grid must be strictly increasing");
    }
  }
  return rk4(a, b, x0, grid, [&](int i) {
    const double t0 = grid[i];
    const double t1 = grid[i + 1];
    return std::tuple{u(t0), u(0.5 * (t0 + t1)), u(t1)};
  });
}

SampledSignal sample(const InputFunction& u, const std::vector<double>& grid) {
  if (grid.empty()) return SampledSignal();
  const Vector first = u(grid.front());
  Matrix values(first.size(), static_cast<Eigen::Index>(grid.size()));
  values.col(0) = first;
  for (size_t i = 1; i < grid.size(); ++i) values.col(i) = u(grid[i]);
  return SampledSignal(grid, std::move(values));
}

SampledSignal output_map(const Matrix& c, const SampledSignal& x, const Matrix& d,
                         const SampledSignal& u) {
  if (c.cols() != x.dim()) throw InputError("output_map: C does not match state");
  Matrix y = c * x.values;
  if (d.cols() > 0) {
    if (d.cols() != u.dim() || u.size() != x.size() || d.rows() != c.rows()) {
      throw InputError("output_map: D does not match input");
    }
    y += d * u.values;
  }
  return SampledSignal(x.times, std::move(y));
}

double simpson(const std::vector<double>& times, const Vector& f) {
  const int n = static_cast<int>(times.size());
  if (f.size() != n) throw InputError("simpson: grid/integrand size mismatch");
  if (n < 2) return 0.0;
  const double h = (times.back() - times.front()) / (n - 1);
  const int intervals = n - 1;
  if (intervals == 1) return 0.5 * h * (f(0) + f(1));
  if (intervals == 2) return h / 3.0 * (f(0) + 4.0 * f(1) + f(2));
  const int simpson_end = intervals % 2 == 0 ? intervals : intervals - 3;
  double total = 0.0;
  if (simpson_end > 0) {
    double sum = f(0) + f(simpson_end);
    for (int i = 1; i < simpson_end; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * f(i);
    total = h / 3.0 * sum;
  }
  if (simpson_end != intervals) {
    const int j = simpson_end;
    total += 3.0 * h / 8.0 * (f(j) + 3.0 * f(j + 1) + 3.0 * f(j + 2) + f(j + 3));
  }
  return total;
}

double trapezoid(const std::vector<double>& times, const Vector& f) {
  const int n = static_cast<int>(times.size());
  if (f.size() != n) throw InputError("trapezoid: grid/integrand size mismatch");
  double total = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    total += 0.5 * (times[i + 1] - times[i]) * (f(i) + f(i + 1));
  }
  return total;
}

Vector quadratic_series(const SampledSignal& s, const Matrix& w) {
  if (w.rows() != s.dim() || w.cols() != s.dim()) {
    throw InputError("quadratic_series: weight does not match signal");
  }
  return (s.values.array() * (w * s.values).array()).colwise().sum().transpose();
}

}  // namespace daeobs

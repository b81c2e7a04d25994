#include "oracles/quadrature_oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace knodal::oracle {

namespace {

void require_profile(const PiecewiseProfile& f) {
  if (f.t.size() < 2 || f.t.size() != f.u.size())
    throw std::invalid_argument("profile needs at least two breakpoints");
  for (std::size_t j = 1; j < f.t.size(); ++j)
    if (!(f.t[j] > f.t[j - 1]))
      throw std::invalid_argument("profile breakpoints must be strictly increasing");
}

// ∫_a^b (c0 + c1 t)² t² dt expanded termwise
double segment_u2_t2(double a, double b, double c0, double c1) {
  const double p3 = (b * b * b - a * a * a) / 3.0;
  const double p4 = (b * b * b * b - a * a * a * a) / 4.0;
  const double b5 = b * b * b * b * b, a5 = a * a * a * a * a;
  const double p5 = (b5 - a5) / 5.0;
  return c0 * c0 * p3 + 2.0 * c0 * c1 * p4 + c1 * c1 * p5;
}

double simpson(double (*g)(double, double, double, double), double a, double b,
               double c0, double c1, double p) {
  const double m = 0.5 * (a + b);
  return (b - a) / 6.0 * (g(a, c0, c1, p) + 4.0 * g(m, c0, c1, p) + g(b, c0, c1, p));
}

double abs_p_t2(double t, double c0, double c1, double p) {
  return std::pow(std::fabs(c0 + c1 * t), p) * t * t;
}

double adaptive(double a, double b, double c0, double c1, double p, double whole,
                double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double left = simpson(&abs_p_t2, a, m, c0, c1, p);
  const double right = simpson(&abs_p_t2, m, b, c0, c1, p);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive(a, m, c0, c1, p, left, 0.5 * tol, depth - 1) +
         adaptive(m, b, c0, c1, p, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integral_u2_t2(const PiecewiseProfile& f) {
  require_profile(f);
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < f.t.size(); ++j) {
    const double a = f.t[j], b = f.t[j + 1];
    const double slope = (f.u[j + 1] - f.u[j]) / (b - a);
    const double c1 = slope, c0 = f.u[j] - slope * a;
    acc += segment_u2_t2(a, b, c0, c1);
  }
  return acc;
}

double integral_du2_t2(const PiecewiseProfile& f) {
  require_profile(f);
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < f.t.size(); ++j) {
    const double a = f.t[j], b = f.t[j + 1];
    const double slope = (f.u[j + 1] - f.u[j]) / (b - a);
    acc += slope * slope * (b * b * b - a * a * a) / 3.0;
  }
  return acc;
}

double integral_abs_p_t2(const PiecewiseProfile& f, double p) {
  require_profile(f);
  if (!(p > 0.0)) throw std::invalid_argument("exponent must be positive");
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < f.t.size(); ++j) {
    double a = f.t[j];
    const double b = f.t[j + 1];
    const double slope = (f.u[j + 1] - f.u[j]) / (b - a);
    const double c1 = slope, c0 = f.u[j] - slope * a;
    // split at the zero of u inside the segment: |u|^p has a kink there
    if (f.u[j] * f.u[j + 1] < 0.0) {
      const double z = -c0 / c1;
      if (z > a && z < b) {
        const double scale = std::max(std::fabs(f.u[j]), std::fabs(f.u[j + 1]));
        const double tol = 1e-13 * std::pow(scale, p) * (b - a) *
                           std::max(1.0, b * b);
        acc += adaptive(a, z, c0, c1, p, simpson(&abs_p_t2, a, z, c0, c1, p), tol, 48);
        a = z;
      }
    }
    const double scale = std::max(std::fabs(f.u[j]), std::fabs(f.u[j + 1]));
    const double tol = 1e-13 * std::max(std::pow(scale, p), 1e-300) * (b - a) *
                       std::max(1.0, b * b);
    acc += adaptive(a, b, c0, c1, p, simpson(&abs_p_t2, a, b, c0, c1, p), tol, 48);
  }
  return acc;
}

}  // namespace knodal::oracle

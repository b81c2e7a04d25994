#pragma once

#include <vector>

// Brute-force reference integrals for piecewise-linear radial profiles.
// Deliberately shares no code with the solver's quadrature or assembly:
// squares are integrated by closed-form polynomial antiderivatives, the
// |u|^p term by adaptive Simpson split at sign changes. Used by tests to
// produce reference values, never by the solver.
namespace knodal::oracle {

struct PiecewiseProfile {
  std::vector<double> t;  // strictly increasing breakpoints
  std::vector<double> u;  // values at the breakpoints
};

// ∫ u(t)² t² dt (no 4π factor)
double integral_u2_t2(const PiecewiseProfile& f);
// ∫ u'(t)² t² dt
double integral_du2_t2(const PiecewiseProfile& f);
// ∫ |u(t)|^p t² dt, adaptive Simpson with relative target 1e-13
double integral_abs_p_t2(const PiecewiseProfile& f, double p);

}  // namespace knodal::oracle

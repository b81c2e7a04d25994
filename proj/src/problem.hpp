#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace knodal {

// Thrown when an iteration fails to converge or a solvability condition is
// violated mid-solve. The message names the failing quantity and component.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Radial potential V(r), either a positive constant or a piecewise-linear
// table (t_j, v_j). The radial derivative V'(r) comes from the table slopes
// (identically zero for constants).
class Potential {
 public:
  static Potential constant(double v);
  // breakpoints must be strictly increasing, starting at t = 0
  static Potential table(std::vector<double> t, std::vector<double> v);

  double value(double r) const;
  double derivative(double r) const;
  double operator()(double r) const { return value(r); }

  // V_0: the positive floor of V over [0, r_max]
  double floor_value(double r_max) const;
  bool is_constant() const { return t_.empty(); }
  // last tabulated abscissa; table potentials must cover the whole domain
  double covers_until() const;

 private:
  Potential() = default;
  std::vector<double> t_, v_;  // empty t_ means constant v_[0]
};

enum class DomainMode { Ball, R3Emulation };

std::string mode_name(DomainMode mode);

// Parameters of the nonlocal radial problem
//   -(1 + b ∫|∇u|²) Δu + V(|x|) u = |u|^{p-2} u   on the ball of radius R,
// with 2 < p < 4 and a prescribed number k of radial sign changes.
struct ProblemParams {
  double b = 0.01;
  double p = 3.0;
  Potential potential = Potential::constant(1.0);
  double R = 10.0;
  DomainMode mode = DomainMode::Ball;
  int k = 0;

  // One message per violated constraint; empty when well formed.
  std::vector<std::string> validate() const;
};

}  // namespace knodal

#include "problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace knodal {

Potential Potential::constant(double v) {
  Potential p;
  p.v_ = {v};
  return p;
}

Potential Potential::table(std::vector<double> t, std::vector<double> v) {
  if (t.size() < 2 || t.size() != v.size())
    throw std::invalid_argument("potential table needs at least two (t, v) rows");
  if (t.front() != 0.0)
    throw std::invalid_argument("potential table must start at t = 0");
  for (std::size_t j = 1; j < t.size(); ++j)
    if (!(t[j] > t[j - 1]))
      throw std::invalid_argument("potential table abscissae must be strictly increasing");
  Potential p;
  p.t_ = std::move(t);
  p.v_ = std::move(v);
  return p;
}

double Potential::value(double r) const {
  if (t_.empty()) return v_[0];
  if (r <= t_.front()) return v_.front();
  if (r >= t_.back()) return v_.back();
  auto it = std::upper_bound(t_.begin(), t_.end(), r);
  std::size_t j = static_cast<std::size_t>(it - t_.begin());  // t_[j-1] <= r < t_[j]
  double w = (r - t_[j - 1]) / (t_[j] - t_[j - 1]);
  return v_[j - 1] + w * (v_[j] - v_[j - 1]);
}

double Potential::derivative(double r) const {
  if (t_.empty()) return 0.0;
  if (r <= t_.front() || r >= t_.back()) return 0.0;
  auto it = std::upper_bound(t_.begin(), t_.end(), r);
  std::size_t j = static_cast<std::size_t>(it - t_.begin());
  return (v_[j] - v_[j - 1]) / (t_[j] - t_[j - 1]);
}

double Potential::floor_value(double r_max) const {
  if (t_.empty()) return v_[0];
  // piecewise linear: the minimum over [0, r_max] is attained at a breakpoint
  // or at r_max
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < t_.size(); ++j)
    if (t_[j] <= r_max) m = std::min(m, v_[j]);
  m = std::min(m, value(r_max));
  return m;
}

double Potential::covers_until() const {
  if (t_.empty()) return std::numeric_limits<double>::infinity();
  return t_.back();
}

std::string mode_name(DomainMode mode) {
  return mode == DomainMode::Ball ? "ball" : "r3-emulation";
}

std::vector<std::string> ProblemParams::validate() const {
  std::vector<std::string> bad;
  std::ostringstream os;
  if (!(p > 2.0 && p < 4.0)) {
    os.str("");
    os << "p = " << p << ": p must lie in (2,4)";
    bad.push_back(os.str());
  }
  if (mode == DomainMode::R3Emulation && !(p > 3.0 && p < 4.0)) {
    os.str("");
    os << "p = " << p << ": r3-emulation requires p in (3,4); use mode = ball for p <= 3";
    bad.push_back(os.str());
  }
  if (!(b >= 0.0)) {
    os.str("");
    os << "b = " << b << ": the nonlocal coefficient must be nonnegative";
    bad.push_back(os.str());
  }
  if (!(R > 0.0)) {
    os.str("");
    os << "R = " << R << ": the domain radius must be positive";
    bad.push_back(os.str());
  }
  if (k < 0) {
    os.str("");
    os << "k = " << k << ": the sign-change count must be nonnegative";
    bad.push_back(os.str());
  }
  if (R > 0.0) {
    if (potential.covers_until() < R) {
      os.str("");
      os << "potential table ends at t = " << potential.covers_until()
         << " but the domain extends to R = " << R;
      bad.push_back(os.str());
    } else if (!(potential.floor_value(R) > 0.0)) {
      os.str("");
      os << "V has floor " << potential.floor_value(R)
         << " on [0,R]: the potential must be bounded below by a positive constant";
      bad.push_back(os.str());
    }
  }
  return bad;
}

}  // namespace knodal

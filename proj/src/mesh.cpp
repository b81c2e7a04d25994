#include "mesh.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace knodal {

// 5-point Gauss–Legendre shifted to [0,1]
const double kQuadXi[kQuadPoints] = {
    0.046910077030668004, 0.230765344947158450, 0.5,
    0.769234655052841550, 0.953089922969332000};
const double kQuadW[kQuadPoints] = {
    0.118463442528094544, 0.239314335249683234, 0.284444444444444444,
    0.239314335249683234, 0.118463442528094544};

GradingSpec GradingSpec::parse(const std::string& text) {
  GradingSpec g;
  if (text == "uniform") {
    g.kind = Kind::Uniform;
    return g;
  }
  const std::string prefix = "geometric:";
  if (text.rfind(prefix, 0) == 0) {
    g.kind = Kind::Geometric;
    std::size_t used = 0;
    double ratio = 0.0;
    try {
      ratio = std::stod(text.substr(prefix.size()), &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("grading = " + text + ": ratio is not a number");
    }
    if (used != text.size() - prefix.size() || !(ratio > 1.0))
      throw std::invalid_argument("grading = " + text + ": ratio must be a number > 1");
    g.ratio = ratio;
    return g;
  }
  throw std::invalid_argument("grading = " + text + ": expected 'uniform' or 'geometric:<ratio>'");
}

std::string GradingSpec::describe() const {
  if (kind == Kind::Uniform) return "uniform";
  std::ostringstream os;
  os << "geometric:" << ratio;
  return os.str();
}

namespace {

// Append the interior cell boundaries of [a, b] split into m cells whose
// widths shrink geometrically by `ratio` toward the `fine_right` end
// (fine_right = false grades toward a). The endpoints are not appended.
void geometric_boundaries(double a, double b, int m, double ratio, bool fine_right,
                          std::vector<double>& out) {
  // widths w0, w0/g, ..., w0/g^{m-1} toward the fine end
  const double g = ratio;
  double sum = 0.0, f = 1.0;
  for (int j = 0; j < m; ++j) {
    sum += f;
    f /= g;
  }
  const double w0 = (b - a) / sum;
  if (fine_right) {
    double pos = a, w = w0;
    for (int j = 0; j < m - 1; ++j) {
      pos += w;
      out.push_back(pos);
      w /= g;
    }
  } else {
    // mirror: finest cell first
    double pos = a, w = w0 / std::pow(g, m - 1);
    for (int j = 0; j < m - 1; ++j) {
      pos += w;
      out.push_back(pos);
      w *= g;
    }
  }
}

void uniform_boundaries(double a, double b, int m, std::vector<double>& out) {
  for (int j = 1; j < m; ++j) out.push_back(a + (b - a) * static_cast<double>(j) / m);
}

}  // namespace

RadialMesh build_mesh(const std::vector<double>& radii, const MeshSpec& spec) {
  if (radii.size() < 2) throw std::invalid_argument("radii must include the endpoints 0 and R");
  if (radii.front() != 0.0) throw std::invalid_argument("radii must start at 0");
  const double R = radii.back();
  if (!(R > 0.0)) throw std::invalid_argument("domain radius must be positive");
  if (spec.cells_per_annulus < 1) throw std::invalid_argument("cells_per_annulus must be >= 1");
  for (std::size_t i = 1; i < radii.size(); ++i) {
    const double gap = radii[i] - radii[i - 1];
    if (!(gap > 1e-12 * R)) {
      std::ostringstream os;
      os << "degenerate annulus " << i << ": gap " << gap << " between r = " << radii[i - 1]
         << " and r = " << radii[i] << " is below machine scale";
      throw SolverError(os.str());
    }
  }

  RadialMesh m;
  m.radii = radii;
  m.spec = spec;
  const std::size_t n_ann = radii.size() - 1;
  const int cells = spec.cells_per_annulus;

  m.nodes.push_back(0.0);
  m.junction.push_back(0);
  for (std::size_t i = 0; i < n_ann; ++i) {
    const double a = radii[i], b = radii[i + 1];
    const bool left_junction = (i > 0);
    const bool right_junction = (i + 1 < n_ann);
    if (spec.grading.kind == GradingSpec::Kind::Uniform || (!left_junction && !right_junction)) {
      uniform_boundaries(a, b, cells, m.nodes);
    } else if (left_junction && right_junction) {
      // fine cells at both junctions, coarse in the middle
      const int m_left = cells - cells / 2;
      const int m_right = cells / 2;
      const double mid = 0.5 * (a + b);
      geometric_boundaries(a, mid, m_left, spec.grading.ratio, false, m.nodes);
      m.nodes.push_back(mid);
      geometric_boundaries(mid, b, m_right, spec.grading.ratio, true, m.nodes);
    } else if (right_junction) {
      geometric_boundaries(a, b, cells, spec.grading.ratio, true, m.nodes);
    } else {
      geometric_boundaries(a, b, cells, spec.grading.ratio, false, m.nodes);
    }
    m.nodes.push_back(b);
    m.junction.push_back(m.nodes.size() - 1);
  }
  return m;
}

RadialMesh refine_halve(const RadialMesh& mesh) {
  RadialMesh m;
  m.radii = mesh.radii;
  m.spec = mesh.spec;
  m.spec.cells_per_annulus *= 2;
  m.nodes.reserve(2 * mesh.nodes.size());
  m.junction.reserve(mesh.junction.size());
  std::size_t next_junction = 0;
  for (std::size_t j = 0; j + 1 < mesh.nodes.size(); ++j) {
    if (mesh.junction[next_junction] == j) {
      m.junction.push_back(m.nodes.size());
      ++next_junction;
    }
    m.nodes.push_back(mesh.nodes[j]);
    m.nodes.push_back(0.5 * (mesh.nodes[j] + mesh.nodes[j + 1]));
  }
  m.nodes.push_back(mesh.nodes.back());
  m.junction.push_back(m.nodes.size() - 1);
  return m;
}

NodalCandidate zero_candidate(std::shared_ptr<const RadialMesh> mesh) {
  NodalCandidate c;
  c.comps.assign(mesh->annulus_count(), std::vector<double>(mesh->node_count(), 0.0));
  c.mesh = std::move(mesh);
  return c;
}

void enforce_support(NodalCandidate& c) {
  const RadialMesh& m = *c.mesh;
  for (std::size_t i = 0; i < c.comps.size(); ++i) {
    std::vector<double>& u = c.comps[i];
    const std::size_t lo = m.first_node(i), hi = m.last_node(i);
    for (std::size_t j = 0; j < lo; ++j) u[j] = 0.0;
    for (std::size_t j = hi + 1; j < u.size(); ++j) u[j] = 0.0;
    // junction endpoints carry homogeneous values; t = 0 stays free
    if (i > 0) u[lo] = 0.0;
    u[hi] = 0.0;
  }
}

std::vector<double> glue_components(const NodalCandidate& c) {
  std::vector<double> u(c.mesh->node_count(), 0.0);
  for (const auto& comp : c.comps)
    for (std::size_t j = 0; j < u.size(); ++j) u[j] += comp[j];
  return u;
}

int count_sign_changes(const std::vector<double>& u) {
  double peak = 0.0;
  for (double v : u) peak = std::max(peak, std::fabs(v));
  if (peak == 0.0) return 0;
  const double floor = 1e-9 * peak;
  int changes = 0, last_sign = 0;
  for (double v : u) {
    if (std::fabs(v) < floor) continue;
    const int s = v > 0.0 ? 1 : -1;
    if (last_sign != 0 && s != last_sign) ++changes;
    last_sign = s;
  }
  return changes;
}

}  // namespace knodal

#include "lidlab/manifolds/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace lidlab::manifolds {

int Component::intrinsic_dim() const {
  switch (kind) {
    case ComponentKind::point_mass: return 0;
    case ComponentKind::von_mises_circle: return 1;
    case ComponentKind::affine_gaussian: return static_cast<int>(variances.size());
  }
  throw std::logic_error("unreachable");
}

namespace {

void validate_component(const Component& c, int d) {
  if (!(c.weight > 0.0)) throw std::invalid_argument("component weight must be positive");
  if (c.mean.size() != d) throw std::invalid_argument("component mean has wrong dimension");
  if (!c.mean.allFinite()) throw std::invalid_argument("component mean must be finite");
  if (c.kind == ComponentKind::affine_gaussian) {
    const auto r = c.variances.size();
    if (r < 0 || r > d) throw std::invalid_argument("affine_gaussian rank outside [0, d]");
    if (r > 0) {
      if (c.basis.rows() != d || c.basis.cols() != r)
        throw std::invalid_argument("affine_gaussian basis must be d x rank");
      const Mat gram = c.basis.transpose() * c.basis;
      if ((gram - Mat::Identity(r, r)).cwiseAbs().maxCoeff() > 1e-9)
        throw std::invalid_argument("affine_gaussian basis columns must be orthonormal");
      if ((c.variances.array() <= 0.0).any())
        throw std::invalid_argument("affine_gaussian variances must be positive");
    }
  } else if (c.kind == ComponentKind::von_mises_circle) {
    if (c.basis.rows() != d || c.basis.cols() != 2)
      throw std::invalid_argument("von_mises_circle needs a d x 2 plane basis");
    if (!(c.radius > 0.0) || !(c.kappa > 0.0))
      throw std::invalid_argument("von_mises_circle radius and kappa must be positive");
  }
}

} // namespace

ManifoldSpec::ManifoldSpec(int ambient_dim, std::vector<Component> components)
    : ambient_dim_(ambient_dim), components_(std::move(components)) {
  if (ambient_dim_ <= 0) throw std::invalid_argument("ambient_dim must be positive");
  if (components_.empty()) throw std::invalid_argument("spec needs at least one component");
  double total = 0.0;
  for (const auto& c : components_) {
    validate_component(c, ambient_dim_);
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("component weights must sum to 1");
}

bool ManifoldSpec::has_closed_form_score() const {
  return std::none_of(components_.begin(), components_.end(), [](const Component& c) {
    return c.kind == ComponentKind::von_mises_circle;
  });
}

bool ManifoldSpec::has_class_labels() const {
  return std::all_of(components_.begin(), components_.end(),
                     [](const Component& c) { return c.class_label.has_value(); });
}

std::vector<int> ManifoldSpec::class_set() const {
  std::set<int> s;
  for (const auto& c : components_)
    if (c.class_label) s.insert(*c.class_label);
  return {s.begin(), s.end()};
}

ManifoldSpec ManifoldSpec::restrict_to_class(int class_label) const {
  std::vector<Component> kept;
  double total = 0.0;
  for (const auto& c : components_) {
    if (c.class_label && *c.class_label == class_label) {
      kept.push_back(c);
      total += c.weight;
    }
  }
  if (kept.empty())
    throw std::invalid_argument("restrict_to_class: no component with class " +
                                std::to_string(class_label));
  for (auto& c : kept) c.weight /= total;
  return ManifoldSpec(ambient_dim_, std::move(kept));
}

double ManifoldSpec::support_distance(const Component& c, const Vec& x) const {
  const Vec delta = x - c.mean;
  switch (c.kind) {
    case ComponentKind::point_mass:
      return delta.norm();
    case ComponentKind::affine_gaussian: {
      if (c.variances.size() == 0) return delta.norm();
      const Vec in_plane = c.basis.transpose() * delta;
      return (delta - c.basis * in_plane).norm();
    }
    case ComponentKind::von_mises_circle: {
      const Vec in_plane = c.basis.transpose() * delta;
      const Vec off_plane = delta - c.basis * in_plane;
      const double ring = std::abs(in_plane.norm() - c.radius);
      return std::sqrt(ring * ring + off_plane.squaredNorm());
    }
  }
  throw std::logic_error("unreachable");
}

namespace {

// Best-Fisher rejection sampler for the von Mises distribution.
double sample_von_mises(double mean_angle, double kappa, Rng& rng) {
  const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
  const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
  const double r = (1.0 + rho * rho) / (2.0 * rho);
  for (;;) {
    const double u1 = rng.uniform();
    const double z = std::cos(std::numbers::pi * u1);
    const double f = (1.0 + r * z) / (r + z);
    const double c = kappa * (r - f);
    const double u2 = rng.uniform();
    if (c * (2.0 - c) - u2 > 0.0 || std::log(c / std::max(u2, 1e-300)) + 1.0 - c >= 0.0) {
      const double u3 = rng.uniform();
      const double sign = (u3 > 0.5) ? 1.0 : -1.0;
      double theta = mean_angle + sign * std::acos(std::clamp(f, -1.0, 1.0));
      return std::remainder(theta, 2.0 * std::numbers::pi);
    }
  }
}

Vec sample_component(const Component& c, Rng& rng) {
  switch (c.kind) {
    case ComponentKind::point_mass:
      return c.mean;
    case ComponentKind::affine_gaussian: {
      if (c.variances.size() == 0) return c.mean;
      const Vec z = rng.gaussian_vec(c.variances.size());
      return c.mean + c.basis * (c.variances.array().sqrt() * z.array()).matrix();
    }
    case ComponentKind::von_mises_circle: {
      const double theta = sample_von_mises(c.mean_angle, c.kappa, rng);
      return c.mean + c.radius * (std::cos(theta) * c.basis.col(0) +
                                  std::sin(theta) * c.basis.col(1));
    }
  }
  throw std::logic_error("unreachable");
}

} // namespace

LabeledBatch sample_manifold(const ManifoldSpec& spec, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_manifold: n must be >= 1");
  Rng rng(seed);
  const auto& comps = spec.components();
  LabeledBatch out;
  out.points.resize(n, spec.ambient_dim());
  out.component_ids.resize(n);
  out.class_labels.resize(n);
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    double acc = 0.0;
    int idx = static_cast<int>(comps.size()) - 1;
    for (std::size_t j = 0; j < comps.size(); ++j) {
      acc += comps[j].weight;
      if (u < acc) {
        idx = static_cast<int>(j);
        break;
      }
    }
    out.points.row(i) = sample_component(comps[idx], rng).transpose();
    out.component_ids[i] = idx;
    out.class_labels[i] = comps[idx].class_label.value_or(-1);
  }
  return out;
}

int true_lid(const ManifoldSpec& spec, const Vec& x, double tol) {
  if (x.size() != spec.ambient_dim())
    throw std::invalid_argument("true_lid: point dimension mismatch");
  int best_dim = -1;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& c : spec.components()) {
    const double dist = spec.support_distance(c, x);
    if (dist > tol) continue;
    const int dim = c.intrinsic_dim();
    if (dist < best_dist - 1e-15 ||
        (std::abs(dist - best_dist) <= 1e-15 && dim < best_dim)) {
      best_dist = dist;
      best_dim = dim;
    }
  }
  if (best_dim < 0)
    throw std::invalid_argument("true_lid: point is farther than tol from every support");
  return best_dim;
}

// --- serialization --------------------------------------------------------

namespace {

nlohmann::json vec_to_json(const Vec& v) {
  auto a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

nlohmann::json mat_to_json(const Mat& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Vec vec_from_json(const nlohmann::json& j) {
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

Mat mat_from_json(const nlohmann::json& j) {
  const auto rows = j.size();
  const auto cols = rows ? j[0].size() : 0;
  Mat m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t k = 0; k < cols; ++k)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
  return m;
}

} // namespace

std::string ManifoldSpec::to_json() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["ambient_dim"] = ambient_dim_;
  auto comps = nlohmann::json::array();
  for (const auto& c : components_) {
    nlohmann::json cj;
    cj["weight"] = c.weight;
    cj["mean"] = vec_to_json(c.mean);
    if (c.class_label) cj["class_label"] = *c.class_label;
    switch (c.kind) {
      case ComponentKind::point_mass:
        cj["kind"] = "point_mass";
        break;
      case ComponentKind::affine_gaussian:
        cj["kind"] = "affine_gaussian";
        cj["basis"] = mat_to_json(c.basis);
        cj["variances"] = vec_to_json(c.variances);
        break;
      case ComponentKind::von_mises_circle:
        cj["kind"] = "von_mises_circle";
        cj["basis"] = mat_to_json(c.basis);
        cj["radius"] = c.radius;
        cj["kappa"] = c.kappa;
        cj["mean_angle"] = c.mean_angle;
        break;
    }
    comps.push_back(cj);
  }
  j["components"] = comps;
  return j.dump(2);
}

ManifoldSpec ManifoldSpec::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (j.value("schema_version", 0) != 1)
    throw std::invalid_argument("manifold spec: unsupported schema_version");
  const int d = j.at("ambient_dim").get<int>();
  std::vector<Component> comps;
  for (const auto& cj : j.at("components")) {
    Component c;
    c.weight = cj.at("weight").get<double>();
    c.mean = vec_from_json(cj.at("mean"));
    if (cj.contains("class_label")) c.class_label = cj["class_label"].get<int>();
    const std::string kind = cj.at("kind").get<std::string>();
    if (kind == "point_mass") {
      c.kind = ComponentKind::point_mass;
    } else if (kind == "affine_gaussian") {
      c.kind = ComponentKind::affine_gaussian;
      c.basis = mat_from_json(cj.at("basis"));
      c.variances = vec_from_json(cj.at("variances"));
    } else if (kind == "von_mises_circle") {
      c.kind = ComponentKind::von_mises_circle;
      c.basis = mat_from_json(cj.at("basis"));
      c.radius = cj.at("radius").get<double>();
      c.kappa = cj.at("kappa").get<double>();
      c.mean_angle = cj.at("mean_angle").get<double>();
    } else {
      throw std::invalid_argument("manifold spec: unknown component kind " + kind);
    }
    comps.push_back(std::move(c));
  }
  return ManifoldSpec(d, std::move(comps));
}

ManifoldSpec ManifoldSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("ManifoldSpec::load: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

void ManifoldSpec::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("ManifoldSpec::save: cannot open " + path);
  out << to_json() << "\n";
}

Component make_point_mass(Vec location, double weight, std::optional<int> cls) {
  Component c;
  c.kind = ComponentKind::point_mass;
  c.mean = std::move(location);
  c.weight = weight;
  c.class_label = cls;
  return c;
}

Component make_affine_gaussian(Vec mean, Mat basis, Vec variances, double weight,
                               std::optional<int> cls) {
  Component c;
  c.kind = ComponentKind::affine_gaussian;
  c.mean = std::move(mean);
  c.basis = std::move(basis);
  c.variances = std::move(variances);
  c.weight = weight;
  c.class_label = cls;
  return c;
}

Component make_von_mises_circle(Vec center, double radius, double kappa, double mean_angle,
                                double weight, std::optional<int> cls) {
  Component c;
  c.kind = ComponentKind::von_mises_circle;
  c.mean = std::move(center);
  c.basis = Mat::Zero(c.mean.size(), 2);
  c.basis(0, 0) = 1.0;
  c.basis(1, 1) = 1.0;
  c.radius = radius;
  c.kappa = kappa;
  c.mean_angle = mean_angle;
  c.weight = weight;
  c.class_label = cls;
  return c;
}

ManifoldSpec make_isotropic_gaussian(int dim, double scale) {
  return ManifoldSpec(
      dim, {make_affine_gaussian(Vec::Zero(dim), Mat::Identity(dim, dim),
                                 Vec::Constant(dim, scale * scale), 1.0)});
}

} // namespace lidlab::manifolds

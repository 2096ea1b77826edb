#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lidlab/core/rng.hpp"
#include "lidlab/core/types.hpp"

namespace lidlab::manifolds {

enum class ComponentKind { affine_gaussian, point_mass, von_mises_circle };

/// One mixture component of a synthetic ground-truth distribution.
///
/// affine_gaussian: mean + orthonormal basis (d x d0) + per-direction
///   variances; the support is the affine subspace mean + span(basis).
/// point_mass: an atom at `mean` (intrinsic dimension 0).
/// von_mises_circle: a von Mises angle distribution on the circle of radius
///   `radius` centred at `mean` inside the plane spanned by the first two
///   basis columns (intrinsic dimension 1).
struct Component {
  ComponentKind kind = ComponentKind::point_mass;
  double weight = 1.0;
  Vec mean;
  Mat basis;      // d x d0 orthonormal columns (affine_gaussian), d x 2 (circle)
  Vec variances;  // length d0 (affine_gaussian only), strictly positive
  double radius = 1.0;      // circle only
  double kappa = 1.0;       // circle concentration
  double mean_angle = 0.0;  // circle mean direction
  std::optional<int> class_label;

  int intrinsic_dim() const;
};

struct LabeledBatch {
  Batch points;                    // n x d
  std::vector<int> component_ids;  // per row
  std::vector<int> class_labels;   // per row, -1 when unlabeled
};

/// Synthetic mixture distribution with exact local intrinsic dimension at
/// every support point.
class ManifoldSpec {
 public:
  ManifoldSpec(int ambient_dim, std::vector<Component> components);

  int ambient_dim() const { return ambient_dim_; }
  const std::vector<Component>& components() const { return components_; }
  bool has_closed_form_score() const;
  bool has_class_labels() const;
  std::vector<int> class_set() const;

  /// Mixture restricted to components carrying `class_label`, renormalized.
  ManifoldSpec restrict_to_class(int class_label) const;

  /// Euclidean distance from x to the component's support set.
  double support_distance(const Component& c, const Vec& x) const;

  std::string to_json() const;
  static ManifoldSpec from_json(const std::string& text);
  static ManifoldSpec load(const std::string& path);
  void save(const std::string& path) const;

 private:
  int ambient_dim_;
  std::vector<Component> components_;
};

LabeledBatch sample_manifold(const ManifoldSpec& spec, int n, std::uint64_t seed);

/// Intrinsic dimension of the component nearest to x; ties resolve toward the
/// smaller dimension. Throws if x is farther than tol from every support.
int true_lid(const ManifoldSpec& spec, const Vec& x, double tol = 1e-6);

// --- convenience constructors -------------------------------------------

Component make_point_mass(Vec location, double weight, std::optional<int> cls = std::nullopt);
/// Axis-aligned or custom-basis Gaussian of rank = variances.size().
Component make_affine_gaussian(Vec mean, Mat basis, Vec variances, double weight,
                               std::optional<int> cls = std::nullopt);
Component make_von_mises_circle(Vec center, double radius, double kappa, double mean_angle,
                                double weight, std::optional<int> cls = std::nullopt);

/// Full-rank standard normal scaled by `scale`.
ManifoldSpec make_isotropic_gaussian(int dim, double scale = 1.0);

} // namespace lidlab::manifolds

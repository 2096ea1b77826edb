#include "doctest.h"

#include <cmath>

#include "lidlab/core/stats.hpp"
#include "lidlab/manifolds/manifold.hpp"

using namespace lidlab;
using namespace lidlab::manifolds;

namespace {

ManifoldSpec von_mises_mixture(double atom_weight = 0.2, double kappa = 4.0) {
  Vec origin = Vec::Zero(2);
  return ManifoldSpec(
      2, {make_point_mass(origin, atom_weight),
          make_von_mises_circle(origin, 1.0, kappa, M_PI / 2.0, 1.0 - atom_weight)});
}

} // namespace

TEST_CASE("point mass sampling is degenerate and bit-identical") {
  Vec loc(2);
  loc << 0.25, -1.5;
  const ManifoldSpec spec(2, {make_point_mass(loc, 1.0)});
  const auto batch = sample_manifold(spec, 5, 7);
  REQUIRE(batch.points.rows() == 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(batch.points(i, 0) == 0.25);
    CHECK(batch.points(i, 1) == -1.5);
  }
}

TEST_CASE("sampling rejects n = 0") {
  const auto spec = von_mises_mixture();
  CHECK_THROWS_AS(sample_manifold(spec, 0, 1), std::invalid_argument);
}

TEST_CASE("atom frequency concentrates at its weight") {
  const double w = 0.2;
  const auto spec = von_mises_mixture(w);
  const int n = 100000;
  const auto batch = sample_manifold(spec, n, 2024);
  int atoms = 0;
  for (int id : batch.component_ids) atoms += (id == 0);
  const double freq = static_cast<double>(atoms) / n;
  CHECK(std::abs(freq - w) <= 3.0 * std::sqrt(w * (1 - w) / n));

  // atom draws are exact duplicates, circle draws lie on the circle
  for (int i = 0; i < n; i += 1000) {
    const Vec x = batch.points.row(i).transpose();
    if (batch.component_ids[static_cast<std::size_t>(i)] == 0) {
      CHECK(x.norm() == 0.0);
    } else {
      CHECK(x.norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("von mises angles favor the mean direction") {
  const auto spec = von_mises_mixture(0.0001, 4.0);
  const auto batch = sample_manifold(spec, 20000, 5);
  int near_mean = 0, near_antipode = 0;
  for (int i = 0; i < batch.points.rows(); ++i) {
    if (batch.component_ids[static_cast<std::size_t>(i)] != 1) continue;
    const double angle = std::atan2(batch.points(i, 1), batch.points(i, 0));
    if (std::abs(angle - M_PI / 2.0) < 0.5) ++near_mean;
    if (std::abs(angle + M_PI / 2.0) < 0.5) ++near_antipode;
  }
  CHECK(near_mean > 50 * std::max(near_antipode, 1));
}

TEST_CASE("true_lid picks the nearest component, ties to smaller dimension") {
  const auto spec = von_mises_mixture();
  Vec atom = Vec::Zero(2);
  CHECK(true_lid(spec, atom) == 0);
  Vec circle(2);
  circle << std::cos(0.3), std::sin(0.3);
  CHECK(true_lid(spec, circle) == 1);
  Vec off(2);
  off << 0.5, 0.0;
  CHECK_THROWS_AS(true_lid(spec, off, 1e-6), std::invalid_argument);
  CHECK(true_lid(spec, off, 0.6) == 0); // atom and circle both within tol 0.6; atom is nearer

  // rank-2 affine gaussian in R^5
  Mat basis = Mat::Zero(5, 2);
  basis(0, 0) = 1.0;
  basis(1, 1) = 1.0;
  const ManifoldSpec plane(5, {make_affine_gaussian(Vec::Zero(5), basis, Vec::Ones(2), 1.0)});
  Vec on_plane = Vec::Zero(5);
  on_plane[0] = 2.7;
  on_plane[1] = -0.4;
  CHECK(true_lid(plane, on_plane) == 2);
}

TEST_CASE("class restriction cannot raise the true LID") {
  Vec atom = Vec::Zero(2);
  Mat basis = Mat::Identity(2, 2);
  const ManifoldSpec spec(
      2, {make_point_mass(atom, 0.3, 0),
          make_affine_gaussian(Vec::Zero(2), basis, Vec::Ones(2), 0.7, 1)});
  const auto restricted = spec.restrict_to_class(0);
  const auto batch = sample_manifold(spec, 200, 11);
  for (int i = 0; i < batch.points.rows(); ++i) {
    const Vec x = batch.points.row(i).transpose();
    if (batch.class_labels[static_cast<std::size_t>(i)] != 0) continue;
    CHECK(true_lid(restricted, x) <= true_lid(spec, x));
  }
}

TEST_CASE("affine gaussian sample moments converge at the monte carlo rate") {
  Mat basis = Mat::Zero(3, 2);
  basis(0, 0) = 1.0;
  basis(2, 1) = 1.0;
  Vec variances(2);
  variances << 1.0, 0.25;
  Vec mean(3);
  mean << 1.0, -2.0, 0.5;
  const ManifoldSpec spec(3, {make_affine_gaussian(mean, basis, variances, 1.0)});
  const int n = 200000;
  const auto batch = sample_manifold(spec, n, 99);
  const Vec emp_mean = batch.points.colwise().mean().transpose();
  CHECK((emp_mean - mean).cwiseAbs().maxCoeff() < 3.0 / std::sqrt(static_cast<double>(n)));
  const Mat centered = batch.points.rowwise() - emp_mean.transpose();
  const Mat cov = centered.transpose() * centered / (n - 1);
  Mat expected = Mat::Zero(3, 3);
  expected(0, 0) = 1.0;
  expected(2, 2) = 0.25;
  CHECK((cov - expected).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("spec json round-trips losslessly") {
  const auto spec = von_mises_mixture(0.2, 4.0);
  const auto text = spec.to_json();
  const auto back = ManifoldSpec::from_json(text);
  CHECK(back.ambient_dim() == 2);
  REQUIRE(back.components().size() == 2);
  CHECK(back.components()[0].weight == spec.components()[0].weight);
  CHECK(back.components()[1].kappa == spec.components()[1].kappa);
  CHECK(back.components()[1].mean_angle == spec.components()[1].mean_angle);
  // identical draws after a round trip
  const auto a = sample_manifold(spec, 50, 3);
  const auto b = sample_manifold(back, 50, 3);
  CHECK((a.points - b.points).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("spec validation rejects broken inputs") {
  Vec v2 = Vec::Zero(2);
  CHECK_THROWS(ManifoldSpec(2, {make_point_mass(v2, 0.5)})); // weights must sum to 1
  Mat bad_basis(2, 2);
  bad_basis << 1.0, 1.0, 0.0, 0.0; // not orthonormal
  CHECK_THROWS(ManifoldSpec(2, {make_affine_gaussian(v2, bad_basis, Vec::Ones(2), 1.0)}));
}

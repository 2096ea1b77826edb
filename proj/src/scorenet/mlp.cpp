#include "lidlab/scorenet/mlp.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lidlab::scorenet {

namespace {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// SiLU: phi(z) = z * sigmoid(z)
inline double silu(double z) { return z * sigmoid(z); }
inline double silu_d1(double z) {
  const double s = sigmoid(z);
  return s * (1.0 + z * (1.0 - s));
}
inline double silu_d2(double z) {
  const double s = sigmoid(z);
  return s * (1.0 - s) * (2.0 + z * (1.0 - 2.0 * s));
}

template <typename F>
Vec map_vec(const Vec& v, F f) {
  Vec out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = f(v[i]);
  return out;
}

template <typename F>
Mat map_mat(const Mat& m, F f) {
  Mat out(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) out(i, j) = f(m(i, j));
  return out;
}

} // namespace

void Architecture::validate() const {
  if (ambient_dim <= 0) throw std::invalid_argument("Architecture: ambient_dim must be positive");
  if (cond_dim < 0) throw std::invalid_argument("Architecture: cond_dim must be >= 0");
  if (fourier_features <= 0)
    throw std::invalid_argument("Architecture: fourier_features must be positive");
  if (hidden.empty()) throw std::invalid_argument("Architecture: need at least one hidden layer");
  for (int h : hidden)
    if (h <= 0) throw std::invalid_argument("Architecture: hidden widths must be positive");
}

Vec time_features(double t, int count) {
  Vec out(2 * count);
  double omega = 2.0 * std::numbers::pi;
  for (int k = 0; k < count; ++k) {
    out[2 * k] = std::sin(omega * t);
    out[2 * k + 1] = std::cos(omega * t);
    omega *= 2.0;
  }
  return out;
}

Mlp::Mlp(Architecture arch) : arch_(std::move(arch)) {
  arch_.validate();
  dims_.push_back(arch_.input_dim());
  for (int h : arch_.hidden) dims_.push_back(h);
  dims_.push_back(arch_.ambient_dim);
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    weights.emplace_back(Mat::Zero(dims_[l + 1], dims_[l]));
    biases.emplace_back(Vec::Zero(dims_[l + 1]));
  }
}

void Mlp::init_params(Rng& rng) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const double scale = std::sqrt(2.0 / static_cast<double>(dims_[l]));
    for (Eigen::Index j = 0; j < weights[l].cols(); ++j)
      for (Eigen::Index i = 0; i < weights[l].rows(); ++i)
        weights[l](i, j) = scale * rng.gaussian();
    biases[l].setZero();
  }
}

Eigen::Index Mlp::param_count() const {
  Eigen::Index n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
  return n;
}

Vec Mlp::flatten_params() const {
  Vec flat(param_count());
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    flat.segment(at, weights[l].size()) =
        Eigen::Map<const Vec>(weights[l].data(), weights[l].size());
    at += weights[l].size();
    flat.segment(at, biases[l].size()) = biases[l];
    at += biases[l].size();
  }
  return flat;
}

void Mlp::set_params(const Vec& flat) {
  if (flat.size() != param_count())
    throw std::invalid_argument("Mlp::set_params: wrong parameter count");
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    Eigen::Map<Vec>(weights[l].data(), weights[l].size()) = flat.segment(at, weights[l].size());
    at += weights[l].size();
    biases[l] = flat.segment(at, biases[l].size());
    at += biases[l].size();
  }
}

Vec Mlp::forward(const Vec& input) const {
  Vec a = input;
  const std::size_t L = weights.size();
  for (std::size_t l = 0; l < L; ++l) {
    Vec z = weights[l] * a + biases[l];
    a = (l + 1 < L) ? map_vec(z, silu) : std::move(z);
  }
  return a;
}

Vec Mlp::forward_cached(const Vec& input, Cache& cache) const {
  const std::size_t L = weights.size();
  cache.a.assign(L + 1, Vec());
  cache.z.assign(L, Vec());
  cache.a[0] = input;
  for (std::size_t l = 0; l < L; ++l) {
    cache.z[l] = weights[l] * cache.a[l] + biases[l];
    cache.a[l + 1] = (l + 1 < L) ? map_vec(cache.z[l], silu) : cache.z[l];
  }
  return cache.a[L];
}

Vec Mlp::input_vjp(const Cache& cache, const Vec& u) const {
  const std::size_t L = weights.size();
  Vec bar = u; // cotangent on z[L-1]
  for (std::size_t l = L; l-- > 0;) {
    Vec bar_a = weights[l].transpose() * bar;
    if (l == 0) return bar_a;
    bar = map_vec(cache.z[l - 1], silu_d1).cwiseProduct(bar_a);
  }
  return bar; // unreachable for L >= 1
}

Vec Mlp::jvp(const Cache& cache, const Vec& v, TangentCache* tangents) const {
  const std::size_t L = weights.size();
  if (tangents) tangents->zdot.assign(L, Vec());
  Vec adot = v;
  for (std::size_t l = 0; l < L; ++l) {
    Vec zdot = weights[l] * adot;
    if (tangents) tangents->zdot[l] = zdot;
    adot = (l + 1 < L) ? map_vec(cache.z[l], silu_d1).cwiseProduct(zdot) : std::move(zdot);
  }
  return adot;
}

Vec Mlp::jvp_input_grad(const Cache& cache, const TangentCache& tangents, const Vec& u) const {
  // Reverse pass through the tangent forward: the scalar is u^T zdot[L-1].
  // Primal adjoints pick up curvature through silu'' wherever the tangent
  // passed through an activation.
  const std::size_t L = weights.size();
  Vec pz = Vec::Zero(weights[L - 1].rows()); // adjoint of z[L-1]
  Vec pdz = u;                               // adjoint of zdot[L-1]
  Vec pa;
  for (std::size_t l = L; l-- > 0;) {
    pa = weights[l].transpose() * pz;
    Vec pda = weights[l].transpose() * pdz;
    if (l == 0) return pa;
    const Vec& zprev = cache.z[l - 1];
    const Vec d1 = map_vec(zprev, silu_d1);
    const Vec d2 = map_vec(zprev, silu_d2);
    pz = d1.cwiseProduct(pa) + d2.cwiseProduct(tangents.zdot[l - 1]).cwiseProduct(pda);
    pdz = d1.cwiseProduct(pda);
  }
  return pa; // unreachable for L >= 1
}

Mat Mlp::forward_batch(const Mat& X, std::vector<Mat>* Zs, std::vector<Mat>* As) const {
  const std::size_t L = weights.size();
  if (Zs) Zs->assign(L, Mat());
  if (As) As->assign(L + 1, Mat());
  Mat a = X;
  if (As) (*As)[0] = a;
  for (std::size_t l = 0; l < L; ++l) {
    Mat z = (weights[l] * a).colwise() + biases[l];
    if (Zs) (*Zs)[l] = z;
    a = (l + 1 < L) ? map_mat(z, silu) : std::move(z);
    if (As) (*As)[l + 1] = a;
  }
  return a;
}

void Mlp::backprop_batch(const std::vector<Mat>& Zs, const std::vector<Mat>& As,
                         const Mat& dOut, std::vector<Mat>& gW, std::vector<Vec>& gb) const {
  const std::size_t L = weights.size();
  gW.assign(L, Mat());
  gb.assign(L, Vec());
  Mat delta = dOut;
  for (std::size_t l = L; l-- > 0;) {
    gW[l] = delta * As[l].transpose();
    gb[l] = delta.rowwise().sum();
    if (l == 0) break;
    delta = map_mat(Zs[l - 1], silu_d1).cwiseProduct(weights[l].transpose() * delta);
  }
}

} // namespace lidlab::scorenet

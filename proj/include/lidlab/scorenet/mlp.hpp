#pragma once

#include <vector>

#include "lidlab/core/rng.hpp"
#include "lidlab/core/types.hpp"

namespace lidlab::scorenet {

struct Architecture {
  int ambient_dim = 0;
  int cond_dim = 0;
  std::vector<int> hidden = {256, 256, 256};
  int fourier_features = 8;

  int input_dim() const { return ambient_dim + 2 * fourier_features + cond_dim; }
  void validate() const;
};

/// sin/cos features of t at geometrically spaced frequencies 2*pi*2^k.
Vec time_features(double t, int count);

/// Fully connected network with SiLU hidden activations and a linear output
/// layer. Carries exact first- and mixed second-order derivative passes:
/// parameter backprop for training, input VJP/JVP, and the reverse pass
/// through a JVP needed for conditioning gradients of trace terms.
class Mlp {
 public:
  explicit Mlp(Architecture arch);

  const Architecture& arch() const { return arch_; }
  void init_params(Rng& rng);
  Eigen::Index param_count() const;
  Vec flatten_params() const;
  void set_params(const Vec& flat);

  struct Cache {
    std::vector<Vec> a; // a[0] = input, a[l+1] = activation outputs
    std::vector<Vec> z; // pre-activations
  };
  struct TangentCache {
    std::vector<Vec> zdot;
  };

  Vec forward(const Vec& input) const;
  Vec forward_cached(const Vec& input, Cache& cache) const;
  /// (d out / d input)^T u via reverse pass over a cached forward.
  Vec input_vjp(const Cache& cache, const Vec& u) const;
  /// (d out / d input) v via a tangent (dual) forward pass.
  Vec jvp(const Cache& cache, const Vec& v, TangentCache* tangents = nullptr) const;
  /// grad_input of u^T (d out / d input) v; needs both caches.
  Vec jvp_input_grad(const Cache& cache, const TangentCache& tangents, const Vec& u) const;

  /// Batched forward; columns are samples. Caches go to Zs/As when non-null.
  Mat forward_batch(const Mat& X, std::vector<Mat>* Zs = nullptr,
                    std::vector<Mat>* As = nullptr) const;
  /// Parameter gradients for batched output cotangents dOut (columns match X).
  void backprop_batch(const std::vector<Mat>& Zs, const std::vector<Mat>& As,
                      const Mat& dOut, std::vector<Mat>& gW, std::vector<Vec>& gb) const;

  std::vector<Mat> weights;
  std::vector<Vec> biases;

 private:
  Architecture arch_;
  std::vector<int> dims_; // input, hidden..., output
};

} // namespace lidlab::scorenet

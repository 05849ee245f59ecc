#pragma once

#include <map>

#include "gnrf/autodiff/ops_nn.hpp"
#include "gnrf/core/rng.hpp"

namespace gnrf::ad {

// Named learnable tensors. Iteration order is the sorted name order, which
// fixes the optimizer update order and the checkpoint layout.
template <class T>
class ParameterStoreT {
 public:
  TensorT<T> create(const std::string& name, Shape shape, std::vector<T> values) {
    check(!params_.count(name), "ParameterStore: duplicate parameter '" + name + "'");
    auto t = TensorT<T>::parameter(std::move(shape), std::move(values));
    params_.emplace(name, t);
    return t;
  }
  TensorT<T> create_fill(const std::string& name, const Shape& shape, T fill) {
    return create(name, shape, std::vector<T>(static_cast<size_t>(numel(shape)), fill));
  }
  TensorT<T> create_normal(const std::string& name, const Shape& shape, double stddev, Pcg32& rng) {
    std::vector<T> v(static_cast<size_t>(numel(shape)));
    for (auto& x : v) x = static_cast<T>(rng.normal() * stddev);
    return create(name, shape, std::move(v));
  }

  bool has(const std::string& name) const { return params_.count(name) > 0; }
  TensorT<T> get(const std::string& name) const {
    auto it = params_.find(name);
    check(it != params_.end(), "ParameterStore: unknown parameter '" + name + "'");
    return it->second;
  }

  void zero_grads() {
    for (auto& [name, t] : params_) t.node()->zero_grad_storage();
  }
  void set_trainable(const std::string& prefix, bool trainable) {
    for (auto& [name, t] : params_)
      if (name.rfind(prefix, 0) == 0) t.node()->requires_grad = trainable;
  }

  const std::map<std::string, TensorT<T>>& entries() const { return params_; }
  std::map<std::string, TensorT<T>>& entries() { return params_; }
  size_t size() const { return params_.size(); }

 private:
  std::map<std::string, TensorT<T>> params_;
};

// He-style init for layers feeding relu.
template <class T>
void init_linear_params(ParameterStoreT<T>& store, const std::string& name, int64_t out, int64_t in, Pcg32& rng) {
  store.create_normal(name + ".w", {out, in}, std::sqrt(2.0 / static_cast<double>(in)), rng);
  store.create_fill(name + ".b", {out}, T(0));
}

template <class T>
void init_conv2d_params(ParameterStoreT<T>& store, const std::string& name, int64_t cout, int64_t cin, int64_t k,
                        Pcg32& rng) {
  store.create_normal(name + ".w", {cout, cin, k, k}, std::sqrt(2.0 / static_cast<double>(cin * k * k)), rng);
  store.create_fill(name + ".b", {cout}, T(0));
}

template <class T>
void init_conv3d_params(ParameterStoreT<T>& store, const std::string& name, int64_t cout, int64_t cin, int64_t k,
                        Pcg32& rng) {
  store.create_normal(name + ".w", {cout, cin, k, k, k}, std::sqrt(2.0 / static_cast<double>(cin * k * k * k)), rng);
  store.create_fill(name + ".b", {cout}, T(0));
}

template <class T>
TensorT<T> linear_layer(const ParameterStoreT<T>& store, const std::string& name, const TensorT<T>& x) {
  return linear(x, store.get(name + ".w"), store.get(name + ".b"));
}

struct MhaWeights {
  std::string wq, bq, wk, bk, wv, bv, wo, bo;
};

template <class T>
struct MhaParams {
  TensorT<T> wq, bq, wk, bk, wv, bv, wo, bo;
};

template <class T>
MhaParams<T> init_mha_params(ParameterStoreT<T>& store, const std::string& name, int64_t dim, Pcg32& rng) {
  MhaParams<T> p;
  double s = std::sqrt(1.0 / static_cast<double>(dim));
  p.wq = store.create_normal(name + ".wq", {dim, dim}, s, rng);
  p.bq = store.create_fill(name + ".bq", {dim}, T(0));
  p.wk = store.create_normal(name + ".wk", {dim, dim}, s, rng);
  p.bk = store.create_fill(name + ".bk", {dim}, T(0));
  p.wv = store.create_normal(name + ".wv", {dim, dim}, s, rng);
  p.bv = store.create_fill(name + ".bv", {dim}, T(0));
  p.wo = store.create_normal(name + ".wo", {dim, dim}, s, rng);
  p.bo = store.create_fill(name + ".bo", {dim}, T(0));
  return p;
}

template <class T>
MhaParams<T> mha_params_from_store(const ParameterStoreT<T>& store, const std::string& name) {
  MhaParams<T> p;
  p.wq = store.get(name + ".wq");
  p.bq = store.get(name + ".bq");
  p.wk = store.get(name + ".wk");
  p.bk = store.get(name + ".bk");
  p.wv = store.get(name + ".wv");
  p.bv = store.get(name + ".bv");
  p.wo = store.get(name + ".wo");
  p.bo = store.get(name + ".bo");
  return p;
}

// Scaled dot-product multi-head attention over [B, L, D] sequences.
template <class T>
TensorT<T> multi_head_attention(const TensorT<T>& q_in, const TensorT<T>& k_in, const TensorT<T>& v_in,
                                const MhaParams<T>& p, int heads) {
  const Shape& s = q_in.shape();
  check(s.size() == 3, "multi_head_attention: expects [B,L,D], got " + shape_str(s));
  int64_t B = s[0], L = s[1], D = s[2];
  check(D % heads == 0, "multi_head_attention: dim " + std::to_string(D) + " not divisible by " +
                            std::to_string(heads) + " heads");
  int64_t dh = D / heads;
  auto split_heads = [&](const TensorT<T>& x, int64_t Lx) {
    // [B,Lx,D] -> [B*H, Lx, dh]
    auto r = reshape(x, {B, Lx, heads, dh});
    auto t = permute(r, {0, 2, 1, 3});
    return reshape(t, {B * heads, Lx, dh});
  };
  int64_t Lk = k_in.shape()[1];
  auto q = split_heads(linear(q_in, p.wq, p.bq), L);
  auto k = split_heads(linear(k_in, p.wk, p.bk), Lk);
  auto v = split_heads(linear(v_in, p.wv, p.bv), Lk);
  auto kt = permute(k, {0, 2, 1});                               // [BH, dh, Lk]
  auto scores = scale(matmul(q, kt), static_cast<T>(1.0 / std::sqrt(static_cast<double>(dh))));
  auto probs = softmax(scores, 2);                               // [BH, L, Lk]
  auto ctx = matmul(probs, v);                                   // [BH, L, dh]
  auto merged = reshape(permute(reshape(ctx, {B, heads, L, dh}), {0, 2, 1, 3}), {B, L, D});
  return linear(merged, p.wo, p.bo);
}

}  // namespace gnrf::ad

#pragma once

#include "gnrf/autodiff/ops.hpp"

namespace gnrf::ad {

// ---------------------------------------------------------------------------
// reductions (double accumulation regardless of storage type)

template <class T>
TensorT<T> sum_all(const TensorT<T>& a) {
  auto n = make_op_node<T>({1}, {a});
  const T* av = a.values().data();
  double acc = 0.0;
  int64_t len = a.numel();
  for (int64_t i = 0; i < len; ++i) acc += static_cast<double>(av[i]);
  n->values[0] = static_cast<T>(acc);
  if (n->requires_grad) {
    n->backward_fn = [](NodeT<T>& node) {
      NodeT<T>* na = node.parents[0].get();
      if (!na->requires_grad) return;
      T g = node.grad[0];
      T* ga = na->grad.data();
      int64_t len = na->numel();
      for (int64_t i = 0; i < len; ++i) ga[i] += g;
    };
  }
  return TensorT<T>(n);
}

template <class T>
TensorT<T> mean_all(const TensorT<T>& a) {
  return scale(sum_all(a), T(1) / static_cast<T>(a.numel()));
}

namespace detail {
inline void axis_split(const Shape& s, int axis, int64_t& outer, int64_t& len, int64_t& inner) {
  outer = 1;
  inner = 1;
  for (int d = 0; d < axis; ++d) outer *= s[d];
  len = s[axis];
  for (size_t d = axis + 1; d < s.size(); ++d) inner *= s[d];
}
}  // namespace detail

template <class T>
TensorT<T> sum_axis(const TensorT<T>& a, int axis, bool keepdim = false) {
  const Shape& s = a.shape();
  check(axis >= 0 && axis < static_cast<int>(s.size()), "sum_axis: axis out of range for " + shape_str(s));
  int64_t outer, len, inner;
  detail::axis_split(s, axis, outer, len, inner);
  Shape os;
  for (int d = 0; d < static_cast<int>(s.size()); ++d) {
    if (d == axis) {
      if (keepdim) os.push_back(1);
    } else {
      os.push_back(s[d]);
    }
  }
  if (os.empty()) os.push_back(1);
  auto n = make_op_node<T>(os, {a});
  const T* av = a.values().data();
  T* ov = n->values.data();
  for (int64_t o = 0; o < outer; ++o)
    for (int64_t i = 0; i < inner; ++i) {
      double acc = 0.0;
      for (int64_t l = 0; l < len; ++l) acc += static_cast<double>(av[(o * len + l) * inner + i]);
      ov[o * inner + i] = static_cast<T>(acc);
    }
  if (n->requires_grad) {
    n->backward_fn = [outer, len, inner](NodeT<T>& node) {
      NodeT<T>* na = node.parents[0].get();
      if (!na->requires_grad) return;
      const T* g = node.grad.data();
      T* ga = na->grad.data();
      for (int64_t o = 0; o < outer; ++o)
        for (int64_t l = 0; l < len; ++l)
          for (int64_t i = 0; i < inner; ++i) ga[(o * len + l) * inner + i] += g[o * inner + i];
    };
  }
  return TensorT<T>(n);
}

template <class T>
TensorT<T> mean_axis(const TensorT<T>& a, int axis, bool keepdim = false) {
  return scale(sum_axis(a, axis, keepdim), T(1) / static_cast<T>(a.shape()[axis]));
}

// ---------------------------------------------------------------------------
// shape ops

template <class T>
TensorT<T> reshape(const TensorT<T>& a, Shape new_shape) {
  check(numel(new_shape) == a.numel(),
        "reshape: cannot reshape " + shape_str(a.shape()) + " to " + shape_str(new_shape));
  auto n = make_op_node<T>(std::move(new_shape), {a});
  n->values = a.values();
  if (n->requires_grad) {
    n->backward_fn = [](NodeT<T>& node) {
      NodeT<T>* na = node.parents[0].get();
      if (!na->requires_grad) return;
      T* ga = na->grad.data();
      const T* g = node.grad.data();
      int64_t len = node.numel();
      for (int64_t i = 0; i < len; ++i) ga[i] += g[i];
    };
  }
  return TensorT<T>(n);
}

namespace detail {
inline std::vector<int64_t> row_major_strides(const Shape& s) {
  std::vector<int64_t> st(s.size(), 1);
  for (size_t d = s.size() - 1; d-- > 0;) st[d] = st[d + 1] * s[d + 1];
  return st;
}

// out flat index -> in flat index map for a permutation
inline void permute_map(const Shape& in_shape, const std::vector<int>& perm, std::vector<int64_t>& map) {
  Shape os(perm.size());
  for (size_t d = 0; d < perm.size(); ++d) os[d] = in_shape[perm[d]];
  auto ist = row_major_strides(in_shape);
  int64_t n = numel(os);
  map.resize(n);
  size_t nd = os.size();
  std::vector<int64_t> idx(nd, 0);
  int64_t ii = 0;
  std::vector<int64_t> step(nd);
  for (size_t d = 0; d < nd; ++d) step[d] = ist[perm[d]];
  for (int64_t oi = 0; oi < n; ++oi) {
    map[oi] = ii;
    for (size_t d = nd; d-- > 0;) {
      idx[d]++;
      ii += step[d];
      if (idx[d] < os[d]) break;
      idx[d] = 0;
      ii -= step[d] * os[d];
    }
  }
}
}  // namespace detail

template <class T>
TensorT<T> permute(const TensorT<T>& a, const std::vector<int>& perm) {
  const Shape& s = a.shape();
  check(perm.size() == s.size(), "permute: perm rank mismatch for " + shape_str(s));
  Shape os(perm.size());
  for (size_t d = 0; d < perm.size(); ++d) os[d] = s[perm[d]];
  auto n = make_op_node<T>(os, {a});
  auto map = std::make_shared<std::vector<int64_t>>();
  detail::permute_map(s, perm, *map);
  const T* av = a.values().data();
  T* ov = n->values.data();
  int64_t len = n->numel();
  for (int64_t i = 0; i < len; ++i) ov[i] = av[(*map)[i]];
  if (n->requires_grad) {
    n->backward_fn = [map](NodeT<T>& node) {
      NodeT<T>* na = node.parents[0].get();
      if (!na->requires_grad) return;
      const T* g = node.grad.data();
      T* ga = na->grad.data();
      int64_t len = node.numel();
      for (int64_t i = 0; i < len; ++i) ga[(*map)[i]] += g[i];
    };
  }
  return TensorT<T>(n);
}

template <class T>
TensorT<T> slice(const TensorT<T>& a, int axis, int64_t start, int64_t len) {
  const Shape& s = a.shape();
  check(axis >= 0 && axis < static_cast<int>(s.size()) && start >= 0 && len > 0 && start + len <= s[axis],
        "slice: invalid range on " + shape_str(s));
  int64_t outer, alen, inner;
  detail::axis_split(s, axis, outer, alen, inner);
  Shape os = s;
  os[axis] = len;
  auto n = make_op_node<T>(os, {a});
  const T* av = a.values().data();
  T* ov = n->values.data();
  for (int64_t o = 0; o < outer; ++o)
    std::copy(av + (o * alen + start) * inner, av + (o * alen + start + len) * inner, ov + o * len * inner);
  if (n->requires_grad) {
    n->backward_fn = [outer, alen, inner, start, len](NodeT<T>& node) {
      NodeT<T>* na = node.parents[0].get();
      if (!na->requires_grad) return;
      const T* g = node.grad.data();
      T* ga = na->grad.data();
      for (int64_t o = 0; o < outer; ++o) {
        const T* gsrc = g + o * len * inner;
        T* gdst = ga + (o * alen + start) * inner;
        for (int64_t i = 0; i < len * inner; ++i) gdst[i] += gsrc[i];
      }
    };
  }
  return TensorT<T>(n);
}

template <class T>
TensorT<T> concat(const std::vector<TensorT<T>>& parts, int axis) {
  check(!parts.empty(), "concat: empty input list");
  const Shape& s0 = parts[0].shape();
  check(axis >= 0 && axis < static_cast<int>(s0.size()), "concat: axis out of range for " + shape_str(s0));
  int64_t total = 0;
  for (const auto& p : parts) {
    const Shape& sp = p.shape();
    check(sp.size() == s0.size(), "concat: rank mismatch " + shape_str(sp) + " vs " + shape_str(s0));
    for (int d = 0; d < static_cast<int>(s0.size()); ++d)
      check(d == axis || sp[d] == s0[d], "concat: shape mismatch " + shape_str(sp) + " vs " + shape_str(s0));
    total += sp[axis];
  }
  Shape os = s0;
  os[axis] = total;
  auto n = make_op_node<T>(os, parts);
  int64_t outer, olen, inner;
  detail::axis_split(os, axis, outer, olen, inner);
  T* ov = n->values.data();
  int64_t off = 0;
  for (const auto& p : parts) {
    int64_t plen = p.shape()[axis];
    const T* pv = p.values().data();
    for (int64_t o = 0; o < outer; ++o)
      std::copy(pv + o * plen * inner, pv + (o + 1) * plen * inner, ov + (o * olen + off) * inner);
    off += plen;
  }
  if (n->requires_grad) {
    std::vector<int64_t> lens;
    for (const auto& p : parts) lens.push_back(p.shape()[axis]);
    n->backward_fn = [outer, olen, inner, lens](NodeT<T>& node) {
      const T* g = node.grad.data();
      int64_t off = 0;
      for (size_t pi = 0; pi < node.parents.size(); ++pi) {
        NodeT<T>* np = node.parents[pi].get();
        int64_t plen = lens[pi];
        if (np->requires_grad) {
          T* gp = np->grad.data();
          for (int64_t o = 0; o < outer; ++o) {
            const T* gsrc = g + (o * olen + off) * inner;
            T* gdst = gp + o * plen * inner;
            for (int64_t i = 0; i < plen * inner; ++i) gdst[i] += gsrc[i];
          }
        }
        off += plen;
      }
    };
  }
  return TensorT<T>(n);
}

// Select rows along the first axis. Indices are data, not differentiable.
template <class T>
TensorT<T> gather_rows(const TensorT<T>& a, std::vector<int64_t> indices) {
  const Shape& s = a.shape();
  check(!s.empty(), "gather_rows: scalar input");
  int64_t rows = s[0];
  int64_t inner = a.numel() / std::max<int64_t>(rows, 1);
  for (int64_t ix : indices) check(ix >= 0 && ix < rows, "gather_rows: index out of range in " + shape_str(s));
  Shape os = s;
  os[0] = static_cast<int64_t>(indices.size());
  auto n = make_op_node<T>(os, {a});
  const T* av = a.values().data();
  T* ov = n->values.data();
  auto idx = std::make_shared<std::vector<int64_t>>(std::move(indices));
  for (size_t m = 0; m < idx->size(); ++m)
    std::copy(av + (*idx)[m] * inner, av + ((*idx)[m] + 1) * inner, ov + static_cast<int64_t>(m) * inner);
  if (n->requires_grad) {
    n->backward_fn = [idx, inner](NodeT<T>& node) {
      NodeT<T>* na = node.parents[0].get();
      if (!na->requires_grad) return;
      const T* g = node.grad.data();
      T* ga = na->grad.data();
      for (size_t m = 0; m < idx->size(); ++m) {
        T* dst = ga + (*idx)[m] * inner;
        const T* src = g + static_cast<int64_t>(m) * inner;
        for (int64_t i = 0; i < inner; ++i) dst[i] += src[i];
      }
    };
  }
  return TensorT<T>(n);
}

}  // namespace gnrf::ad

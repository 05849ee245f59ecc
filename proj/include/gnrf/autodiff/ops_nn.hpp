#pragma once

#include "gnrf/autodiff/ops_shape.hpp"

namespace gnrf::ad {

template <class T>
TensorT<T> softmax(const TensorT<T>& a, int axis) {
  const Shape& s = a.shape();
  check(axis >= 0 && axis < static_cast<int>(s.size()), "softmax: axis out of range for " + shape_str(s));
  int64_t outer, len, inner;
  detail::axis_split(s, axis, outer, len, inner);
  auto n = make_op_node<T>(s, {a});
  const T* av = a.values().data();
  T* ov = n->values.data();
  gnrf::parallel_for(outer * inner, [&](int64_t q0, int64_t q1) {
    for (int64_t q = q0; q < q1; ++q) {
      int64_t o = q / inner, i = q % inner;
      int64_t base = o * len * inner + i;
      T mx = av[base];
      for (int64_t l = 1; l < len; ++l) mx = std::max(mx, av[base + l * inner]);
      double denom = 0.0;
      for (int64_t l = 0; l < len; ++l) {
        T e = std::exp(av[base + l * inner] - mx);
        ov[base + l * inner] = e;
        denom += static_cast<double>(e);
      }
      T inv = static_cast<T>(1.0 / denom);
      for (int64_t l = 0; l < len; ++l) ov[base + l * inner] *= inv;
    }
  }, 512);
  if (n->requires_grad) {
    n->backward_fn = [outer, len, inner](NodeT<T>& node) {
      NodeT<T>* na = node.parents[0].get();
      if (!na->requires_grad) return;
      const T* y = node.values.data();
      const T* g = node.grad.data();
      T* ga = na->grad.data();
      gnrf::parallel_for(outer * inner, [&](int64_t q0, int64_t q1) {
        for (int64_t q = q0; q < q1; ++q) {
          int64_t o = q / inner, i = q % inner;
          int64_t base = o * len * inner + i;
          double dot = 0.0;
          for (int64_t l = 0; l < len; ++l) dot += static_cast<double>(g[base + l * inner]) * y[base + l * inner];
          for (int64_t l = 0; l < len; ++l) {
            int64_t ix = base + l * inner;
            ga[ix] += y[ix] * (g[ix] - static_cast<T>(dot));
          }
        }
      }, 512);
    };
  }
  return TensorT<T>(n);
}

// Normalizes the last axis; gamma and beta are [C].
template <class T>
TensorT<T> layer_norm(const TensorT<T>& x, const TensorT<T>& gamma, const TensorT<T>& beta, T eps = T(1e-5)) {
  const Shape& s = x.shape();
  check(!s.empty(), "layer_norm: scalar input");
  int64_t C = s.back();
  check(gamma.shape() == Shape{C} && beta.shape() == Shape{C},
        "layer_norm: gamma/beta must be [" + std::to_string(C) + "], got " + shape_str(gamma.shape()) + " and " +
            shape_str(beta.shape()));
  int64_t rows = x.numel() / C;
  auto n = make_op_node<T>(s, {x, gamma, beta});
  const T* xv = x.values().data();
  const T* gv = gamma.values().data();
  const T* bv = beta.values().data();
  T* ov = n->values.data();
  // cache per-row mean and inverse std for the backward pass
  auto stats = std::make_shared<std::vector<T>>(static_cast<size_t>(rows) * 2);
  for (int64_t r = 0; r < rows; ++r) {
    const T* xr = xv + r * C;
    double mean = 0.0;
    for (int64_t c = 0; c < C; ++c) mean += static_cast<double>(xr[c]);
    mean /= static_cast<double>(C);
    double var = 0.0;
    for (int64_t c = 0; c < C; ++c) {
      double d = static_cast<double>(xr[c]) - mean;
      var += d * d;
    }
    var /= static_cast<double>(C);
    double inv_std = 1.0 / std::sqrt(var + static_cast<double>(eps));
    (*stats)[r * 2] = static_cast<T>(mean);
    (*stats)[r * 2 + 1] = static_cast<T>(inv_std);
    T* orow = ov + r * C;
    for (int64_t c = 0; c < C; ++c)
      orow[c] = static_cast<T>((static_cast<double>(xr[c]) - mean) * inv_std) * gv[c] + bv[c];
  }
  if (n->requires_grad) {
    n->backward_fn = [rows, C, stats](NodeT<T>& node) {
      NodeT<T>* nx = node.parents[0].get();
      NodeT<T>* ng = node.parents[1].get();
      NodeT<T>* nb = node.parents[2].get();
      const T* xv = nx->values.data();
      const T* gv = ng->values.data();
      const T* g = node.grad.data();
      for (int64_t r = 0; r < rows; ++r) {
        T mean = (*stats)[r * 2], inv_std = (*stats)[r * 2 + 1];
        const T* xr = xv + r * C;
        const T* gr = g + r * C;
        // xhat and the two row means the input gradient needs
        double m1 = 0.0, m2 = 0.0;
        for (int64_t c = 0; c < C; ++c) {
          T xhat = (xr[c] - mean) * inv_std;
          T gy = gr[c] * gv[c];
          m1 += static_cast<double>(gy);
          m2 += static_cast<double>(gy) * xhat;
        }
        m1 /= static_cast<double>(C);
        m2 /= static_cast<double>(C);
        if (nx->requires_grad) {
          T* gx = nx->grad.data() + r * C;
          for (int64_t c = 0; c < C; ++c) {
            T xhat = (xr[c] - mean) * inv_std;
            T gy = gr[c] * gv[c];
            gx[c] += static_cast<T>((static_cast<double>(gy) - m1 - static_cast<double>(xhat) * m2) *
                                    static_cast<double>(inv_std));
          }
        }
        if (ng->requires_grad) {
          T* gg = ng->grad.data();
          for (int64_t c = 0; c < C; ++c) gg[c] += gr[c] * ((xr[c] - mean) * inv_std);
        }
        if (nb->requires_grad) {
          T* gb = nb->grad.data();
          for (int64_t c = 0; c < C; ++c) gb[c] += gr[c];
        }
      }
    };
  }
  return TensorT<T>(n);
}

// ---------------------------------------------------------------------------
// differentiable samplers. Sample positions are data (fixed geometry), so
// gradients flow into the sampled map/volume only.

// fm [C,H,W]; pts are (u,v) pixel coordinates -> out [P,C].
// Out-of-bounds points produce zeros; valid_out (if given) receives 1/0 flags.
template <class T>
TensorT<T> bilinear_sample_diff(const TensorT<T>& fm, const std::vector<std::array<double, 2>>& pts,
                                std::vector<float>* valid_out = nullptr) {
  const Shape& s = fm.shape();
  check(s.size() == 3, "bilinear_sample_diff: feature map must be [C,H,W], got " + shape_str(s));
  int64_t C = s[0], H = s[1], W = s[2];
  int64_t P = static_cast<int64_t>(pts.size());
  auto n = make_op_node<T>({P, C}, {fm});
  // corner index + weight table, reused by backward
  struct Tap {
    int64_t i00, i10, i01, i11;
    T w00, w10, w01, w11;
    bool valid;
  };
  auto taps = std::make_shared<std::vector<Tap>>(static_cast<size_t>(P));
  if (valid_out) valid_out->assign(static_cast<size_t>(P), 0.0f);
  for (int64_t p = 0; p < P; ++p) {
    double u = pts[p][0], v = pts[p][1];
    Tap& t = (*taps)[p];
    if (!(u >= 0.0 && v >= 0.0 && u <= W - 1.0 && v <= H - 1.0)) {
      t.valid = false;
      continue;
    }
    int64_t x0 = static_cast<int64_t>(std::floor(u));
    int64_t y0 = static_cast<int64_t>(std::floor(v));
    if (x0 > W - 2) x0 = std::max<int64_t>(W - 2, 0);
    if (y0 > H - 2) y0 = std::max<int64_t>(H - 2, 0);
    int64_t x1 = std::min(x0 + 1, W - 1), y1 = std::min(y0 + 1, H - 1);
    double fu = u - x0, fv = v - y0;
    t.i00 = y0 * W + x0;
    t.i10 = y0 * W + x1;
    t.i01 = y1 * W + x0;
    t.i11 = y1 * W + x1;
    t.w00 = static_cast<T>((1 - fu) * (1 - fv));
    t.w10 = static_cast<T>(fu * (1 - fv));
    t.w01 = static_cast<T>((1 - fu) * fv);
    t.w11 = static_cast<T>(fu * fv);
    t.valid = true;
    if (valid_out) (*valid_out)[p] = 1.0f;
  }
  const T* fv_ = fm.values().data();
  T* ov = n->values.data();
  int64_t plane = H * W;
  gnrf::parallel_for(P, [&](int64_t p0, int64_t p1) {
    for (int64_t p = p0; p < p1; ++p) {
      const Tap& t = (*taps)[p];
      T* orow = ov + p * C;
      if (!t.valid) continue;  // already zero
      for (int64_t c = 0; c < C; ++c) {
        const T* plane_c = fv_ + c * plane;
        orow[c] = t.w00 * plane_c[t.i00] + t.w10 * plane_c[t.i10] + t.w01 * plane_c[t.i01] + t.w11 * plane_c[t.i11];
      }
    }
  }, 1024);
  if (n->requires_grad) {
    n->backward_fn = [taps, C, plane](NodeT<T>& node) {
      NodeT<T>* nf = node.parents[0].get();
      if (!nf->requires_grad) return;
      const T* g = node.grad.data();
      T* gf = nf->grad.data();
      int64_t P = static_cast<int64_t>(taps->size());
      for (int64_t p = 0; p < P; ++p) {
        const Tap& t = (*taps)[p];
        if (!t.valid) continue;
        const T* grow = g + p * C;
        for (int64_t c = 0; c < C; ++c) {
          T* plane_c = gf + c * plane;
          T gc = grow[c];
          plane_c[t.i00] += gc * t.w00;
          plane_c[t.i10] += gc * t.w10;
          plane_c[t.i01] += gc * t.w01;
          plane_c[t.i11] += gc * t.w11;
        }
      }
    };
  }
  return TensorT<T>(n);
}

// vol [D,H,W] -> out [P], or vol [D,H,W,C] -> out [P,C].
// pts are continuous (x,y,z) grid-point coordinates: x is the fastest axis of
// the volume layout (flat = (z*H + y)*W + x). Border-clamped.
template <class T>
TensorT<T> trilinear_sample_diff(const TensorT<T>& vol, const std::vector<std::array<double, 3>>& pts) {
  const Shape& s = vol.shape();
  check(s.size() == 3 || s.size() == 4, "trilinear_sample_diff: volume must be [D,H,W] or [D,H,W,C], got " + shape_str(s));
  int64_t D = s[0], H = s[1], W = s[2];
  int64_t C = s.size() == 4 ? s[3] : 1;
  int64_t P = static_cast<int64_t>(pts.size());
  Shape os = s.size() == 4 ? Shape{P, C} : Shape{P};
  auto n = make_op_node<T>(os, {vol});
  struct Tap {
    int64_t corner[8];
    T w[8];
  };
  auto taps = std::make_shared<std::vector<Tap>>(static_cast<size_t>(P));
  auto clampf = [](double v, double lo, double hi) { return v < lo ? lo : (v > hi ? hi : v); };
  for (int64_t p = 0; p < P; ++p) {
    double gx = clampf(pts[p][0], 0.0, static_cast<double>(W - 1));
    double gy = clampf(pts[p][1], 0.0, static_cast<double>(H - 1));
    double gz = clampf(pts[p][2], 0.0, static_cast<double>(D - 1));
    int64_t x0 = std::min<int64_t>(static_cast<int64_t>(gx), std::max<int64_t>(W - 2, 0));
    int64_t y0 = std::min<int64_t>(static_cast<int64_t>(gy), std::max<int64_t>(H - 2, 0));
    int64_t z0 = std::min<int64_t>(static_cast<int64_t>(gz), std::max<int64_t>(D - 2, 0));
    int64_t x1 = std::min(x0 + 1, W - 1), y1 = std::min(y0 + 1, H - 1), z1 = std::min(z0 + 1, D - 1);
    double fx = gx - x0, fy = gy - y0, fz = gz - z0;
    Tap& t = (*taps)[p];
    auto fl = [&](int64_t z, int64_t y, int64_t x) { return (z * H + y) * W + x; };
    t.corner[0] = fl(z0, y0, x0);
    t.corner[1] = fl(z0, y0, x1);
    t.corner[2] = fl(z0, y1, x0);
    t.corner[3] = fl(z0, y1, x1);
    t.corner[4] = fl(z1, y0, x0);
    t.corner[5] = fl(z1, y0, x1);
    t.corner[6] = fl(z1, y1, x0);
    t.corner[7] = fl(z1, y1, x1);
    t.w[0] = static_cast<T>((1 - fx) * (1 - fy) * (1 - fz));
    t.w[1] = static_cast<T>(fx * (1 - fy) * (1 - fz));
    t.w[2] = static_cast<T>((1 - fx) * fy * (1 - fz));
    t.w[3] = static_cast<T>(fx * fy * (1 - fz));
    t.w[4] = static_cast<T>((1 - fx) * (1 - fy) * fz);
    t.w[5] = static_cast<T>(fx * (1 - fy) * fz);
    t.w[6] = static_cast<T>((1 - fx) * fy * fz);
    t.w[7] = static_cast<T>(fx * fy * fz);
  }
  const T* vv = vol.values().data();
  T* ov = n->values.data();
  gnrf::parallel_for(P, [&](int64_t p0, int64_t p1) {
    for (int64_t p = p0; p < p1; ++p) {
      const Tap& t = (*taps)[p];
      for (int64_t c = 0; c < C; ++c) {
        T acc = T(0);
        for (int k = 0; k < 8; ++k) acc += t.w[k] * vv[t.corner[k] * C + c];
        ov[p * C + c] = acc;
      }
    }
  }, 1024);
  if (n->requires_grad) {
    n->backward_fn = [taps, C](NodeT<T>& node) {
      NodeT<T>* nv = node.parents[0].get();
      if (!nv->requires_grad) return;
      const T* g = node.grad.data();
      T* gv = nv->grad.data();
      int64_t P = static_cast<int64_t>(taps->size());
      for (int64_t p = 0; p < P; ++p) {
        const Tap& t = (*taps)[p];
        for (int64_t c = 0; c < C; ++c) {
          T gc = g[p * C + c];
          for (int k = 0; k < 8; ++k) gv[t.corner[k] * C + c] += gc * t.w[k];
        }
      }
    };
  }
  return TensorT<T>(n);
}

// ---------------------------------------------------------------------------
// alpha compositing: w_i = alpha_i * prod_{j<i} (1 - alpha_j), per row.

template <class T>
TensorT<T> transmittance_weights(const TensorT<T>& alpha) {
  const Shape& s = alpha.shape();
  check(s.size() == 2, "transmittance_weights: expects [rays, samples], got " + shape_str(s));
  int64_t R = s[0], K = s[1];
  auto n = make_op_node<T>(s, {alpha});
  const T* av = alpha.values().data();
  T* ov = n->values.data();
  gnrf::parallel_for(R, [&](int64_t r0, int64_t r1) {
    for (int64_t r = r0; r < r1; ++r) {
      const T* a = av + r * K;
      T* w = ov + r * K;
      T trans = T(1);
      for (int64_t i = 0; i < K; ++i) {
        w[i] = a[i] * trans;
        trans *= (T(1) - a[i]);
      }
    }
  }, 64);
  if (n->requires_grad) {
    n->backward_fn = [R, K](NodeT<T>& node) {
      NodeT<T>* na = node.parents[0].get();
      if (!na->requires_grad) return;
      const T* av = na->values.data();
      const T* g = node.grad.data();
      T* ga = na->grad.data();
      // dL/da_k = g_k T_k - sum_{i>k} g_i a_i P_i, with P rebuilt per k to
      // avoid dividing by (1 - a_k); O(K^2) per ray.
      gnrf::parallel_for(R, [&](int64_t r0, int64_t r1) {
        for (int64_t r = r0; r < r1; ++r) {
          const T* a = av + r * K;
          const T* gr = g + r * K;
          T* gar = ga + r * K;
          T Tk = T(1);
          for (int64_t k = 0; k < K; ++k) {
            T acc = gr[k] * Tk;
            T P = Tk;
            for (int64_t i = k + 1; i < K; ++i) {
              acc -= gr[i] * a[i] * P;
              P *= (T(1) - a[i]);
            }
            gar[k] += acc;
            Tk *= (T(1) - a[k]);
          }
        }
      }, 16);
    };
  }
  return TensorT<T>(n);
}

}  // namespace gnrf::ad

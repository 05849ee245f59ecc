#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "gnrf/autodiff/tensor.hpp"
#include "gnrf/core/threads.hpp"

namespace gnrf::ad {

// ---------------------------------------------------------------------------
// broadcasting machinery (numpy rules, right-aligned)

struct BroadcastPlan {
  Shape out;
  std::vector<int64_t> sa, sb;  // per-out-dim strides into a and b (0 = broadcast)
  bool same_shape = false;
};

inline BroadcastPlan make_broadcast(const Shape& a, const Shape& b, const char* opname) {
  BroadcastPlan plan;
  size_t nd = std::max(a.size(), b.size());
  plan.out.resize(nd);
  plan.sa.resize(nd);
  plan.sb.resize(nd);
  // element strides of a and b in their own layouts
  std::vector<int64_t> ea(nd, 1), eb(nd, 1);
  for (size_t d = 0; d < nd; ++d) {
    int64_t da = d < nd - a.size() ? 1 : a[d - (nd - a.size())];
    int64_t db = d < nd - b.size() ? 1 : b[d - (nd - b.size())];
    check(da == db || da == 1 || db == 1,
          std::string(opname) + ": incompatible shapes " + shape_str(a) + " vs " + shape_str(b));
    plan.out[d] = std::max(da, db);
  }
  int64_t stride = 1;
  for (size_t d = a.size(); d-- > 0;) {
    size_t od = d + (nd - a.size());
    plan.sa[od] = (a[d] == 1 && plan.out[od] != 1) ? 0 : stride;
    stride *= a[d];
  }
  for (size_t d = 0; d < nd - a.size(); ++d) plan.sa[d] = 0;
  stride = 1;
  for (size_t d = b.size(); d-- > 0;) {
    size_t od = d + (nd - b.size());
    plan.sb[od] = (b[d] == 1 && plan.out[od] != 1) ? 0 : stride;
    stride *= b[d];
  }
  for (size_t d = 0; d < nd - b.size(); ++d) plan.sb[d] = 0;
  plan.same_shape = (a == b);
  return plan;
}

// Calls f(out_index, a_index, b_index) for every output element.
template <class F>
void broadcast_loop(const BroadcastPlan& plan, F&& f) {
  int64_t n = numel(plan.out);
  if (plan.same_shape) {
    for (int64_t i = 0; i < n; ++i) f(i, i, i);
    return;
  }
  size_t nd = plan.out.size();
  std::vector<int64_t> idx(nd, 0);
  int64_t ai = 0, bi = 0;
  for (int64_t oi = 0; oi < n; ++oi) {
    f(oi, ai, bi);
    for (size_t d = nd; d-- > 0;) {
      idx[d]++;
      ai += plan.sa[d];
      bi += plan.sb[d];
      if (idx[d] < plan.out[d]) break;
      idx[d] = 0;
      ai -= plan.sa[d] * plan.out[d];
      bi -= plan.sb[d] * plan.out[d];
    }
  }
}

// ---------------------------------------------------------------------------
// elementwise binary ops

template <class T, class FwdF, class BwdF>
TensorT<T> binary_op(const char* name, const TensorT<T>& a, const TensorT<T>& b, FwdF fwd, BwdF bwd) {
  BroadcastPlan plan = make_broadcast(a.shape(), b.shape(), name);
  auto n = make_op_node<T>(plan.out, {a, b});
  const T* av = a.values().data();
  const T* bv = b.values().data();
  T* ov = n->values.data();
  broadcast_loop(plan, [&](int64_t oi, int64_t ai, int64_t bi) { ov[oi] = fwd(av[ai], bv[bi]); });
  if (n->requires_grad) {
    n->backward_fn = [plan, bwd](NodeT<T>& node) {
      NodeT<T>* na = node.parents[0].get();
      NodeT<T>* nb = node.parents[1].get();
      const T* av = na->values.data();
      const T* bv = nb->values.data();
      const T* g = node.grad.data();
      T* ga = na->requires_grad ? na->grad.data() : nullptr;
      T* gb = nb->requires_grad ? nb->grad.data() : nullptr;
      broadcast_loop(plan, [&](int64_t oi, int64_t ai, int64_t bi) {
        T da, db;
        bwd(av[ai], bv[bi], g[oi], da, db);
        if (ga) ga[ai] += da;
        if (gb) gb[bi] += db;
      });
    };
  }
  return TensorT<T>(n);
}

template <class T>
TensorT<T> add(const TensorT<T>& a, const TensorT<T>& b) {
  return binary_op<T>(
      "add", a, b, [](T x, T y) { return x + y; },
      [](T, T, T g, T& da, T& db) { da = g; db = g; });
}

template <class T>
TensorT<T> sub(const TensorT<T>& a, const TensorT<T>& b) {
  return binary_op<T>(
      "sub", a, b, [](T x, T y) { return x - y; },
      [](T, T, T g, T& da, T& db) { da = g; db = -g; });
}

template <class T>
TensorT<T> mul(const TensorT<T>& a, const TensorT<T>& b) {
  return binary_op<T>(
      "mul", a, b, [](T x, T y) { return x * y; },
      [](T x, T y, T g, T& da, T& db) { da = g * y; db = g * x; });
}

template <class T>
TensorT<T> div(const TensorT<T>& a, const TensorT<T>& b) {
  return binary_op<T>(
      "div", a, b, [](T x, T y) { return x / y; },
      [](T x, T y, T g, T& da, T& db) {
        da = g / y;
        db = -g * x / (y * y);
      });
}

template <class T>
TensorT<T> minimum(const TensorT<T>& a, const TensorT<T>& b) {
  return binary_op<T>(
      "minimum", a, b, [](T x, T y) { return x <= y ? x : y; },
      [](T x, T y, T g, T& da, T& db) {
        da = x <= y ? g : T(0);
        db = x <= y ? T(0) : g;
      });
}

template <class T>
TensorT<T> maximum(const TensorT<T>& a, const TensorT<T>& b) {
  return binary_op<T>(
      "maximum", a, b, [](T x, T y) { return x >= y ? x : y; },
      [](T x, T y, T g, T& da, T& db) {
        da = x >= y ? g : T(0);
        db = x >= y ? T(0) : g;
      });
}

// ---------------------------------------------------------------------------
// elementwise unary ops

template <class T, class FwdF, class BwdF>
TensorT<T> unary_op(const TensorT<T>& a, FwdF fwd, BwdF bwd_from_in_out) {
  auto n = make_op_node<T>(a.shape(), {a});
  const T* av = a.values().data();
  T* ov = n->values.data();
  int64_t len = n->numel();
  for (int64_t i = 0; i < len; ++i) ov[i] = fwd(av[i]);
  if (n->requires_grad) {
    n->backward_fn = [bwd_from_in_out](NodeT<T>& node) {
      NodeT<T>* na = node.parents[0].get();
      if (!na->requires_grad) return;
      const T* av = na->values.data();
      const T* yv = node.values.data();
      const T* g = node.grad.data();
      T* ga = na->grad.data();
      int64_t len = node.numel();
      for (int64_t i = 0; i < len; ++i) ga[i] += g[i] * bwd_from_in_out(av[i], yv[i]);
    };
  }
  return TensorT<T>(n);
}

template <class T>
TensorT<T> relu(const TensorT<T>& a) {
  return unary_op<T>(a, [](T x) { return x > T(0) ? x : T(0); }, [](T x, T) { return x > T(0) ? T(1) : T(0); });
}

template <class T>
TensorT<T> sigmoid(const TensorT<T>& a) {
  return unary_op<T>(a, [](T x) { return T(1) / (T(1) + std::exp(-x)); }, [](T, T y) { return y * (T(1) - y); });
}

template <class T>
TensorT<T> tanh_op(const TensorT<T>& a) {
  return unary_op<T>(a, [](T x) { return std::tanh(x); }, [](T, T y) { return T(1) - y * y; });
}

template <class T>
TensorT<T> exp_op(const TensorT<T>& a) {
  return unary_op<T>(a, [](T x) { return std::exp(x); }, [](T, T y) { return y; });
}

template <class T>
TensorT<T> log_op(const TensorT<T>& a) {
  return unary_op<T>(a, [](T x) { return std::log(x); }, [](T x, T) { return T(1) / x; });
}

template <class T>
TensorT<T> sqrt_op(const TensorT<T>& a) {
  return unary_op<T>(a, [](T x) { return std::sqrt(x); }, [](T, T y) { return T(0.5) / y; });
}

template <class T>
TensorT<T> abs_op(const TensorT<T>& a) {
  return unary_op<T>(a, [](T x) { return std::abs(x); },
                     [](T x, T) { return x > T(0) ? T(1) : (x < T(0) ? T(-1) : T(0)); });
}

template <class T>
TensorT<T> clamp_min(const TensorT<T>& a, T lo) {
  return unary_op<T>(a, [lo](T x) { return x < lo ? lo : x; }, [lo](T x, T) { return x > lo ? T(1) : T(0); });
}

template <class T>
TensorT<T> scale(const TensorT<T>& a, T c) {
  return unary_op<T>(a, [c](T x) { return x * c; }, [c](T, T) { return c; });
}

template <class T>
TensorT<T> add_scalar(const TensorT<T>& a, T c) {
  return unary_op<T>(a, [c](T x) { return x + c; }, [](T, T) { return T(1); });
}

template <class T>
TensorT<T> neg(const TensorT<T>& a) {
  return scale(a, T(-1));
}

// Copy that blocks gradient flow.
template <class T>
TensorT<T> detach(const TensorT<T>& a) {
  return TensorT<T>::constant(a.shape(), a.values());
}

// ---------------------------------------------------------------------------
// matmul / linear

// a [M,K] @ b [K,N]; a [B,M,K] @ b [B,K,N]; a [B,M,K] @ b [K,N].
template <class T>
TensorT<T> matmul(const TensorT<T>& a, const TensorT<T>& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  check((sa.size() == 2 || sa.size() == 3) && (sb.size() == 2 || sb.size() == 3) && sb.size() <= sa.size(),
        "matmul: unsupported ranks " + shape_str(sa) + " vs " + shape_str(sb));
  int64_t B = sa.size() == 3 ? sa[0] : 1;
  int64_t M = sa[sa.size() - 2], K = sa[sa.size() - 1];
  int64_t Kb = sb[sb.size() - 2], N = sb[sb.size() - 1];
  bool batched_b = sb.size() == 3;
  check(K == Kb && (!batched_b || sb[0] == B),
        "matmul: incompatible shapes " + shape_str(sa) + " vs " + shape_str(sb));
  Shape os = sa.size() == 3 ? Shape{B, M, N} : Shape{M, N};
  auto n = make_op_node<T>(os, {a, b});
  const T* av = a.values().data();
  const T* bv = b.values().data();
  T* ov = n->values.data();
  gnrf::parallel_for(B * M, [&](int64_t r0, int64_t r1) {
    for (int64_t r = r0; r < r1; ++r) {
      int64_t bb = r / M;
      const T* arow = av + r * K;
      const T* bmat = bv + (batched_b ? bb * K * N : 0);
      T* orow = ov + r * N;
      for (int64_t nn = 0; nn < N; ++nn) orow[nn] = T(0);
      for (int64_t k = 0; k < K; ++k) {
        T x = arow[k];
        const T* brow = bmat + k * N;
        for (int64_t nn = 0; nn < N; ++nn) orow[nn] += x * brow[nn];
      }
    }
  });
  if (n->requires_grad) {
    n->backward_fn = [B, M, K, N, batched_b](NodeT<T>& node) {
      NodeT<T>* na = node.parents[0].get();
      NodeT<T>* nb = node.parents[1].get();
      const T* av = na->values.data();
      const T* bv = nb->values.data();
      const T* g = node.grad.data();
      if (na->requires_grad) {
        T* ga = na->grad.data();
        gnrf::parallel_for(B * M, [&](int64_t r0, int64_t r1) {
          for (int64_t r = r0; r < r1; ++r) {
            int64_t bb = r / M;
            const T* grow = g + r * N;
            const T* bmat = bv + (batched_b ? bb * K * N : 0);
            T* garow = ga + r * K;
            for (int64_t k = 0; k < K; ++k) {
              const T* brow = bmat + k * N;
              T acc = T(0);
              for (int64_t nn = 0; nn < N; ++nn) acc += grow[nn] * brow[nn];
              garow[k] += acc;
            }
          }
        });
      }
      if (nb->requires_grad) {
        T* gb = nb->grad.data();
        if (batched_b) {
          gnrf::parallel_for(B, [&](int64_t b0, int64_t b1) {
            for (int64_t bb = b0; bb < b1; ++bb) {
              const T* ab = av + bb * M * K;
              const T* gbk = g + bb * M * N;
              T* gbm = gb + bb * K * N;
              for (int64_t m = 0; m < M; ++m) {
                const T* arow = ab + m * K;
                const T* grow = gbk + m * N;
                for (int64_t k = 0; k < K; ++k) {
                  T x = arow[k];
                  T* gbrow = gbm + k * N;
                  for (int64_t nn = 0; nn < N; ++nn) gbrow[nn] += x * grow[nn];
                }
              }
            }
          }, 1);
        } else {
          // shared rhs: accumulate over all rows sequentially (deterministic)
          for (int64_t r = 0; r < B * M; ++r) {
            const T* arow = av + r * K;
            const T* grow = g + r * N;
            for (int64_t k = 0; k < K; ++k) {
              T x = arow[k];
              T* gbrow = gb + k * N;
              for (int64_t nn = 0; nn < N; ++nn) gbrow[nn] += x * grow[nn];
            }
          }
        }
      }
    };
  }
  return TensorT<T>(n);
}

// x [..., In] -> [..., Out] with weight [Out, In] and optional bias [Out].
template <class T>
TensorT<T> linear(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b = TensorT<T>()) {
  const Shape& sx = x.shape();
  const Shape& sw = w.shape();
  check(sw.size() == 2, "linear: weight must be 2-D, got " + shape_str(sw));
  check(!sx.empty() && sx.back() == sw[1],
        "linear: input/weight mismatch " + shape_str(sx) + " vs " + shape_str(sw));
  bool has_bias = b.defined();
  if (has_bias)
    check(b.shape() == Shape{sw[0]}, "linear: bias shape " + shape_str(b.shape()) + " vs weight " + shape_str(sw));
  int64_t in = sw[1], out = sw[0];
  int64_t rows = x.numel() / in;
  Shape os = sx;
  os.back() = out;
  auto n = has_bias ? make_op_node<T>(os, {x, w, b}) : make_op_node<T>(os, {x, w});
  const T* xv = x.values().data();
  const T* wv = w.values().data();
  const T* bv = has_bias ? b.values().data() : nullptr;
  T* ov = n->values.data();
  gnrf::parallel_for(rows, [&](int64_t r0, int64_t r1) {
    for (int64_t r = r0; r < r1; ++r) {
      const T* xrow = xv + r * in;
      T* orow = ov + r * out;
      for (int64_t o = 0; o < out; ++o) {
        const T* wrow = wv + o * in;
        T acc = bv ? bv[o] : T(0);
        for (int64_t i = 0; i < in; ++i) acc += xrow[i] * wrow[i];
        orow[o] = acc;
      }
    }
  });
  if (n->requires_grad) {
    n->backward_fn = [rows, in, out, has_bias](NodeT<T>& node) {
      NodeT<T>* nx = node.parents[0].get();
      NodeT<T>* nw = node.parents[1].get();
      NodeT<T>* nb = has_bias ? node.parents[2].get() : nullptr;
      const T* xv = nx->values.data();
      const T* wv = nw->values.data();
      const T* g = node.grad.data();
      if (nx->requires_grad) {
        T* gx = nx->grad.data();
        gnrf::parallel_for(rows, [&](int64_t r0, int64_t r1) {
          for (int64_t r = r0; r < r1; ++r) {
            const T* grow = g + r * out;
            T* gxrow = gx + r * in;
            for (int64_t o = 0; o < out; ++o) {
              T go = grow[o];
              const T* wrow = wv + o * in;
              for (int64_t i = 0; i < in; ++i) gxrow[i] += go * wrow[i];
            }
          }
        });
      }
      if (nw->requires_grad) {
        T* gw = nw->grad.data();
        gnrf::parallel_for(out, [&](int64_t o0, int64_t o1) {
          for (int64_t o = o0; o < o1; ++o) {
            T* gwrow = gw + o * in;
            for (int64_t r = 0; r < rows; ++r) {
              T go = g[r * out + o];
              const T* xrow = xv + r * in;
              for (int64_t i = 0; i < in; ++i) gwrow[i] += go * xrow[i];
            }
          }
        }, 1);
      }
      if (nb && nb->requires_grad) {
        T* gb = nb->grad.data();
        for (int64_t r = 0; r < rows; ++r)
          for (int64_t o = 0; o < out; ++o) gb[o] += g[r * out + o];
      }
    };
  }
  return TensorT<T>(n);
}

// ---------------------------------------------------------------------------
// convolutions

inline int64_t conv_out_dim(int64_t in, int64_t k, int64_t stride, int64_t pad) {
  return (in + 2 * pad - k) / stride + 1;
}

// x [Cin,H,W], w [Cout,Cin,kh,kw], optional bias [Cout].
template <class T>
TensorT<T> conv2d(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b, int64_t stride, int64_t pad) {
  const Shape& sx = x.shape();
  const Shape& sw = w.shape();
  check(sx.size() == 3 && sw.size() == 4 && sx[0] == sw[1],
        "conv2d: incompatible shapes " + shape_str(sx) + " vs " + shape_str(sw));
  int64_t Cin = sx[0], H = sx[1], W = sx[2];
  int64_t Cout = sw[0], kh = sw[2], kw = sw[3];
  int64_t Ho = conv_out_dim(H, kh, stride, pad), Wo = conv_out_dim(W, kw, stride, pad);
  check(Ho > 0 && Wo > 0, "conv2d: output would be empty for input " + shape_str(sx));
  bool has_bias = b.defined();
  auto n = has_bias ? make_op_node<T>({Cout, Ho, Wo}, {x, w, b}) : make_op_node<T>({Cout, Ho, Wo}, {x, w});
  const T* xv = x.values().data();
  const T* wv = w.values().data();
  const T* bv = has_bias ? b.values().data() : nullptr;
  T* ov = n->values.data();
  gnrf::parallel_for(Cout * Ho, [&](int64_t q0, int64_t q1) {
    for (int64_t q = q0; q < q1; ++q) {
      int64_t co = q / Ho, oy = q % Ho;
      for (int64_t ox = 0; ox < Wo; ++ox) {
        T acc = bv ? bv[co] : T(0);
        for (int64_t ci = 0; ci < Cin; ++ci) {
          for (int64_t ky = 0; ky < kh; ++ky) {
            int64_t iy = oy * stride - pad + ky;
            if (iy < 0 || iy >= H) continue;
            const T* xrow = xv + (ci * H + iy) * W;
            const T* wrow = wv + ((co * Cin + ci) * kh + ky) * kw;
            for (int64_t kx = 0; kx < kw; ++kx) {
              int64_t ix = ox * stride - pad + kx;
              if (ix < 0 || ix >= W) continue;
              acc += xrow[ix] * wrow[kx];
            }
          }
        }
        ov[(co * Ho + oy) * Wo + ox] = acc;
      }
    }
  }, 8);
  if (n->requires_grad) {
    n->backward_fn = [Cin, H, W, Cout, kh, kw, Ho, Wo, stride, pad, has_bias](NodeT<T>& node) {
      NodeT<T>* nx = node.parents[0].get();
      NodeT<T>* nw = node.parents[1].get();
      NodeT<T>* nb = has_bias ? node.parents[2].get() : nullptr;
      const T* xv = nx->values.data();
      const T* wv = nw->values.data();
      const T* g = node.grad.data();
      if (nx->requires_grad) {
        // dx as a gather: dx[ci,iy,ix] = sum over (co,ky,kx) with oy,ox valid
        T* gx = nx->grad.data();
        gnrf::parallel_for(Cin * H, [&](int64_t q0, int64_t q1) {
          for (int64_t q = q0; q < q1; ++q) {
            int64_t ci = q / H, iy = q % H;
            for (int64_t ix = 0; ix < W; ++ix) {
              T acc = T(0);
              for (int64_t ky = 0; ky < kh; ++ky) {
                int64_t num = iy + pad - ky;
                if (num < 0 || num % stride) continue;
                int64_t oy = num / stride;
                if (oy >= Ho) continue;
                for (int64_t kx = 0; kx < kw; ++kx) {
                  int64_t numx = ix + pad - kx;
                  if (numx < 0 || numx % stride) continue;
                  int64_t ox = numx / stride;
                  if (ox >= Wo) continue;
                  for (int64_t co = 0; co < Cout; ++co)
                    acc += g[(co * Ho + oy) * Wo + ox] * wv[((co * Cin + ci) * kh + ky) * kw + kx];
                }
              }
              gx[(ci * H + iy) * W + ix] += acc;
            }
          }
        }, 8);
      }
      if (nw->requires_grad) {
        T* gw = nw->grad.data();
        gnrf::parallel_for(Cout, [&](int64_t c0, int64_t c1) {
          for (int64_t co = c0; co < c1; ++co) {
            for (int64_t ci = 0; ci < Cin; ++ci)
              for (int64_t ky = 0; ky < kh; ++ky)
                for (int64_t kx = 0; kx < kw; ++kx) {
                  T acc = T(0);
                  for (int64_t oy = 0; oy < Ho; ++oy) {
                    int64_t iy = oy * stride - pad + ky;
                    if (iy < 0 || iy >= H) continue;
                    for (int64_t ox = 0; ox < Wo; ++ox) {
                      int64_t ix = ox * stride - pad + kx;
                      if (ix < 0 || ix >= W) continue;
                      acc += g[(co * Ho + oy) * Wo + ox] * xv[(ci * H + iy) * W + ix];
                    }
                  }
                  gw[((co * Cin + ci) * kh + ky) * kw + kx] += acc;
                }
          }
        }, 1);
      }
      if (nb && nb->requires_grad) {
        T* gb = nb->grad.data();
        for (int64_t co = 0; co < Cout; ++co) {
          T acc = T(0);
          for (int64_t i = 0; i < Ho * Wo; ++i) acc += g[co * Ho * Wo + i];
          gb[co] += acc;
        }
      }
    };
  }
  return TensorT<T>(n);
}

// x [Cin,D,H,W], w [Cout,Cin,kd,kh,kw], optional bias [Cout].
template <class T>
TensorT<T> conv3d(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b, int64_t stride, int64_t pad) {
  const Shape& sx = x.shape();
  const Shape& sw = w.shape();
  check(sx.size() == 4 && sw.size() == 5 && sx[0] == sw[1],
        "conv3d: incompatible shapes " + shape_str(sx) + " vs " + shape_str(sw));
  int64_t Cin = sx[0], D = sx[1], H = sx[2], W = sx[3];
  int64_t Cout = sw[0], kd = sw[2], kh = sw[3], kw = sw[4];
  int64_t Do = conv_out_dim(D, kd, stride, pad), Ho = conv_out_dim(H, kh, stride, pad),
          Wo = conv_out_dim(W, kw, stride, pad);
  check(Do > 0 && Ho > 0 && Wo > 0, "conv3d: output would be empty for input " + shape_str(sx));
  bool has_bias = b.defined();
  auto n = has_bias ? make_op_node<T>({Cout, Do, Ho, Wo}, {x, w, b}) : make_op_node<T>({Cout, Do, Ho, Wo}, {x, w});
  const T* xv = x.values().data();
  const T* wv = w.values().data();
  const T* bv = has_bias ? b.values().data() : nullptr;
  T* ov = n->values.data();
  gnrf::parallel_for(Cout * Do, [&](int64_t q0, int64_t q1) {
    for (int64_t q = q0; q < q1; ++q) {
      int64_t co = q / Do, oz = q % Do;
      for (int64_t oy = 0; oy < Ho; ++oy)
        for (int64_t ox = 0; ox < Wo; ++ox) {
          T acc = bv ? bv[co] : T(0);
          for (int64_t ci = 0; ci < Cin; ++ci)
            for (int64_t kz = 0; kz < kd; ++kz) {
              int64_t iz = oz * stride - pad + kz;
              if (iz < 0 || iz >= D) continue;
              for (int64_t ky = 0; ky < kh; ++ky) {
                int64_t iy = oy * stride - pad + ky;
                if (iy < 0 || iy >= H) continue;
                const T* xrow = xv + ((ci * D + iz) * H + iy) * W;
                const T* wrow = wv + (((co * Cin + ci) * kd + kz) * kh + ky) * kw;
                for (int64_t kx = 0; kx < kw; ++kx) {
                  int64_t ix = ox * stride - pad + kx;
                  if (ix < 0 || ix >= W) continue;
                  acc += xrow[ix] * wrow[kx];
                }
              }
            }
          ov[((co * Do + oz) * Ho + oy) * Wo + ox] = acc;
        }
    }
  }, 1);
  if (n->requires_grad) {
    n->backward_fn = [Cin, D, H, W, Cout, kd, kh, kw, Do, Ho, Wo, stride, pad, has_bias](NodeT<T>& node) {
      NodeT<T>* nx = node.parents[0].get();
      NodeT<T>* nw = node.parents[1].get();
      NodeT<T>* nb = has_bias ? node.parents[2].get() : nullptr;
      const T* xv = nx->values.data();
      const T* wv = nw->values.data();
      const T* g = node.grad.data();
      if (nx->requires_grad) {
        T* gx = nx->grad.data();
        gnrf::parallel_for(Cin * D, [&](int64_t q0, int64_t q1) {
          for (int64_t q = q0; q < q1; ++q) {
            int64_t ci = q / D, iz = q % D;
            for (int64_t iy = 0; iy < H; ++iy)
              for (int64_t ix = 0; ix < W; ++ix) {
                T acc = T(0);
                for (int64_t kz = 0; kz < kd; ++kz) {
                  int64_t nz = iz + pad - kz;
                  if (nz < 0 || nz % stride) continue;
                  int64_t oz = nz / stride;
                  if (oz >= Do) continue;
                  for (int64_t ky = 0; ky < kh; ++ky) {
                    int64_t ny = iy + pad - ky;
                    if (ny < 0 || ny % stride) continue;
                    int64_t oy = ny / stride;
                    if (oy >= Ho) continue;
                    for (int64_t kx = 0; kx < kw; ++kx) {
                      int64_t nxi = ix + pad - kx;
                      if (nxi < 0 || nxi % stride) continue;
                      int64_t ox = nxi / stride;
                      if (ox >= Wo) continue;
                      for (int64_t co = 0; co < Cout; ++co)
                        acc += g[((co * Do + oz) * Ho + oy) * Wo + ox] *
                               wv[(((co * Cin + ci) * kd + kz) * kh + ky) * kw + kx];
                    }
                  }
                }
                gx[((ci * D + iz) * H + iy) * W + ix] += acc;
              }
          }
        }, 1);
      }
      if (nw->requires_grad) {
        T* gw = nw->grad.data();
        gnrf::parallel_for(Cout, [&](int64_t c0, int64_t c1) {
          for (int64_t co = c0; co < c1; ++co)
            for (int64_t ci = 0; ci < Cin; ++ci)
              for (int64_t kz = 0; kz < kd; ++kz)
                for (int64_t ky = 0; ky < kh; ++ky)
                  for (int64_t kx = 0; kx < kw; ++kx) {
                    T acc = T(0);
                    for (int64_t oz = 0; oz < Do; ++oz) {
                      int64_t iz = oz * stride - pad + kz;
                      if (iz < 0 || iz >= D) continue;
                      for (int64_t oy = 0; oy < Ho; ++oy) {
                        int64_t iy = oy * stride - pad + ky;
                        if (iy < 0 || iy >= H) continue;
                        const T* grow = g + ((co * Do + oz) * Ho + oy) * Wo;
                        const T* xrow = xv + ((ci * D + iz) * H + iy) * W;
                        for (int64_t ox = 0; ox < Wo; ++ox) {
                          int64_t ix = ox * stride - pad + kx;
                          if (ix < 0 || ix >= W) continue;
                          acc += grow[ox] * xrow[ix];
                        }
                      }
                    }
                    gw[(((co * Cin + ci) * kd + kz) * kh + ky) * kw + kx] += acc;
                  }
        }, 1);
      }
      if (nb && nb->requires_grad) {
        T* gb = nb->grad.data();
        int64_t spatial = Do * Ho * Wo;
        for (int64_t co = 0; co < Cout; ++co) {
          T acc = T(0);
          for (int64_t i = 0; i < spatial; ++i) acc += g[co * spatial + i];
          gb[co] += acc;
        }
      }
    };
  }
  return TensorT<T>(n);
}

}  // namespace gnrf::ad

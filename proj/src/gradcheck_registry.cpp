#include "gnrf/autodiff/gradcheck.hpp"

namespace gnrf::ad {

namespace {

using Case = GradCheckSuite::Case;
using DTensor = GradCheckSuite::DTensor;

std::vector<double> rand_vals(Pcg32& rng, int64_t n, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(static_cast<size_t>(n));
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

// values with |x| in [margin, 1], random sign — keeps clear of kinks at 0
std::vector<double> rand_vals_off_zero(Pcg32& rng, int64_t n, double margin = 0.15) {
  std::vector<double> v(static_cast<size_t>(n));
  for (auto& x : v) x = rng.uniform(margin, 1.0) * (rng.next_u32() & 1 ? 1.0 : -1.0);
  return v;
}

Shape rand_shape(Pcg32& rng, int max_rank = 3, int64_t max_dim = 5) {
  int rank = rng.uniform_int(1, max_rank);
  Shape s;
  for (int d = 0; d < rank; ++d) s.push_back(rng.uniform_int(1, static_cast<int>(max_dim)));
  return s;
}

Case binary_case(Pcg32& rng, bool broadcast_ok, double lo = -1.0, double hi = 1.0) {
  Case c;
  Shape sa = rand_shape(rng);
  Shape sb = sa;
  if (broadcast_ok && rng.next_u32() % 2) {
    // randomly squash dims of b to 1 (right-aligned broadcast)
    for (auto& d : sb)
      if (rng.next_u32() % 2) d = 1;
    if (rng.next_u32() % 4 == 0 && sb.size() > 1) sb.erase(sb.begin());
  }
  c.input_shapes = {sa, sb};
  c.input_values = {rand_vals(rng, numel(sa), lo, hi), rand_vals(rng, numel(sb), lo, hi)};
  return c;
}

Case unary_case(Pcg32& rng, std::vector<double> (*gen)(Pcg32&, int64_t)) {
  Case c;
  Shape s = rand_shape(rng);
  c.input_shapes = {s};
  c.input_values = {gen(rng, numel(s))};
  return c;
}

}  // namespace

GradCheckSuite GradCheckSuite::standard() {
  GradCheckSuite suite;

  suite.add("add", [](Pcg32& rng) { return binary_case(rng, true); },
            [](const std::vector<DTensor>& in) { return gnrf::ad::add(in[0], in[1]); });
  suite.add("sub", [](Pcg32& rng) { return binary_case(rng, true); },
            [](const std::vector<DTensor>& in) { return sub(in[0], in[1]); });
  suite.add("mul", [](Pcg32& rng) { return binary_case(rng, true); },
            [](const std::vector<DTensor>& in) { return mul(in[0], in[1]); });
  suite.add("div",
            [](Pcg32& rng) {
              Case c = binary_case(rng, true);
              for (auto& x : c.input_values[1]) x = (x < 0 ? -1 : 1) * (0.4 + std::abs(x));
              return c;
            },
            [](const std::vector<DTensor>& in) { return div(in[0], in[1]); });
  suite.add("minimum",
            [](Pcg32& rng) {
              Case c = binary_case(rng, false);
              // keep the two arguments separated so FD does not cross the tie
              for (size_t i = 0; i < c.input_values[0].size(); ++i)
                if (std::abs(c.input_values[0][i] - c.input_values[1][i]) < 0.05)
                  c.input_values[1][i] += 0.2;
              return c;
            },
            [](const std::vector<DTensor>& in) { return minimum(in[0], in[1]); });
  suite.add("maximum",
            [](Pcg32& rng) {
              Case c = binary_case(rng, false);
              for (size_t i = 0; i < c.input_values[0].size(); ++i)
                if (std::abs(c.input_values[0][i] - c.input_values[1][i]) < 0.05)
                  c.input_values[1][i] += 0.2;
              return c;
            },
            [](const std::vector<DTensor>& in) { return maximum(in[0], in[1]); });

  suite.add("relu", [](Pcg32& rng) { return unary_case(rng, [](Pcg32& r, int64_t n) { return rand_vals_off_zero(r, n); }); },
            [](const std::vector<DTensor>& in) { return relu(in[0]); });
  suite.add("sigmoid", [](Pcg32& rng) { return unary_case(rng, [](Pcg32& r, int64_t n) { return rand_vals(r, n, -3, 3); }); },
            [](const std::vector<DTensor>& in) { return sigmoid(in[0]); });
  suite.add("tanh", [](Pcg32& rng) { return unary_case(rng, [](Pcg32& r, int64_t n) { return rand_vals(r, n, -3, 3); }); },
            [](const std::vector<DTensor>& in) { return tanh_op(in[0]); });
  suite.add("exp", [](Pcg32& rng) { return unary_case(rng, [](Pcg32& r, int64_t n) { return rand_vals(r, n, -2, 2); }); },
            [](const std::vector<DTensor>& in) { return exp_op(in[0]); });
  suite.add("log", [](Pcg32& rng) { return unary_case(rng, [](Pcg32& r, int64_t n) { return rand_vals(r, n, 0.5, 3); }); },
            [](const std::vector<DTensor>& in) { return log_op(in[0]); });
  suite.add("sqrt", [](Pcg32& rng) { return unary_case(rng, [](Pcg32& r, int64_t n) { return rand_vals(r, n, 0.5, 3); }); },
            [](const std::vector<DTensor>& in) { return sqrt_op(in[0]); });
  suite.add("abs", [](Pcg32& rng) { return unary_case(rng, [](Pcg32& r, int64_t n) { return rand_vals_off_zero(r, n); }); },
            [](const std::vector<DTensor>& in) { return abs_op(in[0]); });
  suite.add("clamp_min",
            [](Pcg32& rng) { return unary_case(rng, [](Pcg32& r, int64_t n) { return rand_vals_off_zero(r, n, 0.2); }); },
            [](const std::vector<DTensor>& in) { return clamp_min(in[0], 0.05); });

  suite.add("matmul_2d",
            [](Pcg32& rng) {
              int64_t m = rng.uniform_int(1, 5), k = rng.uniform_int(1, 5), n = rng.uniform_int(1, 5);
              Case c;
              c.input_shapes = {{m, k}, {k, n}};
              c.input_values = {rand_vals(rng, m * k), rand_vals(rng, k * n)};
              return c;
            },
            [](const std::vector<DTensor>& in) { return matmul(in[0], in[1]); });
  suite.add("matmul_batched",
            [](Pcg32& rng) {
              int64_t b = rng.uniform_int(1, 3), m = rng.uniform_int(1, 4), k = rng.uniform_int(1, 4),
                      n = rng.uniform_int(1, 4);
              Case c;
              c.input_shapes = {{b, m, k}, {b, k, n}};
              c.input_values = {rand_vals(rng, b * m * k), rand_vals(rng, b * k * n)};
              return c;
            },
            [](const std::vector<DTensor>& in) { return matmul(in[0], in[1]); });
  suite.add("matmul_batched_shared",
            [](Pcg32& rng) {
              int64_t b = rng.uniform_int(1, 3), m = rng.uniform_int(1, 4), k = rng.uniform_int(1, 4),
                      n = rng.uniform_int(1, 4);
              Case c;
              c.input_shapes = {{b, m, k}, {k, n}};
              c.input_values = {rand_vals(rng, b * m * k), rand_vals(rng, k * n)};
              return c;
            },
            [](const std::vector<DTensor>& in) { return matmul(in[0], in[1]); });
  suite.add("linear",
            [](Pcg32& rng) {
              int64_t r = rng.uniform_int(1, 6), in = rng.uniform_int(1, 5), out = rng.uniform_int(1, 5);
              Case c;
              c.input_shapes = {{r, in}, {out, in}, {out}};
              c.input_values = {rand_vals(rng, r * in), rand_vals(rng, out * in), rand_vals(rng, out)};
              return c;
            },
            [](const std::vector<DTensor>& in) { return linear(in[0], in[1], in[2]); });

  suite.add("conv2d",
            [](Pcg32& rng) {
              int64_t ci = rng.uniform_int(1, 3), co = rng.uniform_int(1, 3);
              int64_t h = rng.uniform_int(4, 7), w = rng.uniform_int(4, 7), k = rng.uniform_int(1, 3);
              Case c;
              c.input_shapes = {{ci, h, w}, {co, ci, k, k}, {co}};
              c.input_values = {rand_vals(rng, ci * h * w), rand_vals(rng, co * ci * k * k), rand_vals(rng, co)};
              return c;
            },
            [](const std::vector<DTensor>& in) {
              return conv2d(in[0], in[1], in[2], /*stride=*/2, /*pad=*/1);
            });
  suite.add("conv2d_s1",
            [](Pcg32& rng) {
              int64_t ci = rng.uniform_int(1, 3), co = rng.uniform_int(1, 3);
              int64_t h = rng.uniform_int(3, 6), w = rng.uniform_int(3, 6);
              Case c;
              c.input_shapes = {{ci, h, w}, {co, ci, 3, 3}, {co}};
              c.input_values = {rand_vals(rng, ci * h * w), rand_vals(rng, co * ci * 9), rand_vals(rng, co)};
              return c;
            },
            [](const std::vector<DTensor>& in) { return conv2d(in[0], in[1], in[2], 1, 1); });
  suite.add("conv3d",
            [](Pcg32& rng) {
              int64_t ci = rng.uniform_int(1, 2), co = rng.uniform_int(1, 2);
              int64_t d = rng.uniform_int(3, 5), h = rng.uniform_int(3, 5), w = rng.uniform_int(3, 5);
              Case c;
              c.input_shapes = {{ci, d, h, w}, {co, ci, 3, 3, 3}, {co}};
              c.input_values = {rand_vals(rng, ci * d * h * w), rand_vals(rng, co * ci * 27), rand_vals(rng, co)};
              return c;
            },
            [](const std::vector<DTensor>& in) { return conv3d(in[0], in[1], in[2], 1, 1); });

  suite.add("softmax",
            [](Pcg32& rng) {
              Shape s = rand_shape(rng, 3, 5);
              Case c;
              c.input_shapes = {s};
              c.input_values = {rand_vals(rng, numel(s), -2, 2)};
              return c;
            },
            [](const std::vector<DTensor>& in) {
              return softmax(in[0], static_cast<int>(in[0].shape().size()) - 1);
            });
  suite.add("softmax_axis0",
            [](Pcg32& rng) {
              int64_t a = rng.uniform_int(2, 5), b = rng.uniform_int(1, 5);
              Case c;
              c.input_shapes = {{a, b}};
              c.input_values = {rand_vals(rng, a * b, -2, 2)};
              return c;
            },
            [](const std::vector<DTensor>& in) { return softmax(in[0], 0); });
  suite.add("layer_norm",
            [](Pcg32& rng) {
              int64_t r = rng.uniform_int(1, 5), ch = rng.uniform_int(2, 6);
              Case c;
              c.input_shapes = {{r, ch}, {ch}, {ch}};
              c.input_values = {rand_vals(rng, r * ch), rand_vals(rng, ch, 0.5, 1.5), rand_vals(rng, ch)};
              return c;
            },
            [](const std::vector<DTensor>& in) { return layer_norm(in[0], in[1], in[2]); });

  suite.add("sum_all", [](Pcg32& rng) { return unary_case(rng, [](Pcg32& r, int64_t n) { return rand_vals(r, n); }); },
            [](const std::vector<DTensor>& in) { return sum_all(in[0]); });
  suite.add("mean_axis",
            [](Pcg32& rng) {
              Shape s = rand_shape(rng, 3, 5);
              Case c;
              c.input_shapes = {s};
              c.input_values = {rand_vals(rng, numel(s))};
              return c;
            },
            [](const std::vector<DTensor>& in) { return mean_axis(in[0], 0); });
  suite.add("sum_axis_keepdim",
            [](Pcg32& rng) {
              int64_t a = rng.uniform_int(1, 4), b = rng.uniform_int(1, 4), ch = rng.uniform_int(1, 4);
              Case c;
              c.input_shapes = {{a, b, ch}};
              c.input_values = {rand_vals(rng, a * b * ch)};
              return c;
            },
            [](const std::vector<DTensor>& in) { return sum_axis(in[0], 1, true); });

  suite.add("reshape_permute",
            [](Pcg32& rng) {
              int64_t a = rng.uniform_int(1, 4), b = rng.uniform_int(1, 4), ch = rng.uniform_int(1, 4);
              Case c;
              c.input_shapes = {{a, b, ch}};
              c.input_values = {rand_vals(rng, a * b * ch)};
              return c;
            },
            [](const std::vector<DTensor>& in) {
              auto p = permute(in[0], {2, 0, 1});
              return reshape(p, {in[0].numel()});
            });
  suite.add("slice",
            [](Pcg32& rng) {
              int64_t a = rng.uniform_int(3, 6), b = rng.uniform_int(2, 5);
              Case c;
              c.input_shapes = {{a, b}};
              c.input_values = {rand_vals(rng, a * b)};
              return c;
            },
            [](const std::vector<DTensor>& in) { return slice(in[0], 0, 1, in[0].shape()[0] - 1); });
  suite.add("concat",
            [](Pcg32& rng) {
              int64_t a = rng.uniform_int(1, 4), b = rng.uniform_int(1, 4), r = rng.uniform_int(1, 3);
              Case c;
              c.input_shapes = {{a, b}, {r, b}};
              c.input_values = {rand_vals(rng, a * b), rand_vals(rng, r * b)};
              return c;
            },
            [](const std::vector<DTensor>& in) { return concat<double>({in[0], in[1]}, 0); });
  suite.add("gather_rows",
            [](Pcg32& rng) {
              int64_t r = rng.uniform_int(2, 6), ch = rng.uniform_int(1, 4);
              Case c;
              c.input_shapes = {{r, ch}};
              c.input_values = {rand_vals(rng, r * ch)};
              return c;
            },
            [](const std::vector<DTensor>& in) {
              int64_t r = in[0].shape()[0];
              std::vector<int64_t> idx = {0, r - 1, 0};  // repeats exercise accumulation
              return gather_rows(in[0], idx);
            });

  suite.add("bilinear_sample",
            [](Pcg32& rng) {
              int64_t ch = rng.uniform_int(1, 3), h = rng.uniform_int(3, 6), w = rng.uniform_int(3, 6);
              Case c;
              c.input_shapes = {{ch, h, w}};
              c.input_values = {rand_vals(rng, ch * h * w)};
              return c;
            },
            [](const std::vector<DTensor>& in) {
              int64_t h = in[0].shape()[1], w = in[0].shape()[2];
              std::vector<std::array<double, 2>> pts = {{0.3 * (w - 1), 0.6 * (h - 1)},
                                                        {0.75 * (w - 1), 0.2 * (h - 1)},
                                                        {-3.0, 1.0}};  // one invalid
              return bilinear_sample_diff(in[0], pts);
            });
  suite.add("trilinear_sample",
            [](Pcg32& rng) {
              int64_t d = rng.uniform_int(3, 5), h = rng.uniform_int(3, 5), w = rng.uniform_int(3, 5);
              Case c;
              c.input_shapes = {{d, h, w}};
              c.input_values = {rand_vals(rng, d * h * w)};
              return c;
            },
            [](const std::vector<DTensor>& in) {
              int64_t d = in[0].shape()[0], h = in[0].shape()[1], w = in[0].shape()[2];
              std::vector<std::array<double, 3>> pts = {{0.4 * (w - 1), 0.3 * (h - 1), 0.7 * (d - 1)},
                                                        {0.9 * (w - 1), 0.8 * (h - 1), 0.1 * (d - 1)}};
              return trilinear_sample_diff(in[0], pts);
            });
  suite.add("trilinear_sample_vec",
            [](Pcg32& rng) {
              int64_t d = rng.uniform_int(2, 4), h = rng.uniform_int(2, 4), w = rng.uniform_int(2, 4);
              int64_t ch = rng.uniform_int(1, 3);
              Case c;
              c.input_shapes = {{d, h, w, ch}};
              c.input_values = {rand_vals(rng, d * h * w * ch)};
              return c;
            },
            [](const std::vector<DTensor>& in) {
              int64_t d = in[0].shape()[0], h = in[0].shape()[1], w = in[0].shape()[2];
              std::vector<std::array<double, 3>> pts = {{0.5 * (w - 1), 0.5 * (h - 1), 0.5 * (d - 1)},
                                                        {0.2 * (w - 1), 0.9 * (h - 1), 0.4 * (d - 1)}};
              return trilinear_sample_diff(in[0], pts);
            });

  suite.add("transmittance_weights",
            [](Pcg32& rng) {
              int64_t r = rng.uniform_int(1, 4), k = rng.uniform_int(2, 8);
              Case c;
              c.input_shapes = {{r, k}};
              c.input_values = {rand_vals(rng, r * k, 0.05, 0.95)};
              return c;
            },
            [](const std::vector<DTensor>& in) { return transmittance_weights(in[0]); });

  suite.add("multi_head_attention",
            [](Pcg32& rng) {
              int64_t b = rng.uniform_int(1, 2), l = rng.uniform_int(2, 4);
              int64_t d = 4;  // 2 heads of dim 2
              Case c;
              c.input_shapes = {{b, l, d}, {d, d}, {d}, {d, d}, {d}, {d, d}, {d}, {d, d}, {d}};
              c.input_values = {rand_vals(rng, b * l * d)};
              for (int t = 0; t < 4; ++t) {
                c.input_values.push_back(rand_vals(rng, d * d, -0.5, 0.5));
                c.input_values.push_back(rand_vals(rng, d, -0.2, 0.2));
              }
              return c;
            },
            [](const std::vector<DTensor>& in) {
              MhaParams<double> p;
              p.wq = in[1];
              p.bq = in[2];
              p.wk = in[3];
              p.bk = in[4];
              p.wv = in[5];
              p.bv = in[6];
              p.wo = in[7];
              p.bo = in[8];
              return multi_head_attention(in[0], in[0], in[0], p, 2);
            });

  return suite;
}

}  // namespace gnrf::ad

#include <doctest.h>

#include <filesystem>

#include "gnrf/autodiff/autodiff.hpp"

using namespace gnrf;
using namespace gnrf::ad;

TEST_CASE("sigmoid(0) = 0.5 and softmax of equal logits is uniform") {
  auto x = Tensor::scalar(0.0f);
  CHECK(sigmoid(x).item() == doctest::Approx(0.5));

  auto logits = Tensor::full({4}, 1.7f);
  auto p = softmax(logits, 0);
  for (int i = 0; i < 4; ++i) CHECK(p.values()[i] == doctest::Approx(0.25));
}

TEST_CASE("conv3d preserves constants in the interior under a normalized box kernel") {
  const float c = 0.8f;
  auto x = Tensor::full({1, 6, 6, 6}, c);
  auto w = Tensor::full({1, 1, 3, 3, 3}, 1.0f / 27.0f);
  auto out = conv3d(x, w, Tensor(), 1, 1);
  REQUIRE(out.shape() == Shape{1, 6, 6, 6});
  for (int64_t z = 1; z < 5; ++z)
    for (int64_t y = 1; y < 5; ++y)
      for (int64_t xx = 1; xx < 5; ++xx)
        CHECK(out.values()[(z * 6 + y) * 6 + xx] == doctest::Approx(c).epsilon(1e-6));
}

TEST_CASE("backward: polynomial derivative") {
  auto x = Tensor::parameter({2}, {1.0f, 2.0f});
  auto loss = sum_all(mul(x, x));
  backward(loss);
  CHECK(x.grad()[0] == doctest::Approx(2.0));
  CHECK(x.grad()[1] == doctest::Approx(4.0));
}

TEST_CASE("backward: sigmoid(w*x) at w=0, x=1 gives grad 0.25") {
  auto w = Tensor::parameter({1}, {0.0f});
  auto x = Tensor::scalar(1.0f);
  auto loss = sum_all(sigmoid(mul(w, x)));
  backward(loss);
  CHECK(w.grad()[0] == doctest::Approx(0.25));
}

TEST_CASE("backward rejects non-scalar loss") {
  auto x = Tensor::parameter({3}, {1, 2, 3});
  CHECK_THROWS(backward(mul(x, x)));
}

TEST_CASE("backward accumulates across calls without reset") {
  auto x = Tensor::parameter({1}, {3.0f});
  auto loss = mul(x, x);
  backward(loss);
  CHECK(x.grad()[0] == doctest::Approx(6.0));
  backward(loss);
  CHECK(x.grad()[0] == doctest::Approx(12.0));
}

TEST_CASE("backward linearity: scaling the loss scales gradients") {
  Pcg32 rng(99);
  auto gen = [&rng](int64_t n) {
    std::vector<double> v(n);
    for (auto& e : v) e = rng.uniform(-1, 1);
    return v;
  };
  auto x = TensorT<double>::parameter({8}, gen(8));
  auto y = TensorT<double>::parameter({8}, gen(8));
  auto build = [&](double a) {
    auto base = sum_all(mul(sigmoid(mul(x, y)), x));
    return scale(base, a);
  };
  auto l1 = build(1.0);
  backward(l1);
  auto g1 = x.grad();
  x.node()->zero_grad_storage();
  y.node()->zero_grad_storage();
  auto l3 = build(-2.5);
  backward(l3);
  for (size_t i = 0; i < g1.size(); ++i) CHECK(std::abs(x.grad()[i] - (-2.5) * g1[i]) < 1e-12);
}

TEST_CASE("shape mismatch reports both shapes") {
  auto a = Tensor::zeros({2, 3});
  auto b = Tensor::zeros({4});
  try {
    auto c = add(a, b);
    FAIL("expected throw");
  } catch (const std::invalid_argument& e) {
    std::string msg = e.what();
    CHECK(msg.find("[2,3]") != std::string::npos);
    CHECK(msg.find("[4]") != std::string::npos);
  }
}

TEST_CASE("broadcasting add/mul follow numpy rules") {
  auto a = Tensor::constant({2, 3}, {1, 2, 3, 4, 5, 6});
  auto b = Tensor::constant({3}, {10, 20, 30});
  auto c = add(a, b);
  CHECK(c.values() == std::vector<float>{11, 22, 33, 14, 25, 36});

  auto col = Tensor::constant({2, 1}, {2, 3});
  auto d = mul(a, col);
  CHECK(d.values() == std::vector<float>{2, 4, 6, 12, 15, 18});
}

TEST_CASE("gradcheck suite passes in double precision") {
  auto suite = GradCheckSuite::standard();
  auto reports = suite.run(/*seed=*/1234, /*tol=*/1e-4, /*repeats=*/3);
  for (const auto& r : reports) {
    INFO(r.kernel << " max_err=" << r.max_err);
    CHECK(r.pass);
  }
}

TEST_CASE("gradcheck flags a sign-flipped gradient (negative control)") {
  GradCheckSuite suite;
  suite.add(
      "broken_square",
      [](Pcg32& rng) {
        GradCheckSuite::Case c;
        c.input_shapes = {{4}};
        std::vector<double> v(4);
        for (auto& x : v) x = rng.uniform(0.5, 1.5);
        c.input_values = {v};
        return c;
      },
      [](const std::vector<TensorT<double>>& in) {
        auto n = make_op_node<double>(in[0].shape(), {in[0]});
        for (int i = 0; i < 4; ++i) n->values[i] = in[0].values()[i] * in[0].values()[i];
        n->backward_fn = [](NodeT<double>& node) {
          auto* p = node.parents[0].get();
          if (!p->requires_grad) return;
          for (int i = 0; i < 4; ++i) p->grad[i] += -2.0 * p->values[i] * node.grad[i];  // wrong sign
        };
        return TensorT<double>(n);
      });
  auto reports = suite.run(7, 1e-4, 2);
  REQUIRE(reports.size() == 1);
  CHECK_FALSE(reports[0].pass);
}

TEST_CASE("determinism: identical seeds give bit-identical forward and gradients") {
  auto run = [](uint64_t seed) {
    Pcg32 rng(seed);
    ParameterStore store;
    auto w = store.create_normal("w", {4, 4}, 0.5, rng);
    auto b = store.create_fill("b", {4}, 0.1f);
    std::vector<float> xv(8);
    Pcg32 rng2(seed + 1);
    for (auto& v : xv) v = rng2.next_float();
    auto x = Tensor::constant({2, 4}, xv);
    auto y = sum_all(relu(linear(x, w, b)));
    backward(y);
    return std::make_tuple(y.values(), w.grad(), b.grad());
  };
  auto [y1, gw1, gb1] = run(5);
  auto [y2, gw2, gb2] = run(5);
  CHECK(y1 == y2);
  CHECK(gw1 == gw2);
  CHECK(gb1 == gb2);
}

TEST_CASE("adam: zero gradient and zero weight decay leave parameters unchanged") {
  ParameterStore store;
  auto p = store.create("p", {3}, {1.0f, -2.0f, 0.5f});
  store.zero_grads();
  Adam opt;
  AdamConfig cfg;
  cfg.lr = 0.1;
  cfg.weight_decay = 0.0;
  opt.step(store, cfg);
  CHECK(p.values() == std::vector<float>{1.0f, -2.0f, 0.5f});
}

TEST_CASE("adam: hand-evaluated scalar update with unit moments") {
  ParameterStore store;
  auto p = store.create("p", {1}, {1.0f});
  p.node()->ensure_grad();
  p.node()->grad[0] = 1.0f;
  Adam opt;
  AdamConfig cfg;
  cfg.lr = 0.1;
  cfg.beta1 = 0.0;
  cfg.beta2 = 0.0;
  cfg.weight_decay = 0.0;
  cfg.eps = 0.0;
  opt.step(store, cfg);
  CHECK(p.values()[0] == doctest::Approx(0.9));
}

TEST_CASE("adam: defaults match the configured training hyperparameters") {
  AdamConfig cfg;
  CHECK(cfg.lr == 1e-4);
  CHECK(cfg.weight_decay == 0.01);
}

TEST_CASE("adam: missing gradient raises an error naming the parameter") {
  ParameterStore store;
  store.create("scene.enc.w", {2}, {1.0f, 2.0f});
  Adam opt;
  try {
    opt.step(store, AdamConfig{});
    FAIL("expected throw");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("scene.enc.w") != std::string::npos);
  }
}

TEST_CASE("checkpoint round trip is bit exact") {
  CheckpointMap m;
  Pcg32 rng(77);
  m["alpha"] = {{3, 2}, {}};
  for (int i = 0; i < 6; ++i) m["alpha"].values.push_back(rng.next_float() * 100 - 50);
  m["beta.w"] = {{5}, {0.1f, -0.2f, 0.3f, 1e-30f, 3e30f}};
  auto dir = std::filesystem::temp_directory_path();
  auto path = (dir / "gnrf_ckpt_test.bin").string();
  save_checkpoint(path, m);
  auto back = load_checkpoint(path);
  REQUIRE(back.size() == m.size());
  for (const auto& [name, entry] : m) {
    REQUIRE(back.count(name));
    CHECK(back[name].shape == entry.shape);
    REQUIRE(back[name].values.size() == entry.values.size());
    for (size_t i = 0; i < entry.values.size(); ++i) {
      // bit-exact comparison
      CHECK(std::memcmp(&back[name].values[i], &entry.values[i], 4) == 0);
    }
  }
  // second save of the loaded map produces identical bytes
  auto path2 = (dir / "gnrf_ckpt_test2.bin").string();
  save_checkpoint(path2, back);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(s1 == s2);
  std::filesystem::remove(path);
  std::filesystem::remove(path2);
}

TEST_CASE("checkpoint rejects corrupt magic") {
  auto path = (std::filesystem::temp_directory_path() / "gnrf_ckpt_bad.bin").string();
  std::ofstream(path, std::ios::binary) << "NOTACKPT" << std::string(16, '\0');
  CHECK_THROWS(load_checkpoint(path));
  std::filesystem::remove(path);
}

TEST_CASE("parameter freezing stops gradient flow and adam updates") {
  ParameterStore store;
  Pcg32 rng(3);
  auto w = store.create_normal("scene.w", {2, 2}, 1.0, rng);
  auto v = store.create_normal("grasp.w", {2, 2}, 1.0, rng);
  store.set_trainable("scene.", false);
  auto x = Tensor::constant({1, 2}, {1.0f, 2.0f});
  auto y = sum_all(add(linear(x, w, Tensor()), linear(x, v, Tensor())));
  CHECK(y.requires_grad());
  backward(y);
  CHECK(w.grad().empty());
  CHECK_FALSE(v.grad().empty());
  Adam opt;
  auto w_before = w.values();
  opt.step(store, AdamConfig{});  // must not demand grads for frozen params
  CHECK(w.values() == w_before);
}

TEST_CASE("transmittance weights reproduce the hand-evaluated composite") {
  auto alpha = Tensor::constant({1, 2}, {0.5f, 0.5f});
  auto w = transmittance_weights(alpha);
  CHECK(w.values()[0] == doctest::Approx(0.5));
  CHECK(w.values()[1] == doctest::Approx(0.25));
}

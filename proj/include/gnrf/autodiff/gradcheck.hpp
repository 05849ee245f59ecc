#pragma once

#include <functional>

#include "gnrf/autodiff/adam.hpp"

namespace gnrf::ad {

// Central finite-difference verification of every kernel's backward pass.
// Runs in double precision so the difference quotients themselves are
// trustworthy at eps = 1e-4.
struct GradCheckReport {
  std::string kernel;
  double max_err = 0.0;
  bool pass = false;
};

class GradCheckSuite {
 public:
  using DTensor = TensorT<double>;
  // Returns input value arrays + shapes; build maps fresh input tensors to an output tensor.
  struct Case {
    std::vector<Shape> input_shapes;
    std::vector<std::vector<double>> input_values;
  };
  using MakeCase = std::function<Case(Pcg32&)>;
  using Build = std::function<DTensor(const std::vector<DTensor>&)>;

  void add(const std::string& name, MakeCase make_case, Build build) {
    checks_.push_back({name, std::move(make_case), std::move(build)});
  }

  // Max relative error across `repeats` random cases of one registered kernel.
  static double run_case(const MakeCase& make_case, const Build& build, Pcg32& rng, int max_probes_per_input = 48,
                         double eps = 1e-4) {
    Case c = make_case(rng);
    const size_t ninp = c.input_shapes.size();
    std::vector<DTensor> inputs;
    for (size_t i = 0; i < ninp; ++i)
      inputs.push_back(DTensor::parameter(c.input_shapes[i], c.input_values[i]));
    DTensor out = build(inputs);
    std::vector<double> cotangent(static_cast<size_t>(out.numel()));
    for (auto& r : cotangent) r = rng.uniform(-1.0, 1.0);
    DTensor loss = sum_all(mul(out, DTensor::constant(out.shape(), cotangent)));
    backward(loss);

    auto forward_loss = [&](const std::vector<std::vector<double>>& vals) {
      std::vector<DTensor> ins;
      for (size_t i = 0; i < ninp; ++i) ins.push_back(DTensor::constant(c.input_shapes[i], vals[i]));
      DTensor o = build(ins);
      const auto& ov = o.values();
      double acc = 0.0;
      for (size_t i = 0; i < ov.size(); ++i) acc += ov[i] * cotangent[i];
      return acc;
    };

    double max_err = 0.0;
    for (size_t i = 0; i < ninp; ++i) {
      const auto& analytic = inputs[i].grad();
      int64_t n = static_cast<int64_t>(c.input_values[i].size());
      std::vector<int64_t> probes;
      if (n <= max_probes_per_input) {
        for (int64_t e = 0; e < n; ++e) probes.push_back(e);
      } else {
        for (int p = 0; p < max_probes_per_input; ++p)
          probes.push_back(static_cast<int64_t>(rng.next_u32() % static_cast<uint32_t>(n)));
      }
      for (int64_t e : probes) {
        auto vals = c.input_values;
        vals[i][static_cast<size_t>(e)] += eps;
        double lp = forward_loss(vals);
        vals[i][static_cast<size_t>(e)] -= 2 * eps;
        double lm = forward_loss(vals);
        double fd = (lp - lm) / (2 * eps);
        double a = analytic[static_cast<size_t>(e)];
        double err = std::abs(a - fd) / std::max({1.0, std::abs(a), std::abs(fd)});
        max_err = std::max(max_err, err);
      }
    }
    return max_err;
  }

  std::vector<GradCheckReport> run(uint64_t seed, double tol = 1e-4, int repeats = 20) const {
    std::vector<GradCheckReport> reports;
    for (const auto& chk : checks_) {
      Pcg32 rng(Pcg32::mix(seed, std::hash<std::string>{}(chk.name)));
      double max_err = 0.0;
      for (int r = 0; r < repeats; ++r) max_err = std::max(max_err, run_case(chk.make_case, chk.build, rng));
      reports.push_back({chk.name, max_err, max_err < tol});
    }
    return reports;
  }

  // Registers every kernel with randomized shapes. Generators keep inputs
  // away from non-differentiable kinks (relu/abs at 0, min/max ties) so the
  // difference quotient measures the actual derivative.
  static GradCheckSuite standard();

 private:
  struct Check {
    std::string name;
    MakeCase make_case;
    Build build;
  };
  std::vector<Check> checks_;
};

}  // namespace gnrf::ad

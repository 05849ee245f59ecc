#pragma once

#include "gnrf/autodiff/nn.hpp"

namespace gnrf::ad {

struct AdamConfig {
  double lr = 1e-4;
  double weight_decay = 0.01;  // decoupled
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with decoupled weight decay. Moment state lives here, keyed by
// parameter name; update math runs in double.
template <class T>
class AdamT {
 public:
  void step(ParameterStoreT<T>& store, const AdamConfig& cfg) {
    ++step_count_;
    double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step_count_));
    double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step_count_));
    for (auto& [name, t] : store.entries()) {
      auto* node = t.raw();
      if (!node->requires_grad) continue;  // frozen parameters keep their values
      check(node->grad.size() == node->values.size(),
            "adam_step: parameter '" + name + "' has no gradient (run backward first)");
      auto& st = state_[name];
      if (st.m.size() != node->values.size()) {
        st.m.assign(node->values.size(), T(0));
        st.v.assign(node->values.size(), T(0));
      }
      T* p = node->values.data();
      const T* g = node->grad.data();
      T* m = st.m.data();
      T* v = st.v.data();
      size_t len = node->values.size();
      for (size_t i = 0; i < len; ++i) {
        double gi = static_cast<double>(g[i]);
        double mi = cfg.beta1 * static_cast<double>(m[i]) + (1.0 - cfg.beta1) * gi;
        double vi = cfg.beta2 * static_cast<double>(v[i]) + (1.0 - cfg.beta2) * gi * gi;
        m[i] = static_cast<T>(mi);
        v[i] = static_cast<T>(vi);
        double mhat = mi / bc1;
        double vhat = vi / bc2;
        double upd = cfg.lr * (mhat / (std::sqrt(vhat) + cfg.eps) + cfg.weight_decay * static_cast<double>(p[i]));
        p[i] = static_cast<T>(static_cast<double>(p[i]) - upd);
      }
    }
  }

  int64_t step_count() const { return step_count_; }
  void set_step_count(int64_t n) { step_count_ = n; }

  struct MomentState {
    std::vector<T> m, v;
  };
  std::map<std::string, MomentState>& state() { return state_; }
  const std::map<std::string, MomentState>& state() const { return state_; }

 private:
  std::map<std::string, MomentState> state_;
  int64_t step_count_ = 0;
};

}  // namespace gnrf::ad

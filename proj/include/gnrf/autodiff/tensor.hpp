#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace gnrf::ad {

using Shape = std::vector<int64_t>;

inline int64_t numel(const Shape& s) {
  int64_t n = 1;
  for (int64_t d : s) n *= d;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << "]";
  return os.str();
}

inline void check(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// One tape node. Values are computed eagerly; backward_fn reads this node's
// grad and accumulates into the parents' grads. The tape is rebuilt every
// step, so nodes form a DAG that dies with the last Tensor handle.
template <class T>
struct NodeT {
  Shape shape;
  std::vector<T> values;
  std::vector<T> grad;
  bool requires_grad = false;
  bool is_leaf = true;
  std::vector<std::shared_ptr<NodeT<T>>> parents;
  std::function<void(NodeT<T>&)> backward_fn;

  int64_t numel() const { return static_cast<int64_t>(values.size()); }
  void ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), T(0));
  }
  void zero_grad_storage() { grad.assign(values.size(), T(0)); }
};

template <class T>
class TensorT {
 public:
  TensorT() = default;
  explicit TensorT(std::shared_ptr<NodeT<T>> n) : node_(std::move(n)) {}

  static TensorT constant(Shape shape, std::vector<T> values) {
    check(::gnrf::ad::numel(shape) == static_cast<int64_t>(values.size()),
          "tensor: value count does not match shape " + shape_str(shape));
    auto n = std::make_shared<NodeT<T>>();
    n->shape = std::move(shape);
    n->values = std::move(values);
    return TensorT(n);
  }
  static TensorT zeros(const Shape& shape) {
    return constant(shape, std::vector<T>(static_cast<size_t>(::gnrf::ad::numel(shape)), T(0)));
  }
  static TensorT full(const Shape& shape, T v) {
    return constant(shape, std::vector<T>(static_cast<size_t>(::gnrf::ad::numel(shape)), v));
  }
  static TensorT scalar(T v) { return constant({1}, {v}); }
  static TensorT parameter(Shape shape, std::vector<T> values) {
    TensorT t = constant(std::move(shape), std::move(values));
    t.node_->requires_grad = true;
    return t;
  }

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  int64_t numel() const { return node_->numel(); }
  const std::vector<T>& values() const { return node_->values; }
  std::vector<T>& values() { return node_->values; }
  const std::vector<T>& grad() const { return node_->grad; }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  void set_requires_grad(bool b) { node_->requires_grad = b; }
  T item() const {
    check(numel() == 1, "item: tensor is not scalar, shape " + shape_str(shape()));
    return node_->values[0];
  }

  std::shared_ptr<NodeT<T>> node() const { return node_; }
  NodeT<T>* raw() const { return node_.get(); }

 private:
  std::shared_ptr<NodeT<T>> node_;
};

template <class T>
std::shared_ptr<NodeT<T>> make_op_node(Shape shape, std::initializer_list<TensorT<T>> parents) {
  auto n = std::make_shared<NodeT<T>>();
  n->shape = std::move(shape);
  n->values.assign(static_cast<size_t>(numel(n->shape)), T(0));
  n->is_leaf = false;
  for (const auto& p : parents) {
    n->parents.push_back(p.node());
    if (p.requires_grad()) n->requires_grad = true;
  }
  return n;
}

template <class T>
std::shared_ptr<NodeT<T>> make_op_node(Shape shape, const std::vector<TensorT<T>>& parents) {
  auto n = std::make_shared<NodeT<T>>();
  n->shape = std::move(shape);
  n->values.assign(static_cast<size_t>(numel(n->shape)), T(0));
  n->is_leaf = false;
  for (const auto& p : parents) {
    n->parents.push_back(p.node());
    if (p.requires_grad()) n->requires_grad = true;
  }
  return n;
}

// Reverse-mode sweep from a scalar loss. Interior grads are reset per call;
// leaf (parameter) grads accumulate across calls until explicitly zeroed.
template <class T>
void backward(const TensorT<T>& loss) {
  check(loss.numel() == 1, "backward: loss must be scalar, got shape " + shape_str(loss.shape()));
  auto* root = loss.raw();
  if (!root->requires_grad) return;

  std::vector<NodeT<T>*> order;
  std::unordered_set<NodeT<T>*> visited;
  std::vector<std::pair<NodeT<T>*, size_t>> stack;
  stack.push_back({root, 0});
  visited.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      NodeT<T>* p = node->parents[next++].get();
      if (p->requires_grad && !visited.count(p)) {
        visited.insert(p);
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (NodeT<T>* n : order) {
    if (n->is_leaf)
      n->ensure_grad();  // keep accumulated leaf grads
    else
      n->zero_grad_storage();
  }
  root->grad[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    NodeT<T>* n = *it;
    if (n->backward_fn) n->backward_fn(*n);
  }
}

}  // namespace gnrf::ad

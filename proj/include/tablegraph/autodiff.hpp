#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace tablegraph::ad {

using Shape = std::vector<int>;

std::string shape_str(const Shape& s);
std::int64_t shape_size(const Shape& s);

namespace detail {
struct Node;
}

// Handle to a dense double tensor participating in reverse-mode
// differentiation. Copies alias the same node.
class Tensor {
 public:
  Tensor() = default;

  static Tensor constant(Shape shape, std::vector<double> values);
  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor param(Shape shape, std::vector<double> values);
  static Tensor scalar(double value);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::int64_t size() const;
  bool requires_grad() const;

  std::span<const double> values() const;
  std::span<double> values();  // mutating values of non-leaf nodes is on the caller
  std::span<const double> grad() const;
  void zero_grad();

  detail::Node* node() const { return node_.get(); }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> n) : node_(std::move(n)) {}
  std::shared_ptr<detail::Node> node_;

  friend Tensor make_op(Shape, std::vector<Tensor>, std::function<void(detail::Node&)>);
};

// Forward ops. Binary elementwise ops broadcast the second operand over the
// leading dimensions of the first (b.shape must be a suffix of a.shape).
Tensor add(const Tensor& a, const Tensor& b);
Tensor add_scalar(const Tensor& a, double c);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor matmul(const Tensor& a, const Tensor& b);  // [..,M,K]x[K,N] or [..,M,K]x[..,K,N]
Tensor transpose(const Tensor& a);                // rank 2
Tensor concat(const std::vector<Tensor>& parts, int axis);
Tensor slice(const Tensor& a, int axis, int start, int len);
Tensor reshape(const Tensor& a, Shape shape);
Tensor gather_rows(const Tensor& a, std::vector<int> indices);  // -1 yields a zero row
Tensor pad_rows(const Tensor& a, int before, int after);
Tensor scale_rows(const Tensor& a, std::vector<double> row_weights);
Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor softmax(const Tensor& a, int axis);
Tensor log(const Tensor& a);
Tensor pow_const(const Tensor& a, double exponent);
Tensor reduce_sum(const Tensor& a);
Tensor reduce_sum(const Tensor& a, int axis);
Tensor reduce_mean(const Tensor& a);
Tensor reduce_mean(const Tensor& a, int axis);
Tensor reduce_max(const Tensor& a, int axis);
// Normalizes over the last axis; gain and bias have that axis's extent.
Tensor layer_norm(const Tensor& a, const Tensor& gain, const Tensor& bias,
                  double eps = 1e-5);

// Reverse topological order of the graph below a root; each node appears once.
class Tape {
 public:
  static Tape record(const Tensor& root);
  std::size_t node_count() const { return order_.size(); }

 private:
  friend void backward(const Tensor&);
  std::vector<detail::Node*> order_;  // children before parents
};

// Accumulates d(loss)/d(t) into the grad of every tensor with requires_grad
// below `loss`. Grads are not cleared first; call zero_grad between steps.
// Throws std::invalid_argument if loss is not scalar.
void backward(const Tensor& loss);

struct GradCheckReport {
  bool pass = false;
  double max_rel_error = 0.0;
  std::int64_t worst_index = -1;
  double analytic = 0.0;
  double numeric = 0.0;
};

// Central-difference comparison of backward() against f evaluated around x.
// Relative error uses max(1, |analytic|, |numeric|) in the denominator.
GradCheckReport grad_check(const std::function<Tensor(const Tensor&)>& f, Tensor x,
                           double step = 1e-5, double tol = 1e-4);

}  // namespace tablegraph::ad

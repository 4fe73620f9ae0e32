#include "tablegraph/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>
#include <utility>

namespace tablegraph::ad {

std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

std::int64_t shape_size(const Shape& s) {
  std::int64_t n = 1;
  for (int d : s) n *= d;
  return n;
}

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // allocated iff requires_grad
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backprop;
};

}  // namespace detail

using detail::Node;

namespace {

std::shared_ptr<Node> make_node(Shape shape, std::vector<double> values, bool requires_grad) {
  if (shape_size(shape) != static_cast<std::int64_t>(values.size())) {
    throw std::invalid_argument("tensor value count " + std::to_string(values.size()) +
                                " does not match shape " + shape_str(shape));
  }
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->value = std::move(values);
  n->requires_grad = requires_grad;
  if (requires_grad) n->grad.assign(n->value.size(), 0.0);
  return n;
}

void check_defined(const Tensor& t, const char* op) {
  if (!t.defined()) throw std::invalid_argument(std::string(op) + ": undefined tensor");
}

// b must be a trailing suffix of a's shape
void check_broadcast(const char* op, const Shape& a, const Shape& b) {
  if (b.size() > a.size() ||
      !std::equal(b.rbegin(), b.rend(), a.rbegin())) {
    throw std::invalid_argument(std::string(op) + ": shapes " + shape_str(a) + " and " +
                                shape_str(b) + " are not broadcast-compatible");
  }
}

struct AxisSplit {
  std::int64_t outer = 1;
  std::int64_t len = 1;
  std::int64_t inner = 1;
};

AxisSplit split_axis(const Shape& s, int axis) {
  if (axis < 0 || axis >= static_cast<int>(s.size())) {
    throw std::invalid_argument("axis " + std::to_string(axis) + " out of range for shape " +
                                shape_str(s));
  }
  AxisSplit sp;
  for (int i = 0; i < axis; ++i) sp.outer *= s[i];
  sp.len = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i) sp.inner *= s[i];
  return sp;
}

}  // namespace

Tensor make_op(Shape shape, std::vector<Tensor> inputs, std::function<void(Node&)> backprop) {
  bool any_grad = false;
  for (const auto& t : inputs) any_grad = any_grad || t.requires_grad();
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->value.assign(shape_size(n->shape), 0.0);
  n->requires_grad = any_grad;
  if (any_grad) {
    n->grad.assign(n->value.size(), 0.0);
    for (auto& t : inputs) n->parents.push_back(t.node_);
    n->backprop = std::move(backprop);
  }
  return Tensor(std::move(n));
}

Tensor Tensor::constant(Shape shape, std::vector<double> values) {
  return Tensor(make_node(std::move(shape), std::move(values), false));
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  const auto n = shape_size(shape);
  return Tensor(make_node(std::move(shape), std::vector<double>(n, 0.0), requires_grad));
}

Tensor Tensor::param(Shape shape, std::vector<double> values) {
  return Tensor(make_node(std::move(shape), std::move(values), true));
}

Tensor Tensor::scalar(double value) { return Tensor(make_node({}, {value}, false)); }

const Shape& Tensor::shape() const { return node_->shape; }
std::int64_t Tensor::size() const { return static_cast<std::int64_t>(node_->value.size()); }
bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

std::span<const double> Tensor::values() const { return node_->value; }
std::span<double> Tensor::values() { return node_->value; }
std::span<const double> Tensor::grad() const { return node_->grad; }

void Tensor::zero_grad() {
  if (node_ && node_->requires_grad) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

// ---------------------------------------------------------------------------
// ops

Tensor add(const Tensor& a, const Tensor& b) {
  check_defined(a, "add");
  check_defined(b, "add");
  check_broadcast("add", a.shape(), b.shape());
  const std::int64_t bs = b.size();
  Node* an = a.node();
  Node* bn = b.node();
  Tensor out = make_op(a.shape(), {a, b}, [an, bn, bs](Node& self) {
    if (an->requires_grad) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i];
    }
    if (bn->requires_grad) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) bn->grad[i % bs] += self.grad[i];
    }
  });
  auto v = out.values();
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = av[i] + bv[i % bs];
  return out;
}

Tensor add_scalar(const Tensor& a, double c) {
  check_defined(a, "add_scalar");
  Node* an = a.node();
  Tensor out = make_op(a.shape(), {a}, [an](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i];
  });
  auto v = out.values();
  auto av = a.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = av[i] + c;
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_defined(a, "mul");
  check_defined(b, "mul");
  check_broadcast("mul", a.shape(), b.shape());
  const std::int64_t bs = b.size();
  Node* an = a.node();
  Node* bn = b.node();
  Tensor out = make_op(a.shape(), {a, b}, [an, bn, bs](Node& self) {
    if (an->requires_grad) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        an->grad[i] += self.grad[i] * bn->value[i % bs];
      }
    }
    if (bn->requires_grad) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        bn->grad[i % bs] += self.grad[i] * an->value[i];
      }
    }
  });
  auto v = out.values();
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = av[i] * bv[i % bs];
  return out;
}

Tensor scale(const Tensor& a, double c) {
  check_defined(a, "scale");
  Node* an = a.node();
  Tensor out = make_op(a.shape(), {a}, [an, c](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += c * self.grad[i];
  });
  auto v = out.values();
  auto av = a.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = c * av[i];
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  check_defined(a, "matmul");
  check_defined(b, "matmul");
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.size() < 2 || (sb.size() != 2 && sb.size() != sa.size())) {
    throw std::invalid_argument("matmul: unsupported ranks " + shape_str(sa) + " x " +
                                shape_str(sb));
  }
  const bool batched_b = sb.size() == sa.size();
  const int M = sa[sa.size() - 2];
  const int K = sa[sa.size() - 1];
  const int Kb = sb[sb.size() - 2];
  const int N = sb[sb.size() - 1];
  if (K != Kb ||
      (batched_b && !std::equal(sa.begin(), sa.end() - 2, sb.begin()))) {
    throw std::invalid_argument("matmul: incompatible shapes " + shape_str(sa) + " x " +
                                shape_str(sb));
  }
  Shape out_shape(sa.begin(), sa.end() - 2);
  out_shape.push_back(M);
  out_shape.push_back(N);
  std::int64_t batch = 1;
  for (std::size_t i = 0; i + 2 < sa.size(); ++i) batch *= sa[i];

  Node* an = a.node();
  Node* bn = b.node();
  Tensor out = make_op(out_shape, {a, b}, [an, bn, batch, batched_b, M, K, N](Node& self) {
    for (std::int64_t t = 0; t < batch; ++t) {
      const double* A = an->value.data() + t * M * K;
      const double* B = bn->value.data() + (batched_b ? t * K * N : 0);
      const double* dC = self.grad.data() + t * M * N;
      if (an->requires_grad) {
        double* dA = an->grad.data() + t * M * K;
        for (int i = 0; i < M; ++i) {
          for (int j = 0; j < N; ++j) {
            const double g = dC[i * N + j];
            if (g == 0.0) continue;
            const double* Brow = B + j;
            for (int k = 0; k < K; ++k) dA[i * K + k] += g * Brow[k * N];
          }
        }
      }
      if (bn->requires_grad) {
        double* dB = bn->grad.data() + (batched_b ? t * K * N : 0);
        for (int i = 0; i < M; ++i) {
          const double* Arow = A + i * K;
          const double* dCrow = dC + i * N;
          for (int k = 0; k < K; ++k) {
            const double av = Arow[k];
            if (av == 0.0) continue;
            double* dBrow = dB + k * N;
            for (int j = 0; j < N; ++j) dBrow[j] += av * dCrow[j];
          }
        }
      }
    }
  });

  auto v = out.values();
  const double* A = a.values().data();
  const double* B = b.values().data();
  for (std::int64_t t = 0; t < batch; ++t) {
    const double* At = A + t * M * K;
    const double* Bt = B + (batched_b ? t * K * N : 0);
    double* Ct = v.data() + t * M * N;
    for (int i = 0; i < M; ++i) {
      double* Crow = Ct + i * N;
      const double* Arow = At + i * K;
      for (int k = 0; k < K; ++k) {
        const double av = Arow[k];
        if (av == 0.0) continue;
        const double* Brow = Bt + k * N;
        for (int j = 0; j < N; ++j) Crow[j] += av * Brow[j];
      }
    }
  }
  return out;
}

Tensor transpose(const Tensor& a) {
  check_defined(a, "transpose");
  if (a.shape().size() != 2) {
    throw std::invalid_argument("transpose: expected rank 2, got " + shape_str(a.shape()));
  }
  const int M = a.shape()[0];
  const int N = a.shape()[1];
  Node* an = a.node();
  Tensor out = make_op({N, M}, {a}, [an, M, N](Node& self) {
    for (int i = 0; i < N; ++i) {
      for (int j = 0; j < M; ++j) an->grad[j * N + i] += self.grad[i * M + j];
    }
  });
  auto v = out.values();
  auto av = a.values();
  for (int i = 0; i < M; ++i) {
    for (int j = 0; j < N; ++j) v[j * M + i] = av[i * N + j];
  }
  return out;
}

Tensor concat(const std::vector<Tensor>& parts, int axis) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  for (const auto& p : parts) check_defined(p, "concat");
  const Shape& s0 = parts[0].shape();
  Shape out_shape = s0;
  const AxisSplit sp0 = split_axis(s0, axis);
  std::int64_t total_len = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    if (s.size() != s0.size()) {
      throw std::invalid_argument("concat: rank mismatch " + shape_str(s0) + " vs " +
                                  shape_str(s));
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (static_cast<int>(i) != axis && s[i] != s0[i]) {
        throw std::invalid_argument("concat: shape mismatch " + shape_str(s0) + " vs " +
                                    shape_str(s));
      }
    }
    total_len += s[axis];
  }
  out_shape[axis] = static_cast<int>(total_len);

  std::vector<std::int64_t> lens;
  for (const auto& p : parts) lens.push_back(p.shape()[axis]);
  std::vector<Node*> nodes;
  for (const auto& p : parts) nodes.push_back(p.node());
  const std::int64_t inner = sp0.inner;
  const std::int64_t outer = sp0.outer;

  Tensor out = make_op(out_shape, parts, [nodes, lens, inner, outer, total_len](Node& self) {
    std::int64_t off = 0;
    for (std::size_t p = 0; p < nodes.size(); ++p) {
      Node* n = nodes[p];
      if (n->requires_grad) {
        for (std::int64_t o = 0; o < outer; ++o) {
          const double* src = self.grad.data() + (o * total_len + off) * inner;
          double* dst = n->grad.data() + o * lens[p] * inner;
          for (std::int64_t i = 0; i < lens[p] * inner; ++i) dst[i] += src[i];
        }
      }
      off += lens[p];
    }
  });

  auto v = out.values();
  std::int64_t off = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    auto pv = parts[p].values();
    for (std::int64_t o = 0; o < outer; ++o) {
      std::copy_n(pv.data() + o * lens[p] * inner, lens[p] * inner,
                  v.data() + (o * total_len + off) * inner);
    }
    off += lens[p];
  }
  return out;
}

Tensor slice(const Tensor& a, int axis, int start, int len) {
  check_defined(a, "slice");
  const AxisSplit sp = split_axis(a.shape(), axis);
  if (start < 0 || len < 0 || start + len > sp.len) {
    throw std::invalid_argument("slice: range [" + std::to_string(start) + "," +
                                std::to_string(start + len) + ") out of bounds for axis of " +
                                std::to_string(sp.len));
  }
  Shape out_shape = a.shape();
  out_shape[axis] = len;
  Node* an = a.node();
  const std::int64_t inner = sp.inner;
  const std::int64_t outer = sp.outer;
  const std::int64_t alen = sp.len;
  Tensor out = make_op(out_shape, {a}, [an, inner, outer, alen, start, len](Node& self) {
    for (std::int64_t o = 0; o < outer; ++o) {
      const double* src = self.grad.data() + o * len * inner;
      double* dst = an->grad.data() + (o * alen + start) * inner;
      for (std::int64_t i = 0; i < len * inner; ++i) dst[i] += src[i];
    }
  });
  auto v = out.values();
  auto av = a.values();
  for (std::int64_t o = 0; o < outer; ++o) {
    std::copy_n(av.data() + (o * alen + start) * inner, len * inner, v.data() + o * len * inner);
  }
  return out;
}

Tensor reshape(const Tensor& a, Shape shape) {
  check_defined(a, "reshape");
  if (shape_size(shape) != a.size()) {
    throw std::invalid_argument("reshape: cannot view " + shape_str(a.shape()) + " as " +
                                shape_str(shape));
  }
  Node* an = a.node();
  Tensor out = make_op(std::move(shape), {a}, [an](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i];
  });
  auto v = out.values();
  auto av = a.values();
  std::copy(av.begin(), av.end(), v.begin());
  return out;
}

Tensor gather_rows(const Tensor& a, std::vector<int> indices) {
  check_defined(a, "gather_rows");
  if (a.shape().empty()) throw std::invalid_argument("gather_rows: scalar input");
  const int rows = a.shape()[0];
  const std::int64_t row_size = a.size() / std::max(rows, 1);
  for (int idx : indices) {
    if (idx < -1 || idx >= rows) {
      throw std::invalid_argument("gather_rows: index " + std::to_string(idx) +
                                  " out of range for " + std::to_string(rows) + " rows");
    }
  }
  Shape out_shape = a.shape();
  out_shape[0] = static_cast<int>(indices.size());
  Node* an = a.node();
  auto idx_ptr = std::make_shared<std::vector<int>>(std::move(indices));
  Tensor out = make_op(out_shape, {a}, [an, idx_ptr, row_size](Node& self) {
    for (std::size_t r = 0; r < idx_ptr->size(); ++r) {
      const int src = (*idx_ptr)[r];
      if (src < 0) continue;
      const double* g = self.grad.data() + r * row_size;
      double* dst = an->grad.data() + src * row_size;
      for (std::int64_t i = 0; i < row_size; ++i) dst[i] += g[i];
    }
  });
  auto v = out.values();
  auto av = a.values();
  for (std::size_t r = 0; r < idx_ptr->size(); ++r) {
    const int src = (*idx_ptr)[r];
    if (src < 0) continue;
    std::copy_n(av.data() + src * row_size, row_size, v.data() + r * row_size);
  }
  return out;
}

Tensor pad_rows(const Tensor& a, int before, int after) {
  check_defined(a, "pad_rows");
  if (a.shape().empty()) throw std::invalid_argument("pad_rows: scalar input");
  const int rows = a.shape()[0];
  const std::int64_t row_size = a.size() / std::max(rows, 1);
  Shape out_shape = a.shape();
  out_shape[0] = rows + before + after;
  Node* an = a.node();
  Tensor out = make_op(out_shape, {a}, [an, before, rows, row_size](Node& self) {
    const double* g = self.grad.data() + static_cast<std::int64_t>(before) * row_size;
    for (std::int64_t i = 0; i < rows * row_size; ++i) an->grad[i] += g[i];
  });
  auto v = out.values();
  auto av = a.values();
  std::copy(av.begin(), av.end(), v.begin() + static_cast<std::int64_t>(before) * row_size);
  return out;
}

Tensor scale_rows(const Tensor& a, std::vector<double> row_weights) {
  check_defined(a, "scale_rows");
  if (a.shape().empty() || a.shape()[0] != static_cast<int>(row_weights.size())) {
    throw std::invalid_argument("scale_rows: " + std::to_string(row_weights.size()) +
                                " weights for shape " + shape_str(a.shape()));
  }
  const int rows = a.shape()[0];
  const std::int64_t row_size = a.size() / std::max(rows, 1);
  Node* an = a.node();
  auto w = std::make_shared<std::vector<double>>(std::move(row_weights));
  Tensor out = make_op(a.shape(), {a}, [an, w, rows, row_size](Node& self) {
    for (int r = 0; r < rows; ++r) {
      const double wr = (*w)[r];
      const double* g = self.grad.data() + r * row_size;
      double* dst = an->grad.data() + r * row_size;
      for (std::int64_t i = 0; i < row_size; ++i) dst[i] += wr * g[i];
    }
  });
  auto v = out.values();
  auto av = a.values();
  for (int r = 0; r < rows; ++r) {
    for (std::int64_t i = 0; i < row_size; ++i) {
      v[r * row_size + i] = (*w)[r] * av[r * row_size + i];
    }
  }
  return out;
}

Tensor relu(const Tensor& a) {
  check_defined(a, "relu");
  Node* an = a.node();
  Tensor out = make_op(a.shape(), {a}, [an](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (an->value[i] > 0.0) an->grad[i] += self.grad[i];
    }
  });
  auto v = out.values();
  auto av = a.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = av[i] > 0.0 ? av[i] : 0.0;
  return out;
}

Tensor sigmoid(const Tensor& a) {
  check_defined(a, "sigmoid");
  Node* an = a.node();
  Tensor out = make_op(a.shape(), {a}, [an](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const double y = self.value[i];
      an->grad[i] += self.grad[i] * y * (1.0 - y);
    }
  });
  auto v = out.values();
  auto av = a.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / (1.0 + std::exp(-av[i]));
  return out;
}

Tensor softmax(const Tensor& a, int axis) {
  check_defined(a, "softmax");
  const AxisSplit sp = split_axis(a.shape(), axis);
  Node* an = a.node();
  const std::int64_t outer = sp.outer;
  const std::int64_t len = sp.len;
  const std::int64_t inner = sp.inner;
  Tensor out = make_op(a.shape(), {a}, [an, outer, len, inner](Node& self) {
    for (std::int64_t o = 0; o < outer; ++o) {
      for (std::int64_t i = 0; i < inner; ++i) {
        const std::int64_t base = o * len * inner + i;
        double dot = 0.0;
        for (std::int64_t k = 0; k < len; ++k) {
          const std::int64_t at = base + k * inner;
          dot += self.grad[at] * self.value[at];
        }
        for (std::int64_t k = 0; k < len; ++k) {
          const std::int64_t at = base + k * inner;
          an->grad[at] += self.value[at] * (self.grad[at] - dot);
        }
      }
    }
  });
  auto v = out.values();
  auto av = a.values();
  for (std::int64_t o = 0; o < outer; ++o) {
    for (std::int64_t i = 0; i < inner; ++i) {
      const std::int64_t base = o * len * inner + i;
      double mx = av[base];
      for (std::int64_t k = 1; k < len; ++k) mx = std::max(mx, av[base + k * inner]);
      double sum = 0.0;
      for (std::int64_t k = 0; k < len; ++k) {
        const double e = std::exp(av[base + k * inner] - mx);
        v[base + k * inner] = e;
        sum += e;
      }
      for (std::int64_t k = 0; k < len; ++k) v[base + k * inner] /= sum;
    }
  }
  return out;
}

Tensor log(const Tensor& a) {
  check_defined(a, "log");
  Node* an = a.node();
  Tensor out = make_op(a.shape(), {a}, [an](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      an->grad[i] += self.grad[i] / an->value[i];
    }
  });
  auto v = out.values();
  auto av = a.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::log(av[i]);
  return out;
}

Tensor pow_const(const Tensor& a, double exponent) {
  check_defined(a, "pow_const");
  Node* an = a.node();
  Tensor out = make_op(a.shape(), {a}, [an, exponent](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      an->grad[i] +=
          self.grad[i] * exponent * std::pow(an->value[i], exponent - 1.0);
    }
  });
  auto v = out.values();
  auto av = a.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::pow(av[i], exponent);
  return out;
}

Tensor reduce_sum(const Tensor& a) {
  check_defined(a, "reduce_sum");
  Node* an = a.node();
  Tensor out = make_op({}, {a}, [an](Node& self) {
    const double g = self.grad[0];
    for (std::size_t i = 0; i < an->grad.size(); ++i) an->grad[i] += g;
  });
  double sum = 0.0;
  for (double x : a.values()) sum += x;
  out.values()[0] = sum;
  return out;
}

Tensor reduce_sum(const Tensor& a, int axis) {
  check_defined(a, "reduce_sum");
  const AxisSplit sp = split_axis(a.shape(), axis);
  Shape out_shape;
  for (std::size_t i = 0; i < a.shape().size(); ++i) {
    if (static_cast<int>(i) != axis) out_shape.push_back(a.shape()[i]);
  }
  Node* an = a.node();
  const std::int64_t outer = sp.outer;
  const std::int64_t len = sp.len;
  const std::int64_t inner = sp.inner;
  Tensor out = make_op(out_shape, {a}, [an, outer, len, inner](Node& self) {
    for (std::int64_t o = 0; o < outer; ++o) {
      for (std::int64_t k = 0; k < len; ++k) {
        for (std::int64_t i = 0; i < inner; ++i) {
          an->grad[(o * len + k) * inner + i] += self.grad[o * inner + i];
        }
      }
    }
  });
  auto v = out.values();
  auto av = a.values();
  for (std::int64_t o = 0; o < outer; ++o) {
    for (std::int64_t k = 0; k < len; ++k) {
      for (std::int64_t i = 0; i < inner; ++i) {
        v[o * inner + i] += av[(o * len + k) * inner + i];
      }
    }
  }
  return out;
}

Tensor reduce_mean(const Tensor& a) {
  check_defined(a, "reduce_mean");
  return scale(reduce_sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor reduce_mean(const Tensor& a, int axis) {
  check_defined(a, "reduce_mean");
  const AxisSplit sp = split_axis(a.shape(), axis);
  return scale(reduce_sum(a, axis), 1.0 / static_cast<double>(sp.len));
}

Tensor reduce_max(const Tensor& a, int axis) {
  check_defined(a, "reduce_max");
  const AxisSplit sp = split_axis(a.shape(), axis);
  Shape out_shape;
  for (std::size_t i = 0; i < a.shape().size(); ++i) {
    if (static_cast<int>(i) != axis) out_shape.push_back(a.shape()[i]);
  }
  const std::int64_t outer = sp.outer;
  const std::int64_t len = sp.len;
  const std::int64_t inner = sp.inner;
  // argmax recorded at forward time; ties go to the first maximum
  auto argmax = std::make_shared<std::vector<std::int64_t>>(outer * inner);
  Node* an = a.node();
  Tensor out = make_op(out_shape, {a}, [an, argmax, outer, inner](Node& self) {
    for (std::int64_t o = 0; o < outer; ++o) {
      for (std::int64_t i = 0; i < inner; ++i) {
        an->grad[(*argmax)[o * inner + i]] += self.grad[o * inner + i];
      }
    }
  });
  auto v = out.values();
  auto av = a.values();
  for (std::int64_t o = 0; o < outer; ++o) {
    for (std::int64_t i = 0; i < inner; ++i) {
      std::int64_t best = (o * len) * inner + i;
      for (std::int64_t k = 1; k < len; ++k) {
        const std::int64_t at = (o * len + k) * inner + i;
        if (av[at] > av[best]) best = at;
      }
      (*argmax)[o * inner + i] = best;
      v[o * inner + i] = av[best];
    }
  }
  return out;
}

Tensor layer_norm(const Tensor& a, const Tensor& gain, const Tensor& bias, double eps) {
  check_defined(a, "layer_norm");
  check_defined(gain, "layer_norm");
  check_defined(bias, "layer_norm");
  if (a.shape().empty()) throw std::invalid_argument("layer_norm: scalar input");
  const int C = a.shape().back();
  if (gain.shape() != Shape{C} || bias.shape() != Shape{C}) {
    throw std::invalid_argument("layer_norm: gain/bias must have shape [" + std::to_string(C) +
                                "]");
  }
  const std::int64_t rows = a.size() / C;
  auto xhat = std::make_shared<std::vector<double>>(a.size());
  auto inv_std = std::make_shared<std::vector<double>>(rows);
  Node* an = a.node();
  Node* gn = gain.node();
  Node* bn = bias.node();
  Tensor out = make_op(a.shape(), {a, gain, bias}, [an, gn, bn, xhat, inv_std, rows, C](Node& self) {
    for (std::int64_t r = 0; r < rows; ++r) {
      const double* dy = self.grad.data() + r * C;
      const double* xh = xhat->data() + r * C;
      const double is = (*inv_std)[r];
      if (gn->requires_grad) {
        for (int c = 0; c < C; ++c) gn->grad[c] += dy[c] * xh[c];
      }
      if (bn->requires_grad) {
        for (int c = 0; c < C; ++c) bn->grad[c] += dy[c];
      }
      if (an->requires_grad) {
        double sum_dxhat = 0.0;
        double sum_dxhat_xhat = 0.0;
        for (int c = 0; c < C; ++c) {
          const double dxh = dy[c] * gn->value[c];
          sum_dxhat += dxh;
          sum_dxhat_xhat += dxh * xh[c];
        }
        double* dx = an->grad.data() + r * C;
        for (int c = 0; c < C; ++c) {
          const double dxh = dy[c] * gn->value[c];
          dx[c] += is * (dxh - (sum_dxhat + xh[c] * sum_dxhat_xhat) / C);
        }
      }
    }
  });
  auto v = out.values();
  auto av = a.values();
  for (std::int64_t r = 0; r < rows; ++r) {
    const double* x = av.data() + r * C;
    double mean = 0.0;
    for (int c = 0; c < C; ++c) mean += x[c];
    mean /= C;
    double var = 0.0;
    for (int c = 0; c < C; ++c) var += (x[c] - mean) * (x[c] - mean);
    var /= C;
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = is;
    for (int c = 0; c < C; ++c) {
      const double xh = (x[c] - mean) * is;
      (*xhat)[r * C + c] = xh;
      v[r * C + c] = gain.values()[c] * xh + bias.values()[c];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// reverse pass

Tape Tape::record(const Tensor& root) {
  Tape tape;
  if (!root.defined() || !root.requires_grad()) return tape;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root.node(), 0);
  visited.insert(root.node());
  while (!stack.empty()) {
    auto& [node, next_child] = stack.back();
    bool descended = false;
    while (next_child < node->parents.size()) {
      Node* child = node->parents[next_child++].get();
      if (child->requires_grad && !visited.count(child)) {
        visited.insert(child);
        stack.emplace_back(child, 0);
        descended = true;
        break;
      }
    }
    if (!descended && (stack.back().second >= stack.back().first->parents.size())) {
      tape.order_.push_back(node);
      stack.pop_back();
    }
  }
  return tape;
}

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw std::invalid_argument("backward: loss must be a scalar tensor");
  }
  if (!loss.requires_grad()) return;
  Tape tape = Tape::record(loss);
  loss.node()->grad[0] += 1.0;
  for (auto it = tape.order_.rbegin(); it != tape.order_.rend(); ++it) {
    Node* n = *it;
    if (n->backprop) n->backprop(*n);
  }
}

GradCheckReport grad_check(const std::function<Tensor(const Tensor&)>& f, Tensor x,
                           double step, double tol) {
  GradCheckReport report;
  x.zero_grad();
  Tensor y = f(x);
  if (y.size() != 1) throw std::invalid_argument("grad_check: f must be scalar-valued");
  backward(y);
  std::vector<double> analytic(x.grad().begin(), x.grad().end());

  for (std::int64_t i = 0; i < x.size(); ++i) {
    const double saved = x.values()[i];
    x.values()[i] = saved + step;
    const double up = f(x).values()[0];
    x.values()[i] = saved - step;
    const double down = f(x).values()[0];
    x.values()[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max({1.0, std::abs(analytic[i]), std::abs(numeric)});
    const double rel = std::abs(analytic[i] - numeric) / denom;
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_index = i;
      report.analytic = analytic[i];
      report.numeric = numeric;
    }
  }
  report.pass = report.max_rel_error < tol;
  return report;
}

}  // namespace tablegraph::ad

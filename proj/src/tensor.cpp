#include "pcct/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "pcct/error.hpp"

namespace pcct {

namespace {

thread_local bool g_grad_enabled = true;
thread_local std::size_t g_kink_hits = 0;

using NodePtr = std::shared_ptr<detail::Node>;

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    fail(ErrorKind::kDimension, std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                                    " vs " + shape_str(b.shape()));
  }
}

// Creates the result node. The graph edge and backward rule are only kept
// when gradient recording is on and some parent needs a gradient.
Tensor make_result(Shape shape, std::vector<double> value, std::initializer_list<Tensor> parents,
                   std::function<void(detail::Node&)> backward_fn) {
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  node->is_leaf = false;
  bool needs = false;
  if (g_grad_enabled) {
    for (const auto& p : parents) needs = needs || p.requires_grad();
  }
  if (needs) {
    node->requires_grad = true;
    for (const auto& p : parents) node->parents.push_back(p.node_ptr());
    node->backward_fn = std::move(backward_fn);
  }
  return Tensor::from_node(std::move(node));
}

Tensor make_result_n(Shape shape, std::vector<double> value, std::span<const Tensor> parents,
                     std::function<void(detail::Node&)> backward_fn) {
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  node->is_leaf = false;
  bool needs = false;
  if (g_grad_enabled) {
    for (const auto& p : parents) needs = needs || p.requires_grad();
  }
  if (needs) {
    node->requires_grad = true;
    for (const auto& p : parents) node->parents.push_back(p.node_ptr());
    node->backward_fn = std::move(backward_fn);
  }
  return Tensor::from_node(std::move(node));
}

// Rank-1 inputs are treated as a single row.
std::pair<std::size_t, std::size_t> rows_cols(const Tensor& x, const char* op) {
  if (x.rank() == 1) return {1, x.dim(0)};
  if (x.rank() == 2) return {x.dim(0), x.dim(1)};
  fail(ErrorKind::kDimension, std::string(op) + ": expected rank 1 or 2, got " + shape_str(x.shape()));
}

Shape reduced_shape(const Tensor& x) {
  if (x.rank() == 1) return {};
  return {x.dim(0)};
}

}  // namespace

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

std::vector<double>& detail::Node::ensure_grad() {
  if (!has_grad) {
    grad.assign(value.size(), 0.0);
    has_grad = true;
  }
  return grad;
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad) {
  if (shape_numel(shape) != values.size()) {
    fail(ErrorKind::kDimension, "tensor: shape " + shape_str(shape) + " does not match " +
                                    std::to_string(values.size()) + " values");
  }
  node_ = std::make_shared<detail::Node>();
  node_->shape = std::move(shape);
  node_->value = std::move(values);
  node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  auto n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) { return Tensor({}, {value}, requires_grad); }

Tensor Tensor::vector(std::vector<double> values, bool requires_grad) {
  Shape s{values.size()};
  return Tensor(std::move(s), std::move(values), requires_grad);
}

Tensor Tensor::vector(std::initializer_list<double> values, bool requires_grad) {
  return vector(std::vector<double>(values), requires_grad);
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values, bool requires_grad) {
  return Tensor({rows, cols}, std::move(values), requires_grad);
}

Tensor Tensor::from_node(std::shared_ptr<detail::Node> node) { return Tensor(std::move(node)); }

detail::Node& Tensor::checked() const {
  if (!node_) fail(ErrorKind::kContract, "use of an undefined tensor");
  return *node_;
}

const Shape& Tensor::shape() const { return checked().shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  const auto& s = shape();
  if (axis >= s.size()) fail(ErrorKind::kDimension, "axis out of range for " + shape_str(s));
  return s[axis];
}

std::size_t Tensor::numel() const { return checked().value.size(); }

std::span<const double> Tensor::values() const { return checked().value; }

std::span<double> Tensor::mutable_values() {
  auto& n = checked();
  if (!n.is_leaf) fail(ErrorKind::kContract, "mutable_values on a non-leaf tensor");
  return n.value;
}

double Tensor::item() const {
  auto& n = checked();
  if (n.value.size() != 1) fail(ErrorKind::kDimension, "item() on tensor of shape " + shape_str(n.shape));
  return n.value[0];
}

double Tensor::operator()(std::size_t i) const {
  auto& n = checked();
  if (i >= n.value.size()) fail(ErrorKind::kDimension, "index out of range");
  return n.value[i];
}

double Tensor::operator()(std::size_t r, std::size_t c) const {
  auto& n = checked();
  if (n.shape.size() != 2 || r >= n.shape[0] || c >= n.shape[1]) {
    fail(ErrorKind::kDimension, "matrix index out of range for " + shape_str(n.shape));
  }
  return n.value[r * n.shape[1] + c];
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }
bool Tensor::is_leaf() const { return checked().is_leaf; }
bool Tensor::has_grad() const { return node_ && node_->has_grad; }

std::span<const double> Tensor::grad() const {
  auto& n = checked();
  if (!n.has_grad) fail(ErrorKind::kContract, "tensor has no gradient");
  return n.grad;
}

std::span<double> Tensor::mutable_grad() { return checked().ensure_grad(); }

void Tensor::zero_grad() {
  auto& n = checked();
  if (n.has_grad) std::fill(n.grad.begin(), n.grad.end(), 0.0);
}

void Tensor::backward() const {
  auto& root = checked();
  if (root.value.size() != 1 || !root.shape.empty()) {
    fail(ErrorKind::kContract, "backward() requires a scalar loss, got shape " + shape_str(root.shape));
  }
  if (!root.requires_grad) fail(ErrorKind::kContract, "backward(): loss does not depend on any parameter");

  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<std::pair<detail::Node*, std::size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      auto* p = n->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  for (auto* n : order) {
    if (!n->is_leaf) {
      n->grad.assign(n->value.size(), 0.0);
      n->has_grad = true;
    }
  }
  root.ensure_grad()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    auto* n = *it;
    if (!n->is_leaf && n->backward_fn) n->backward_fn(*n);
  }
}

Tensor Tensor::detach() const {
  auto& n = checked();
  return Tensor(n.shape, n.value, false);
}

Tensor Tensor::clone() const {
  auto& n = checked();
  return Tensor(n.shape, n.value, n.requires_grad);
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_mode_enabled() { return g_grad_enabled; }

std::size_t kink_hits() { return g_kink_hits; }
void reset_kink_hits() { g_kink_hits = 0; }

// ---- elementwise -----------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  auto av = a.values(), bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](detail::Node& self) {
    for (auto& p : self.parents) {
      if (!p->requires_grad) continue;
      auto& g = p->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "sub");
  auto av = a.values(), bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](detail::Node& self) {
    auto& pa = self.parents[0];
    auto& pb = self.parents[1];
    if (pa->requires_grad) {
      auto& g = pa->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (pb->requires_grad) {
      auto& g = pb->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "mul");
  auto av = a.values(), bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](detail::Node& self) {
    auto& pa = self.parents[0];
    auto& pb = self.parents[1];
    if (pa->requires_grad) {
      auto& g = pa->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pb->value[i];
    }
    if (pb->requires_grad) {
      auto& g = pb->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pa->value[i];
    }
  });
}

Tensor scale(const Tensor& x, double factor) {
  auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] * factor;
  return make_result(x.shape(), std::move(out), {x}, [factor](detail::Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * factor;
  });
}

Tensor add_scalar(const Tensor& x, double offset) {
  auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] + offset;
  return make_result(x.shape(), std::move(out), {x}, [](detail::Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor relu(const Tensor& x) {
  auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (xv[i] == 0.0) ++g_kink_hits;
    out[i] = xv[i] > 0.0 ? xv[i] : 0.0;
  }
  return make_result(x.shape(), std::move(out), {x}, [](detail::Node& self) {
    auto& p = self.parents[0];
    auto& g = p->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (p->value[i] > 0.0) g[i] += self.grad[i];
    }
  });
}

Tensor tanh(const Tensor& x) {
  auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(xv[i]);
  return make_result(x.shape(), std::move(out), {x}, [](detail::Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * (1.0 - self.value[i] * self.value[i]);
  });
}

Tensor exp(const Tensor& x) {
  auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(xv[i]);
  return make_result(x.shape(), std::move(out), {x}, [](detail::Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * self.value[i];
  });
}

Tensor pow_scalar(const Tensor& x, double exponent) {
  auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (xv[i] < 0.0) fail(ErrorKind::kContract, "pow_scalar: negative base");
    out[i] = std::pow(xv[i], exponent);
  }
  return make_result(x.shape(), std::move(out), {x}, [exponent](detail::Node& self) {
    auto& p = self.parents[0];
    auto& g = p->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      double base = p->value[i];
      double d = 0.0;
      if (exponent == 1.0) {
        d = 1.0;
      } else if (exponent != 0.0 && base > 0.0) {
        d = exponent * std::pow(base, exponent - 1.0);
      }
      g[i] += self.grad[i] * d;
    }
  });
}

// ---- reductions ------------------------------------------------------------

Tensor sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.values()) s += v;
  return make_result({}, {s}, {x}, [](detail::Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (auto& gi : g) gi += self.grad[0];
  });
}

Tensor mean(const Tensor& x) {
  const std::size_t n = x.numel();
  if (n == 0) fail(ErrorKind::kContract, "mean of an empty tensor");
  double s = 0.0;
  for (double v : x.values()) s += v;
  const double inv = 1.0 / static_cast<double>(n);
  return make_result({}, {s * inv}, {x}, [inv](detail::Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (auto& gi : g) gi += self.grad[0] * inv;
  });
}

// ---- linear algebra --------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    fail(ErrorKind::kDimension, "matmul: incompatible shapes " + shape_str(a.shape()) + " x " +
                                    shape_str(b.shape()));
  }
  const std::size_t n = a.dim(0), k = a.dim(1), m = b.dim(1);
  auto av = a.values(), bv = b.values();
  std::vector<double> out(n * m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double* orow = out.data() + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      if (aip == 0.0) continue;
      const double* brow = bv.data() + p * m;
      for (std::size_t j = 0; j < m; ++j) orow[j] += aip * brow[j];
    }
  }
  return make_result({n, m}, std::move(out), {a, b}, [n, k, m](detail::Node& self) {
    auto& pa = self.parents[0];
    auto& pb = self.parents[1];
    const double* go = self.grad.data();
    if (pa->requires_grad) {
      auto& ga = pa->ensure_grad();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double* brow = pb->value.data() + p * m;
          const double* grow = go + i * m;
          double s = 0.0;
          for (std::size_t j = 0; j < m; ++j) s += grow[j] * brow[j];
          ga[i * k + p] += s;
        }
      }
    }
    if (pb->requires_grad) {
      auto& gb = pb->ensure_grad();
      for (std::size_t i = 0; i < n; ++i) {
        const double* grow = go + i * m;
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = pa->value[i * k + p];
          if (aip == 0.0) continue;
          double* gbrow = gb.data() + p * m;
          for (std::size_t j = 0; j < m; ++j) gbrow[j] += aip * grow[j];
        }
      }
    }
  });
}

Tensor add_row_bias(const Tensor& x, const Tensor& bias) {
  if (x.rank() != 2 || bias.rank() != 1 || bias.dim(0) != x.dim(1)) {
    fail(ErrorKind::kDimension, "add_row_bias: incompatible shapes " + shape_str(x.shape()) + " + " +
                                    shape_str(bias.shape()));
  }
  const std::size_t n = x.dim(0), m = x.dim(1);
  auto xv = x.values(), bv = bias.values();
  std::vector<double> out(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] = xv[i * m + j] + bv[j];
  }
  return make_result({n, m}, std::move(out), {x, bias}, [n, m](detail::Node& self) {
    auto& px = self.parents[0];
    auto& pb = self.parents[1];
    if (px->requires_grad) {
      auto& g = px->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (pb->requires_grad) {
      auto& g = pb->ensure_grad();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) g[j] += self.grad[i * m + j];
      }
    }
  });
}

// ---- indexing --------------------------------------------------------------

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> idx) {
  if (x.rank() != 2) fail(ErrorKind::kDimension, "gather_rows: expected a matrix, got " + shape_str(x.shape()));
  const std::size_t n = x.dim(0), d = x.dim(1);
  auto xv = x.values();
  std::vector<double> out(idx.size() * d);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] >= n) fail(ErrorKind::kDimension, "gather_rows: row index out of range");
    std::copy_n(xv.begin() + static_cast<std::ptrdiff_t>(idx[r] * d), d, out.begin() + static_cast<std::ptrdiff_t>(r * d));
  }
  std::vector<std::size_t> rows(idx.begin(), idx.end());
  return make_result({idx.size(), d}, std::move(out), {x}, [rows = std::move(rows), d](detail::Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t j = 0; j < d; ++j) g[rows[r] * d + j] += self.grad[r * d + j];
    }
  });
}

Tensor row(const Tensor& x, std::size_t i) {
  if (x.rank() != 2) fail(ErrorKind::kDimension, "row: expected a matrix, got " + shape_str(x.shape()));
  if (i >= x.dim(0)) fail(ErrorKind::kDimension, "row: index out of range");
  return slice(x, i * x.dim(1), {x.dim(1)});
}

Tensor slice(const Tensor& x, std::size_t offset, Shape shape) {
  const std::size_t len = shape_numel(shape);
  if (offset + len > x.numel()) fail(ErrorKind::kDimension, "slice: range exceeds tensor size");
  auto xv = x.values();
  std::vector<double> out(xv.begin() + static_cast<std::ptrdiff_t>(offset),
                          xv.begin() + static_cast<std::ptrdiff_t>(offset + len));
  return make_result(std::move(shape), std::move(out), {x}, [offset, len](detail::Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < len; ++i) g[offset + i] += self.grad[i];
  });
}

Tensor stack(std::span<const Tensor> scalars) {
  std::vector<double> out;
  out.reserve(scalars.size());
  for (const auto& s : scalars) {
    if (s.numel() != 1) fail(ErrorKind::kDimension, "stack: expected scalars");
    out.push_back(s.values()[0]);
  }
  return make_result_n({scalars.size()}, std::move(out), scalars, [](detail::Node& self) {
    for (std::size_t i = 0; i < self.parents.size(); ++i) {
      if (self.parents[i]->requires_grad) self.parents[i]->ensure_grad()[0] += self.grad[i];
    }
  });
}

// ---- norms and softmax -----------------------------------------------------

Tensor lp_norm(const Tensor& x, int p) {
  if (p < 1) fail(ErrorKind::kContract, "lp_norm: p must be a positive integer");
  auto [n, d] = rows_cols(x, "lp_norm");
  auto xv = x.values();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = xv.data() + i * d;
    double s = 0.0;
    if (p == 2) {
      for (std::size_t j = 0; j < d; ++j) s += r[j] * r[j];
      out[i] = std::sqrt(s);
    } else if (p == 1) {
      for (std::size_t j = 0; j < d; ++j) s += std::abs(r[j]);
      out[i] = s;
    } else {
      for (std::size_t j = 0; j < d; ++j) s += std::pow(std::abs(r[j]), p);
      out[i] = std::pow(s, 1.0 / p);
    }
    if (out[i] == 0.0) ++g_kink_hits;
  }
  return make_result(reduced_shape(x), std::move(out), {x}, [n, d, p](detail::Node& self) {
    auto& px = self.parents[0];
    auto& g = px->ensure_grad();
    for (std::size_t i = 0; i < n; ++i) {
      const double norm = self.value[i];
      if (norm == 0.0) continue;
      const double gi = self.grad[i];
      const double* r = px->value.data() + i * d;
      double* gr = g.data() + i * d;
      if (p == 2) {
        for (std::size_t j = 0; j < d; ++j) gr[j] += gi * r[j] / norm;
      } else if (p == 1) {
        for (std::size_t j = 0; j < d; ++j) gr[j] += gi * (r[j] > 0 ? 1.0 : (r[j] < 0 ? -1.0 : 0.0));
      } else {
        const double denom = std::pow(norm, p - 1);
        for (std::size_t j = 0; j < d; ++j) {
          const double a = std::abs(r[j]);
          const double sgn = r[j] > 0 ? 1.0 : (r[j] < 0 ? -1.0 : 0.0);
          gr[j] += gi * sgn * std::pow(a, p - 1) / denom;
        }
      }
    }
  });
}

Tensor l2_normalize(const Tensor& x) {
  auto [n, d] = rows_cols(x, "l2_normalize");
  auto xv = x.values();
  std::vector<double> out(xv.size());
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = xv.data() + i * d;
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += r[j] * r[j];
    norms[i] = std::sqrt(s);
    if (norms[i] == 0.0) {
      ++g_kink_hits;
      continue;
    }
    for (std::size_t j = 0; j < d; ++j) out[i * d + j] = r[j] / norms[i];
  }
  return make_result(x.shape(), std::move(out), {x}, [n, d, norms = std::move(norms)](detail::Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < n; ++i) {
      if (norms[i] == 0.0) continue;
      const double* y = self.value.data() + i * d;
      const double* gy = self.grad.data() + i * d;
      double dot = 0.0;
      for (std::size_t j = 0; j < d; ++j) dot += y[j] * gy[j];
      for (std::size_t j = 0; j < d; ++j) g[i * d + j] += (gy[j] - y[j] * dot) / norms[i];
    }
  });
}

Tensor log_softmax(const Tensor& logits) {
  auto [n, k] = rows_cols(logits, "log_softmax");
  auto xv = logits.values();
  std::vector<double> out(n * k);
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = xv.data() + i * k;
    const double mx = *std::max_element(r, r + k);
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += std::exp(r[j] - mx);
    const double lse = mx + std::log(s);
    for (std::size_t j = 0; j < k; ++j) out[i * k + j] = r[j] - lse;
  }
  return make_result(logits.shape(), std::move(out), {logits}, [n, k](detail::Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < n; ++i) {
      double gs = 0.0;
      for (std::size_t j = 0; j < k; ++j) gs += self.grad[i * k + j];
      for (std::size_t j = 0; j < k; ++j) {
        g[i * k + j] += self.grad[i * k + j] - std::exp(self.value[i * k + j]) * gs;
      }
    }
  });
}

Tensor pick(const Tensor& x, std::span<const std::size_t> labels) {
  auto [n, k] = rows_cols(x, "pick");
  if (labels.size() != n) fail(ErrorKind::kDimension, "pick: one label per row required");
  auto xv = x.values();
  std::vector<double> out(n);
  std::vector<std::size_t> cols(labels.begin(), labels.end());
  for (std::size_t i = 0; i < n; ++i) {
    if (cols[i] >= k) fail(ErrorKind::kContract, "label " + std::to_string(cols[i]) + " out of range [0, " + std::to_string(k) + ")");
    out[i] = xv[i * k + cols[i]];
  }
  return make_result(reduced_shape(x), std::move(out), {x}, [cols = std::move(cols), k](detail::Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < cols.size(); ++i) g[i * k + cols[i]] += self.grad[i];
  });
}

}  // namespace pcct

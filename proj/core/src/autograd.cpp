#include "strokegen/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_set>

#include "strokegen/errors.hpp"

namespace strokegen::tensor {

namespace {

thread_local bool tl_grad_enabled = true;

std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? ", " : "") + std::to_string(s[i]);
  return out + "]";
}

template <class T>
void require_2d(const Tensor<T>& t, const char* op) {
  if (t.rank() != 2) throw ShapeError(std::string(op) + ": expected a 2-D tensor, got " + shape_str(t.shape()));
}

template <class T>
void require_finite(const Tensor<T>& t, const char* op) {
  if (!t.all_finite()) throw NumericError(std::string(op) + ": produced a non-finite value");
}

// C[m, n] += A[m, k] * B[k, n]
template <class T>
void gemm_nn(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    T* crow = c + i * n;
    const T* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = arow[p];
      if (av == T{0}) continue;
      const T* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C[m, n] += A[k, m]^T * B[k, n]
template <class T>
void gemm_tn(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t p = 0; p < k; ++p) {
    const T* arow = a + p * m;
    const T* brow = b + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const T av = arow[i];
      if (av == T{0}) continue;
      T* crow = c + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <class T>
std::vector<T> transposed(const T* a, std::size_t rows, std::size_t cols) {
  std::vector<T> out(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) out[j * rows + i] = a[i * cols + j];
  }
  return out;
}

// C[m, n] += A[m, k] * B[n, k]^T
template <class T>
void gemm_nt(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n) {
  const auto bt = transposed(b, n, k);
  gemm_nn(a, bt.data(), c, m, k, n);
}

template <class T, class Backward>
Var<T> make_result(Tensor<T> value, std::initializer_list<const Var<T>*> parents, const char* op,
                   Backward&& fn) {
  require_finite(value, op);
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  node->is_leaf = false;
  bool needs = false;
  if (tl_grad_enabled) {
    for (const auto* p : parents) needs = needs || p->requires_grad();
  }
  if (needs) {
    node->requires_grad = true;
    for (const auto* p : parents) node->parents.push_back(p->shared());
    node->backward_fn = std::forward<Backward>(fn);
  }
  return Var<T>(std::move(node));
}

template <class T>
Tensor<T>* grad_of(Node<T>* n) {
  if (!n->requires_grad) return nullptr;
  n->ensure_grad();
  return &n->grad;
}

}  // namespace

bool grad_enabled() { return tl_grad_enabled; }
void set_grad_enabled(bool enabled) { tl_grad_enabled = enabled; }

template <std::floating_point T>
Var<T> Var<T>::parameter(Tensor<T> value) {
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  node->requires_grad = true;
  return Var(std::move(node));
}

template <std::floating_point T>
Var<T> Var<T>::constant(Tensor<T> value) {
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  return Var(std::move(node));
}

template <std::floating_point T>
void Var<T>::zero_grad() {
  if (node_) {
    node_->ensure_grad();
    node_->grad.fill(T{0});
  }
}

template <std::floating_point T>
void backward(const Var<T>& loss, T seed) {
  if (!loss.defined() || loss.value().size() != 1) {
    throw ShapeError("backward: loss must be a scalar, got " + (loss.defined() ? shape_str(loss.shape()) : "null"));
  }
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> visited;
  std::vector<std::pair<Node<T>*, std::size_t>> stack{{loss.node(), 0}};
  visited.insert(loss.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node<T>* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  for (Node<T>* n : order) {
    if (!n->is_leaf) {
      n->ensure_grad();
      n->grad.fill(T{0});
    }
  }
  loss.node()->ensure_grad();
  loss.node()->grad[0] += seed;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward_fn) (*it)->backward_fn(**it);
  }
}

template <std::floating_point T>
Var<T> matmul(const Var<T>& a, const Var<T>& b) {
  const auto& av = a.value();
  const auto& bv = b.value();
  require_2d(av, "matmul");
  require_2d(bv, "matmul");
  if (av.cols() != bv.rows()) {
    throw ShapeError("matmul: " + shape_str(av.shape()) + " x " + shape_str(bv.shape()));
  }
  const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
  Tensor<T> out({m, n});
  gemm_nn(av.raw(), bv.raw(), out.raw(), m, k, n);
  return make_result(std::move(out), {&a, &b}, "matmul", [m, k, n](Node<T>& self) {
    Node<T>* pa = self.parents[0].get();
    Node<T>* pb = self.parents[1].get();
    if (auto* ga = grad_of(pa)) gemm_nt(self.grad.raw(), pb->value.raw(), ga->raw(), m, n, k);
    if (auto* gb = grad_of(pb)) gemm_tn(pa->value.raw(), self.grad.raw(), gb->raw(), k, m, n);
  });
}

template <std::floating_point T>
Var<T> matmul_nt(const Var<T>& a, const Var<T>& b) {
  const auto& av = a.value();
  const auto& bv = b.value();
  require_2d(av, "matmul_nt");
  require_2d(bv, "matmul_nt");
  if (av.cols() != bv.cols()) {
    throw ShapeError("matmul_nt: " + shape_str(av.shape()) + " x " + shape_str(bv.shape()) + "^T");
  }
  const std::size_t m = av.rows(), k = av.cols(), n = bv.rows();
  Tensor<T> out({m, n});
  gemm_nt(av.raw(), bv.raw(), out.raw(), m, k, n);
  return make_result(std::move(out), {&a, &b}, "matmul_nt", [m, k, n](Node<T>& self) {
    Node<T>* pa = self.parents[0].get();
    Node<T>* pb = self.parents[1].get();
    // dA = dC * B, dB = dC^T * A
    if (auto* ga = grad_of(pa)) gemm_nn(self.grad.raw(), pb->value.raw(), ga->raw(), m, n, k);
    if (auto* gb = grad_of(pb)) gemm_tn(self.grad.raw(), pa->value.raw(), gb->raw(), n, m, k);
  });
}

template <std::floating_point T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  if (a.shape() != b.shape()) throw ShapeError("add: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  Tensor<T> out = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return make_result(std::move(out), {&a, &b}, "add", [](Node<T>& self) {
    for (auto& parent : self.parents) {
      if (auto* g = grad_of(parent.get())) {
        for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
      }
    }
  });
}

template <std::floating_point T>
Var<T> add_row(const Var<T>& a, const Var<T>& bias) {
  const auto& av = a.value();
  require_2d(av, "add_row");
  if (bias.value().size() != av.cols()) {
    throw ShapeError("add_row: bias " + shape_str(bias.shape()) + " for " + shape_str(av.shape()));
  }
  Tensor<T> out = av;
  const T* bv = bias.value().raw();
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += bv[c];
  }
  return make_result(std::move(out), {&a, &bias}, "add_row", [](Node<T>& self) {
    if (auto* ga = grad_of(self.parents[0].get())) {
      for (std::size_t i = 0; i < ga->size(); ++i) (*ga)[i] += self.grad[i];
    }
    if (auto* gb = grad_of(self.parents[1].get())) {
      for (std::size_t r = 0; r < self.grad.rows(); ++r) {
        const auto row = std::as_const(self.grad).row(r);
        for (std::size_t c = 0; c < row.size(); ++c) (*gb)[c] += row[c];
      }
    }
  });
}

template <std::floating_point T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  if (a.shape() != b.shape()) throw ShapeError("mul: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  Tensor<T> out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return make_result(std::move(out), {&a, &b}, "mul", [](Node<T>& self) {
    Node<T>* pa = self.parents[0].get();
    Node<T>* pb = self.parents[1].get();
    if (auto* ga = grad_of(pa)) {
      for (std::size_t i = 0; i < ga->size(); ++i) (*ga)[i] += self.grad[i] * pb->value[i];
    }
    if (auto* gb = grad_of(pb)) {
      for (std::size_t i = 0; i < gb->size(); ++i) (*gb)[i] += self.grad[i] * pa->value[i];
    }
  });
}

template <std::floating_point T>
Var<T> scale(const Var<T>& a, T factor) {
  Tensor<T> out = a.value();
  for (auto& v : out.data()) v *= factor;
  return make_result(std::move(out), {&a}, "scale", [factor](Node<T>& self) {
    if (auto* g = grad_of(self.parents[0].get())) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += factor * self.grad[i];
    }
  });
}

template <std::floating_point T>
Var<T> relu(const Var<T>& a) {
  Tensor<T> out = a.value();
  for (auto& v : out.data()) v = v > T{0} ? v : T{0};
  return make_result(std::move(out), {&a}, "relu", [](Node<T>& self) {
    Node<T>* pa = self.parents[0].get();
    if (auto* g = grad_of(pa)) {
      for (std::size_t i = 0; i < g->size(); ++i) {
        if (pa->value[i] > T{0}) (*g)[i] += self.grad[i];
      }
    }
  });
}

namespace {

// Softmax over `count` entries spaced `stride` apart; entries with keep == false are 0.
template <class T, class Keep>
void softmax_line(const T* in, T* out, std::size_t count, std::size_t stride, Keep&& keep) {
  T max_v = -std::numeric_limits<T>::infinity();
  for (std::size_t i = 0; i < count; ++i) {
    if (keep(i)) max_v = std::max(max_v, in[i * stride]);
  }
  T total = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const T e = keep(i) ? std::exp(in[i * stride] - max_v) : T{0};
    out[i * stride] = e;
    total += e;
  }
  if (total > T{0}) {
    for (std::size_t i = 0; i < count; ++i) out[i * stride] /= total;
  }
}

template <class T>
void softmax_line_backward(const T* y, const T* dy, T* dx, std::size_t count, std::size_t stride) {
  T dot_v = 0;
  for (std::size_t i = 0; i < count; ++i) dot_v += dy[i * stride] * y[i * stride];
  for (std::size_t i = 0; i < count; ++i) dx[i * stride] += y[i * stride] * (dy[i * stride] - dot_v);
}

}  // namespace

template <std::floating_point T>
Var<T> softmax(const Var<T>& a, int axis) {
  const auto& av = a.value();
  require_2d(av, "softmax");
  if (axis != 0 && axis != 1) throw PreconditionError("softmax: axis must be 0 or 1");
  const std::size_t rows = av.rows(), cols = av.cols();
  Tensor<T> out(av.shape());
  auto all = [](std::size_t) { return true; };
  if (axis == 1) {
    for (std::size_t r = 0; r < rows; ++r) softmax_line(av.raw() + r * cols, out.raw() + r * cols, cols, 1, all);
  } else {
    for (std::size_t c = 0; c < cols; ++c) softmax_line(av.raw() + c, out.raw() + c, rows, cols, all);
  }
  return make_result(std::move(out), {&a}, "softmax", [axis, rows, cols](Node<T>& self) {
    if (auto* g = grad_of(self.parents[0].get())) {
      if (axis == 1) {
        for (std::size_t r = 0; r < rows; ++r) {
          softmax_line_backward(self.value.raw() + r * cols, self.grad.raw() + r * cols, g->raw() + r * cols, cols, 1);
        }
      } else {
        for (std::size_t c = 0; c < cols; ++c) {
          softmax_line_backward(self.value.raw() + c, self.grad.raw() + c, g->raw() + c, rows, cols);
        }
      }
    }
  });
}

template <std::floating_point T>
Var<T> masked_softmax(const Var<T>& a, const Mask& mask) {
  const auto& av = a.value();
  require_2d(av, "masked_softmax");
  if (mask.rows != av.rows() || mask.cols != av.cols()) throw ShapeError("masked_softmax: mask shape mismatch");
  const std::size_t rows = av.rows(), cols = av.cols();
  Tensor<T> out(av.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    softmax_line(av.raw() + r * cols, out.raw() + r * cols, cols, 1, [&](std::size_t c) { return mask.allows(r, c); });
  }
  return make_result(std::move(out), {&a}, "masked_softmax", [rows, cols](Node<T>& self) {
    if (auto* g = grad_of(self.parents[0].get())) {
      for (std::size_t r = 0; r < rows; ++r) {
        softmax_line_backward(self.value.raw() + r * cols, self.grad.raw() + r * cols, g->raw() + r * cols, cols, 1);
      }
    }
  });
}

template <std::floating_point T>
Var<T> layer_norm(const Var<T>& x, const Var<T>& gain, const Var<T>& bias, T eps) {
  const auto& xv = x.value();
  require_2d(xv, "layer_norm");
  const std::size_t rows = xv.rows(), cols = xv.cols();
  if (cols == 0) throw PreconditionError("layer_norm: empty feature axis");
  if (gain.value().size() != cols || bias.value().size() != cols) throw ShapeError("layer_norm: gain/bias size");
  Tensor<T> out(xv.shape());
  std::vector<T> x_hat(xv.size());
  std::vector<T> inv_std(rows);
  const T* g = gain.value().raw();
  const T* b = bias.value().raw();
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = xv.row(r);
    T mean = 0;
    for (T v : row) mean += v;
    mean /= static_cast<T>(cols);
    T var = 0;
    for (T v : row) var += (v - mean) * (v - mean);
    var /= static_cast<T>(cols);
    inv_std[r] = T{1} / std::sqrt(var + eps);
    for (std::size_t c = 0; c < cols; ++c) {
      const T h = (row[c] - mean) * inv_std[r];
      x_hat[r * cols + c] = h;
      out(r, c) = g[c] * h + b[c];
    }
  }
  return make_result(std::move(out), {&x, &gain, &bias}, "layer_norm",
                     [rows, cols, x_hat = std::move(x_hat), inv_std = std::move(inv_std)](Node<T>& self) {
                       const T* dy = self.grad.raw();
                       const T* gv = self.parents[1]->value.raw();
                       if (auto* gg = grad_of(self.parents[1].get())) {
                         for (std::size_t i = 0; i < rows * cols; ++i) (*gg)[i % cols] += dy[i] * x_hat[i];
                       }
                       if (auto* gb = grad_of(self.parents[2].get())) {
                         for (std::size_t i = 0; i < rows * cols; ++i) (*gb)[i % cols] += dy[i];
                       }
                       if (auto* gx = grad_of(self.parents[0].get())) {
                         for (std::size_t r = 0; r < rows; ++r) {
                           T mean_d = 0, mean_dh = 0;
                           for (std::size_t c = 0; c < cols; ++c) {
                             const T d = dy[r * cols + c] * gv[c];
                             mean_d += d;
                             mean_dh += d * x_hat[r * cols + c];
                           }
                           mean_d /= static_cast<T>(cols);
                           mean_dh /= static_cast<T>(cols);
                           for (std::size_t c = 0; c < cols; ++c) {
                             const T d = dy[r * cols + c] * gv[c];
                             (*gx)(r, c) += inv_std[r] * (d - mean_d - x_hat[r * cols + c] * mean_dh);
                           }
                         }
                       }
                     });
}

template <std::floating_point T>
Var<T> embedding(const Var<T>& table, std::span<const int> ids) {
  const auto& tv = table.value();
  require_2d(tv, "embedding");
  const std::size_t d = tv.cols();
  Tensor<T> out({ids.size(), d});
  std::vector<int> kept(ids.begin(), ids.end());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= tv.rows()) {
      throw LookupError("embedding: id " + std::to_string(ids[i]) + " out of range for " + std::to_string(tv.rows()) +
                        " rows");
    }
    const auto src = tv.row(static_cast<std::size_t>(ids[i]));
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return make_result(std::move(out), {&table}, "embedding", [d, kept = std::move(kept)](Node<T>& self) {
    if (auto* g = grad_of(self.parents[0].get())) {
      for (std::size_t i = 0; i < kept.size(); ++i) {
        T* dst = g->raw() + static_cast<std::size_t>(kept[i]) * d;
        const T* src = self.grad.raw() + i * d;
        for (std::size_t c = 0; c < d; ++c) dst[c] += src[c];
      }
    }
  });
}

template <std::floating_point T>
Var<T> cross_entropy(const Var<T>& logits, std::span<const int> targets) {
  const auto& lv = logits.value();
  require_2d(lv, "cross_entropy");
  const std::size_t rows = lv.rows(), cols = lv.cols();
  if (targets.size() != rows) throw ShapeError("cross_entropy: one target per row required");
  Tensor<T> probs(lv.shape());
  T total = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (targets[r] < 0 || static_cast<std::size_t>(targets[r]) >= cols) {
      throw LookupError("cross_entropy: target " + std::to_string(targets[r]) + " out of range");
    }
    softmax_line(lv.raw() + r * cols, probs.raw() + r * cols, cols, 1, [](std::size_t) { return true; });
    const auto row = lv.row(r);
    const T max_v = *std::max_element(row.begin(), row.end());
    T sum_exp = 0;
    for (T v : row) sum_exp += std::exp(v - max_v);
    total += max_v + std::log(sum_exp) - row[static_cast<std::size_t>(targets[r])];
  }
  Tensor<T> out({1, 1}, total / static_cast<T>(rows));
  std::vector<int> kept(targets.begin(), targets.end());
  return make_result(std::move(out), {&logits}, "cross_entropy",
                     [rows, cols, probs = std::move(probs), kept = std::move(kept)](Node<T>& self) {
                       if (auto* g = grad_of(self.parents[0].get())) {
                         const T s = self.grad[0] / static_cast<T>(rows);
                         for (std::size_t r = 0; r < rows; ++r) {
                           for (std::size_t c = 0; c < cols; ++c) (*g)(r, c) += s * probs(r, c);
                           (*g)(r, static_cast<std::size_t>(kept[r])) -= s;
                         }
                       }
                     });
}

template <std::floating_point T>
Var<T> slice_cols(const Var<T>& a, std::size_t begin, std::size_t count) {
  const auto& av = a.value();
  require_2d(av, "slice_cols");
  if (begin + count > av.cols()) throw ShapeError("slice_cols: range past the last column");
  const std::size_t rows = av.rows(), cols = av.cols();
  Tensor<T> out({rows, count});
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(av.raw() + r * cols + begin, count, out.raw() + r * count);
  }
  return make_result(std::move(out), {&a}, "slice_cols", [rows, cols, begin, count](Node<T>& self) {
    if (auto* g = grad_of(self.parents[0].get())) {
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < count; ++c) (*g)(r, begin + c) += self.grad[r * count + c];
      }
    }
  });
}

template <std::floating_point T>
Var<T> concat_cols(std::span<const Var<T>> parts) {
  if (parts.empty()) throw PreconditionError("concat_cols: no inputs");
  const std::size_t rows = parts[0].value().rows();
  std::size_t cols = 0;
  for (const auto& p : parts) {
    require_2d(p.value(), "concat_cols");
    if (p.value().rows() != rows) throw ShapeError("concat_cols: row count mismatch");
    cols += p.value().cols();
  }
  Tensor<T> out({rows, cols});
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const std::size_t pc = p.value().cols();
    for (std::size_t r = 0; r < rows; ++r) std::copy_n(p.value().raw() + r * pc, pc, out.raw() + r * cols + offset);
    offset += pc;
  }
  auto node = std::make_shared<Node<T>>();
  require_finite(out, "concat_cols");
  node->value = std::move(out);
  node->is_leaf = false;
  bool needs = false;
  if (grad_enabled()) {
    for (const auto& p : parts) needs = needs || p.requires_grad();
  }
  if (needs) {
    node->requires_grad = true;
    for (const auto& p : parts) node->parents.push_back(p.shared());
    node->backward_fn = [rows, cols](Node<T>& self) {
      std::size_t off = 0;
      for (auto& parent : self.parents) {
        const std::size_t pc = parent->value.cols();
        if (auto* g = grad_of(parent.get())) {
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < pc; ++c) (*g)(r, c) += self.grad[r * cols + off + c];
          }
        }
        off += pc;
      }
    };
  }
  return Var<T>(std::move(node));
}

template <std::floating_point T>
Var<T> sum(const Var<T>& a) {
  T total = 0;
  for (T v : a.value().data()) total += v;
  return make_result(Tensor<T>({1, 1}, total), {&a}, "sum", [](Node<T>& self) {
    if (auto* g = grad_of(self.parents[0].get())) {
      for (auto& v : g->data()) v += self.grad[0];
    }
  });
}

#define STROKEGEN_INSTANTIATE(T)                                                        \
  template class Var<T>;                                                                \
  template void backward<T>(const Var<T>&, T);                                          \
  template Var<T> matmul<T>(const Var<T>&, const Var<T>&);                              \
  template Var<T> matmul_nt<T>(const Var<T>&, const Var<T>&);                           \
  template Var<T> add<T>(const Var<T>&, const Var<T>&);                                 \
  template Var<T> add_row<T>(const Var<T>&, const Var<T>&);                             \
  template Var<T> mul<T>(const Var<T>&, const Var<T>&);                                 \
  template Var<T> scale<T>(const Var<T>&, T);                                           \
  template Var<T> relu<T>(const Var<T>&);                                               \
  template Var<T> softmax<T>(const Var<T>&, int);                                       \
  template Var<T> masked_softmax<T>(const Var<T>&, const Mask&);                        \
  template Var<T> layer_norm<T>(const Var<T>&, const Var<T>&, const Var<T>&, T);        \
  template Var<T> embedding<T>(const Var<T>&, std::span<const int>);                    \
  template Var<T> cross_entropy<T>(const Var<T>&, std::span<const int>);                \
  template Var<T> slice_cols<T>(const Var<T>&, std::size_t, std::size_t);               \
  template Var<T> concat_cols<T>(std::span<const Var<T>>);                              \
  template Var<T> sum<T>(const Var<T>&);

STROKEGEN_INSTANTIATE(float)
STROKEGEN_INSTANTIATE(double)

#undef STROKEGEN_INSTANTIATE

}  // namespace strokegen::tensor

#include "dgnn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace dgnn::ops {
namespace {

using detail::Node;
using NodePtr = std::shared_ptr<Node>;

NodePtr make_node(const char* op, Shape shape, std::vector<double> value,
                  std::initializer_list<const Tensor*> inputs) {
  require_finite(value, op);
  auto node = std::make_shared<Node>();
  node->op = op;
  node->shape = std::move(shape);
  node->value = std::move(value);
  for (const Tensor* t : inputs) node->requires_grad = node->requires_grad || t->requires_grad();
  if (node->requires_grad) {
    for (const Tensor* t : inputs) node->inputs.push_back(t->node());
  }
  return node;
}

Tensor finish(NodePtr node, std::function<void(Node&)> rule) {
  if (node->requires_grad) node->backward = std::move(rule);
  return Tensor(std::move(node));
}

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank-" + std::to_string(rank) + " tensor, got " +
                     shape_str(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
}

// c[m×n] += a[m×k]·b[k×n]
void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    const double* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// c[m×k] += a[m×n]·b[k×n]ᵀ, as gemm_nn against a transposed copy of b.
void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
             std::size_t k) {
  std::vector<double> bt(n * k);
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t j = 0; j < n; ++j) bt[j * k + p] = b[p * n + j];
  gemm_nn(a, bt.data(), c, m, n, k);
}

// c[k×n] += a[m×k]ᵀ·b[m×n]
void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    const double* brow = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      double* crow = c + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <typename Fwd, typename Deriv>
Tensor unary(const Tensor& a, const char* op, Fwd fwd, Deriv deriv) {
  const auto x = a.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = fwd(x[i]);
  auto node = make_node(op, a.shape(), std::move(out), {&a});
  return finish(std::move(node), [deriv](Node& self) {
    auto& in = *self.inputs[0];
    auto& g = in.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * deriv(in.value[i]);
  });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows()) {
    throw ShapeError("matmul: incompatible shapes " + shape_str(a.shape()) + " and " +
                     shape_str(b.shape()));
  }
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<double> out(m * n, 0.0);
  gemm_nn(a.data().data(), b.data().data(), out.data(), m, k, n);
  auto node = make_node("matmul", Shape{m, n}, std::move(out), {&a, &b});
  return finish(std::move(node), [m, k, n](Node& self) {
    Node& na = *self.inputs[0];
    Node& nb = *self.inputs[1];
    if (na.requires_grad) gemm_nt(self.grad.data(), nb.value.data(), na.grad_buffer().data(), m, n, k);
    if (nb.requires_grad) gemm_tn(na.value.data(), self.grad.data(), nb.grad_buffer().data(), m, k, n);
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.numel());
  const auto av = a.data(), bv = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  auto node = make_node("add", a.shape(), std::move(out), {&a, &b});
  return finish(std::move(node), [](Node& self) {
    for (auto& in : self.inputs) {
      if (!in->requires_grad) continue;
      auto& g = in->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.numel());
  const auto av = a.data(), bv = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  auto node = make_node("sub", a.shape(), std::move(out), {&a, &b});
  return finish(std::move(node), [](Node& self) {
    if (self.inputs[0]->requires_grad) {
      auto& g = self.inputs[0]->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (self.inputs[1]->requires_grad) {
      auto& g = self.inputs[1]->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.numel());
  const auto av = a.data(), bv = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  auto node = make_node("mul", a.shape(), std::move(out), {&a, &b});
  return finish(std::move(node), [](Node& self) {
    Node& na = *self.inputs[0];
    Node& nb = *self.inputs[1];
    if (na.requires_grad) {
      auto& g = na.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * nb.value[i];
    }
    if (nb.requires_grad) {
      auto& g = nb.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * na.value[i];
    }
  });
}

Tensor scale(const Tensor& a, double factor) {
  return unary(a, "scale", [factor](double x) { return factor * x; },
               [factor](double) { return factor; });
}

Tensor add_bias(const Tensor& a, const Tensor& bias) {
  require_rank(a, 2, "add_bias");
  require_rank(bias, 1, "add_bias");
  const std::size_t m = a.rows(), n = a.cols();
  if (bias.numel() != n) {
    throw ShapeError("add_bias: bias " + shape_str(bias.shape()) + " does not match " +
                     shape_str(a.shape()));
  }
  std::vector<double> out(a.data().begin(), a.data().end());
  const auto bv = bias.data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += bv[j];
  auto node = make_node("add_bias", a.shape(), std::move(out), {&a, &bias});
  return finish(std::move(node), [m, n](Node& self) {
    if (self.inputs[0]->requires_grad) {
      auto& g = self.inputs[0]->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (self.inputs[1]->requires_grad) {
      auto& g = self.inputs[1]->grad_buffer();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) g[j] += self.grad[i * n + j];
    }
  });
}

Tensor scale_rows(const Tensor& a, const Tensor& s) {
  require_rank(a, 2, "scale_rows");
  require_rank(s, 1, "scale_rows");
  const std::size_t m = a.rows(), n = a.cols();
  if (s.numel() != m) {
    throw ShapeError("scale_rows: scale " + shape_str(s.shape()) + " does not match " +
                     shape_str(a.shape()));
  }
  std::vector<double> out(m * n);
  const auto av = a.data(), sv = s.data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = av[i * n + j] * sv[i];
  auto node = make_node("scale_rows", a.shape(), std::move(out), {&a, &s});
  return finish(std::move(node), [m, n](Node& self) {
    Node& na = *self.inputs[0];
    Node& ns = *self.inputs[1];
    if (na.requires_grad) {
      auto& g = na.grad_buffer();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) g[i * n + j] += self.grad[i * n + j] * ns.value[i];
    }
    if (ns.requires_grad) {
      auto& g = ns.grad_buffer();
      for (std::size_t i = 0; i < m; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += self.grad[i * n + j] * na.value[i * n + j];
        g[i] += acc;
      }
    }
  });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  return add_bias(matmul(x, weight), bias);
}

Tensor linear(const Tensor& x, const Tensor& weight) { return matmul(x, weight); }

Tensor shifted_softplus(const Tensor& a) {
  // ln(0.5eˣ + 0.5) = softplus(x) − ln 2, evaluated without overflow.
  return unary(
      a, "shifted_softplus",
      [](double x) {
        const double sp = x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
        return sp - std::numbers::ln2;
      },
      [](double x) {
        return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
      });
}

Tensor leaky_relu(const Tensor& a, double slope) {
  return unary(a, "leaky_relu", [slope](double x) { return x > 0.0 ? x : slope * x; },
               [slope](double x) { return x > 0.0 ? 1.0 : slope; });
}

Tensor abs(const Tensor& a) {
  return unary(a, "abs", [](double x) { return std::fabs(x); },
               [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Tensor gather_rows(const Tensor& a, std::span<const int> index) {
  require_rank(a, 2, "gather_rows");
  const std::size_t n = a.rows(), d = a.cols(), e = index.size();
  std::vector<double> out(e * d);
  for (std::size_t r = 0; r < e; ++r) {
    const int src = index[r];
    if (src < 0 || static_cast<std::size_t>(src) >= n) {
      throw IndexError("gather_rows: index " + std::to_string(src) + " at position " +
                       std::to_string(r) + " outside [0, " + std::to_string(n) + ")");
    }
    std::copy_n(a.data().begin() + static_cast<std::ptrdiff_t>(src * d), d, out.begin() + static_cast<std::ptrdiff_t>(r * d));
  }
  std::vector<int> idx(index.begin(), index.end());
  auto node = make_node("gather_rows", Shape{e, d}, std::move(out), {&a});
  return finish(std::move(node), [idx = std::move(idx), d](Node& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const std::size_t base = static_cast<std::size_t>(idx[r]) * d;
      for (std::size_t j = 0; j < d; ++j) g[base + j] += self.grad[r * d + j];
    }
  });
}

Tensor scatter_add(const Tensor& values, std::span<const int> index, std::size_t out_size) {
  require_rank(values, 2, "scatter_add");
  const std::size_t e = values.rows(), d = values.cols();
  if (index.size() != e) {
    throw ShapeError("scatter_add: " + std::to_string(index.size()) + " indices for " +
                     std::to_string(e) + " rows");
  }
  std::vector<double> out(out_size * d, 0.0);
  for (std::size_t r = 0; r < e; ++r) {
    const int dst = index[r];
    if (dst < 0 || static_cast<std::size_t>(dst) >= out_size) {
      throw IndexError("scatter_add: index " + std::to_string(dst) + " at position " +
                       std::to_string(r) + " outside [0, " + std::to_string(out_size) + ")");
    }
    const double* src = values.data().data() + r * d;
    double* row = out.data() + static_cast<std::size_t>(dst) * d;
    for (std::size_t j = 0; j < d; ++j) row[j] += src[j];
  }
  std::vector<int> idx(index.begin(), index.end());
  auto node = make_node("scatter_add", Shape{out_size, d}, std::move(out), {&values});
  return finish(std::move(node), [idx = std::move(idx), d](Node& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const std::size_t base = static_cast<std::size_t>(idx[r]) * d;
      for (std::size_t j = 0; j < d; ++j) g[r * d + j] += self.grad[base + j];
    }
  });
}

Tensor segment_softmax(const Tensor& logits, std::span<const int> segment) {
  require_rank(logits, 1, "segment_softmax");
  const std::size_t e = logits.numel();
  if (segment.size() != e) {
    throw ShapeError("segment_softmax: " + std::to_string(segment.size()) + " segment ids for " +
                     std::to_string(e) + " logits");
  }
  int max_id = -1;
  for (std::size_t i = 0; i < e; ++i) {
    if (segment[i] < 0) throw IndexError("segment_softmax: negative segment id at position " + std::to_string(i));
    max_id = std::max(max_id, segment[i]);
  }
  const auto nseg = static_cast<std::size_t>(max_id + 1);
  std::vector<double> seg_max(nseg, -std::numeric_limits<double>::infinity());
  std::vector<double> seg_sum(nseg, 0.0);
  const auto x = logits.data();
  for (std::size_t i = 0; i < e; ++i) {
    auto s = static_cast<std::size_t>(segment[i]);
    seg_max[s] = std::max(seg_max[s], x[i]);
  }
  std::vector<double> out(e);
  for (std::size_t i = 0; i < e; ++i) {
    auto s = static_cast<std::size_t>(segment[i]);
    out[i] = std::exp(x[i] - seg_max[s]);
    seg_sum[s] += out[i];
  }
  for (std::size_t i = 0; i < e; ++i) out[i] /= seg_sum[static_cast<std::size_t>(segment[i])];

  std::vector<int> seg(segment.begin(), segment.end());
  auto node = make_node("segment_softmax", Shape{e}, std::move(out), {&logits});
  return finish(std::move(node), [seg = std::move(seg), nseg](Node& self) {
    // dx_i = y_i (g_i − Σ_{j∈seg(i)} g_j y_j)
    std::vector<double> dot(nseg, 0.0);
    for (std::size_t i = 0; i < seg.size(); ++i)
      dot[static_cast<std::size_t>(seg[i])] += self.grad[i] * self.value[i];
    auto& g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < seg.size(); ++i)
      g[i] += self.value[i] * (self.grad[i] - dot[static_cast<std::size_t>(seg[i])]);
  });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "concat_cols");
  require_rank(b, 2, "concat_cols");
  if (a.rows() != b.rows()) {
    throw ShapeError("concat_cols: row mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  const std::size_t m = a.rows(), na = a.cols(), nb = b.cols(), n = na + nb;
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    std::copy_n(a.data().begin() + static_cast<std::ptrdiff_t>(i * na), na, out.begin() + static_cast<std::ptrdiff_t>(i * n));
    std::copy_n(b.data().begin() + static_cast<std::ptrdiff_t>(i * nb), nb, out.begin() + static_cast<std::ptrdiff_t>(i * n + na));
  }
  auto node = make_node("concat_cols", Shape{m, n}, std::move(out), {&a, &b});
  return finish(std::move(node), [m, na, nb, n](Node& self) {
    if (self.inputs[0]->requires_grad) {
      auto& g = self.inputs[0]->grad_buffer();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < na; ++j) g[i * na + j] += self.grad[i * n + j];
    }
    if (self.inputs[1]->requires_grad) {
      auto& g = self.inputs[1]->grad_buffer();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < nb; ++j) g[i * nb + j] += self.grad[i * n + na + j];
    }
  });
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "concat_rows");
  require_rank(b, 2, "concat_rows");
  if (a.cols() != b.cols()) {
    throw ShapeError("concat_rows: column mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  std::vector<double> out;
  out.reserve(a.numel() + b.numel());
  out.insert(out.end(), a.data().begin(), a.data().end());
  out.insert(out.end(), b.data().begin(), b.data().end());
  const std::size_t split = a.numel();
  auto node = make_node("concat_rows", Shape{a.rows() + b.rows(), a.cols()}, std::move(out), {&a, &b});
  return finish(std::move(node), [split](Node& self) {
    if (self.inputs[0]->requires_grad) {
      auto& g = self.inputs[0]->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (self.inputs[1]->requires_grad) {
      auto& g = self.inputs[1]->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[split + i];
    }
  });
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end) {
  require_rank(a, 2, "slice_cols");
  const std::size_t m = a.rows(), n = a.cols();
  if (begin > end || end > n) {
    throw ShapeError("slice_cols: [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") outside " + shape_str(a.shape()));
  }
  const std::size_t w = end - begin;
  std::vector<double> out(m * w);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < w; ++j) out[i * w + j] = a.data()[i * n + begin + j];
  auto node = make_node("slice_cols", Shape{m, w}, std::move(out), {&a});
  return finish(std::move(node), [m, n, w, begin](Node& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < w; ++j) g[i * n + begin + j] += self.grad[i * w + j];
  });
}

Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end) {
  require_rank(a, 2, "slice_rows");
  const std::size_t m = a.rows(), n = a.cols();
  if (begin > end || end > m) {
    throw ShapeError("slice_rows: [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") outside " + shape_str(a.shape()));
  }
  std::vector<double> out(a.data().begin() + static_cast<std::ptrdiff_t>(begin * n),
                          a.data().begin() + static_cast<std::ptrdiff_t>(end * n));
  auto node = make_node("slice_rows", Shape{end - begin, n}, std::move(out), {&a});
  return finish(std::move(node), [offset = begin * n](Node& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < self.grad.size(); ++i) g[offset + i] += self.grad[i];
  });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    throw ShapeError("reshape: cannot view " + shape_str(a.shape()) + " as " + shape_str(shape));
  }
  std::vector<double> out(a.data().begin(), a.data().end());
  auto node = make_node("reshape", std::move(shape), std::move(out), {&a});
  return finish(std::move(node), [](Node& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  require_rank(x, 2, "layer_norm");
  const std::size_t m = x.rows(), n = x.cols();
  if (gamma.shape() != Shape{n} || beta.shape() != Shape{n}) {
    throw ShapeError("layer_norm: scale/shift must be [" + std::to_string(n) + "], got " +
                     shape_str(gamma.shape()) + " and " + shape_str(beta.shape()));
  }
  std::vector<double> xhat(m * n), inv_std(m), out(m * n);
  const auto xv = x.data();
  for (std::size_t i = 0; i < m; ++i) {
    double mu = 0.0;
    for (std::size_t j = 0; j < n; ++j) mu += xv[i * n + j];
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double c = xv[i * n + j] - mu;
      var += c * c;
    }
    var /= static_cast<double>(n);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < n; ++j) {
      xhat[i * n + j] = (xv[i * n + j] - mu) * inv_std[i];
      out[i * n + j] = gamma.data()[j] * xhat[i * n + j] + beta.data()[j];
    }
  }
  auto node = make_node("layer_norm", x.shape(), std::move(out), {&x, &gamma, &beta});
  return finish(std::move(node), [m, n, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& self) {
    Node& nx = *self.inputs[0];
    Node& ng = *self.inputs[1];
    Node& nb = *self.inputs[2];
    if (ng.requires_grad || nb.requires_grad) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          if (ng.requires_grad) ng.grad_buffer()[j] += self.grad[i * n + j] * xhat[i * n + j];
          if (nb.requires_grad) nb.grad_buffer()[j] += self.grad[i * n + j];
        }
    }
    if (nx.requires_grad) {
      auto& g = nx.grad_buffer();
      const double inv_n = 1.0 / static_cast<double>(n);
      for (std::size_t i = 0; i < m; ++i) {
        // dx = inv_std/n · (n·dx̂ − Σdx̂ − x̂·Σ(dx̂·x̂))
        double sum_d = 0.0, sum_dx = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double dxh = self.grad[i * n + j] * ng.value[j];
          sum_d += dxh;
          sum_dx += dxh * xhat[i * n + j];
        }
        for (std::size_t j = 0; j < n; ++j) {
          const double dxh = self.grad[i * n + j] * ng.value[j];
          g[i * n + j] += inv_std[i] * (dxh - inv_n * sum_d - xhat[i * n + j] * inv_n * sum_dx);
        }
      }
    }
  });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  auto node = make_node("sum", Shape{}, std::vector<double>{s}, {&a});
  return finish(std::move(node), [](Node& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (auto& v : g) v += self.grad[0];
  });
}

Tensor mean(const Tensor& a) {
  if (a.numel() == 0) throw ShapeError("mean of empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.numel()));
}

}  // namespace dgnn::ops

// Copyright (c) 2026 The segmenter authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "segmenter/tensor.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace segmenter {

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

int64_t TensorImpl::size() const {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

namespace {

std::shared_ptr<TensorImpl> make_impl(std::vector<int64_t> shape) {
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->value.assign(static_cast<size_t>(impl->size()), 0.0);
  return impl;
}

// Output node depending on the given parents.
std::shared_ptr<TensorImpl> make_node(
    std::vector<int64_t> shape,
    std::initializer_list<std::shared_ptr<TensorImpl>> parents) {
  auto impl = make_impl(std::move(shape));
  for (const auto& p : parents) {
    if (!p) continue;
    impl->parents.push_back(p);
    impl->needs_grad = impl->needs_grad || p->needs_grad;
  }
  return impl;
}

std::vector<double>& grad_of(const std::shared_ptr<TensorImpl>& t) {
  if (t->grad.empty()) t->grad.assign(t->value.size(), 0.0);
  return t->grad;
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    std::ostringstream os;
    os << op << ": shape mismatch [";
    for (auto d : a.shape()) os << d << " ";
    os << "] vs [";
    for (auto d : b.shape()) os << d << " ";
    os << "]";
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

Tensor Tensor::zeros(std::vector<int64_t> shape, bool requires_grad) {
  auto impl = make_impl(std::move(shape));
  impl->requires_grad = requires_grad;
  impl->needs_grad = requires_grad;
  return Tensor(impl);
}

Tensor Tensor::from_data(std::vector<int64_t> shape, std::vector<double> data,
                         bool requires_grad) {
  auto impl = make_impl(std::move(shape));
  if (static_cast<int64_t>(data.size()) != impl->size())
    throw std::invalid_argument("from_data: data length does not match shape");
  impl->value = std::move(data);
  impl->requires_grad = requires_grad;
  impl->needs_grad = requires_grad;
  return Tensor(impl);
}

Tensor Tensor::scalar(double v, bool requires_grad) {
  return from_data({1}, {v}, requires_grad);
}

void Tensor::zero_grad() {
  impl_->grad.assign(impl_->value.size(), 0.0);
}

double Tensor::item() const {
  if (size() != 1) throw std::logic_error("item(): tensor is not scalar");
  return impl_->value[0];
}

void backward(const Tensor& loss) {
  if (loss.size() != 1)
    throw std::logic_error("backward(): loss must be scalar");
  auto root = loss.impl();
  if (!root->backprop && root->parents.empty() && !root->requires_grad)
    throw std::logic_error("backward(): no graph recorded for this tensor");

  // Post-order DFS, then replay in reverse.
  std::vector<TensorImpl*> order;
  std::unordered_set<TensorImpl*> seen;
  std::vector<std::pair<TensorImpl*, size_t>> stack{{root.get(), 0}};
  seen.insert(root.get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      TensorImpl* p = node->parents[idx++].get();
      if (p->needs_grad && seen.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root->grad.assign(1, 1.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backprop && !(*it)->grad.empty()) (*it)->backprop();
  }
}

namespace ops {

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  auto out = make_node(a.shape(), {a.impl(), b.impl()});
  const auto& av = a.data();
  const auto& bv = b.data();
  for (size_t i = 0; i < out->value.size(); ++i) out->value[i] = av[i] + bv[i];
  if (out->needs_grad) {
    auto ai = a.impl(), bi = b.impl();
    TensorImpl* oi = out.get();  // raw: the closure lives inside the node
    out->backprop = [ai, bi, oi]() {
      if (ai->needs_grad) {
        auto& g = grad_of(ai);
        for (size_t i = 0; i < g.size(); ++i) g[i] += oi->grad[i];
      }
      if (bi->needs_grad) {
        auto& g = grad_of(bi);
        for (size_t i = 0; i < g.size(); ++i) g[i] += oi->grad[i];
      }
    };
  }
  return Tensor(out);
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "mul");
  auto out = make_node(a.shape(), {a.impl(), b.impl()});
  const auto& av = a.data();
  const auto& bv = b.data();
  for (size_t i = 0; i < out->value.size(); ++i) out->value[i] = av[i] * bv[i];
  if (out->needs_grad) {
    auto ai = a.impl(), bi = b.impl();
    TensorImpl* oi = out.get();  // raw: the closure lives inside the node
    out->backprop = [ai, bi, oi]() {
      if (ai->needs_grad) {
        auto& g = grad_of(ai);
        for (size_t i = 0; i < g.size(); ++i) g[i] += oi->grad[i] * bi->value[i];
      }
      if (bi->needs_grad) {
        auto& g = grad_of(bi);
        for (size_t i = 0; i < g.size(); ++i) g[i] += oi->grad[i] * ai->value[i];
      }
    };
  }
  return Tensor(out);
}

Tensor scale(const Tensor& a, double s) {
  auto out = make_node(a.shape(), {a.impl()});
  const auto& av = a.data();
  for (size_t i = 0; i < out->value.size(); ++i) out->value[i] = av[i] * s;
  if (out->needs_grad) {
    auto ai = a.impl();
    TensorImpl* oi = out.get();  // raw: the closure lives inside the node
    out->backprop = [ai, oi, s]() {
      auto& g = grad_of(ai);
      for (size_t i = 0; i < g.size(); ++i) g[i] += s * oi->grad[i];
    };
  }
  return Tensor(out);
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.shape().size() != 2 || b.shape().size() != 2 || a.dim(1) != b.dim(0)) {
    std::ostringstream os;
    os << "matmul: incompatible shapes (" << a.dim(0) << "," << a.dim(1)
       << ") x (" << b.dim(0) << "," << b.dim(1) << ")";
    throw std::invalid_argument(os.str());
  }
  const int64_t m = a.dim(0), n = a.dim(1), p = b.dim(1);
  auto out = make_node({m, p}, {a.impl(), b.impl()});
  CMapMat A(a.data().data(), m, n), B(b.data().data(), n, p);
  MapMat(out->value.data(), m, p).noalias() = A * B;
  if (out->needs_grad) {
    auto ai = a.impl(), bi = b.impl();
    TensorImpl* oi = out.get();  // raw: the closure lives inside the node
    out->backprop = [ai, bi, oi, m, n, p]() {
      CMapMat G(oi->grad.data(), m, p);
      if (ai->needs_grad) {
        CMapMat B(bi->value.data(), n, p);
        MapMat(grad_of(ai).data(), m, n).noalias() += G * B.transpose();
      }
      if (bi->needs_grad) {
        CMapMat A(ai->value.data(), m, n);
        MapMat(grad_of(bi).data(), n, p).noalias() += A.transpose() * G;
      }
    };
  }
  return Tensor(out);
}

Tensor transpose(const Tensor& a) {
  if (a.shape().size() != 2)
    throw std::invalid_argument("transpose: tensor must be 2-d");
  const int64_t m = a.dim(0), n = a.dim(1);
  auto out = make_node({n, m}, {a.impl()});
  CMapMat A(a.data().data(), m, n);
  MapMat(out->value.data(), n, m) = A.transpose();
  if (out->needs_grad) {
    auto ai = a.impl();
    TensorImpl* oi = out.get();  // raw: the closure lives inside the node
    out->backprop = [ai, oi, m, n]() {
      CMapMat G(oi->grad.data(), n, m);
      MapMat(grad_of(ai).data(), m, n) += G.transpose();
    };
  }
  return Tensor(out);
}

Tensor relu(const Tensor& x) {
  auto out = make_node(x.shape(), {x.impl()});
  const auto& xv = x.data();
  for (size_t i = 0; i < out->value.size(); ++i)
    out->value[i] = xv[i] > 0.0 ? xv[i] : 0.0;
  if (out->needs_grad) {
    auto xi = x.impl();
    TensorImpl* oi = out.get();  // raw: the closure lives inside the node
    out->backprop = [xi, oi]() {
      auto& g = grad_of(xi);
      for (size_t i = 0; i < g.size(); ++i)
        if (xi->value[i] > 0.0) g[i] += oi->grad[i];
    };
  }
  return Tensor(out);
}

Tensor log_offset(const Tensor& x, double c) {
  auto out = make_node(x.shape(), {x.impl()});
  const auto& xv = x.data();
  for (size_t i = 0; i < out->value.size(); ++i) {
    double v = xv[i] + c;
    if (!(v > 0.0))
      throw std::domain_error("log_offset: argument not positive");
    out->value[i] = std::log(v);
  }
  if (out->needs_grad) {
    auto xi = x.impl();
    TensorImpl* oi = out.get();  // raw: the closure lives inside the node
    out->backprop = [xi, oi, c]() {
      auto& g = grad_of(xi);
      for (size_t i = 0; i < g.size(); ++i)
        g[i] += oi->grad[i] / (xi->value[i] + c);
    };
  }
  return Tensor(out);
}

Tensor sum(const Tensor& x) {
  auto out = make_node({1}, {x.impl()});
  double s = 0.0;
  for (double v : x.data()) s += v;
  out->value[0] = s;
  if (out->needs_grad) {
    auto xi = x.impl();
    TensorImpl* oi = out.get();  // raw: the closure lives inside the node
    out->backprop = [xi, oi]() {
      auto& g = grad_of(xi);
      for (size_t i = 0; i < g.size(); ++i) g[i] += oi->grad[0];
    };
  }
  return Tensor(out);
}

Tensor mean(const Tensor& x) {
  return scale(sum(x), 1.0 / static_cast<double>(x.size()));
}

Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& b,
              int dilation) {
  if (x.shape().size() != 3 || w.shape().size() != 3)
    throw std::invalid_argument("conv1d: x must be (B,C,T), w must be (O,C,K)");
  const int64_t B = x.dim(0), C = x.dim(1), T = x.dim(2);
  const int64_t O = w.dim(0), K = w.dim(2);
  if (w.dim(1) != C) {
    std::ostringstream os;
    os << "conv1d: channel mismatch, input C=" << C << " weight C=" << w.dim(1);
    throw std::invalid_argument(os.str());
  }
  if (b.defined() && (b.shape().size() != 1 || b.dim(0) != O))
    throw std::invalid_argument("conv1d: bias must be (O)");
  if (dilation < 1) throw std::invalid_argument("conv1d: dilation must be >= 1");

  const int64_t pad = dilation * (K - 1) / 2;  // same padding, odd K
  auto out = make_node({B, O, T}, {x.impl(), w.impl(),
                                   b.defined() ? b.impl() : nullptr});

  // im2col: (C*K, B*T), then one GEMM per layer.
  RowMat col = RowMat::Zero(C * K, B * T);
  const auto& xv = x.data();
  for (int64_t bi = 0; bi < B; ++bi) {
    for (int64_t c = 0; c < C; ++c) {
      const double* xrow = xv.data() + (bi * C + c) * T;
      for (int64_t k = 0; k < K; ++k) {
        double* crow = col.data() + (c * K + k) * (B * T) + bi * T;
        const int64_t off = k * dilation - pad;
        const int64_t t0 = std::max<int64_t>(0, -off);
        const int64_t t1 = std::min<int64_t>(T, T - off);
        for (int64_t t = t0; t < t1; ++t) crow[t] = xrow[t + off];
      }
    }
  }
  CMapMat W(w.data().data(), O, C * K);
  RowMat Y = W * col;  // (O, B*T)
  auto& ov = out->value;
  for (int64_t bi = 0; bi < B; ++bi)
    for (int64_t o = 0; o < O; ++o) {
      const double bias = b.defined() ? b.data()[static_cast<size_t>(o)] : 0.0;
      const double* yrow = Y.data() + o * (B * T) + bi * T;
      double* orow = ov.data() + (bi * O + o) * T;
      for (int64_t t = 0; t < T; ++t) orow[t] = yrow[t] + bias;
    }

  if (out->needs_grad) {
    auto xi = x.impl(), wi = w.impl();
    auto bimpl = b.defined() ? b.impl() : nullptr;
    TensorImpl* oi = out.get();  // raw: the closure lives inside the node
    // col is captured for the weight gradient GEMM.
    auto colp = std::make_shared<RowMat>(std::move(col));
    out->backprop = [xi, wi, bimpl, oi, colp, B, C, T, O, K, dilation, pad]() {
      RowMat G(O, B * T);
      for (int64_t bi2 = 0; bi2 < B; ++bi2)
        for (int64_t o = 0; o < O; ++o) {
          const double* grow = oi->grad.data() + (bi2 * O + o) * T;
          double* drow = G.data() + o * (B * T) + bi2 * T;
          for (int64_t t = 0; t < T; ++t) drow[t] = grow[t];
        }
      if (wi->needs_grad) {
        MapMat GW(grad_of(wi).data(), O, C * K);
        GW.noalias() += G * colp->transpose();
      }
      if (bimpl && bimpl->needs_grad) {
        auto& gb = grad_of(bimpl);
        for (int64_t o = 0; o < O; ++o)
          gb[static_cast<size_t>(o)] += G.row(o).sum();
      }
      if (xi->needs_grad) {
        CMapMat W2(wi->value.data(), O, C * K);
        RowMat Gcol = W2.transpose() * G;  // (C*K, B*T)
        auto& gx = grad_of(xi);
        for (int64_t bi2 = 0; bi2 < B; ++bi2)
          for (int64_t c = 0; c < C; ++c) {
            double* gxrow = gx.data() + (bi2 * C + c) * T;
            for (int64_t k = 0; k < K; ++k) {
              const double* gcrow =
                  Gcol.data() + (c * K + k) * (B * T) + bi2 * T;
              const int64_t off = k * dilation - pad;
              const int64_t t0 = std::max<int64_t>(0, -off);
              const int64_t t1 = std::min<int64_t>(T, T - off);
              for (int64_t t = t0; t < t1; ++t) gxrow[t + off] += gcrow[t];
            }
          }
      }
    };
  }
  return Tensor(out);
}

Tensor prelu(const Tensor& x, const Tensor& alpha) {
  if (x.shape().size() != 3 || alpha.shape().size() != 1 ||
      alpha.dim(0) != x.dim(1))
    throw std::invalid_argument("prelu: x must be (B,C,T), alpha (C)");
  const int64_t B = x.dim(0), C = x.dim(1), T = x.dim(2);
  auto out = make_node(x.shape(), {x.impl(), alpha.impl()});
  const auto& xv = x.data();
  const auto& av = alpha.data();
  for (int64_t bi = 0; bi < B; ++bi)
    for (int64_t c = 0; c < C; ++c) {
      const double a = av[static_cast<size_t>(c)];
      const double* xr = xv.data() + (bi * C + c) * T;
      double* yr = out->value.data() + (bi * C + c) * T;
      for (int64_t t = 0; t < T; ++t) yr[t] = xr[t] > 0.0 ? xr[t] : a * xr[t];
    }
  if (out->needs_grad) {
    auto xi = x.impl(), ai = alpha.impl();
    TensorImpl* oi = out.get();  // raw: the closure lives inside the node
    out->backprop = [xi, ai, oi, B, C, T]() {
      for (int64_t bi = 0; bi < B; ++bi)
        for (int64_t c = 0; c < C; ++c) {
          const double a = ai->value[static_cast<size_t>(c)];
          const double* xr = xi->value.data() + (bi * C + c) * T;
          const double* gr = oi->grad.data() + (bi * C + c) * T;
          if (xi->needs_grad) {
            double* gx = grad_of(xi).data() + (bi * C + c) * T;
            for (int64_t t = 0; t < T; ++t)
              gx[t] += xr[t] > 0.0 ? gr[t] : a * gr[t];
          }
          if (ai->needs_grad) {
            double ga = 0.0;
            for (int64_t t = 0; t < T; ++t)
              if (xr[t] <= 0.0) ga += gr[t] * xr[t];
            grad_of(ai)[static_cast<size_t>(c)] += ga;
          }
        }
    };
  }
  return Tensor(out);
}

Tensor dropout(const Tensor& x, double p, std::mt19937_64& rng,
               bool training) {
  if (p < 0.0 || p >= 1.0)
    throw std::invalid_argument("dropout: p must be in [0, 1)");
  if (!training || p == 0.0) return x;
  auto out = make_node(x.shape(), {x.impl()});
  auto keep = std::make_shared<std::vector<uint8_t>>(x.data().size());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double inv = 1.0 / (1.0 - p);
  for (size_t i = 0; i < out->value.size(); ++i) {
    const bool k = unif(rng) >= p;
    (*keep)[i] = k;
    out->value[i] = k ? x.data()[i] * inv : 0.0;
  }
  if (out->needs_grad) {
    auto xi = x.impl();
    TensorImpl* oi = out.get();  // raw: the closure lives inside the node
    out->backprop = [xi, oi, keep, inv]() {
      auto& g = grad_of(xi);
      for (size_t i = 0; i < g.size(); ++i)
        if ((*keep)[i]) g[i] += oi->grad[i] * inv;
    };
  }
  return Tensor(out);
}

Tensor channel_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta) {
  if (x.shape().size() != 3 || gamma.dim(0) != x.dim(1) ||
      beta.dim(0) != x.dim(1))
    throw std::invalid_argument("channel_norm: x (B,C,T), gamma/beta (C)");
  const int64_t B = x.dim(0), C = x.dim(1), T = x.dim(2);
  constexpr double kEps = 1e-8;
  auto out = make_node(x.shape(), {x.impl(), gamma.impl(), beta.impl()});
  // xhat cached for backward.
  auto xhat = std::make_shared<std::vector<double>>(x.data().size());
  auto inv_std = std::make_shared<std::vector<double>>(
      static_cast<size_t>(B * T));
  const auto& xv = x.data();
  for (int64_t bi = 0; bi < B; ++bi)
    for (int64_t t = 0; t < T; ++t) {
      double m = 0.0;
      for (int64_t c = 0; c < C; ++c) m += xv[(bi * C + c) * T + t];
      m /= static_cast<double>(C);
      double v = 0.0;
      for (int64_t c = 0; c < C; ++c) {
        const double d = xv[(bi * C + c) * T + t] - m;
        v += d * d;
      }
      v /= static_cast<double>(C);
      const double is = 1.0 / std::sqrt(v + kEps);
      (*inv_std)[static_cast<size_t>(bi * T + t)] = is;
      for (int64_t c = 0; c < C; ++c) {
        const size_t idx = static_cast<size_t>((bi * C + c) * T + t);
        (*xhat)[idx] = (xv[idx] - m) * is;
        out->value[idx] = gamma.data()[static_cast<size_t>(c)] * (*xhat)[idx] +
                          beta.data()[static_cast<size_t>(c)];
      }
    }
  if (out->needs_grad) {
    auto xi = x.impl(), gi = gamma.impl(), bi_ = beta.impl();
    TensorImpl* oi = out.get();  // raw: the closure lives inside the node
    out->backprop = [xi, gi, bi_, oi, xhat, inv_std, B, C, T]() {
      for (int64_t bi = 0; bi < B; ++bi)
        for (int64_t t = 0; t < T; ++t) {
          double sum_dxh = 0.0, sum_dxh_xh = 0.0;
          for (int64_t c = 0; c < C; ++c) {
            const size_t idx = static_cast<size_t>((bi * C + c) * T + t);
            const double go = oi->grad[idx];
            const double xh = (*xhat)[idx];
            if (gi->needs_grad)
              grad_of(gi)[static_cast<size_t>(c)] += go * xh;
            if (bi_->needs_grad) grad_of(bi_)[static_cast<size_t>(c)] += go;
            const double dxh = go * gi->value[static_cast<size_t>(c)];
            sum_dxh += dxh;
            sum_dxh_xh += dxh * xh;
          }
          if (xi->needs_grad) {
            const double is = (*inv_std)[static_cast<size_t>(bi * T + t)];
            const double n = static_cast<double>(C);
            for (int64_t c = 0; c < C; ++c) {
              const size_t idx = static_cast<size_t>((bi * C + c) * T + t);
              const double dxh = oi->grad[idx] * gi->value[static_cast<size_t>(c)];
              grad_of(xi)[idx] +=
                  is * (dxh - sum_dxh / n - (*xhat)[idx] * sum_dxh_xh / n);
            }
          }
        }
    };
  }
  return Tensor(out);
}

Tensor mvn_time(const Tensor& x) {
  if (x.shape().size() != 2)
    throw std::invalid_argument("mvn_time: x must be (T, F)");
  const int64_t T = x.dim(0), F = x.dim(1);
  if (T < 2) throw std::invalid_argument("mvn_time: need at least 2 frames");
  constexpr double kEps = 1e-8;
  auto out = make_node(x.shape(), {x.impl()});
  auto xhat = std::make_shared<std::vector<double>>(x.data().size());
  auto inv_std = std::make_shared<std::vector<double>>(static_cast<size_t>(F));
  const auto& xv = x.data();
  for (int64_t f = 0; f < F; ++f) {
    double m = 0.0;
    for (int64_t t = 0; t < T; ++t) m += xv[t * F + f];
    m /= static_cast<double>(T);
    double v = 0.0;
    for (int64_t t = 0; t < T; ++t) {
      const double d = xv[t * F + f] - m;
      v += d * d;
    }
    v /= static_cast<double>(T);
    const double is = 1.0 / std::sqrt(v + kEps);
    (*inv_std)[static_cast<size_t>(f)] = is;
    for (int64_t t = 0; t < T; ++t) {
      const size_t idx = static_cast<size_t>(t * F + f);
      (*xhat)[idx] = (xv[idx] - m) * is;
      out->value[idx] = (*xhat)[idx];
    }
  }
  if (out->needs_grad) {
    auto xi = x.impl();
    TensorImpl* oi = out.get();  // raw: the closure lives inside the node
    out->backprop = [xi, oi, xhat, inv_std, T, F]() {
      const double n = static_cast<double>(T);
      for (int64_t f = 0; f < F; ++f) {
        double sum_g = 0.0, sum_g_xh = 0.0;
        for (int64_t t = 0; t < T; ++t) {
          const size_t idx = static_cast<size_t>(t * F + f);
          sum_g += oi->grad[idx];
          sum_g_xh += oi->grad[idx] * (*xhat)[idx];
        }
        const double is = (*inv_std)[static_cast<size_t>(f)];
        for (int64_t t = 0; t < T; ++t) {
          const size_t idx = static_cast<size_t>(t * F + f);
          grad_of(xi)[idx] += is * (oi->grad[idx] - sum_g / n -
                                    (*xhat)[idx] * sum_g_xh / n);
        }
      }
    };
  }
  return Tensor(out);
}

namespace {

// Shared softmax machinery over a contiguous stride pattern.
void softmax_groups(const double* x, double* y, int64_t groups, int64_t C,
                    int64_t stride, int64_t group_stride) {
  for (int64_t g = 0; g < groups; ++g) {
    const double* xr = x + g * group_stride;
    double* yr = y + g * group_stride;
    double mx = xr[0];
    for (int64_t c = 1; c < C; ++c) mx = std::max(mx, xr[c * stride]);
    double z = 0.0;
    for (int64_t c = 0; c < C; ++c) {
      const double e = std::exp(xr[c * stride] - mx);
      yr[c * stride] = e;
      z += e;
    }
    for (int64_t c = 0; c < C; ++c) yr[c * stride] /= z;
  }
}

void softmax_backward_groups(const double* y, const double* gy, double* gx,
                             int64_t groups, int64_t C, int64_t stride,
                             int64_t group_stride) {
  for (int64_t g = 0; g < groups; ++g) {
    const double* yr = y + g * group_stride;
    const double* gr = gy + g * group_stride;
    double* xr = gx + g * group_stride;
    double dot = 0.0;
    for (int64_t c = 0; c < C; ++c) dot += yr[c * stride] * gr[c * stride];
    for (int64_t c = 0; c < C; ++c)
      xr[c * stride] += yr[c * stride] * (gr[c * stride] - dot);
  }
}

}  // namespace

Tensor softmax_classes(const Tensor& x) {
  if (x.shape().size() != 3)
    throw std::invalid_argument("softmax_classes: x must be (B,C,T)");
  const int64_t B = x.dim(0), C = x.dim(1), T = x.dim(2);
  auto out = make_node(x.shape(), {x.impl()});
  // Groups are (b, t) pairs; class values are strided by T.
  for (int64_t bi = 0; bi < B; ++bi)
    softmax_groups(x.data().data() + bi * C * T, out->value.data() + bi * C * T,
                   T, C, T, 1);
  if (out->needs_grad) {
    auto xi = x.impl();
    TensorImpl* oi = out.get();  // raw: the closure lives inside the node
    out->backprop = [xi, oi, B, C, T]() {
      for (int64_t bi = 0; bi < B; ++bi)
        softmax_backward_groups(oi->value.data() + bi * C * T,
                                oi->grad.data() + bi * C * T,
                                grad_of(xi).data() + bi * C * T, T, C, T, 1);
    };
  }
  return Tensor(out);
}

Tensor softmax_rows(const Tensor& x) {
  if (x.shape().size() != 2)
    throw std::invalid_argument("softmax_rows: x must be 2-d");
  const int64_t R = x.dim(0), C = x.dim(1);
  auto out = make_node(x.shape(), {x.impl()});
  softmax_groups(x.data().data(), out->value.data(), R, C, 1, C);
  if (out->needs_grad) {
    auto xi = x.impl();
    TensorImpl* oi = out.get();  // raw: the closure lives inside the node
    out->backprop = [xi, oi, R, C]() {
      softmax_backward_groups(oi->value.data(), oi->grad.data(),
                              grad_of(xi).data(), R, C, 1, C);
    };
  }
  return Tensor(out);
}

Tensor masked_cross_entropy(const Tensor& logits, const std::vector<int>& labels,
                            const std::vector<uint8_t>& mask) {
  if (logits.shape().size() != 3)
    throw std::invalid_argument("masked_cross_entropy: logits must be (B,C,T)");
  const int64_t B = logits.dim(0), C = logits.dim(1), T = logits.dim(2);
  if (static_cast<int64_t>(labels.size()) != B * T ||
      mask.size() != labels.size())
    throw std::invalid_argument(
        "masked_cross_entropy: labels/mask must have B*T entries");

  int64_t n_valid = 0;
  for (uint8_t m : mask) n_valid += m ? 1 : 0;
  if (n_valid == 0)
    throw std::invalid_argument("masked_cross_entropy: no valid frames");

  auto out = make_node({1}, {logits.impl()});
  auto probs = std::make_shared<std::vector<double>>(logits.data().size());
  const auto& lv = logits.data();
  double loss = 0.0;
  for (int64_t bi = 0; bi < B; ++bi) {
    softmax_groups(lv.data() + bi * C * T, probs->data() + bi * C * T, T, C, T,
                   1);
    for (int64_t t = 0; t < T; ++t) {
      const size_t ft = static_cast<size_t>(bi * T + t);
      if (!mask[ft]) continue;
      const int y = labels[ft];
      if (y < 0 || y >= C)
        throw std::invalid_argument("masked_cross_entropy: label out of range");
      loss -= std::log(
          std::max((*probs)[static_cast<size_t>((bi * C + y) * T + t)], 1e-300));
    }
  }
  out->value[0] = loss / static_cast<double>(n_valid);
  if (out->needs_grad) {
    auto li = logits.impl();
    TensorImpl* oi = out.get();  // raw: the closure lives inside the node
    auto lab = std::make_shared<std::vector<int>>(labels);
    auto msk = std::make_shared<std::vector<uint8_t>>(mask);
    out->backprop = [li, oi, probs, lab, msk, B, C, T, n_valid]() {
      const double g0 = oi->grad[0] / static_cast<double>(n_valid);
      auto& gx = grad_of(li);
      for (int64_t bi = 0; bi < B; ++bi)
        for (int64_t t = 0; t < T; ++t) {
          const size_t ft = static_cast<size_t>(bi * T + t);
          if (!(*msk)[ft]) continue;
          for (int64_t c = 0; c < C; ++c) {
            const size_t idx = static_cast<size_t>((bi * C + c) * T + t);
            const double onehot = (c == (*lab)[ft]) ? 1.0 : 0.0;
            gx[idx] += g0 * ((*probs)[idx] - onehot);
          }
        }
    };
  }
  return Tensor(out);
}

Tensor stack(const std::vector<Tensor>& xs) {
  if (xs.empty()) throw std::invalid_argument("stack: empty input");
  const auto& s0 = xs[0].shape();
  if (s0.size() != 2) throw std::invalid_argument("stack: inputs must be 2-d");
  for (const auto& x : xs) check_same_shape(xs[0], x, "stack");
  const int64_t B = static_cast<int64_t>(xs.size());
  const int64_t C = s0[0], T = s0[1];
  auto impl = make_impl({B, C, T});
  std::vector<std::shared_ptr<TensorImpl>> parents;
  for (const auto& x : xs) {
    parents.push_back(x.impl());
    impl->needs_grad = impl->needs_grad || x.impl()->needs_grad;
  }
  impl->parents = parents;
  for (int64_t bi = 0; bi < B; ++bi)
    std::copy(xs[static_cast<size_t>(bi)].data().begin(),
              xs[static_cast<size_t>(bi)].data().end(),
              impl->value.begin() + bi * C * T);
  if (impl->needs_grad) {
    TensorImpl* oi = impl.get();  // raw: the closure lives inside the node
    impl->backprop = [oi, C, T]() {
      for (size_t bi = 0; bi < oi->parents.size(); ++bi) {
        auto& p = oi->parents[bi];
        if (!p->needs_grad) continue;
        auto& g = grad_of(p);
        const double* src = oi->grad.data() + static_cast<int64_t>(bi) * C * T;
        for (size_t i = 0; i < g.size(); ++i) g[i] += src[i];
      }
    };
  }
  return Tensor(impl);
}

}  // namespace ops

Tensor make_custom_node(std::vector<int64_t> shape,
                        const std::vector<Tensor>& parents) {
  auto impl = make_impl(std::move(shape));
  for (const auto& p : parents) {
    if (!p.defined()) continue;
    impl->parents.push_back(p.impl());
    impl->needs_grad = impl->needs_grad || p.impl()->needs_grad;
  }
  return Tensor(impl);
}

std::vector<double>& grad_buffer(const std::shared_ptr<TensorImpl>& t) {
  return grad_of(t);
}

void kaiming_init(Tensor& t, int64_t fan_in, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> unif(-bound, bound);
  for (double& v : t.data()) v = unif(rng);
}

}  // namespace segmenter

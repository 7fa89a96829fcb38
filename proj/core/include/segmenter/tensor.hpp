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

#ifndef SEGMENTER_TENSOR_HPP_
#define SEGMENTER_TENSOR_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace segmenter {

// Dense row-major double tensor with an optional gradient slot.
// Ops below record a tape; backward() replays it in reverse.
struct TensorImpl {
  std::vector<int64_t> shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;   // leaf that wants a gradient
  bool needs_grad = false;      // requires_grad or depends on such a leaf
  std::vector<std::shared_ptr<TensorImpl>> parents;
  std::function<void()> backprop;  // scatters this->grad into parents' grads

  int64_t size() const;
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}

  static Tensor zeros(std::vector<int64_t> shape, bool requires_grad = false);
  static Tensor from_data(std::vector<int64_t> shape, std::vector<double> data,
                          bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const std::vector<int64_t>& shape() const { return impl_->shape; }
  int64_t dim(int i) const { return impl_->shape[static_cast<size_t>(i)]; }
  int64_t size() const { return impl_->size(); }
  std::vector<double>& data() { return impl_->value; }
  const std::vector<double>& data() const { return impl_->value; }
  std::vector<double>& grad() { return impl_->grad; }
  const std::vector<double>& grad() const { return impl_->grad; }
  bool requires_grad() const { return impl_->requires_grad; }
  bool needs_grad() const { return impl_->needs_grad; }
  void zero_grad();
  double item() const;

  std::shared_ptr<TensorImpl> impl() const { return impl_; }

 private:
  std::shared_ptr<TensorImpl> impl_;
};

// Reverse-mode sweep from a scalar loss. Seeds d(loss)/d(loss)=1 and
// accumulates gradients into every reachable tensor with needs_grad.
void backward(const Tensor& loss);

namespace ops {

Tensor add(const Tensor& a, const Tensor& b);            // same shape
Tensor mul(const Tensor& a, const Tensor& b);            // elementwise
Tensor scale(const Tensor& a, double s);
Tensor matmul(const Tensor& a, const Tensor& b);         // (m,n)x(n,p)
Tensor transpose(const Tensor& a);                       // 2-d
Tensor relu(const Tensor& x);
Tensor log_offset(const Tensor& x, double c);            // ln(x + c), x+c > 0
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

// conv over the last axis; x: (B, C, T), w: (O, C, K), b: (O) or undefined.
// Same padding, stride 1.
Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& b, int dilation);

// y = x>0 ? x : alpha_c * x; x: (B, C, T), alpha: (C).
Tensor prelu(const Tensor& x, const Tensor& alpha);

// Inverted dropout. Identity when !training or p == 0.
Tensor dropout(const Tensor& x, double p, std::mt19937_64& rng, bool training);

// Per-frame normalization over the channel axis with per-channel affine.
// x: (B, C, T), gamma/beta: (C).
Tensor channel_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta);

// Column-wise mean/variance normalization over the first axis; x: (T, F).
Tensor mvn_time(const Tensor& x);

// Softmax over axis 1 of (B, C, T).
Tensor softmax_classes(const Tensor& x);

// Softmax over the last axis of a 2-d tensor (rows on the simplex).
Tensor softmax_rows(const Tensor& x);

// Mean cross-entropy from logits over valid frames.
// logits: (B, C, T); labels/mask flattened B*T.
Tensor masked_cross_entropy(const Tensor& logits,
                            const std::vector<int>& labels,
                            const std::vector<uint8_t>& mask);

// Stack B tensors of shape (C, T) into (B, C, T).
Tensor stack(const std::vector<Tensor>& xs);

}  // namespace ops

// Hooks for ops with hand-derived gradients (e.g. the channel combinator):
// allocate an output node over the given parents, fill value, then install
// a backprop closure that scatters node->grad into the parents.
Tensor make_custom_node(std::vector<int64_t> shape,
                        const std::vector<Tensor>& parents);
std::vector<double>& grad_buffer(const std::shared_ptr<TensorImpl>& t);

// Kaiming-uniform fan-in init, bound = sqrt(6 / fan_in).
void kaiming_init(Tensor& t, int64_t fan_in, std::mt19937_64& rng);

}  // namespace segmenter

#endif  // SEGMENTER_TENSOR_HPP_

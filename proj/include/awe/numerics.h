// Copyright 2026 The AWE Toolkit Authors.
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

#ifndef AWE_NUMERICS_H_
#define AWE_NUMERICS_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace awe {

using Matrix = Eigen::MatrixXd;

// Named matrices with a stable (insertion) iteration order. Shapes are fixed
// once added.
class ParamCollection {
 public:
  void Add(std::string name, Matrix value);

  bool contains(std::string_view name) const;
  size_t index_of(std::string_view name) const;
  Matrix& at(std::string_view name);
  const Matrix& at(std::string_view name) const;

  size_t size() const { return values_.size(); }
  const std::string& name(size_t i) const { return names_[i]; }
  Matrix& value(size_t i) { return values_[i]; }
  const Matrix& value(size_t i) const { return values_[i]; }
  const std::vector<std::string>& names() const { return names_; }

  int64_t num_scalars() const;
  ParamCollection ZerosLike() const;
  bool SameShapes(const ParamCollection& other) const;
  double SquaredNorm() const;
  bool AllFinite() const;

  // this += scale * other; shapes must agree.
  void AddScaled(const ParamCollection& other, double scale);

 private:
  std::vector<std::string> names_;
  std::vector<Matrix> values_;
  std::unordered_map<std::string, size_t> index_;
};

// Handle to a value recorded on a Tape.
struct Var {
  int id = -1;
};

// Records a computation over a fixed set of primitives and evaluates exact
// reverse-mode derivatives. Values are computed eagerly as operations are
// recorded. There is no broadcasting; every shape must line up exactly, and
// mismatches throw std::invalid_argument naming the operands.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // A value that receives no gradient: data, masks, sampled noise.
  Var Constant(Matrix value, std::string label = "constant");

  // A leaf bound to params.at(name). Repeated calls return the same leaf so
  // gradients from every use accumulate. A tape binds to one collection.
  Var Param(const ParamCollection& params, std::string_view name);

  // w * x + b * 1^T, i.e. the bias column is added to every column of w * x.
  Var Affine(Var w, Var x, Var b);
  Var MatMul(Var a, Var b);
  Var Add(Var a, Var b);
  Var Sub(Var a, Var b);
  Var Mul(Var a, Var b);  // elementwise
  Var Sigmoid(Var a);
  Var Tanh(Var a);
  Var Exp(Var a);
  Var Scale(Var a, double s);
  Var AddScalar(Var a, double s);
  Var ConcatRows(std::span<const Var> parts);
  Var SliceRows(Var a, int begin, int count);
  Var SumSquares(Var a);  // 1x1
  Var Sum(Var a);         // 1x1

  const Matrix& value(Var v) const { return nodes_.at(v.id).value; }
  double scalar(Var v) const;
  size_t num_nodes() const { return nodes_.size(); }

  // Reverse pass from the 1x1 node `loss`. Returns d loss / d p for every
  // entry of the bound collection, zeros for entries the loss does not use.
  // Throws NumericalError if the loss is not finite.
  ParamCollection Backward(Var loss, const ParamCollection& params) const;

 private:
  enum class Op {
    kLeaf, kAffine, kMatMul, kAdd, kSub, kMul, kSigmoid, kTanh, kExp,
    kScale, kAddScalar, kConcat, kSlice, kSumSquares, kSum
  };
  struct Node {
    Op op = Op::kLeaf;
    std::vector<int> inputs;
    double attr = 0.0;
    int begin = 0;
    Matrix value;
    bool needs_grad = false;
    int param_index = -1;
    std::string label;
  };

  Var Push(Node node);
  const Node& node(Var v) const;
  std::string Describe(Var v) const;
  void RequireSameShape(const char* op, Var a, Var b) const;

  std::vector<Node> nodes_;
  const ParamCollection* bound_ = nullptr;
  std::unordered_map<size_t, int> param_nodes_;
};

// Loss evaluation for gradient checking. When grads is non-null it receives
// the analytic gradient.
using LossFunction =
    std::function<double(const ParamCollection& params, ParamCollection* grads)>;

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::string worst_param;
  Eigen::Index worst_index = -1;
};

// Compares analytic gradients with central differences. The relative error
// of a component is |g_a - g_fd| / max(1e-8, |g_a| + |g_fd|).
GradientCheckResult CheckGradients(const LossFunction& loss,
                                   const ParamCollection& params,
                                   double epsilon = 1e-5);

}  // namespace awe

#endif  // AWE_NUMERICS_H_

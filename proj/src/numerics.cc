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

#include "awe/numerics.h"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "awe/error.h"

namespace awe {

// ---------------------------------------------------------------------------
// ParamCollection

void ParamCollection::Add(std::string name, Matrix value) {
  if (index_.count(name))
    throw std::invalid_argument("duplicate parameter '" + name + "'");
  index_.emplace(name, values_.size());
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
}

bool ParamCollection::contains(std::string_view name) const {
  return index_.count(std::string(name)) > 0;
}

size_t ParamCollection::index_of(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end())
    throw std::out_of_range("no parameter named '" + std::string(name) + "'");
  return it->second;
}

Matrix& ParamCollection::at(std::string_view name) {
  return values_[index_of(name)];
}

const Matrix& ParamCollection::at(std::string_view name) const {
  return values_[index_of(name)];
}

int64_t ParamCollection::num_scalars() const {
  int64_t n = 0;
  for (const auto& v : values_) n += v.size();
  return n;
}

ParamCollection ParamCollection::ZerosLike() const {
  ParamCollection out;
  for (size_t i = 0; i < size(); ++i)
    out.Add(names_[i], Matrix::Zero(values_[i].rows(), values_[i].cols()));
  return out;
}

bool ParamCollection::SameShapes(const ParamCollection& other) const {
  if (size() != other.size()) return false;
  for (size_t i = 0; i < size(); ++i)
    if (names_[i] != other.names_[i] ||
        values_[i].rows() != other.values_[i].rows() ||
        values_[i].cols() != other.values_[i].cols())
      return false;
  return true;
}

double ParamCollection::SquaredNorm() const {
  double s = 0.0;
  for (const auto& v : values_) s += v.squaredNorm();
  return s;
}

bool ParamCollection::AllFinite() const {
  for (const auto& v : values_)
    if (!v.allFinite()) return false;
  return true;
}

void ParamCollection::AddScaled(const ParamCollection& other, double scale) {
  if (!SameShapes(other))
    throw std::invalid_argument("AddScaled: parameter shapes differ");
  for (size_t i = 0; i < size(); ++i) values_[i] += scale * other.values_[i];
}

// ---------------------------------------------------------------------------
// Tape

const Tape::Node& Tape::node(Var v) const {
  if (v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
    throw std::invalid_argument("invalid tape variable");
  return nodes_[v.id];
}

std::string Tape::Describe(Var v) const {
  const Node& n = node(v);
  std::ostringstream ss;
  ss << "'" << n.label << "' (" << n.value.rows() << "x" << n.value.cols()
     << ")";
  return ss.str();
}

void Tape::RequireSameShape(const char* op, Var a, Var b) const {
  const Matrix& x = node(a).value;
  const Matrix& y = node(b).value;
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw std::invalid_argument(std::string(op) + ": shape mismatch between " +
                                Describe(a) + " and " + Describe(b));
}

Var Tape::Push(Node n) {
  for (int in : n.inputs) n.needs_grad = n.needs_grad || nodes_[in].needs_grad;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::Constant(Matrix value, std::string label) {
  Node n;
  n.value = std::move(value);
  n.label = std::move(label);
  return Push(std::move(n));
}

Var Tape::Param(const ParamCollection& params, std::string_view name) {
  if (bound_ && bound_ != &params)
    throw std::logic_error("tape already bound to another ParamCollection");
  bound_ = &params;
  size_t index = params.index_of(name);
  auto it = param_nodes_.find(index);
  if (it != param_nodes_.end()) return Var{it->second};
  Node n;
  n.value = params.value(index);
  n.needs_grad = true;
  n.param_index = static_cast<int>(index);
  n.label = std::string(name);
  Var v = Push(std::move(n));
  param_nodes_.emplace(index, v.id);
  return v;
}

Var Tape::Affine(Var w, Var x, Var b) {
  const Matrix& W = node(w).value;
  const Matrix& X = node(x).value;
  const Matrix& B = node(b).value;
  if (W.cols() != X.rows())
    throw std::invalid_argument("Affine: " + Describe(w) +
                                " cannot multiply " + Describe(x));
  if (B.rows() != W.rows() || B.cols() != 1)
    throw std::invalid_argument("Affine: bias " + Describe(b) +
                                " does not match " + Describe(w));
  Node n;
  n.op = Op::kAffine;
  n.inputs = {w.id, x.id, b.id};
  n.value = W * X;
  n.value.colwise() += B.col(0);
  n.label = "affine(" + node(w).label + ")";
  return Push(std::move(n));
}

Var Tape::MatMul(Var a, Var b) {
  const Matrix& A = node(a).value;
  const Matrix& B = node(b).value;
  if (A.cols() != B.rows())
    throw std::invalid_argument("MatMul: " + Describe(a) +
                                " cannot multiply " + Describe(b));
  Node n;
  n.op = Op::kMatMul;
  n.inputs = {a.id, b.id};
  n.value = A * B;
  n.label = "matmul(" + node(a).label + ")";
  return Push(std::move(n));
}

Var Tape::Add(Var a, Var b) {
  RequireSameShape("Add", a, b);
  Node n;
  n.op = Op::kAdd;
  n.inputs = {a.id, b.id};
  n.value = node(a).value + node(b).value;
  n.label = "add";
  return Push(std::move(n));
}

Var Tape::Sub(Var a, Var b) {
  RequireSameShape("Sub", a, b);
  Node n;
  n.op = Op::kSub;
  n.inputs = {a.id, b.id};
  n.value = node(a).value - node(b).value;
  n.label = "sub";
  return Push(std::move(n));
}

Var Tape::Mul(Var a, Var b) {
  RequireSameShape("Mul", a, b);
  Node n;
  n.op = Op::kMul;
  n.inputs = {a.id, b.id};
  n.value = node(a).value.cwiseProduct(node(b).value);
  n.label = "mul";
  return Push(std::move(n));
}

Var Tape::Sigmoid(Var a) {
  Node n;
  n.op = Op::kSigmoid;
  n.inputs = {a.id};
  n.value = (1.0 + (-node(a).value.array()).exp()).inverse().matrix();
  n.label = "sigmoid";
  return Push(std::move(n));
}

Var Tape::Tanh(Var a) {
  Node n;
  n.op = Op::kTanh;
  n.inputs = {a.id};
  n.value = node(a).value.array().tanh().matrix();
  n.label = "tanh";
  return Push(std::move(n));
}

Var Tape::Exp(Var a) {
  Node n;
  n.op = Op::kExp;
  n.inputs = {a.id};
  n.value = node(a).value.array().exp().matrix();
  n.label = "exp";
  return Push(std::move(n));
}

Var Tape::Scale(Var a, double s) {
  Node n;
  n.op = Op::kScale;
  n.inputs = {a.id};
  n.attr = s;
  n.value = s * node(a).value;
  n.label = "scale";
  return Push(std::move(n));
}

Var Tape::AddScalar(Var a, double s) {
  Node n;
  n.op = Op::kAddScalar;
  n.inputs = {a.id};
  n.attr = s;
  n.value = (node(a).value.array() + s).matrix();
  n.label = "add_scalar";
  return Push(std::move(n));
}

Var Tape::ConcatRows(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("ConcatRows: no operands");
  Eigen::Index rows = 0, cols = node(parts[0]).value.cols();
  for (Var p : parts) {
    if (node(p).value.cols() != cols)
      throw std::invalid_argument("ConcatRows: column mismatch between " +
                                  Describe(parts[0]) + " and " + Describe(p));
    rows += node(p).value.rows();
  }
  Node n;
  n.op = Op::kConcat;
  n.value.resize(rows, cols);
  Eigen::Index r = 0;
  for (Var p : parts) {
    const Matrix& v = node(p).value;
    n.value.middleRows(r, v.rows()) = v;
    r += v.rows();
    n.inputs.push_back(p.id);
  }
  n.label = "concat";
  return Push(std::move(n));
}

Var Tape::SliceRows(Var a, int begin, int count) {
  const Matrix& A = node(a).value;
  if (begin < 0 || count < 0 || begin + count > A.rows())
    throw std::invalid_argument("SliceRows: rows [" + std::to_string(begin) +
                                ", " + std::to_string(begin + count) +
                                ") out of range for " + Describe(a));
  Node n;
  n.op = Op::kSlice;
  n.inputs = {a.id};
  n.begin = begin;
  n.value = A.middleRows(begin, count);
  n.label = "slice";
  return Push(std::move(n));
}

Var Tape::SumSquares(Var a) {
  Node n;
  n.op = Op::kSumSquares;
  n.inputs = {a.id};
  n.value = Matrix::Constant(1, 1, node(a).value.squaredNorm());
  n.label = "sum_squares";
  return Push(std::move(n));
}

Var Tape::Sum(Var a) {
  Node n;
  n.op = Op::kSum;
  n.inputs = {a.id};
  n.value = Matrix::Constant(1, 1, node(a).value.sum());
  n.label = "sum";
  return Push(std::move(n));
}

double Tape::scalar(Var v) const {
  const Matrix& m = node(v).value;
  if (m.size() != 1)
    throw std::invalid_argument("scalar: " + Describe(v) + " is not 1x1");
  return m(0, 0);
}

ParamCollection Tape::Backward(Var loss, const ParamCollection& params) const {
  if (bound_ && bound_ != &params)
    throw std::logic_error("Backward: tape is bound to another collection");
  const double value = scalar(loss);
  if (!std::isfinite(value))
    throw NumericalError("non-finite loss (" + std::to_string(value) + ")");

  ParamCollection grads = params.ZerosLike();
  std::vector<Matrix> g(loss.id + 1);
  g[loss.id] = Matrix::Ones(1, 1);

  auto accumulate = [&](int id, const auto& contribution) {
    if (!nodes_[id].needs_grad) return;
    if (g[id].size() == 0)
      g[id] = contribution;
    else
      g[id] += contribution;
  };

  for (int id = loss.id; id >= 0; --id) {
    if (g[id].size() == 0) continue;
    const Node& n = nodes_[id];
    const Matrix& gy = g[id];
    const auto& in = n.inputs;
    switch (n.op) {
      case Op::kLeaf:
        if (n.param_index >= 0) grads.value(n.param_index) += gy;
        break;
      case Op::kAffine: {
        const Matrix& W = nodes_[in[0]].value;
        const Matrix& X = nodes_[in[1]].value;
        if (nodes_[in[0]].needs_grad) accumulate(in[0], gy * X.transpose());
        if (nodes_[in[1]].needs_grad) accumulate(in[1], W.transpose() * gy);
        if (nodes_[in[2]].needs_grad) accumulate(in[2], gy.rowwise().sum());
        break;
      }
      case Op::kMatMul: {
        const Matrix& A = nodes_[in[0]].value;
        const Matrix& B = nodes_[in[1]].value;
        if (nodes_[in[0]].needs_grad) accumulate(in[0], gy * B.transpose());
        if (nodes_[in[1]].needs_grad) accumulate(in[1], A.transpose() * gy);
        break;
      }
      case Op::kAdd:
        accumulate(in[0], gy);
        accumulate(in[1], gy);
        break;
      case Op::kSub:
        accumulate(in[0], gy);
        if (nodes_[in[1]].needs_grad) accumulate(in[1], -gy);
        break;
      case Op::kMul:
        if (nodes_[in[0]].needs_grad)
          accumulate(in[0], gy.cwiseProduct(nodes_[in[1]].value));
        if (nodes_[in[1]].needs_grad)
          accumulate(in[1], gy.cwiseProduct(nodes_[in[0]].value));
        break;
      case Op::kSigmoid:
        accumulate(in[0], (gy.array() * n.value.array() *
                           (1.0 - n.value.array())).matrix());
        break;
      case Op::kTanh:
        accumulate(in[0], (gy.array() * (1.0 - n.value.array().square()))
                              .matrix());
        break;
      case Op::kExp:
        accumulate(in[0], gy.cwiseProduct(n.value));
        break;
      case Op::kScale:
        accumulate(in[0], n.attr * gy);
        break;
      case Op::kAddScalar:
        accumulate(in[0], gy);
        break;
      case Op::kConcat: {
        Eigen::Index r = 0;
        for (int part : in) {
          Eigen::Index rows = nodes_[part].value.rows();
          if (nodes_[part].needs_grad)
            accumulate(part, Matrix(gy.middleRows(r, rows)));
          r += rows;
        }
        break;
      }
      case Op::kSlice: {
        if (!nodes_[in[0]].needs_grad) break;
        const Matrix& A = nodes_[in[0]].value;
        if (g[in[0]].size() == 0) g[in[0]] = Matrix::Zero(A.rows(), A.cols());
        g[in[0]].middleRows(n.begin, n.value.rows()) += gy;
        break;
      }
      case Op::kSumSquares:
        accumulate(in[0], (2.0 * gy(0, 0)) * nodes_[in[0]].value);
        break;
      case Op::kSum: {
        const Matrix& A = nodes_[in[0]].value;
        accumulate(in[0], Matrix::Constant(A.rows(), A.cols(), gy(0, 0)));
        break;
      }
    }
    g[id] = Matrix();
  }
  return grads;
}

// ---------------------------------------------------------------------------
// Gradient checking

GradientCheckResult CheckGradients(const LossFunction& loss,
                                   const ParamCollection& params,
                                   double epsilon) {
  ParamCollection analytic = params.ZerosLike();
  loss(params, &analytic);

  GradientCheckResult result;
  ParamCollection probe = params;
  for (size_t p = 0; p < probe.size(); ++p) {
    Matrix& value = probe.value(p);
    for (Eigen::Index i = 0; i < value.size(); ++i) {
      const double original = value(i);
      value(i) = original + epsilon;
      const double plus = loss(probe, nullptr);
      value(i) = original - epsilon;
      const double minus = loss(probe, nullptr);
      value(i) = original;
      const double fd = (plus - minus) / (2.0 * epsilon);
      const double ga = analytic.value(p)(i);
      const double err =
          std::abs(ga - fd) / std::max(1e-8, std::abs(ga) + std::abs(fd));
      if (result.worst_index < 0 || err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst_param = probe.name(p);
        result.worst_index = i;
      }
    }
  }
  return result;
}

}  // namespace awe

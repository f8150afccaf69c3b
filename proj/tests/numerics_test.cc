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

#include <gtest/gtest.h>

#include <random>

#include "awe/error.h"

namespace awe {
namespace {

Matrix RandomMatrix(std::mt19937_64& rng, int r, int c) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = n(rng);
  return m;
}

ParamCollection TwoParams(std::mt19937_64& rng) {
  ParamCollection p;
  p.Add("w", RandomMatrix(rng, 3, 4));
  p.Add("b", RandomMatrix(rng, 3, 1));
  p.Add("v", RandomMatrix(rng, 3, 2));
  return p;
}

// Builds a scalar from every tape op so one gradient check covers all of
// their backward rules.
double AllOpsLoss(const ParamCollection& p, ParamCollection* grads,
                  const Matrix& x) {
  Tape t;
  Var w = t.Param(p, "w"), b = t.Param(p, "b"), v = t.Param(p, "v");
  Var xin = t.Constant(x, "x");
  Var a = t.Affine(w, xin, b);                       // 3x2
  Var s = t.Sigmoid(a);
  Var h = t.Tanh(t.Mul(s, v));
  Var e = t.Exp(t.Scale(h, 0.5));
  Var m = t.MatMul(t.SliceRows(w, 1, 2), xin);       // 2x2
  Var cat = t.ConcatRows(std::vector<Var>{e, m});    // 5x2
  Var d = t.Sub(t.AddScalar(cat, 0.25), t.ConcatRows(std::vector<Var>{v, m}));
  Var loss = t.Add(t.SumSquares(d), t.Sum(t.Mul(e, h)));
  if (grads) *grads = t.Backward(loss, p);
  return t.scalar(loss);
}

TEST(ParamCollectionTest, Basics) {
  std::mt19937_64 rng(1);
  ParamCollection p = TwoParams(rng);
  EXPECT_EQ(p.size(), 3u);
  EXPECT_EQ(p.num_scalars(), 12 + 3 + 6);
  EXPECT_TRUE(p.contains("b"));
  EXPECT_FALSE(p.contains("q"));
  EXPECT_EQ(p.index_of("v"), 2u);
  EXPECT_THROW(p.Add("w", Matrix::Zero(1, 1)), std::invalid_argument);

  ParamCollection z = p.ZerosLike();
  EXPECT_TRUE(z.SameShapes(p));
  EXPECT_EQ(z.SquaredNorm(), 0.0);
  z.AddScaled(p, 2.0);
  EXPECT_NEAR(z.SquaredNorm(), 4.0 * p.SquaredNorm(), 1e-12);
  EXPECT_TRUE(z.AllFinite());
  z.at("b")(0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_FALSE(z.AllFinite());
}

TEST(TapeTest, ForwardValues) {
  Tape t;
  Matrix w(2, 2), x(2, 1), b(2, 1);
  w << 1, 2, 3, 4;
  x << 1, -1;
  b << 0.5, 0.5;
  Var y = t.Affine(t.Constant(w), t.Constant(x), t.Constant(b));
  EXPECT_DOUBLE_EQ(t.value(y)(0, 0), -0.5);
  EXPECT_DOUBLE_EQ(t.value(y)(1, 0), -0.5);
  EXPECT_DOUBLE_EQ(t.scalar(t.SumSquares(y)), 0.5);
  EXPECT_DOUBLE_EQ(t.scalar(t.Sum(t.Sigmoid(t.Constant(Matrix::Zero(3, 1))))),
                   1.5);
}

TEST(TapeTest, EveryOpPassesGradientCheck) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    ParamCollection p = TwoParams(rng);
    Matrix x = RandomMatrix(rng, 4, 2);
    auto loss = [&](const ParamCollection& q, ParamCollection* g) {
      return AllOpsLoss(q, g, x);
    };
    GradientCheckResult r = CheckGradients(loss, p);
    EXPECT_LT(r.max_relative_error, 1e-6)
        << r.worst_param << "[" << r.worst_index << "]";
  }
}

TEST(TapeTest, ParamUsedTwiceAccumulates) {
  ParamCollection p;
  p.Add("a", Matrix::Constant(1, 1, 3.0));
  Tape t;
  Var a = t.Param(p, "a");
  Var again = t.Param(p, "a");
  Var loss = t.Sum(t.Mul(a, again));  // a^2
  ParamCollection g = t.Backward(loss, p);
  EXPECT_DOUBLE_EQ(g.at("a")(0, 0), 6.0);
}

TEST(TapeTest, UnusedParamsGetZeroGradient) {
  std::mt19937_64 rng(3);
  ParamCollection p = TwoParams(rng);
  Tape t;
  Var loss = t.SumSquares(t.Param(p, "v"));
  ParamCollection g = t.Backward(loss, p);
  EXPECT_TRUE(g.SameShapes(p));
  EXPECT_EQ(g.at("w").squaredNorm(), 0.0);
  EXPECT_TRUE(g.at("v").isApprox(2.0 * p.at("v")));
}

TEST(TapeTest, ShapeErrorsNameOperands) {
  Tape t;
  Var a = t.Constant(Matrix::Zero(2, 3), "left");
  Var b = t.Constant(Matrix::Zero(3, 2), "right");
  try {
    t.Add(a, b);
    FAIL();
  } catch (const std::invalid_argument& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("left"), std::string::npos) << msg;
    EXPECT_NE(msg.find("right"), std::string::npos) << msg;
  }
  EXPECT_THROW(t.MatMul(a, a), std::invalid_argument);
  EXPECT_THROW(t.SliceRows(a, 1, 2), std::invalid_argument);
  EXPECT_NO_THROW(t.MatMul(a, b));
}

TEST(TapeTest, NonFiniteLossIsNumericalError) {
  ParamCollection p;
  p.Add("a", Matrix::Constant(1, 1, 1000.0));
  Tape t;
  Var loss = t.Sum(t.Exp(t.Param(p, "a")));
  EXPECT_THROW(t.Backward(loss, p), NumericalError);
}

TEST(GradientCheckTest, FlagsWrongGradient) {
  ParamCollection p;
  p.Add("x", Matrix::Constant(2, 1, 0.7));
  // d/dx sum x^3 is 3x^2; report 2x^2 instead.
  auto bad = [](const ParamCollection& q, ParamCollection* g) {
    const Matrix& x = q.at("x");
    if (g) g->at("x") = 2.0 * x.array().square().matrix();
    return x.array().cube().sum();
  };
  GradientCheckResult r = CheckGradients(bad, p);
  EXPECT_NEAR(r.max_relative_error, 0.2, 1e-6);
  EXPECT_EQ(r.worst_param, "x");
}

}  // namespace
}  // namespace awe

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


#include "awe/models.h"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "awe/error.h"
#include "test_support.h"

namespace awe {
namespace {

using testing::PerturbBiases;
using testing::RandomFrames;
using testing::TinyModel;
using testing::Vec;

Vec ToVec(const Eigen::VectorXd& v) { return Vec(v.data(), v.data() + v.size()); }

double RelErr(double a, double b) {
  return std::abs(a - b) / std::max(1e-300, std::max(std::abs(a), std::abs(b)));
}

class ModelTest : public ::testing::Test {
 protected:
  std::mt19937_64 rng_{11};
};

TEST_F(ModelTest, ParameterLayout) {
  ModelConfig c = TinyModel(ModelKind::kCae, 3, 8, 2, 6);
  ParamCollection p = InitParams(c, 1);
  // 9 per GRU layer, embedding head, output head.
  EXPECT_EQ(p.size(), 4u * 9 + 2 + 2);
  EXPECT_EQ(p.at("encoder.0.W_z").cols(), 3);
  EXPECT_EQ(p.at("encoder.1.W_z").cols(), 8);
  EXPECT_EQ(p.at("decoder.0.W_h").cols(), 6);
  EXPECT_EQ(p.at("decoder.out.W").rows(), 3);
  EXPECT_FALSE(p.contains("encoder.logvar.W"));
  ParamCollection v = InitParams(TinyModel(ModelKind::kVae), 1);
  EXPECT_TRUE(v.contains("encoder.logvar.W"));
  EXPECT_EQ(v.size(), p.size() + 2);
}

TEST_F(ModelTest, InitIsSeededGlorot) {
  ModelConfig c = TinyModel(ModelKind::kAe, 3, 8, 2, 6);
  ParamCollection a = InitParams(c, 5), b = InitParams(c, 5),
                  d = InitParams(c, 6);
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(a.value(i) == b.value(i));
    const Matrix& w = a.value(i);
    if (w.cols() == 1) {
      EXPECT_EQ(w.squaredNorm(), 0.0) << a.name(i);
    } else {
      EXPECT_LE(w.cwiseAbs().maxCoeff(), std::sqrt(6.0 / (w.rows() + w.cols())));
    }
  }
  EXPECT_FALSE(a.at("encoder.0.W_z") == d.at("encoder.0.W_z"));
}

TEST_F(ModelTest, ForwardMatchesScalarReference) {
  for (int trial = 0; trial < 5; ++trial) {
    ModelConfig c = TinyModel(ModelKind::kVae, 3, 5, 2, 4);
    ParamCollection p = InitParams(c, trial);
    PerturbBiases(&p, rng_);
    FrameMatrix x = RandomFrames(rng_, 2 + trial, 3);
    FrameMatrix y = RandomFrames(rng_, 6 - trial % 3, 3);

    Vec mu = testing::ReferenceEncode(p, c, x, "encoder.embed");
    Eigen::VectorXd got = Encode(p, c, x);
    for (size_t i = 0; i < mu.size(); ++i) EXPECT_NEAR(got(i), mu[i], 1e-12);

    GaussianParams g = EncodeVariational(p, c, x);
    Vec lv = testing::ReferenceEncode(p, c, x, "encoder.logvar");
    for (size_t i = 0; i < lv.size(); ++i)
      EXPECT_NEAR(g.log_var(i), lv[i], 1e-12);

    Matrix dec = Decode(p, c, got, 4);
    auto ref = testing::ReferenceDecode(p, c, mu, 4);
    ASSERT_EQ(dec.rows(), 4);
    for (int t = 0; t < 4; ++t)
      for (int d = 0; d < 3; ++d) EXPECT_NEAR(dec(t, d), ref[t][d], 1e-12);

    ModelConfig cae = c;
    cae.kind = ModelKind::kCae;
    EXPECT_LT(RelErr(CaeLoss(p, cae, x, y),
                     testing::ReferenceCaeLoss(p, cae, x, y)),
              1e-12);
    c.vae_sigma = 0.7;
    Eigen::VectorXd noise = Eigen::VectorXd::Random(4);
    EXPECT_LT(RelErr(VaeLoss(p, c, x, noise),
                     testing::ReferenceVaeLoss(p, c, x, ToVec(noise))),
              1e-12);
  }
}

TEST_F(ModelTest, GradientsMatchFiniteDifferences) {
  for (ModelKind kind : {ModelKind::kAe, ModelKind::kCae, ModelKind::kVae}) {
    ModelConfig c = TinyModel(kind, 3, 8, 2, 6);
    c.vae_sigma = 1.0;
    ParamCollection p = InitParams(c, 3);
    PerturbBiases(&p, rng_);
    FrameMatrix x = RandomFrames(rng_, 5, 3);
    FrameMatrix y = kind == ModelKind::kCae ? RandomFrames(rng_, 4, 3) : x;
    Matrix noise = Matrix::Random(6, 1);
    auto loss = [&](const ParamCollection& q, ParamCollection* g) {
      TrainingItem item{&x, &y};
      return BatchLoss(q, c, std::span<const TrainingItem>(&item, 1),
                       c.variational() ? &noise : nullptr, g, Reduction::kSum);
    };
    GradientCheckResult r = CheckGradients(loss, p);
    EXPECT_LT(r.max_relative_error, 1e-4)
        << ToString(kind) << " " << r.worst_param << "[" << r.worst_index
        << "]";
  }
}

TEST_F(ModelTest, CorrespondenceOnIdenticalInputIsAutoencoder) {
  for (int trial = 0; trial < 20; ++trial) {
    ModelConfig c = TinyModel(ModelKind::kCae, 3, 6, 2, 4);
    ParamCollection p = InitParams(c, trial);
    PerturbBiases(&p, rng_);
    FrameMatrix x = RandomFrames(rng_, 1 + trial % 7, 3);
    EXPECT_EQ(CaeLoss(p, c, x, x), AeLoss(p, c, x));
    EXPECT_GE(AeLoss(p, c, x), 0.0);
  }
}

TEST_F(ModelTest, KlClosedForm) {
  Eigen::VectorXd mu(2), lv(2);
  mu << 0, 0;
  lv << 0, 0;
  EXPECT_EQ(KlDiagGaussianToStandard(mu, lv), 0.0);
  mu << 1, -2;
  lv << std::log(2.0), 0;
  // 0.5 * ((1 + 2 - ln2 - 1) + (4 + 1 - 0 - 1))
  EXPECT_NEAR(KlDiagGaussianToStandard(mu, lv), 0.5 * (6.0 - std::log(2.0)),
              1e-15);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    Eigen::VectorXd m(3), l(3);
    for (int k = 0; k < 3; ++k) {
      m(k) = n(rng_);
      l(k) = n(rng_);
    }
    EXPECT_GT(KlDiagGaussianToStandard(m, l), 0.0);
  }
}

TEST_F(ModelTest, KlAgreesWithMonteCarlo) {
  Eigen::VectorXd mu(4), lv(4);
  mu << 0.5, -1.0, 0.2, 1.5;
  lv << -0.5, 0.3, 0.8, -1.0;
  double mc = testing::MonteCarloKl(mu, lv, 200000, rng_);
  EXPECT_NEAR(mc, KlDiagGaussianToStandard(mu, lv),
              0.02 * KlDiagGaussianToStandard(mu, lv));
}

TEST_F(ModelTest, ReparameterizeAndLargeSigmaLimit) {
  Eigen::VectorXd mu(2), lv(2), e(2);
  mu << 1, 2;
  lv << std::log(4.0), 0;
  e << 0.5, -1;
  Eigen::VectorXd z = Reparameterize(mu, lv, e);
  EXPECT_NEAR(z(0), 2.0, 1e-15);
  EXPECT_NEAR(z(1), 1.0, 1e-15);

  ModelConfig c = TinyModel(ModelKind::kVae, 3, 5, 1, 4);
  c.vae_sigma = 1e7;
  ParamCollection p = InitParams(c, 2);
  PerturbBiases(&p, rng_);
  FrameMatrix x = RandomFrames(rng_, 6, 3);
  GaussianParams g = EncodeVariational(p, c, x);
  EXPECT_NEAR(VaeLoss(p, c, x, Eigen::VectorXd::Zero(4)),
              6.0 * KlDiagGaussianToStandard(g.mu, g.log_var), 1e-9);
  EXPECT_THROW(VaeLoss(p, TinyModel(ModelKind::kAe, 3, 5, 1, 4), x,
                       Eigen::VectorXd::Zero(4)),
               std::invalid_argument);
}

// Swapping the two feature dimensions in the data and in every parameter
// that touches them leaves the loss unchanged.
TEST_F(ModelTest, FeaturePermutationSymmetry) {
  ModelConfig c = TinyModel(ModelKind::kAe, 2, 5, 2, 3);
  ParamCollection p = InitParams(c, 9);
  PerturbBiases(&p, rng_);
  ParamCollection q = p;
  for (const char* g : {"z", "r", "h"}) {
    Matrix& w = q.at(std::string("encoder.0.W_") + g);
    w.col(0).swap(w.col(1));
  }
  q.at("decoder.out.W").row(0).swap(q.at("decoder.out.W").row(1));
  q.at("decoder.out.b").row(0).swap(q.at("decoder.out.b").row(1));
  FrameMatrix x = RandomFrames(rng_, 7, 2);
  FrameMatrix xs = x;
  xs.col(0).swap(xs.col(1));
  EXPECT_LT(RelErr(AeLoss(p, c, x), AeLoss(q, c, xs)), 1e-13);
}

TEST_F(ModelTest, MaskedBatchEqualsSumOfSingles) {
  for (ModelKind kind : {ModelKind::kAe, ModelKind::kVae}) {
    ModelConfig c = TinyModel(kind, 3, 6, 2, 4);
    c.vae_sigma = 0.5;
    ParamCollection p = InitParams(c, 4);
    PerturbBiases(&p, rng_);
    for (int trial = 0; trial < 10; ++trial) {
      const int b = 1 + trial % 5;
      std::vector<FrameMatrix> in, out;
      for (int i = 0; i < b; ++i) {
        in.push_back(RandomFrames(rng_, 1 + (trial * 3 + i * 5) % 8, 3));
        out.push_back(RandomFrames(rng_, 1 + (trial + i * 3) % 7, 3));
      }
      std::vector<TrainingItem> items;
      for (int i = 0; i < b; ++i) items.push_back({&in[i], &out[i]});
      Matrix noise = Matrix::Random(4, b);

      ParamCollection g_batch;
      double batch = BatchLoss(p, c, items, &noise, &g_batch, Reduction::kSum);
      double sum = 0.0;
      ParamCollection g_sum = p.ZerosLike();
      for (int i = 0; i < b; ++i) {
        ParamCollection g;
        Matrix ni = noise.col(i);
        sum += BatchLoss(p, c, std::span<const TrainingItem>(&items[i], 1),
                         &ni, &g, Reduction::kSum);
        g_sum.AddScaled(g, 1.0);
      }
      EXPECT_LT(RelErr(batch, sum), 1e-10);
      ParamCollection diff = g_batch;
      diff.AddScaled(g_sum, -1.0);
      EXPECT_LT(std::sqrt(diff.SquaredNorm() / g_sum.SquaredNorm()), 1e-10);

      double mean = BatchLoss(p, c, items, &noise, nullptr, Reduction::kMean);
      EXPECT_LT(RelErr(mean, batch / b), 1e-14);
    }
  }
}

TEST_F(ModelTest, EmbedAllMatchesSingleEmbeddings) {
  ModelConfig c = TinyModel(ModelKind::kCae, 3, 6, 2, 4);
  ParamCollection p = InitParams(c, 8);
  PerturbBiases(&p, rng_);
  std::vector<FrameMatrix> xs;
  for (int i = 0; i < 11; ++i) xs.push_back(RandomFrames(rng_, 1 + i % 9, 3));
  std::vector<const FrameMatrix*> ptrs;
  for (auto& x : xs) ptrs.push_back(&x);
  Matrix all = EmbedAll(p, c, ptrs, 4);
  ASSERT_EQ(all.rows(), 11);
  for (int i = 0; i < 11; ++i)
    EXPECT_LT((all.row(i).transpose() - Embed(p, c, xs[i])).norm(), 1e-12);
}

TEST_F(ModelTest, InputDimensionMismatchIsDataError) {
  ModelConfig c = TinyModel(ModelKind::kAe, 3);
  ParamCollection p = InitParams(c, 1);
  FrameMatrix x = RandomFrames(rng_, 4, 5);
  EXPECT_THROW(Encode(p, c, x), DataError);
  EXPECT_THROW(AeLoss(p, c, x), DataError);
}

TEST_F(ModelTest, NonFiniteLossIsNumericalError) {
  ModelConfig c = TinyModel(ModelKind::kAe, 3);
  ParamCollection p = InitParams(c, 1);
  p.at("decoder.out.b")(0, 0) = 1e200;
  FrameMatrix x = RandomFrames(rng_, 3, 3);
  EXPECT_THROW(AeLoss(p, c, x), NumericalError);
}

TEST_F(ModelTest, CheckpointRoundTrip) {
  testing::ScratchDir dir("ckpt");
  ModelConfig c = TinyModel(ModelKind::kVae, 3, 5, 2, 4);
  c.vae_sigma = 0.25;
  Checkpoint ck{c, InitParams(c, 3), "abc123"};
  SaveCheckpoint(ck, dir / "m.ckpt");
  Checkpoint back = LoadCheckpoint(dir / "m.ckpt");
  EXPECT_EQ(back.config.kind, ModelKind::kVae);
  EXPECT_EQ(back.config.hidden_size, 5);
  EXPECT_EQ(back.config.embedding_dim, 4);
  EXPECT_EQ(back.config.vae_sigma, 0.25);
  EXPECT_EQ(back.config_hash, "abc123");
  ASSERT_EQ(back.params.names(), ck.params.names());
  for (size_t i = 0; i < ck.params.size(); ++i)
    EXPECT_TRUE(back.params.value(i) ==
                ck.params.value(i).cast<float>().cast<double>());

  std::ofstream(dir / "bad.ckpt") << "AWEF garbage";
  EXPECT_THROW(LoadCheckpoint(dir / "bad.ckpt"), DataError);
  auto size = std::filesystem::file_size(dir / "m.ckpt");
  std::filesystem::resize_file(dir / "m.ckpt", size - 3);
  EXPECT_THROW(LoadCheckpoint(dir / "m.ckpt"), DataError);
}

TEST_F(ModelTest, ParseKinds) {
  EXPECT_EQ(ParseModelKind("vae"), ModelKind::kVae);
  EXPECT_EQ(ToString(ModelKind::kCae), "cae");
  EXPECT_THROW(ParseModelKind("lstm"), UsageError);
}

}  // namespace
}  // namespace awe

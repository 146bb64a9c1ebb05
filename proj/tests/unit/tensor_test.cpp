#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "strokegen/autograd.hpp"
#include "strokegen/errors.hpp"

using namespace strokegen;
using namespace strokegen::tensor;
using oracle::gradient_check;
using oracle::random_tensor;
using oracle::TensorD;
using oracle::VarD;
using oracle::weighted_sum;

namespace {

constexpr double kOpTolerance = 1e-4;

VarD param(TensorD t) { return VarD::parameter(std::move(t)); }

Mask lower_triangular(std::size_t n) {
  Mask m{n, n, std::vector<unsigned char>(n * n, 0)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) m.allowed[i * n + j] = 1;
  }
  return m;
}

}  // namespace

TEST(Tensor, ShapeAndAccess) {
  Tensor<double> t({2, 3}, 1.5);
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
  t(1, 2) = 4.0;
  EXPECT_EQ(t[5], 4.0);
  EXPECT_EQ(t.row(1)[2], 4.0);
  EXPECT_THROW(Tensor<double>({2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
  EXPECT_EQ(element_count({3, 4, 5}), 60u);
  const auto f = t.cast<float>();
  EXPECT_EQ(f(1, 2), 4.0f);
}

TEST(Matmul, IdentityAndHandExample) {
  const VarD a = VarD::constant(TensorD({2, 2}, {1, 2, 3, 4}));
  const VarD b = VarD::constant(TensorD({2, 1}, {5, 6}));
  EXPECT_EQ(matmul(a, b).value().data()[0], 17.0);
  EXPECT_EQ(matmul(a, b).value().data()[1], 39.0);
  Rng rng(1);
  const VarD x = VarD::constant(random_tensor({2, 5}, rng));
  const VarD eye = VarD::constant(TensorD({2, 2}, {1, 0, 0, 1}));
  EXPECT_EQ(matmul(eye, x).value(), x.value());
  EXPECT_THROW(matmul(x, a), ShapeError);
  EXPECT_THROW(matmul(b, b), ShapeError);
}

TEST(Matmul, NtEqualsExplicitTranspose) {
  Rng rng(2);
  const auto a = random_tensor({3, 4}, rng);
  const auto b = random_tensor({5, 4}, rng);
  TensorD bt({4, 5});
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 4; ++j) bt(j, i) = b(i, j);
  }
  const auto nt = matmul_nt(VarD::constant(a), VarD::constant(b)).value();
  const auto nn = matmul(VarD::constant(a), VarD::constant(bt)).value();
  for (std::size_t i = 0; i < nt.size(); ++i) EXPECT_NEAR(nt[i], nn[i], 1e-14);
}

TEST(Matmul, Gradients) {
  Rng rng(3);
  auto a = param(random_tensor({3, 4}, rng));
  auto b = param(random_tensor({4, 2}, rng));
  const auto w = random_tensor({3, 2}, rng);
  EXPECT_LT(gradient_check({a, b}, [&] { return weighted_sum(matmul(a, b), w); }), kOpTolerance);
  auto c = param(random_tensor({5, 4}, rng));
  const auto w2 = random_tensor({3, 5}, rng);
  EXPECT_LT(gradient_check({a, c}, [&] { return weighted_sum(matmul_nt(a, c), w2); }), kOpTolerance);
}

TEST(Elementwise, Gradients) {
  Rng rng(4);
  auto a = param(random_tensor({3, 4}, rng));
  auto b = param(random_tensor({3, 4}, rng));
  auto bias = param(random_tensor({1, 4}, rng));
  const auto w = random_tensor({3, 4}, rng);
  EXPECT_LT(gradient_check({a, b}, [&] { return weighted_sum(add(a, b), w); }), kOpTolerance);
  EXPECT_LT(gradient_check({a, bias}, [&] { return weighted_sum(add_row(a, bias), w); }), kOpTolerance);
  EXPECT_LT(gradient_check({a, b}, [&] { return weighted_sum(mul(a, b), w); }), kOpTolerance);
  EXPECT_LT(gradient_check({a}, [&] { return weighted_sum(scale(a, 2.5), w); }), kOpTolerance);
  EXPECT_LT(gradient_check({a}, [&] { return sum(a); }), kOpTolerance);
}

TEST(Relu, ForwardAndGradientAwayFromKink) {
  TensorD t({1, 4}, {-2.0, -0.1, 0.3, 5.0});
  const auto y = relu(VarD::constant(t)).value();
  EXPECT_EQ(y.data()[0], 0.0);
  EXPECT_EQ(y.data()[3], 5.0);
  Rng rng(5);
  auto x = random_tensor({4, 5}, rng);
  for (auto& v : x.data()) v = (v < 0 ? -0.05 : 0.05) + v;  // keep |x| >= 0.05 > h
  auto a = param(x);
  const auto w = random_tensor({4, 5}, rng);
  EXPECT_LT(gradient_check({a}, [&] { return weighted_sum(relu(a), w); }), kOpTolerance);
}

TEST(Softmax, ClosedFormsAndStability) {
  const auto u = softmax(VarD::constant(TensorD({1, 4}, 3.0))).value();
  for (double v : u.data()) EXPECT_NEAR(v, 0.25, 1e-15);
  const auto p = softmax(VarD::constant(TensorD({1, 2}, {0.0, std::log(3.0)}))).value();
  EXPECT_NEAR(p[0], 0.25, 1e-12);
  EXPECT_NEAR(p[1], 0.75, 1e-12);
  Rng rng(6);
  auto x = random_tensor({3, 6}, rng, -5, 5);
  auto shifted = x;
  for (auto& v : shifted.data()) v += 700.0;  // would overflow without max subtraction
  const auto s1 = softmax(VarD::constant(x)).value();
  const auto s2 = softmax(VarD::constant(shifted)).value();
  for (std::size_t r = 0; r < 3; ++r) {
    double total = 0;
    for (double v : s1.row(r)) total += v;
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
  for (std::size_t i = 0; i < s1.size(); ++i) EXPECT_NEAR(s1[i], s2[i], 1e-12);
}

TEST(Softmax, ColumnAxisAndGradients) {
  Rng rng(7);
  auto a = param(random_tensor({4, 3}, rng, -2, 2));
  const auto cols = softmax(a, 0).value();
  for (std::size_t c = 0; c < 3; ++c) {
    double total = 0;
    for (std::size_t r = 0; r < 4; ++r) total += cols(r, c);
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
  const auto w = random_tensor({4, 3}, rng);
  EXPECT_LT(gradient_check({a}, [&] { return weighted_sum(softmax(a, 1), w); }), kOpTolerance);
  EXPECT_LT(gradient_check({a}, [&] { return weighted_sum(softmax(a, 0), w); }), kOpTolerance);
  EXPECT_THROW(softmax(a, 2), PreconditionError);
}

TEST(MaskedSoftmax, MaskedEntriesExactlyZero) {
  Rng rng(8);
  auto a = param(random_tensor({4, 4}, rng, -3, 3));
  const auto mask = lower_triangular(4);
  const auto y = masked_softmax(a, mask).value();
  for (std::size_t i = 0; i < 4; ++i) {
    double total = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      if (j > i) {
        EXPECT_EQ(y(i, j), 0.0);
      }
      total += y(i, j);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
  EXPECT_EQ(y(0, 0), 1.0);
  const auto w = random_tensor({4, 4}, rng);
  EXPECT_LT(gradient_check({a}, [&] { return weighted_sum(masked_softmax(a, mask), w); }), kOpTolerance);
  EXPECT_THROW(masked_softmax(a, lower_triangular(3)), ShapeError);
}

TEST(LayerNorm, StatisticsAndConstantInput) {
  Rng rng(9);
  const auto x = VarD::constant(random_tensor({3, 16}, rng, -4, 4));
  const VarD gain = VarD::constant(TensorD({1, 16}, 2.0));
  const VarD bias = VarD::constant(TensorD({1, 16}, 0.5));
  const auto y = layer_norm(x, gain, bias, 1e-12).value();
  for (std::size_t r = 0; r < 3; ++r) {
    double mean = 0, var = 0;
    for (double v : y.row(r)) mean += v;
    mean /= 16;
    for (double v : y.row(r)) var += (v - mean) * (v - mean);
    EXPECT_NEAR(mean, 0.5, 1e-6);
    EXPECT_NEAR(std::sqrt(var / 16), 2.0, 1e-6);
  }
  const auto flat = layer_norm(VarD::constant(TensorD({1, 5}, 3.0)), VarD::constant(TensorD({1, 5}, 1.0)),
                               VarD::constant(TensorD({1, 5}, 0.0)))
                        .value();
  for (double v : flat.data()) EXPECT_EQ(v, 0.0);
}

TEST(LayerNorm, Gradients) {
  Rng rng(10);
  auto x = param(random_tensor({3, 6}, rng, -2, 2));
  auto gain = param(random_tensor({1, 6}, rng, 0.5, 1.5));
  auto bias = param(random_tensor({1, 6}, rng));
  const auto w = random_tensor({3, 6}, rng);
  EXPECT_LT(gradient_check({x, gain, bias}, [&] { return weighted_sum(layer_norm(x, gain, bias), w); }),
            kOpTolerance);
}

TEST(Embedding, LookupAndRepeatedIdGradients) {
  Rng rng(11);
  auto table = param(random_tensor({5, 3}, rng));
  const std::vector<int> ids{4, 1, 4, 0};
  const auto y = embedding(table, ids).value();
  for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(y(2, c), table.value()(4, c));
  const auto w = random_tensor({4, 3}, rng);
  EXPECT_LT(gradient_check({table}, [&] { return weighted_sum(embedding(table, ids), w); }), kOpTolerance);
  const std::vector<int> bad{5};
  EXPECT_THROW(embedding(table, bad), LookupError);
}

TEST(CrossEntropy, UniformConfidentAndGradient) {
  const std::vector<int> targets{2, 0, 6};
  const auto uniform = cross_entropy(VarD::constant(TensorD({3, 7}, 0.25)), targets).value()[0];
  EXPECT_NEAR(uniform, std::log(7.0), 1e-12);
  TensorD sure({1, 4}, 0.0);
  sure[1] = 20.0;
  const std::vector<int> one{1};
  EXPECT_LT(cross_entropy(VarD::constant(sure), one).value()[0], 1e-8);
  Rng rng(12);
  auto logits = param(random_tensor({3, 7}, rng, -2, 2));
  EXPECT_LT(gradient_check({logits}, [&] { return cross_entropy(logits, targets); }), kOpTolerance);
  // Analytic form: (softmax - onehot) / rows.
  logits.zero_grad();
  backward(cross_entropy(logits, targets));
  const auto p = softmax(VarD::constant(logits.value())).value();
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 7; ++c) {
      const double expect = (p(r, c) - (static_cast<int>(c) == targets[r] ? 1.0 : 0.0)) / 3.0;
      EXPECT_NEAR(logits.grad()(r, c), expect, 1e-14);
    }
  }
  const std::vector<int> out_of_range{0, 0, 7};
  EXPECT_THROW(cross_entropy(logits, out_of_range), LookupError);
  const std::vector<int> short_targets{0};
  EXPECT_THROW(cross_entropy(logits, short_targets), ShapeError);
}

TEST(SliceConcat, RoundTripAndGradients) {
  Rng rng(13);
  auto a = param(random_tensor({3, 6}, rng));
  const std::vector<VarD> parts{slice_cols(a, 0, 2), slice_cols(a, 2, 3), slice_cols(a, 5, 1)};
  EXPECT_EQ(concat_cols<double>(parts).value(), a.value());
  const auto w = random_tensor({3, 6}, rng);
  auto probe = [&] {
    const std::vector<VarD> swapped{slice_cols(a, 3, 3), slice_cols(a, 0, 3)};
    return weighted_sum(concat_cols<double>(swapped), w);
  };
  EXPECT_LT(gradient_check({a}, probe), kOpTolerance);
  EXPECT_THROW(slice_cols(a, 4, 3), ShapeError);
}

TEST(Backward, SumAndSquareExamples) {
  Rng rng(14);
  auto x = param(random_tensor({2, 3}, rng));
  backward(sum(x));
  for (double g : x.grad().data()) EXPECT_EQ(g, 1.0);
  x.zero_grad();
  backward(sum(mul(x, x)));
  for (std::size_t i = 0; i < x.value().size(); ++i) EXPECT_NEAR(x.grad()[i], 2 * x.value()[i], 1e-15);
}

TEST(Backward, SharedSubexpressionsAccumulate) {
  // y = x*x reused twice: d/dx sum(y + y) = 4x, the sum of both paths.
  Rng rng(15);
  auto x = param(random_tensor({2, 2}, rng));
  const auto y = mul(x, x);
  backward(sum(add(y, y)));
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(x.grad()[i], 4 * x.value()[i], 1e-15);
}

TEST(Backward, LeafGradientsAccumulateAcrossCallsAndSeedScales) {
  auto x = param(TensorD({1, 2}, {1.0, 2.0}));
  const auto loss = sum(scale(x, 3.0));
  backward(loss);
  backward(loss, 0.5);
  for (double g : x.grad().data()) EXPECT_DOUBLE_EQ(g, 4.5);
}

TEST(Backward, RejectsNonScalarAndSkipsConstants) {
  auto x = param(TensorD({2, 2}, 1.0));
  EXPECT_THROW(backward(mul(x, x)), ShapeError);
  const auto c = VarD::constant(TensorD({1, 1}, 2.0));
  EXPECT_NO_THROW(backward(sum(c)));
}

TEST(GradMode, NoGradGuardBuildsNoTape) {
  auto x = param(TensorD({1, 3}, 1.0));
  {
    NoGradGuard guard;
    EXPECT_FALSE(grad_enabled());
    const auto y = sum(mul(x, x));
    EXPECT_FALSE(y.requires_grad());
  }
  EXPECT_TRUE(grad_enabled());
  EXPECT_TRUE(sum(x).requires_grad());
}

TEST(Finiteness, NonFiniteResultsThrow) {
  const auto big = VarD::constant(TensorD({1, 1}, std::numeric_limits<double>::max()));
  EXPECT_THROW(scale(big, 10.0), NumericError);
  const auto nan = VarD::constant(TensorD({1, 2}, {std::nan(""), 1.0}));
  EXPECT_THROW(add(nan, nan), NumericError);
}

TEST(Precision, FloatMatchesDouble) {
  Rng rng(16);
  const auto a = random_tensor({4, 8}, rng);
  const auto b = random_tensor({8, 3}, rng);
  const auto d = matmul(VarD::constant(a), VarD::constant(b)).value();
  const auto f = matmul(Var<float>::constant(a.cast<float>()), Var<float>::constant(b.cast<float>())).value();
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_NEAR(f[i], d[i], 1e-5);
}

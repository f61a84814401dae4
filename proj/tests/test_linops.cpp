#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "pf/linops.hpp"
#include "pf/prob_io.hpp"
#include "pf/simplex.hpp"

using namespace pf;

namespace {

ZMajorVector random_zmajor(Rng& rng, Index nz, Index cols) {
  return ZMajorVector::from_matrix(rng.uniform_matrix(nz, cols, -2.0, 2.0));
}

/// I_{nz} (x) block as a dense matrix on z-major vectors.
Matrix dense_kron(const Matrix& block, Index nz) {
  Matrix d = Matrix::Zero(nz * block.rows(), nz * block.cols());
  for (Index z = 0; z < nz; ++z) d.block(z * block.rows(), z * block.cols(), block.rows(), block.cols()) = block;
  return d;
}

}  // namespace

TEST(ZMajorVector, FlatLayout) {
  Vector v(6);
  v << 0, 1, 2, 3, 4, 5;
  const ZMajorVector z = ZMajorVector::from_flat(v, 2);
  EXPECT_EQ(z.n_cols(), 3);
  EXPECT_EQ(z(1, 0), 3.0);
  EXPECT_EQ(z.flat(), v);
  EXPECT_THROW(ZMajorVector::from_flat(v, 4), DimensionMismatch);
}

TEST(BOperator, Examples) {
  const JointXY id(DiscreteDist::uniform(3), CondDist::identity(3));
  Rng rng(1);
  const ZMajorVector v = random_zmajor(rng, 2, 3);
  EXPECT_EQ(make_b_operator(id, 2).apply(v).blocks(), v.blocks());

  const JointXY j = reference_joint();
  const MarkovOperator b = make_b_operator(j, 3);
  EXPECT_EQ(b.block(), Matrix(oracle::reference_q().transpose()));
  const ZMajorVector ones = ZMajorVector::from_matrix(Matrix::Ones(3, 3));
  EXPECT_LT((b.apply(ones).blocks().array() - 1.0).abs().maxCoeff(), 1e-15);

  ZMajorVector w = random_zmajor(rng, 2, 3);
  const auto before = b.block().rows();
  ASSERT_EQ(before, 3);
  const MarkovOperator b2 = make_b_operator(j, 2);
  const ZMajorVector out1 = b2.apply(w);
  w.blocks().row(1).setConstant(99.0);
  EXPECT_EQ(b2.apply(w).blocks().row(0), out1.blocks().row(0));
  EXPECT_THROW(b2.apply(random_zmajor(rng, 3, 3)), DimensionMismatch);
}

TEST(AOperator, Examples) {
  const JointXY id(DiscreteDist::uniform(2), CondDist::identity(2));
  EXPECT_EQ(make_a_operator(id, 2).block(), Matrix(Matrix::Identity(2, 2)));

  const JointXY j = reference_joint();
  const MarkovOperator a = make_a_operator(j, 3);
  const ZMajorVector uni = ZMajorVector::from_matrix(Matrix::Constant(3, 3, 1.0 / 3));
  EXPECT_LT((a.apply(uni).blocks().array() - 1.0 / 3).abs().maxCoeff(), 1e-15);

  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    const Matrix e = oracle::random_stochastic(rng, 3, 3);
    const Matrix via_op = a.apply(ZMajorVector::from_matrix(e)).to_matrix();
    const Matrix via_compose = markov_compose(Encoder(e), j.x_given_y()).matrix();
    EXPECT_LT((via_op - via_compose).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(PinvApply, Examples) {
  const JointXY id(DiscreteDist::uniform(3), CondDist::identity(3));
  Rng rng(3);
  const ZMajorVector v = random_zmajor(rng, 2, 3);
  EXPECT_LT((pinv_apply(make_b_operator(id, 2), v).blocks() - v.blocks()).cwiseAbs().maxCoeff(), 1e-15);

  const JointXY j = reference_joint();
  const MarkovOperator b = make_b_operator(j, 3);
  EXPECT_EQ(b.rank(), 3);
  EXPECT_LT((b.pinv_block() * b.block() - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-10);

  const ZMajorVector c = ZMajorVector::from_matrix(Matrix::Constant(3, 3, -1.7));
  EXPECT_LT((pinv_apply(b, c).blocks().array() + 1.7).abs().maxCoeff(), 1e-12);
}

TEST(PinvApply, PenroseIdentitiesAndRank) {
  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    const Index r = 1 + i % 4, c = 1 + (i / 4) % 4;
    Matrix m = rng.uniform_matrix(r, c, -1.0, 1.0);
    if (i % 5 == 0 && r > 1) m.row(r - 1) = m.row(0);  // force rank deficiency
    const MarkovOperator op(m, 2);
    const Matrix& p = op.pinv_block();
    EXPECT_LT((m * p * m - m).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((p * m * p - p).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((m * p - (m * p).transpose()).cwiseAbs().maxCoeff(), 1e-10);
  }
  Matrix deficient(3, 3);
  deficient << 1, 2, 3, 2, 4, 6, 1, 0, 1;
  const MarkovOperator op(deficient, 1);
  EXPECT_EQ(op.rank(), 2);
  EXPECT_THROW(pinv_apply(op, ZMajorVector(1, 3), 3), RankDeficient);
  try {
    pinv_apply(op, ZMajorVector(1, 3), 3);
  } catch (const RankDeficient& e) {
    EXPECT_EQ(e.rank(), 2);
    EXPECT_EQ(e.required(), 3);
  }
  EXPECT_NO_THROW(pinv_apply(op, ZMajorVector(1, 3), 2));
}

TEST(MarkovOperator, ForwardAfterPinvIsProjection) {
  Rng rng(5);
  for (int i = 0; i < 30; ++i) {
    const Matrix m = rng.uniform_matrix(3, 2 + i % 3, 0.0, 1.0);
    const MarkovOperator op(m, 2);
    const ZMajorVector v = random_zmajor(rng, 2, 3);
    const ZMajorVector once = op.apply(op.apply_pinv(v));
    const ZMajorVector twice = op.apply(op.apply_pinv(once));
    EXPECT_LT((once.blocks() - twice.blocks()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(MarkovOperator, NormMatchesDensePowerIteration) {
  Rng rng(6);
  for (int i = 0; i < 10; ++i) {
    const Matrix block = rng.uniform_matrix(3, 4, -1.0, 1.0);
    const Index nz = 1 + i % 3;
    const MarkovOperator op(block, nz);
    const Matrix d = dense_kron(block, nz);
    Vector x = Vector::Ones(d.cols());
    double sigma = 0.0;
    for (int it = 0; it < 2000; ++it) {
      x = d.transpose() * (d * x);
      sigma = std::sqrt(x.norm());
      x.normalize();
    }
    sigma = (d * x).norm();
    EXPECT_NEAR(op.operator_norm(), sigma, 1e-8);
  }
}

TEST(Softmax, Examples) {
  const ZMajorVector eq = ZMajorVector::from_matrix(Matrix::Constant(4, 2, 3.3));
  EXPECT_LT((softmax_over_z(eq).blocks().array() - 0.25).abs().maxCoeff(), 1e-15);

  Rng rng(7);
  const ZMajorVector v = random_zmajor(rng, 3, 4);
  ZMajorVector shifted = v;
  for (Index c = 0; c < 4; ++c) shifted.blocks().col(c).array() += 100.0 * c - 50.0;
  EXPECT_LT((softmax_over_z(v).blocks() - softmax_over_z(shifted).blocks()).cwiseAbs().maxCoeff(), 1e-12);

  const Matrix p = oracle::random_stochastic(rng, 3, 4, 0.01);
  const ZMajorVector logp = ZMajorVector::from_matrix(p.array().log().matrix());
  EXPECT_LT((softmax_over_z(logp).to_matrix() - p).cwiseAbs().maxCoeff(), 1e-12);

  Matrix big(2, 1);
  big << 1000.0, 0.0;
  const ZMajorVector s = softmax_over_z(ZMajorVector::from_matrix(big));
  EXPECT_NEAR(s(0, 0), 1.0, 1e-15);
  EXPECT_FALSE(std::isnan(s(1, 0)));
}

TEST(Softmax, RandomInputsStayOnSimplex) {
  Rng rng(8);
  for (int i = 0; i < 1000; ++i) {
    const ZMajorVector v = ZMajorVector::from_matrix(rng.uniform_matrix(1 + i % 6, 1 + i % 4, -30.0, 30.0));
    const Matrix s = softmax_over_z(v).to_matrix();
    EXPECT_GT(s.minCoeff(), 0.0);
    EXPECT_LT((s.colwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
  }
}

TEST(LogSumExp, Examples) {
  const std::vector<double> one{-3.25};
  EXPECT_EQ(log_sum_exp(one), -3.25);
  const std::vector<double> zeros{0.0, 0.0};
  EXPECT_NEAR(log_sum_exp(zeros), std::log(2.0), 1e-15);
  const std::vector<double> wide{-745.0, 0.0};
  const double v = log_sum_exp(wide);
  EXPECT_FALSE(std::isnan(v));
  EXPECT_NEAR(v, 0.0, 1e-300);
  const std::vector<double> huge{1000.0, 1000.0};
  EXPECT_NEAR(log_sum_exp(huge), 1000.0 + std::log(2.0), 1e-12);
  EXPECT_THROW(log_sum_exp(std::vector<double>{}), DimensionMismatch);
}

TEST(SimplexProjection, Examples) {
  Matrix stochastic(3, 1);
  stochastic << 0.2, 0.5, 0.3;
  EXPECT_LT((project_columns_to_simplex(stochastic).matrix() - stochastic).cwiseAbs().maxCoeff(), 1e-15);

  Matrix axis(2, 1);
  axis << 2.0, 0.0;
  EXPECT_EQ(project_columns_to_simplex(axis).matrix(), Matrix(Vector::Unit(2, 0)));

  Matrix even(2, 1);
  even << 0.6, 0.6;
  const Matrix p = project_columns_to_simplex(even).matrix();
  EXPECT_NEAR(p(0, 0), 0.6 - (1.2 - 1.0) / 2, 1e-15);
  EXPECT_NEAR(p(1, 0), 0.5, 1e-15);

  Matrix bad(2, 1);
  bad << NAN, 0.0;
  EXPECT_THROW(project_columns_to_simplex(bad), InvalidDistribution);
}

TEST(SimplexProjection, IdempotentAndOptimal) {
  Rng rng(9);
  for (int i = 0; i < 300; ++i) {
    const Matrix m = rng.uniform_matrix(1 + i % 5, 3, -2.0, 2.0);
    const Matrix p = project_columns_to_simplex(m).matrix();
    EXPECT_LT((project_columns_to_simplex(p).matrix() - p).cwiseAbs().maxCoeff(), 1e-14);
    // KKT: m - p = theta on the support, <= theta off it
    for (Index c = 0; c < m.cols(); ++c) {
      double theta = NAN;
      for (Index r = 0; r < m.rows(); ++r)
        if (p(r, c) > 0) theta = m(r, c) - p(r, c);
      for (Index r = 0; r < m.rows(); ++r) {
        if (p(r, c) > 0)
          EXPECT_NEAR(m(r, c) - p(r, c), theta, 1e-12);
        else
          EXPECT_LE(m(r, c), theta + 1e-12);
      }
    }
  }
}

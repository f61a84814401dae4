#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "pf/prob.hpp"
#include "pf/prob_io.hpp"

using namespace pf;

namespace {

JointXY ref() { return reference_joint(); }

}  // namespace

TEST(DiscreteDist, RejectsAndRepairs) {
  EXPECT_THROW(DiscreteDist(Vector::Constant(2, 0.45)), InvalidDistribution);
  Vector neg(2);
  neg << 1.1, -0.1;
  EXPECT_THROW(DiscreteDist{neg}, InvalidDistribution);
  Vector nan(2);
  nan << NAN, 1.0;
  EXPECT_THROW(DiscreteDist{nan}, InvalidDistribution);

  Vector near(2);
  near << 0.5 + 4e-10, 0.5;
  const DiscreteDist d(near);
  EXPECT_NEAR(d.probs().sum(), 1.0, 1e-15);
  Vector tiny_neg(2);
  tiny_neg << 1.0 + 1e-10, -1e-10;
  EXPECT_EQ(DiscreteDist(tiny_neg)[1], 0.0);
}

TEST(CondDist, ValidatesEachColumn) {
  Matrix m(2, 2);
  m << 0.5, 0.3, 0.5, 0.6;
  EXPECT_THROW(CondDist{m}, InvalidDistribution);
  EXPECT_THROW(CondDist(Matrix(0, 2)), InvalidDistribution);
  EXPECT_NO_THROW(CondDist::identity(4));
}

TEST(Entropy, Examples) {
  EXPECT_NEAR(entropy(DiscreteDist::uniform(3)), std::log(3.0), 1e-15);
  Vector point = Vector::Zero(4);
  point[2] = 1.0;
  EXPECT_EQ(entropy(DiscreteDist(point)), 0.0);

  const Vector py = oracle::reference_q() * oracle::reference_px();
  EXPECT_NEAR(py[0], 0.46, 1e-12);
  EXPECT_NEAR(py[1], 0.29833333333333333, 1e-12);
  double h = 0.0;
  for (int i = 0; i < 3; ++i) h -= py[i] * std::log(py[i]);
  EXPECT_NEAR(entropy(ref().p_y()), h, 1e-14);
}

TEST(MutualInformation, Examples) {
  Matrix constant(2, 3);
  constant << 0.3, 0.3, 0.3, 0.7, 0.7, 0.7;
  EXPECT_NEAR(mutual_information(CondDist(constant), DiscreteDist::uniform(3)), 0.0, 1e-15);
  EXPECT_NEAR(mutual_information(CondDist::identity(3), DiscreteDist::uniform(3)), std::log(3.0), 1e-15);

  const double ixy = oracle::mi_from_joint(oracle::joint_xy(oracle::reference_px(), oracle::reference_q()));
  const JointXY j = ref();
  EXPECT_NEAR(mutual_information(j.y_given_x(), j.p_x()), ixy, 1e-14);
  EXPECT_THROW(mutual_information(CondDist::identity(2), DiscreteDist::uniform(3)), DimensionMismatch);
}

TEST(MarkovCompose, Examples) {
  const JointXY j = ref();
  const Matrix& pxy = j.x_given_y().matrix();
  EXPECT_LT((markov_compose(Encoder::identity(3), j.x_given_y()).matrix() - pxy).cwiseAbs().maxCoeff(), 1e-15);

  Matrix constant(2, 3);
  constant << 0.2, 0.2, 0.2, 0.8, 0.8, 0.8;
  const Matrix out = markov_compose(Encoder(constant), j.x_given_y()).matrix();
  for (Index y = 0; y < 3; ++y) {
    EXPECT_NEAR(out(0, y), 0.2, 1e-15);
    EXPECT_NEAR(out(1, y), 0.8, 1e-15);
  }
  const Matrix uni = markov_compose(Encoder::uniform(3, 3), j.x_given_y()).matrix();
  EXPECT_LT((uni.array() - 1.0 / 3.0).abs().maxCoeff(), 1e-15);

  EXPECT_THROW(markov_compose(Encoder::identity(2), j.x_given_y()), DimensionMismatch);
}

TEST(BayesInvert, Examples) {
  const JointXY id(DiscreteDist::uniform(3), CondDist::identity(3));
  EXPECT_LT((bayes_invert(id).matrix() - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-15);

  const JointXY j = ref();
  const Matrix q = oracle::reference_q();
  const Vector py = q * oracle::reference_px();
  const Matrix inv = bayes_invert(j).matrix();
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y) EXPECT_NEAR(inv(x, y), q(y, x) / (3.0 * py[y]), 1e-14);
  EXPECT_GT(inv(1, 1), 0.9);
  EXPECT_NEAR(inv(1, 1), 0.916, 1e-3);
}

TEST(BayesInvert, DegenerateOutput) {
  Matrix q(3, 2);
  q << 0.5, 0.5, 0.5, 0.5, 0.0, 0.0;
  EXPECT_THROW(JointXY(DiscreteDist::uniform(2), CondDist(q)), DegenerateDistribution);
}

TEST(Lagrangian, Examples) {
  const JointXY j = ref();
  EXPECT_NEAR(pf_lagrangian(Encoder::uniform(2, 3), j, 0.1), 0.0, 1e-15);
  EXPECT_NEAR(pf_lagrangian(Encoder::uniform(2, 3), j, 10.0), 0.0, 1e-15);

  const double ixy = oracle::mi_from_joint(oracle::joint_xy(oracle::reference_px(), oracle::reference_q()));
  EXPECT_NEAR(pf_lagrangian(Encoder::identity(3), j, 1.0), ixy - std::log(3.0), 1e-14);

  Rng rng(5);
  const Encoder e(oracle::random_stochastic(rng, 3, 3));
  EXPECT_GT(pf_lagrangian(e, j, 0.1), pf_lagrangian(e, j, 10.0));
  EXPECT_THROW(pf_lagrangian(e, j, 0.0), InvalidConfig);
}

TEST(ProbProperties, ConvexityOfInformation) {
  const JointXY j = ref();
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const Matrix a = oracle::random_stochastic(rng, 3, 3), b = oracle::random_stochastic(rng, 3, 3);
    const double lam = rng.uniform();
    const Encoder mix(Matrix(lam * a + (1 - lam) * b));
    EXPECT_LE(i_zx(mix, j), lam * i_zx(Encoder(a), j) + (1 - lam) * i_zx(Encoder(b), j) + 1e-12);
    EXPECT_LE(i_zy(mix, j), lam * i_zy(Encoder(a), j) + (1 - lam) * i_zy(Encoder(b), j) + 1e-12);
  }
}

TEST(ProbProperties, DataProcessingAndOracleAgreement) {
  const JointXY j = ref();
  const double ixy = mutual_information(j.y_given_x(), j.p_x());
  Rng rng(12);
  for (int i = 0; i < 500; ++i) {
    const int nz = 1 + static_cast<int>(rng.uniform() * 5);
    const Matrix e = oracle::random_stochastic(rng, nz, 3);
    const Encoder enc(e);
    EXPECT_LE(i_zy(enc, j), i_zx(enc, j) + 1e-10);
    EXPECT_LE(i_zy(enc, j), ixy + 1e-10);
    EXPECT_NEAR(i_zx(enc, j), oracle::i_zx(e, oracle::reference_px()), 1e-13);
    EXPECT_NEAR(i_zy(enc, j), oracle::i_zy(e, oracle::reference_px(), oracle::reference_q()), 1e-13);
  }
}

TEST(ProbProperties, StochasticityAndNonNegativity) {
  Rng rng(13);
  for (int i = 0; i < 1000; ++i) {
    const int nx = 2 + i % 4, ny = 2 + (i / 4) % 4, nz = 1 + i % 5;
    const JointXY j(DiscreteDist(oracle::random_probs(rng, nx, 0.01)),
                    CondDist(oracle::random_stochastic(rng, ny, nx, 0.01)));
    const Encoder enc(oracle::random_stochastic(rng, nz, nx));
    const Vector sums = markov_compose(enc, j.x_given_y()).matrix().colwise().sum();
    EXPECT_LT((sums.array() - 1.0).abs().maxCoeff(), 1e-12);
    EXPECT_GE(entropy(j.p_y()), -1e-12);
    EXPECT_GE(i_zx(enc, j), -1e-12);
    EXPECT_GE(i_zy(enc, j), -1e-12);
  }
}

TEST(ProbIo, ParsesAndRejects) {
  const auto doc = nlohmann::json::parse(R"({"p_x":[0.5,0.5],"p_y_given_x":[[0.9,0.2],[0.1,0.8]]})");
  const JointXY j = joint_from_json(doc);
  EXPECT_EQ(j.card_x(), 2);
  EXPECT_NEAR(j.y_given_x()(1, 1), 0.8, 0);
  EXPECT_EQ(joint_from_json(to_json(j)).y_given_x().matrix(), j.y_given_x().matrix());

  EXPECT_THROW(joint_from_json(nlohmann::json::parse(R"({"p_x":[1.0]})")), ParseError);
  EXPECT_THROW(joint_from_json(nlohmann::json::parse(R"({"p_x":[1],"p_y_given_x":[[1]],"extra":1})")),
               ParseError);
  EXPECT_THROW(joint_from_json(nlohmann::json::parse(R"({"p_x":[0.5,0.5],"p_y_given_x":[[1,1,0]]})")),
               ParseError);
  EXPECT_THROW(joint_from_json(nlohmann::json::parse(R"({"p_x":[0.5,0.5],"p_y_given_x":[[0.9,0.2],[0.0,0.8]]})")),
               InvalidDistribution);
  EXPECT_THROW(load_joint("/nonexistent/dist.json"), ParseError);
}

TEST(ProbIo, SampleFileMatchesReference) {
  const JointXY j = load_joint(std::string(PF_SAMPLES_DIR) + "/reference_3x3.json");
  EXPECT_LT((j.y_given_x().matrix() - oracle::reference_q()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((j.p_x().probs() - oracle::reference_px()).cwiseAbs().maxCoeff(), 1e-15);
}

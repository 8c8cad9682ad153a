#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "semistab/fraccalc.hpp"

using namespace semistab;

namespace {

double rel(const CMatrix& a, const CMatrix& b) { return (a - b).norm() / b.norm(); }

CMatrix ones(Eigen::Index n) { return CMatrix::Ones(n, 1); }

// Eigenvalue-wise oracle: V diag(mu^a (eta+mu)^{-a-b}) V^{-1} x.
CMatrix eigen_oracle(const CMatrix& A, double a, double b, double eta, const CMatrix& x) {
  Eigen::ComplexEigenSolver<CMatrix> es(A);
  CVector d(A.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    const cplx mu = es.eigenvalues()(i);
    d(i) = std::pow(mu, a) * std::pow(eta + mu, -a - b);
  }
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().inverse() * x;
}

CMatrix stable_matrix(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  CMatrix A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = cplx(g(rng), g(rng)) * 0.3;
  A += 2.0 * CMatrix::Identity(n, n);
  return A;
}

}  // namespace

TEST(ContourFractional, DiagonalExamples) {
  const OperatorModel one(DiagonalSymbolSpec::from_values({1.0}));
  auto r = contour_fractional_apply(one, {0.5, 0.5, 1.0}, ones(1));
  EXPECT_NEAR(std::abs(r.value(0, 0) - 0.5), 0.0, 1e-10);
  EXPECT_FALSE(r.truncation_warning);
  const OperatorModel two(DiagonalSymbolSpec::from_values({2.0}));
  r = contour_fractional_apply(two, {1.0, 0.5, 1.0}, ones(1));
  EXPECT_NEAR(std::abs(r.value(0, 0) - 2.0 * std::pow(3.0, -1.5)), 0.0, 1e-10);
}

TEST(ContourFractional, AlphaZeroIsShiftedResolvent) {
  const CMatrix A = stable_matrix(4, 2);
  const auto model = OperatorModel::dense(A);
  std::mt19937 rng(4);
  const CMatrix x = CMatrix::Random(4, 1);
  const auto r = contour_fractional_apply(model, {0.0, 1.0, 1.0}, x);
  const CMatrix expect = -resolvent_apply(model, -1.0, x);
  EXPECT_LT(rel(r.value, expect), 1e-8);
}

TEST(ContourFractional, OracleOnDiagonalAndDenseModels) {
  const OperatorModel diag(DiagonalSymbolSpec::from_values({0.3, cplx(1.0, 2.0), cplx(5.0, -4.0), 40.0}));
  const CMatrix A = stable_matrix(6, 9);
  const auto dense = OperatorModel::dense(A);
  const CMatrix D = CMatrix(CVector(Eigen::Map<const CVector>(
                                std::get<DiagonalSymbolModel>(diag.impl()).values().data(), 4))
                                .asDiagonal());
  for (const FractionalIndex idx : {FractionalIndex{0.5, 0.5, 1.0}, FractionalIndex{1.3, 0.7, 0.5},
                                    FractionalIndex{0.0, 2.0, 1.0}, FractionalIndex{2.0, 0.25, 1.0}}) {
    const CMatrix xd = ones(4);
    EXPECT_LT(rel(contour_fractional_apply(diag, idx, xd).value,
                  eigen_oracle(D, idx.alpha, idx.beta, idx.eta, xd)),
              1e-8);
    const CMatrix x = ones(6);
    EXPECT_LT(rel(contour_fractional_apply(dense, idx, x).value,
                  eigen_oracle(A, idx.alpha, idx.beta, idx.eta, x)),
              1e-8);
  }
}

TEST(ContourFractional, BetaZeroUsesLift) {
  const OperatorModel diag(DiagonalSymbolSpec::from_values({0.5, 3.0}));
  const auto r = contour_fractional_apply(diag, {0.5, 0.0, 1.0}, ones(2));
  EXPECT_NEAR(std::abs(r.value(0, 0) - std::pow(0.5, 0.5) / std::pow(1.5, 0.5)), 0.0, 1e-9);
  EXPECT_NEAR(std::abs(r.value(1, 0) - std::pow(3.0, 0.5) / std::pow(4.0, 0.5)), 0.0, 1e-9);
}

TEST(ContourFractional, TruncationWarningWithoutAutoRange) {
  const OperatorModel one(DiagonalSymbolSpec::from_values({1.0}));
  ContourSpec c;
  c.auto_range = false;
  const auto r = contour_fractional_apply(one, {1.0, 0.5, 1.0}, ones(1), c);
  EXPECT_TRUE(r.truncation_warning);
  EXPECT_GT(r.large_r_tail_bound, 1e-5);
}

TEST(ContourFractional, Rejections) {
  const OperatorModel one(DiagonalSymbolSpec::from_values({1.0}));
  ContourSpec bad;
  bad.nodes_per_ray = 4;
  EXPECT_THROW(contour_fractional_apply(one, {1, 1, 1}, ones(1), bad), ContourError);
  bad = {};
  bad.r_min = 2;
  bad.r_max = 1;
  EXPECT_THROW(contour_fractional_apply(one, {1, 1, 1}, ones(1), bad), ContourError);
  // spectrum at angle 0.9*pi exceeds theta = 3pi/4
  const OperatorModel wide(DiagonalSymbolSpec::from_values({std::polar(1.0, 0.9 * kPi)}));
  EXPECT_THROW(contour_fractional_apply(wide, {1, 1, 1}, ones(1)), ContourError);
  const OperatorModel singular(DiagonalSymbolSpec::from_values({0.0, 1.0}));
  EXPECT_THROW(contour_fractional_apply(singular, {0.5, 1, 1}, ones(2)), DomainError);
  EXPECT_THROW(contour_fractional_apply(singular, {0.0, 1, 1}, ones(2)), DomainError);
  const OperatorModel opm(OperatorMatrixSpec{2});
  EXPECT_THROW(contour_fractional_apply(opm, {1, 1, 1}, ones(opm.dimension())), DomainError);
}

TEST(PhiApply, IdentityAndScalarCalculus) {
  const OperatorModel diag(DiagonalSymbolSpec::from_values({2.0, cplx(1, 1)}));
  const CMatrix x = ones(2);
  EXPECT_EQ(phi_apply(diag, 0, 0, x), x);
  const CMatrix y = phi_apply(diag, 0.7, 1.1, x);
  EXPECT_NEAR(std::abs(y(1, 0) - std::pow(cplx(1, 1), 0.7) * std::pow(cplx(2, 1), -1.8)), 0, 1e-14);
}

TEST(PhiApply, SemigroupLawAcrossModels) {
  std::vector<OperatorModel> models;
  models.push_back(OperatorModel::dense(stable_matrix(5, 21)));
  CMatrix J(3, 3);
  J << 1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0;  // not diagonalizable
  models.push_back(OperatorModel::dense(J));
  DiagonalSymbolSpec ds;
  ds.grid = geometric_grid(1.01, 1e4, 50);
  models.emplace_back(ds);
  models.emplace_back(JordanSumSpec{0.5, 0.5, 30});
  const double idx[][4] = {{0.5, 0.25, 0.75, 1.0}, {1.0, 0.0, 0.3, 2.0}, {0.2, 1.7, 0.0, 0.5}};
  for (const auto& m : models) {
    const CMatrix x = CMatrix::Ones(m.dimension(), 1);
    for (const auto& p : idx) {
      const CMatrix lhs = phi_apply(m, p[0], p[1], phi_apply(m, p[2], p[3], x));
      const CMatrix rhs = phi_apply(m, p[0] + p[2], p[1] + p[3], x);
      EXPECT_LT(rel(lhs, rhs), 1e-8) << to_string(m.kind());
    }
  }
}

TEST(PhiApply, InjectivityBookkeeping) {
  const auto m = OperatorModel::dense(CMatrix::Zero(2, 2));
  EXPECT_THROW(phi_apply(m, 0.5, 1.0, ones(2)), DomainError);
  EXPECT_NO_THROW(phi_apply(OperatorModel::dense(CMatrix::Identity(2, 2)), 0.5, 1.0, ones(2)));
}

TEST(ContourIdentity, ClosedFormExamples) {
  auto r = verify_contour_identity(1, 1, 1, cplx(0, 1), kPi / 3);
  EXPECT_NEAR(std::abs(r.closed_form - 0.5), 0, 1e-15);
  EXPECT_LT(r.rel_error, 1e-10);
  r = verify_contour_identity(0, 1, 1, cplx(0, 1), kPi / 3);
  EXPECT_NEAR(std::abs(r.closed_form - cplx(0.5, 0.5)), 0, 1e-15);
  EXPECT_LT(r.rel_error, 1e-10);
  r = verify_contour_identity(2, 0.5, 0.5, cplx(0, 2), kPi / 3);
  EXPECT_LT(r.rel_error, 1e-6);
}

TEST(ContourIdentity, DoublingNodesConverges) {
  for (double a : {0.0, 0.5, 2.0})
    for (double b : {0.5, 2.0})
      for (const cplx lam : {cplx(0, 1), cplx(0.5, 1)}) {
        ContourSpec c;
        c.nodes_per_ray = 128;
        double prev = verify_contour_identity(a, b, 0.5, lam, kPi / 3, c).rel_error;
        while (prev > 1e-10 && c.nodes_per_ray < 8192) {
          c.nodes_per_ray *= 2;
          const double e = verify_contour_identity(a, b, 0.5, lam, kPi / 3, c).rel_error;
          EXPECT_LE(4 * e, prev) << a << " " << b << " " << lam << " n=" << c.nodes_per_ray;
          prev = e;
        }
        EXPECT_LE(prev, 1e-10);
      }
}

TEST(ContourIdentity, RejectsPointsOutsideRegion) {
  EXPECT_THROW(verify_contour_identity(1, 1, 1, cplx(-0.5, 1), kPi / 3), DomainError);
  EXPECT_THROW(verify_contour_identity(1, 1, 1, cplx(1, 0.1), kPi / 3), DomainError);
  EXPECT_THROW(verify_contour_identity(1, 1, 1, 0.0, kPi / 3), DomainError);
  ContourSpec c;
  c.theta = 0.6 * kPi;
  EXPECT_THROW(verify_contour_identity(1, 1, 1, cplx(0, 1), kPi / 3, c), DomainError);
  EXPECT_THROW(verify_contour_identity(1, 0, 1, cplx(0, 1), kPi / 3), DomainError);
}

#include <foldpath/gmres.hpp>
#include <foldpath/problems.hpp>
#include <foldpath/random.hpp>

#include <gtest/gtest.h>

using namespace foldpath;

TEST(Gmres, IdentityConvergesInOneIteration)
{
   random::Engine rng(1);
   const Vector b = random::gaussian_vector(rng, 10);
   const GmresTrace t = gmres_solve(matrix_operator(Matrix::Identity(10, 10)), b, Vector::Zero(10), 1e-12, 10);
   EXPECT_TRUE(t.converged);
   EXPECT_EQ(t.iterations, 1);
   EXPECT_LE((t.solution - b).norm(), 1e-14 * b.norm());
}

TEST(Gmres, RankOneUpdateConvergesInTwo)
{
   random::Engine rng(2);
   const Index n = 30;
   const Matrix A = Matrix::Identity(n, n) + random::gaussian_vector(rng, n) * random::gaussian_vector(rng, n).transpose();
   const Vector b = random::gaussian_vector(rng, n);
   const GmresTrace t = gmres_solve(matrix_operator(A), b, Vector::Zero(n), 1e-12, n);
   EXPECT_TRUE(t.converged);
   EXPECT_LE(t.iterations, 2);
   EXPECT_LE((t.solution - lu_solve(A, b)).norm(), 1e-8 * t.solution.norm());
}

TEST(Gmres, ResidualHistoryIsMonotone)
{
   random::Engine rng(3);
   for (int trial = 0; trial < 20; ++trial) {
      const Index n = 40;
      const Matrix A = Matrix::Identity(n, n) + 0.3 * random::gaussian(rng, n, n) / std::sqrt(double(n));
      const Vector b = random::gaussian_vector(rng, n);
      const GmresTrace t = gmres_solve(matrix_operator(A), b, Vector::Zero(n), 1e-13, n);
      ASSERT_EQ(static_cast<Index>(t.residual_norms.size()), t.iterations + 1);
      for (std::size_t k = 1; k < t.residual_norms.size(); ++k) {
         EXPECT_LE(t.residual_norms[k], t.residual_norms[k - 1] * (1.0 + 1e-12));
      }
   }
}

TEST(Gmres, RecordedResidualMatchesTrueResidual)
{
   random::Engine rng(4);
   const Index n = 25;
   const Matrix A = Matrix::Identity(n, n) + random::gaussian(rng, n, n) / std::sqrt(double(n));
   const Vector b = random::gaussian_vector(rng, n);
   const GmresTrace t = gmres_solve(matrix_operator(A), b, Vector::Zero(n), 1e-6, n);
   EXPECT_NEAR(t.residual_norms.back(), (b - A * t.solution).norm(), 1e-10 * b.norm());
}

// For I + K with rank(K) = p the minimal polynomial has degree at most p + 1.
TEST(Gmres, MinimalPolynomialDegreeBound)
{
   for (Index p = 0; p <= 10; ++p) {
      for (Index n : {50, 200}) {
         const ClusterOperator c = synthetic_cluster_operator(n, p, 0.0, 100 + static_cast<std::uint64_t>(p));
         random::Engine rng(static_cast<std::uint64_t>(p * 7 + n));
         const Vector b = random::gaussian_vector(rng, n);
         const GmresTrace t = gmres_solve(c.op, b, Vector::Zero(n), 1e-12, n);
         EXPECT_TRUE(t.converged) << "p=" << p << " n=" << n;
         EXPECT_LE(t.iterations, p + 1) << "p=" << p << " n=" << n;
      }
   }
}

TEST(Gmres, AgreesWithLuOnDenseSystems)
{
   random::Engine rng(5);
   for (int trial = 0; trial < 20; ++trial) {
      const Index n = random::uniform_index(rng, 2, 60);
      const Matrix A = random::gaussian(rng, n, n) + 2.0 * std::sqrt(double(n)) * Matrix::Identity(n, n);
      const Vector b = random::gaussian_vector(rng, n);
      const GmresTrace t = gmres_solve(matrix_operator(A), b, Vector::Zero(n), 1e-14, n);
      const Vector x = lu_solve(A, b);
      EXPECT_LE((t.solution - x).norm(), 1e-8 * x.norm());
   }
}

TEST(Gmres, ZeroRightHandSide)
{
   const GmresTrace t = gmres_solve(matrix_operator(Matrix::Identity(3, 3)), Vector::Zero(3), Vector::Zero(3), 1e-8, 3);
   EXPECT_TRUE(t.converged);
   EXPECT_EQ(t.iterations, 0);
   EXPECT_EQ(t.solution, Vector::Zero(3));
}

TEST(Gmres, NonzeroInitialGuess)
{
   Matrix A = Matrix::Identity(4, 4);
   A(0, 3) = 2.0;
   const Vector b = Vector::Ones(4);
   const Vector x = lu_solve(A, b);
   const GmresTrace t = gmres_solve(matrix_operator(A), b, x, 1e-10, 4);
   EXPECT_EQ(t.iterations, 0);
   EXPECT_TRUE(t.converged);
}

TEST(Gmres, IterationCapReportsNotConverged)
{
   random::Engine rng(6);
   const Index n = 30;
   const Matrix A = Matrix::Identity(n, n) + random::gaussian(rng, n, n);
   const Vector b = random::gaussian_vector(rng, n);
   const GmresTrace t = gmres_solve(matrix_operator(A), b, Vector::Zero(n), 1e-14, 3);
   EXPECT_FALSE(t.converged);
   EXPECT_EQ(t.iterations, 3);
   EXPECT_EQ(t.residual_norms.size(), 4u);
}

TEST(Gmres, Preconditions)
{
   const LinearOperator I = matrix_operator(Matrix::Identity(3, 3));
   EXPECT_THROW(gmres_solve(I, Vector::Ones(2), Vector::Zero(3), 1e-8, 3), PreconditionError);
   EXPECT_THROW(gmres_solve(I, Vector::Ones(3), Vector::Zero(3), 0.0, 3), PreconditionError);
   EXPECT_THROW(gmres_solve(I, Vector::Ones(3), Vector::Zero(3), 1.5, 3), PreconditionError);
   EXPECT_THROW(gmres_solve(I, Vector::Ones(3), Vector::Zero(3), 1e-8, 4), PreconditionError);
}

#include <foldpath/fold_analysis.hpp>
#include <foldpath/gmres.hpp>
#include <foldpath/newton.hpp>
#include <foldpath/problems.hpp>
#include <foldpath/random.hpp>

#include <gtest/gtest.h>

using namespace foldpath;

namespace {

NewtonResult solve_heq(const HEquation& heq, double c, const Vector& H0)
{
   return newton_direct([&](const Vector& H) { return heq.residual(H, c); },
                        [&](const Vector& H) { return heq.jacobian(H, c); }, H0);
}

// Lower-branch solution at c by stepping up in c from H = 1.
Vector lower_branch(const HEquation& heq, double c)
{
   Vector H = Vector::Ones(heq.dimension());
   for (double t = 0.05; t < c; t += 0.05) H = solve_heq(heq, t, H).solution;
   return solve_heq(heq, c, H).solution;
}

}  // namespace

TEST(HEquation, NodesAreMidpoints)
{
   const HEquation heq(4);
   EXPECT_DOUBLE_EQ(heq.nodes()(0), 0.125);
   EXPECT_DOUBLE_EQ(heq.nodes()(3), 0.875);
   EXPECT_DOUBLE_EQ(heq.weight(), 0.25);
}

TEST(HEquation, ZeroParameterIsIdentityMinusOne)
{
   const HEquation heq(10);
   random::Engine rng(1);
   const Vector H = Vector::Ones(10) + 0.1 * random::gaussian_vector(rng, 10);
   EXPECT_LE((heq.residual(H, 0.0) - (H - Vector::Ones(10))).norm(), 1e-15);
   EXPECT_EQ(heq.residual(Vector::Ones(10), 0.0), Vector::Zero(10));
   EXPECT_EQ(heq.jacobian(H, 0.0), Matrix::Identity(10, 10));
}

TEST(HEquation, ResidualMatchesDirectSummation)
{
   const Index n = 16;
   const HEquation heq(n);
   const double c = 0.3;
   const Vector r = heq.residual(Vector::Ones(n), c);
   for (Index i = 0; i < n; ++i) {
      const double mu = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
      double sum = 0.0;
      for (Index j = 0; j < n; ++j) {
         const double nu = (static_cast<double>(j) + 0.5) / static_cast<double>(n);
         sum += mu / (mu + nu);
      }
      const double L = 1.0 - c / (2.0 * static_cast<double>(n)) * sum;
      EXPECT_NEAR(r(i), 1.0 - 1.0 / L, 1e-14);
   }
}

TEST(HEquation, ParameterDerivativeAtZero)
{
   const Index n = 12;
   const HEquation heq(n);
   const Vector g = heq.lambda_derivative(Vector::Ones(n), 0.0);
   for (Index i = 0; i < n; ++i) {
      const double mu = heq.nodes()(i);
      double sum = 0.0;
      for (Index j = 0; j < n; ++j) sum += mu / (mu + heq.nodes()(j));
      EXPECT_NEAR(g(i), -sum / (2.0 * static_cast<double>(n)), 1e-15);
   }
}

TEST(HEquation, JacobianAndParameterDerivativeMatchFiniteDifferences)
{
   random::Engine rng(2);
   for (int probe = 0; probe < 100; ++probe) {
      const Index n = random::uniform_index(rng, 2, 40);
      const HEquation heq(n);
      const double c = random::uniform(rng, 0.0, 1.0);
      Vector H(n);
      for (Index i = 0; i < n; ++i) H(i) = random::uniform(rng, 0.5, 3.0);
      const double h = std::sqrt(kMachineEps) * (1.0 + H.norm());
      const Matrix J = heq.jacobian(H, c);
      const Vector G0 = heq.residual(H, c);
      Matrix fd(n, n);
      for (Index j = 0; j < n; ++j) {
         Vector e = H;
         e(j) += h;
         fd.col(j) = (heq.residual(e, c) - G0) / h;
      }
      const double scale = std::max(1.0, max_abs(J));
      EXPECT_LE(max_abs(fd - J), 10.0 * std::sqrt(kMachineEps) * scale * (1.0 + H.norm()));
      const double hc = std::sqrt(kMachineEps) * (1.0 + c);
      const Vector fdc = (heq.residual(H, c + hc) - G0) / hc;
      const Vector Gc = heq.lambda_derivative(H, c);
      EXPECT_LE((fdc - Gc).cwiseAbs().maxCoeff(), 10.0 * std::sqrt(kMachineEps) * std::max(1.0, Gc.norm()));
   }
}

TEST(HEquation, ClosedFormNormAtHalf)
{
   const HEquation heq(200);
   const NewtonResult r = solve_heq(heq, 0.5, Vector::Ones(200));
   ASSERT_TRUE(r.converged);
   EXPECT_NEAR(heq.functional(r.solution), 1.1716, 5e-3);
}

TEST(HEquation, LowerBranchClosedFormAcrossParameter)
{
   const HEquation heq(200);
   Vector H = Vector::Ones(200);
   for (int k = 1; k <= 9; ++k) {
      const double c = 0.1 * k;
      const NewtonResult r = solve_heq(heq, c, H);
      ASSERT_TRUE(r.converged);
      H = r.solution;
      EXPECT_NEAR(heq.functional(H), (1.0 - std::sqrt(1.0 - c)) / (c / 2.0), 5e-3) << "c=" << c;
   }
}

TEST(HEquation, TwoBranchesAtHalf)
{
   const HEquation heq(200);
   const NewtonResult lower = solve_heq(heq, 0.5, Vector::Ones(200));
   // Upper-branch guess: scale the lower solution so its mean matches the upper norm.
   const double upper_norm = HEquation::closed_form_norm(0.5, +1);
   const NewtonResult upper = solve_heq(heq, 0.5, lower.solution * (upper_norm / heq.functional(lower.solution)));
   ASSERT_TRUE(lower.converged);
   ASSERT_TRUE(upper.converged);
   EXPECT_GT((upper.solution - lower.solution).norm(), 1.0);
   EXPECT_NEAR(heq.functional(lower.solution), HEquation::closed_form_norm(0.5, -1), 5e-3);
   EXPECT_NEAR(heq.functional(upper.solution), upper_norm, 5e-3);
}

TEST(HEquation, FoldIdentitiesAtUnitParameter)
{
   const HEquation heq(200);
   const Vector H0 = lower_branch(heq, 0.999);
   NewtonOptions opt;
   opt.max_iter = 60;  // singular root: linear convergence
   const NewtonResult r = newton_direct([&](const Vector& H) { return heq.residual(H, 1.0); },
                                        [&](const Vector& H) { return heq.jacobian(H, 1.0); }, H0, opt);
   const Vector& H = r.solution;
   EXPECT_LE(heq.residual(H, 1.0).norm(), 1e-8);
   EXPECT_NEAR(heq.functional(H), 2.0, 0.05);
   const Vector phi = heq.null_vector(H);
   EXPECT_LE((heq.jacobian(H, 1.0) * phi).norm() / phi.norm(), 1e-2);
   const Vector Gc = heq.lambda_derivative(H, 1.0);
   EXPECT_LT(Gc.maxCoeff(), 0.0);

   const FoldDiagnostics d = classify_point(heq.jacobian(H, 1.0), Gc, Vector::Unit(201, 200));
   EXPECT_LT(d.sigma_N, 1e-3 * d.sigma_1);
   EXPECT_GT(std::abs(d.proj), 1e-3 * Gc.norm());
}

TEST(HEquation, DomainErrorWhenDenominatorVanishes)
{
   // N = 1: L = 1 - c H / 4 vanishes at H = 4, c = 1.
   const HEquation heq(1);
   EXPECT_THROW(heq.residual(Vector::Constant(1, 4.0), 1.0), DomainError);
   EXPECT_NO_THROW(heq.residual(Vector::Constant(1, 3.0), 1.0));
}

TEST(HEquation, WrongLengthRejected)
{
   const HEquation heq(8);
   EXPECT_THROW(heq.residual(Vector::Ones(7), 0.5), PreconditionError);
}

TEST(ToyFold, SolutionAndFold)
{
   const ToyFoldProblem toy = toy_fold_problem();
   EXPECT_DOUBLE_EQ(toy.residual(Vector::Ones(1), 0.0)(0), 0.0);
   const Matrix G_u = toy.jacobian(Vector::Zero(1), 1.0);
   EXPECT_DOUBLE_EQ(G_u(0, 0), 0.0);
   EXPECT_DOUBLE_EQ(toy.lambda_derivative(Vector::Zero(1), 1.0)(0), 1.0);
   const FoldDiagnostics d = classify_point(G_u, toy.lambda_derivative(Vector::Zero(1), 1.0), Vector::Unit(2, 0));
   EXPECT_TRUE(d.is_simple_fold_candidate);
}

TEST(LinearScalar, Blocks)
{
   const LinearScalarProblem p;
   EXPECT_DOUBLE_EQ(p.residual(Vector::Constant(1, 2.0), 2.0)(0), 0.0);
   EXPECT_DOUBLE_EQ(p.lambda_derivative(Vector::Zero(1), 0.0)(0), -1.0);
}

TEST(SyntheticCluster, IdentityWhenEmpty)
{
   const ClusterOperator c = synthetic_cluster_operator(20, 0, 0.0, 1);
   EXPECT_EQ(c.J, Matrix::Identity(20, 20));
}

TEST(SyntheticCluster, PlantedRankAndNorm)
{
   const ClusterOperator c = synthetic_cluster_operator(60, 4, 1e-3, 2);
   const Vector sk = singular_values(c.K);
   EXPECT_GT(sk(3), 0.5);
   EXPECT_LT(sk(4), 1e-12 * sk(0));
   EXPECT_NEAR(spectral_norm(c.E), 1e-3, 1e-15);
}

TEST(SyntheticCluster, DeterministicPerSeed)
{
   const ClusterOperator a = synthetic_cluster_operator(30, 3, 1e-2, 9);
   const ClusterOperator b = synthetic_cluster_operator(30, 3, 1e-2, 9);
   const ClusterOperator c = synthetic_cluster_operator(30, 3, 1e-2, 10);
   EXPECT_EQ(a.J, b.J);
   EXPECT_NE(a.J, c.J);
}

TEST(SyntheticCluster, NoiseFreeGmresIterations)
{
   const ClusterOperator c = synthetic_cluster_operator(100, 3, 0.0, 3);
   random::Engine rng(4);
   const GmresTrace t = gmres_solve(c.op, random::gaussian_vector(rng, 100), Vector::Zero(100), 1e-12, 100);
   EXPECT_TRUE(t.converged);
   EXPECT_LE(t.iterations, 4);
}

TEST(SyntheticCluster, Preconditions)
{
   EXPECT_THROW(synthetic_cluster_operator(5, 5, 0.0, 1), PreconditionError);
   EXPECT_THROW(synthetic_cluster_operator(5, -1, 0.0, 1), PreconditionError);
   EXPECT_THROW(synthetic_cluster_operator(5, 1, -1.0, 1), PreconditionError);
}

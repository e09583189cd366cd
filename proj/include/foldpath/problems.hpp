#pragma once

// Parameterized nonlinear systems G(u, lambda) = 0 used by the continuation
// drivers, and a generator for I + K + E test operators.

#include <foldpath/gmres.hpp>
#include <foldpath/linalg.hpp>
#include <foldpath/newton.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

namespace foldpath {

/// A system G : R^N x R -> R^N with derivative access. Implementations are
/// immutable after construction and safe for concurrent evaluation.
class Problem {
public:
   virtual ~Problem() = default;

   virtual std::string id() const = 0;
   virtual Index dimension() const = 0;
   virtual Vector residual(const Vector& u, double lambda) const = 0;
   virtual Matrix jacobian(const Vector& u, double lambda) const = 0;
   virtual Vector lambda_derivative(const Vector& u, double lambda) const = 0;
   /// Scalar observable plotted along the path.
   virtual double functional(const Vector& u) const = 0;
};

/// Chandrasekhar H-equation discretized by the composite midpoint rule:
///
///   G_i(H, c) = H_i - 1 / L_i,   L_i = 1 - (c / 2N) sum_j mu_i H_j / (mu_i + mu_j),
///
/// with nodes mu_i = (i - 1/2) / N.
class HEquation final : public Problem {
public:
   explicit HEquation(Index nodes) : n_(nodes), mu_(nodes), kernel_(nodes, nodes)
   {
      if (nodes < 1) throw PreconditionError("HEquation: need at least one node");
      for (Index i = 0; i < n_; ++i) {
         mu_(i) = (static_cast<double>(i) + 0.5) / static_cast<double>(n_);
      }
      for (Index i = 0; i < n_; ++i) {
         for (Index j = 0; j < n_; ++j) {
            kernel_(i, j) = mu_(i) / (mu_(i) + mu_(j));
         }
      }
   }

   std::string id() const override { return "heq-" + std::to_string(n_); }
   Index dimension() const override { return n_; }
   double weight() const { return 1.0 / static_cast<double>(n_); }
   const Vector& nodes() const { return mu_; }
   const Matrix& kernel() const { return kernel_; }

   /// L_i for all i; throws DomainError if any |L_i| < 1e-12.
   Vector denominators(const Vector& H, double c) const
   {
      check_size(H);
      Vector L = Vector::Ones(n_) - (c * 0.5 * weight()) * (kernel_ * H);
      for (Index i = 0; i < n_; ++i) {
         if (!(std::abs(L(i)) >= 1e-12)) {
            throw DomainError("H-equation: quadrature denominator vanished at node " + std::to_string(i));
         }
      }
      return L;
   }

   Vector residual(const Vector& H, double c) const override
   {
      return H - denominators(H, c).cwiseInverse();
   }

   Matrix jacobian(const Vector& H, double c) const override
   {
      const Vector L = denominators(H, c);
      const Vector scale = (c * 0.5 * weight()) * L.cwiseAbs2().cwiseInverse();
      Matrix J = -(scale.asDiagonal() * kernel_);
      J.diagonal().array() += 1.0;
      return J;
   }

   Vector lambda_derivative(const Vector& H, double c) const override
   {
      const Vector L = denominators(H, c);
      const Vector integral = (0.5 * weight()) * (kernel_ * H);
      return -(integral.array() / L.array().square()).matrix();
   }

   /// Midpoint approximation of the l1 norm, (1/N) sum_i H_i.
   double functional(const Vector& H) const override
   {
      check_size(H);
      return H.sum() * weight();
   }

   /// phi_i = mu_i H_i, the kernel direction of G_H at c = 1.
   Vector null_vector(const Vector& H) const
   {
      check_size(H);
      return mu_.cwiseProduct(H);
   }

   /// Closed-form l1 norm of the lower (sign = -1) or upper (sign = +1) branch.
   static double closed_form_norm(double c, int sign)
   {
      if (c == 0.0) return sign < 0 ? 1.0 : kInf;
      const double root = std::sqrt(std::max(0.0, 1.0 - c));
      return (1.0 + (sign < 0 ? -root : root)) / (0.5 * c);
   }

private:
   void check_size(const Vector& H) const
   {
      if (H.size() != n_) throw PreconditionError("HEquation: vector has wrong length");
   }

   Index n_;
   Vector mu_;
   Matrix kernel_;
};

/// G(u, lambda) = u^2 + lambda - 1. Solutions u = +-sqrt(1 - lambda) meet in
/// a simple fold at (0, 1).
class ToyFoldProblem final : public Problem {
public:
   std::string id() const override { return "toy-fold"; }
   Index dimension() const override { return 1; }
   Vector residual(const Vector& u, double lambda) const override
   {
      return Vector::Constant(1, u(0) * u(0) + lambda - 1.0);
   }
   Matrix jacobian(const Vector& u, double) const override { return Matrix::Constant(1, 1, 2.0 * u(0)); }
   Vector lambda_derivative(const Vector&, double) const override { return Vector::Ones(1); }
   double functional(const Vector& u) const override { return u(0); }
};

/// G(u, lambda) = u - lambda.
class LinearScalarProblem final : public Problem {
public:
   std::string id() const override { return "linear"; }
   Index dimension() const override { return 1; }
   Vector residual(const Vector& u, double lambda) const override { return Vector::Constant(1, u(0) - lambda); }
   Matrix jacobian(const Vector&, double) const override { return Matrix::Identity(1, 1); }
   Vector lambda_derivative(const Vector&, double) const override { return -Vector::Ones(1); }
   double functional(const Vector& u) const override { return u(0); }
};

inline ToyFoldProblem toy_fold_problem() { return {}; }

struct ClusterOperator {
   LinearOperator op;
   Matrix K;  // rank p exactly
   Matrix E;  // spectral norm eps
   Matrix J;  // I + K + E
};

/// Random I + K + E with rank(K) = p and ||E||_2 = eps, deterministic per seed.
///
/// K = Q M Q^T with Q an orthonormal n x p basis and M upper triangular with
/// diagonal in [1, 4], so the nonzero eigenvalues of I + K lie in [2, 5].
inline ClusterOperator synthetic_cluster_operator(Index dimension, Index p, double eps, std::uint64_t seed)
{
   if (dimension < 1 || p < 0 || p >= dimension) {
      throw PreconditionError("synthetic_cluster_operator: need 0 <= p < dimension");
   }
   if (!(eps >= 0.0)) throw PreconditionError("synthetic_cluster_operator: eps must be >= 0");

   std::mt19937_64 rng(seed);
   std::normal_distribution<double> normal(0.0, 1.0);
   std::uniform_real_distribution<double> uniform(1.0, 4.0);
   auto gaussian = [&](Index r, Index c) {
      Matrix m(r, c);
      for (Index j = 0; j < c; ++j)
         for (Index i = 0; i < r; ++i) m(i, j) = normal(rng);
      return m;
   };

   ClusterOperator out;
   out.K = Matrix::Zero(dimension, dimension);
   if (p > 0) {
      const Matrix Q = Eigen::HouseholderQR<Matrix>(gaussian(dimension, p)).householderQ() *
                       Matrix::Identity(dimension, p);
      Matrix M = Matrix::Zero(p, p);
      for (Index i = 0; i < p; ++i) {
         M(i, i) = uniform(rng);
         for (Index j = i + 1; j < p; ++j) M(i, j) = 0.5 * normal(rng);
      }
      out.K = Q * M * Q.transpose();
   }
   out.E = Matrix::Zero(dimension, dimension);
   if (eps > 0.0) {
      const Matrix R = gaussian(dimension, dimension);
      out.E = (eps / spectral_norm(R)) * R;
   }
   out.J = Matrix::Identity(dimension, dimension) + out.K + out.E;
   out.op = matrix_operator(out.J);
   return out;
}

}  // namespace foldpath

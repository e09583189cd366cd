#pragma once

// Seeded random generators for matrices used by the property suites.

#include <foldpath/linalg.hpp>

#include <cstdint>
#include <random>

namespace foldpath::random {

using Engine = std::mt19937_64;

inline Matrix gaussian(Engine& rng, Index rows, Index cols)
{
   std::normal_distribution<double> normal(0.0, 1.0);
   Matrix m(rows, cols);
   for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
   return m;
}

inline Vector gaussian_vector(Engine& rng, Index n) { return gaussian(rng, n, 1).col(0); }

inline Matrix orthogonal(Engine& rng, Index n)
{
   Eigen::HouseholderQR<Matrix> qr(gaussian(rng, n, n));
   return qr.householderQ() * Matrix::Identity(n, n);
}

inline double uniform(Engine& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline Index uniform_index(Engine& rng, Index lo, Index hi)
{
   return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

/// A = B B^T for a square factor B drawn from one of several spectral
/// profiles: generic, rank deficient, clustered bottom pair, repeated
/// smallest eigenvalue, widely scaled.
struct PsdSample {
   Matrix B;
   Matrix A;
   int profile = 0;
};

inline PsdSample psd(Engine& rng, Index n)
{
   PsdSample out;
   out.profile = static_cast<int>(uniform_index(rng, 0, 4));
   const double scale = std::pow(10.0, uniform(rng, -2.0, 2.0));
   switch (out.profile) {
      case 0: out.B = gaussian(rng, n, n); break;
      case 1: {
         const Index rank = uniform_index(rng, 0, n - 1);
         out.B = Matrix::Zero(n, n);
         if (rank > 0) out.B.leftCols(rank) = gaussian(rng, n, rank);
         break;
      }
      case 2:
      case 3: {
         Vector d(n);
         for (Index i = 0; i < n; ++i) d(i) = uniform(rng, 0.5, 3.0);
         if (n >= 2) {
            d(n - 1) = uniform(rng, 0.0, 0.3);
            d(n - 2) = out.profile == 3 ? d(n - 1) : d(n - 1) + std::pow(10.0, uniform(rng, -8.0, -1.0));
         }
         out.B = orthogonal(rng, n) * d.cwiseSqrt().asDiagonal();
         break;
      }
      default: out.B = gaussian(rng, n, n) * std::pow(10.0, uniform(rng, -3.0, 3.0)); break;
   }
   out.B *= std::sqrt(scale);
   out.A = out.B * out.B.transpose();
   return out;
}

}  // namespace foldpath::random

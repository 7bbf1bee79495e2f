#include "starisac/solvers/rayleigh.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <stdexcept>

namespace starisac {

CVec max_generalized_rayleigh(const CMat& C, const CMat& E) {
  if (C.rows() != C.cols() || E.rows() != E.cols() || C.rows() != E.rows())
    throw std::invalid_argument("max_generalized_rayleigh: dimension mismatch");

  Eigen::LLT<CMat> llt(E);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("max_generalized_rayleigh: E is not positive definite");

  // whiten: E = L L^H, solve the ordinary Hermitian problem for L^-1 C L^-H
  const CMat L = llt.matrixL();
  CMat half = L.triangularView<Eigen::Lower>().solve(C);
  CMat white = L.triangularView<Eigen::Lower>().solve(half.adjoint()).adjoint();
  white = Complex(0.5, 0.0) * (white + white.adjoint());  // symmetrize roundoff

  Eigen::SelfAdjointEigenSolver<CMat> eig(white);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("max_generalized_rayleigh: eigensolver failed");
  CVec v = eig.eigenvectors().col(white.rows() - 1);  // eigenvalues ascending

  CVec u = L.adjoint().triangularView<Eigen::Upper>().solve(v);
  u.normalize();

  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (std::abs(u[i]) > 1e-12) {
      u *= std::polar(1.0, -std::arg(u[i]));
      break;
    }
  }
  return u;
}

}  // namespace starisac

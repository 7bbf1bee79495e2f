#pragma once

#include "starisac/types.hpp"

namespace starisac {

/// Unit-norm maximizer of (x^H C x)/(x^H E x) for Hermitian PSD C and
/// Hermitian PD E, i.e. the top eigenvector of E^{-1} C. The returned vector
/// is phase-normalized so its first nonzero coordinate is real positive.
/// Throws if E is not positive definite.
CVec max_generalized_rayleigh(const CMat& C, const CMat& E);

}  // namespace starisac

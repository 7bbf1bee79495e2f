#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace starisac {

using Real = double;
using Complex = std::complex<Real>;

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using Vec3 = Eigen::Vector3d;

using Rng = std::mt19937_64;

inline Real db_to_linear(Real db) { return std::pow(10.0, db / 10.0); }
inline Real linear_to_db(Real x) { return 10.0 * std::log10(x); }
inline Real dbm_to_watts(Real dbm) { return std::pow(10.0, dbm / 10.0 - 3.0); }
inline Real watts_to_dbm(Real w) { return 10.0 * std::log10(w) + 30.0; }

/// Which half-space of the STAR-RIS a user (or element assignment) belongs to.
enum class Side { Reflect, Transmit };

}  // namespace starisac

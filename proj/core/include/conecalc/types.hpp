#pragma once

#include <Eigen/Dense>
#include <complex>
#include <numbers>

namespace conecalc {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double pi = std::numbers::pi;

}  // namespace conecalc

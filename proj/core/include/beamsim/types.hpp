#pragma once

#include <complex>

#include <Eigen/Dense>

namespace beamsim {

using cxd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

// Symbol vectors travel as dense complex columns; every element is a
// constellation point.
using SymbolVector = Eigen::VectorXcd;

} // namespace beamsim

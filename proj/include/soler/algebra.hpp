#pragma once
#include <Eigen/Dense>
#include <complex>

namespace soler {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using Mat8 = Eigen::Matrix<cplx, 8, 8>;
using Vec4 = Eigen::Vector4cd;
using Vec8 = Eigen::Matrix<cplx, 8, 1>;

// Dirac/Pauli constants.  sigma2 = [[0, -i], [i, 0]] (the convention under
// which the angular-block ansatz lower spinor is literally i q (sigma.xhat) chi).
Mat2 pauli(int j);             // j = 1,2,3
Mat4 alpha_mat(int j);         // off-diagonal sigma_j blocks
Mat4 beta_mat();               // diag(I2, -I2)
Mat4 s3_mat();                 // diag(sigma3, sigma3)
Mat8 sigma_big(int j);         // Sigma_1, Sigma_2, Sigma_3 on the doubled space
Mat8 beta_big();               // diag(beta, beta)
Mat4 cc_linear();              // i beta alpha2 (linear part of charge conjugation)

// charge conjugation on C^4: C u = i beta alpha2 conj(u)
Vec4 charge_conjugate4(const Vec4& u);

// u . beta u*  (the Lorentz scalar; real)
double lorentz_scalar(const Vec4& u);

}  // namespace soler

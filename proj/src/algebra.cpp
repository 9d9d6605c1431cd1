#include "soler/algebra.hpp"

#include <stdexcept>

namespace soler {

Mat2 pauli(int j) {
    Mat2 s = Mat2::Zero();
    const cplx I(0, 1);
    switch (j) {
        case 1:
            s << 0, 1, 1, 0;
            break;
        case 2:
            s << 0, -I, I, 0;
            break;
        case 3:
            s << 1, 0, 0, -1;
            break;
        default:
            throw std::invalid_argument("pauli index");
    }
    return s;
}

Mat4 alpha_mat(int j) {
    Mat4 a = Mat4::Zero();
    a.block<2, 2>(0, 2) = pauli(j);
    a.block<2, 2>(2, 0) = pauli(j);
    return a;
}

Mat4 beta_mat() {
    Mat4 b = Mat4::Zero();
    b.block<2, 2>(0, 0) = Mat2::Identity();
    b.block<2, 2>(2, 2) = -Mat2::Identity();
    return b;
}

Mat4 s3_mat() {
    Mat4 s = Mat4::Zero();
    s.block<2, 2>(0, 0) = pauli(3);
    s.block<2, 2>(2, 2) = pauli(3);
    return s;
}

Mat8 sigma_big(int j) {
    Mat8 s = Mat8::Zero();
    const cplx I(0, 1);
    switch (j) {
        case 1:
            s.block<4, 4>(0, 4) = Mat4::Identity();
            s.block<4, 4>(4, 0) = Mat4::Identity();
            break;
        case 2:
            s.block<4, 4>(0, 4) = -I * Mat4::Identity();
            s.block<4, 4>(4, 0) = I * Mat4::Identity();
            break;
        case 3:
            s.block<4, 4>(0, 0) = Mat4::Identity();
            s.block<4, 4>(4, 4) = -Mat4::Identity();
            break;
        default:
            throw std::invalid_argument("sigma index");
    }
    return s;
}

Mat8 beta_big() {
    Mat8 b = Mat8::Zero();
    b.block<4, 4>(0, 0) = beta_mat();
    b.block<4, 4>(4, 4) = beta_mat();
    return b;
}

Mat4 cc_linear() { return cplx(0, 1) * beta_mat() * alpha_mat(2); }

Vec4 charge_conjugate4(const Vec4& u) { return cc_linear() * u.conjugate(); }

double lorentz_scalar(const Vec4& u) {
    cplx s = u.transpose() * (beta_mat() * u.conjugate());
    return s.real();
}

}  // namespace soler

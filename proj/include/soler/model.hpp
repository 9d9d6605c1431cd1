#pragma once
#include <stdexcept>
#include <string>
#include <vector>

namespace soler {

// Scalar self-interaction g of the Soler-type nonlinear Dirac equation
// i u_t - D_m u + g(u ubar) beta u = 0,   u ubar = u . beta u*.
// g(0) = 0 always; the cubic model is g(s) = s.
struct NonlinearityValue {
    double g;
    double g1;  // g'
    double g2;  // g''
};

enum class NonlinearityKind { cubic, polynomial, table };

struct SolerModel {
    double m = 1.0;  // mass
    NonlinearityKind kind = NonlinearityKind::cubic;
    // polynomial: g(s) = sum_k coeffs[k] s^{k+1}  (no constant term, so g(0)=0)
    std::vector<double> coeffs;
    // table: cubic-spline interpolated samples of g on [s_min, s_max]
    std::vector<double> table_s;
    std::vector<double> table_g;

    static SolerModel cubic(double mass = 1.0) {
        SolerModel mm;
        mm.m = mass;
        return mm;
    }
    static SolerModel polynomial(double mass, std::vector<double> c) {
        SolerModel mm;
        mm.m = mass;
        mm.kind = NonlinearityKind::polynomial;
        mm.coeffs = std::move(c);
        return mm;
    }
};

NonlinearityValue nonlinearity_eval(const SolerModel& model, double s);

// Primitive G with G(0)=0, G'=g. Closed form for cubic/polynomial,
// adaptive quadrature for tabulated g.
double nonlinearity_primitive(const SolerModel& model, double s);

}  // namespace soler

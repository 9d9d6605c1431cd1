#include "soler/model.hpp"

#include <cmath>

namespace soler {

namespace {

// natural cubic spline evaluation on a tabulated g; small tables only,
// so we just solve the moment system on the fly and cache nothing
struct SplineEval {
    double g, g1, g2;
};

SplineEval spline_eval(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    const int n = static_cast<int>(xs.size());
    if (n < 2) throw std::domain_error("table model needs at least 2 samples");
    if (x < xs.front() || x > xs.back())
        throw std::domain_error("table model argument outside tabulated range");
    // second-derivative moments, natural boundary
    std::vector<double> m2(n, 0.0);
    if (n > 2) {
        std::vector<double> a(n, 0.0), b(n, 1.0), c(n, 0.0), d(n, 0.0);
        for (int i = 1; i + 1 < n; ++i) {
            double h0 = xs[i] - xs[i - 1], h1 = xs[i + 1] - xs[i];
            a[i] = h0 / 6.0;
            b[i] = (h0 + h1) / 3.0;
            c[i] = h1 / 6.0;
            d[i] = (ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0;
        }
        for (int i = 2; i + 1 < n; ++i) {
            double w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            d[i] -= w * d[i - 1];
        }
        for (int i = n - 2; i >= 1; --i) m2[i] = (d[i] - c[i] * m2[i + 1]) / b[i];
    }
    int i = 0;
    while (i + 2 < n && x > xs[i + 1]) ++i;
    double h = xs[i + 1] - xs[i], t = (x - xs[i]) / h, u = 1.0 - t;
    double g = u * ys[i] + t * ys[i + 1] +
               h * h / 6.0 * ((u * u * u - u) * m2[i] + (t * t * t - t) * m2[i + 1]);
    double g1 = (ys[i + 1] - ys[i]) / h +
                h / 6.0 * ((3 * t * t - 1) * m2[i + 1] - (3 * u * u - 1) * m2[i]);
    double g2 = u * m2[i] + t * m2[i + 1];
    return {g, g1, g2};
}

}  // namespace

NonlinearityValue nonlinearity_eval(const SolerModel& model, double s) {
    if (!std::isfinite(s)) throw std::domain_error("nonlinearity argument not finite");
    switch (model.kind) {
        case NonlinearityKind::cubic:
            return {s, 1.0, 0.0};
        case NonlinearityKind::polynomial: {
            // g = sum_k c_k s^{k+1}
            double g = 0, g1 = 0, g2 = 0;
            for (size_t k = 0; k < model.coeffs.size(); ++k) {
                double c = model.coeffs[k];
                double e = static_cast<double>(k + 1);
                g += c * std::pow(s, e);
                g1 += c * e * std::pow(s, e - 1.0);
                if (k >= 1) g2 += c * e * (e - 1.0) * std::pow(s, e - 2.0);
            }
            return {g, g1, g2};
        }
        case NonlinearityKind::table: {
            auto v = spline_eval(model.table_s, model.table_g, s);
            return {v.g, v.g1, v.g2};
        }
    }
    throw std::logic_error("unreachable");
}

double nonlinearity_primitive(const SolerModel& model, double s) {
    switch (model.kind) {
        case NonlinearityKind::cubic:
            return 0.5 * s * s;
        case NonlinearityKind::polynomial: {
            double G = 0;
            for (size_t k = 0; k < model.coeffs.size(); ++k) {
                double e = static_cast<double>(k + 2);
                G += model.coeffs[k] / e * std::pow(s, e);
            }
            return G;
        }
        case NonlinearityKind::table: {
            // adaptive Simpson on [0, s]
            auto f = [&](double x) { return nonlinearity_eval(model, x).g; };
            struct Rec {
                double a, b, fa, fm, fb, whole;
            };
            auto simpson = [&](double a, double b, double fa, double fm, double fb) {
                return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
            };
            double a = 0.0, b = s;
            if (a == b) return 0.0;
            std::vector<Rec> stack;
            double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
            stack.push_back({a, b, fa, fm, fb, simpson(a, b, fa, fm, fb)});
            double total = 0.0;
            const double tol = 1e-12;
            while (!stack.empty()) {
                Rec r = stack.back();
                stack.pop_back();
                double m = 0.5 * (r.a + r.b);
                double lm = 0.5 * (r.a + m), rm = 0.5 * (m + r.b);
                double flm = f(lm), frm = f(rm);
                double left = simpson(r.a, m, r.fa, flm, r.fm);
                double right = simpson(m, r.b, r.fm, frm, r.fb);
                if (std::abs(left + right - r.whole) < 15.0 * tol || r.b - r.a < 1e-10) {
                    total += left + right + (left + right - r.whole) / 15.0;
                } else {
                    stack.push_back({r.a, m, r.fa, flm, r.fm, left});
                    stack.push_back({m, r.b, r.fm, frm, r.fb, right});
                }
            }
            return total;
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace soler

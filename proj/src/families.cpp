#include "curvcone/families.hpp"

#include <cmath>

namespace curvcone {

FamilyParams family_params(int n, double b, ConeFamily family) {
    if (n < 5) throw std::invalid_argument("family_params: need n >= 5");
    FamilyParams p;
    p.n = n;
    p.family = family;
    p.b = b;
    p.b_max = b_max_for(n);
    p.btilde_max = (n >= 12) ? btilde_max_for(n) : 0.0;
    p.in_hypothesis = (n >= 12);

    const double limit = (family == ConeFamily::C) ? p.b_max : p.btilde_max;
    if (!(b > 0.0) || b > limit * (1.0 + 1e-12))
        throw std::invalid_argument("family_params: b out of range");

    if (family == ConeFamily::C) {
        const double u = 2.0 + (n - 2.0) * b;
        const double v = 2.0 + (n - 3.0) * b;
        p.a = u * u / (2.0 * v) * b;
        p.gamma = b / v;
        const double w2 = 27.0 * u / 8.0
                        * std::pow(1.0 - 4.0 * (n - 2.0) * b * b, 4)
                        * (1.0 + (n - 2.0) * b) * (1.0 + (n - 2.0) * b)
                        / (n * n * b * b * v * v);
        p.omega = std::sqrt(w2);
    } else {
        p.a = b + 0.5 * (n - 2.0) * b * b;
    }

    // Comparison factor against the family-C endpoint.
    const double bm = p.b_max;
    const double um = 2.0 + (n - 2.0) * bm;
    const double vm = 2.0 + (n - 3.0) * bm;
    const double a_max = um * um / (2.0 * vm) * bm;
    const double gamma_max = bm / vm;
    p.zeta = (1.0 + 2.0 * (n - 1.0) * p.a) / (1.0 + 2.0 * (n - 1.0) * a_max)
           * (1.0 + (n - 2.0) * bm) / (1.0 + (n - 2.0) * b)
           * (1.0 + gamma_max);
    return p;
}

} // namespace curvcone

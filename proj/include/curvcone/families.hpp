// Parameter maps for the two one-parameter cone families: the inward
// deformation (family C, 0 < b <= 1/(4n)) and the outward deformation
// toward PIC1 (family Ctilde, 0 < b <= btilde_max).
#pragma once

#include <stdexcept>

namespace curvcone {

enum class ConeFamily { C, Ctilde };

inline double b_max_for(int n) { return 1.0 / (4.0 * n); }

inline double btilde_max_for(int n) {
    if (n < 12) throw std::invalid_argument("btilde_max_for: need n >= 12");
    if (n == 12) return 1.0 / 115.0;
    return 1.0 / (3.0 * (n - 6.0) * (n - 6.0));
}

struct FamilyParams {
    int n = 0;
    ConeFamily family = ConeFamily::C;
    double b = 0.0;
    double a = 0.0;
    double gamma = 0.0;       // family C only (0 otherwise)
    double omega = 0.0;       // family C only (0 otherwise)
    double b_max = 0.0;
    double btilde_max = 0.0;
    double zeta = 0.0;
    bool in_hypothesis = true; // n >= 12
};

// Family C:      a = ((2+(n-2)b)^2 / (2(2+(n-3)b))) b, with gamma and omega.
// Family Ctilde: 2a = 2b + (n-2) b^2.
// zeta follows the Ctilde comparison formula against (a_max, b_max, gamma_max).
FamilyParams family_params(int n, double b, ConeFamily family);

} // namespace curvcone

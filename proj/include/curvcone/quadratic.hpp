// Quadratic curvature algebra: the reaction terms of the Hamilton ODE and
// the Bohm-Wilking correction term D_{a,b}.
#pragma once

#include <optional>

#include "curvcone/tensor.hpp"

namespace curvcone {

// (R^2)_{ijkl} = sum_{p,q} R_{ijpq} R_{klpq}. Positive semidefinite as an
// N x N form; need not satisfy the Bianchi identity even if R does.
CurvatureTensor square(const CurvatureTensor& r);

// (R^#)_{ijkl} = 2 sum_{p,q} (R_{ipkq} R_{jplq} - R_{iplq} R_{jpkq}),
// computed by the direct summation over the dense component array.
CurvatureTensor sharp(const CurvatureTensor& r);

// Q(R) = R^2 + R^#.
CurvatureTensor hamilton_q(const CurvatureTensor& r);

// (S * H)_{ik} = sum_{p,q} S_{ipkq} H_{pq}.
SymmetricForm star(const CurvatureTensor& s, const SymmetricForm& h);

// The four-term correction D_{a,b}(S) with l^{-1}(Q(l(S))) = Q(S) + D_{a,b}(S).
// Ric°(S)^2 is the matrix square of the tracefree Ricci endomorphism.
CurvatureTensor d_ab(const CurvatureTensor& s, double a, double b);

// Closed-form Ricci tensor of D_{a,b}(S).
SymmetricForm ricci_d_ab(const CurvatureTensor& s, double a, double b);

// ---------------------------------------------------------------------------
// ODE right-hand sides.

struct OdeRhsKind {
    enum class Tag { PlainQ, QPlusDab, TWitness };
    Tag tag = Tag::PlainQ;
    double a = 0.0;
    double b = 0.0;
    double epsilon = 0.0;

    static OdeRhsKind plain_q() { return {}; }
    static OdeRhsKind q_plus_dab(double a, double b);
    // dS = Q(S) + D_{a,b}(S), dT = S^2 + eps * scal(S)^2 id^id.
    static OdeRhsKind t_witness(double a, double b, double epsilon);
};

struct OdeRhsValue {
    CurvatureTensor ds;
    std::optional<CurvatureTensor> dt;
};

OdeRhsValue ode_rhs(const OdeRhsKind& kind, const CurvatureTensor& s,
                    const CurvatureTensor* t_witness = nullptr);

} // namespace curvcone

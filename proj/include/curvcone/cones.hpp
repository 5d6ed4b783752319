// Cone-membership oracles built on frame optimization: isotropic-curvature
// evaluation, the PIC/PIC1/PIC2 hierarchy, shifted and pinched predicates,
// and the condition sets attached to the invariant cone families.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "curvcone/families.hpp"
#include "curvcone/frame_search.hpp"
#include "curvcone/tensor.hpp"

namespace curvcone {

// ---------------------------------------------------------------------------
// Modes. PIC fixes lambda = mu = 1; PIC1 minimizes over lambda with mu = 1;
// PIC2 minimizes over the whole box.

struct IsoMode {
    enum class Tag { Pic, Pic1, Pic2, Fixed };
    Tag tag = Tag::Pic;
    double lambda = 1.0;
    double mu = 1.0;

    static IsoMode pic() { return {Tag::Pic, 1.0, 1.0}; }
    static IsoMode pic1() { return {Tag::Pic1, 1.0, 1.0}; }
    static IsoMode pic2() { return {Tag::Pic2, 1.0, 1.0}; }
    static IsoMode fixed(double lambda, double mu);
    static IsoMode from_name(const std::string& name);
    const char* name() const;
};

// Exact minimization of A + l^2 B + m^2 C + l^2 m^2 D - 2 l m E over the
// feasible (lambda, mu) set of the mode.
FrameEval minimize_lambda_mu(double A, double B, double C, double D, double E,
                             const IsoMode& mode, double box_term = 0.0);

// Isotropic-curvature value at a frame. The cross term is evaluated in the
// Bianchi-free form (T_1342 + T_1423), which reduces to -T_1234 when the
// first Bianchi identity holds; the flag only gates the frame check.
double iso_value(const CurvatureTensor& t, const FourFrame& frame,
                 double lambda, double mu, bool bianchi_free = false);

// ---------------------------------------------------------------------------
// Frame-optimized membership queries.

struct ConeMarginReport {
    double min_value = 0.0;
    Eigen::MatrixXd frame;
    double lambda = 1.0;
    double mu = 1.0;
    int restarts_used = 0;
    bool converged = false;
    double gradient_norm = 0.0;

    std::string to_json() const;
};

ConeMarginReport min_iso(const CurvatureTensor& r, const IsoMode& mode,
                         const FrameSearchConfig& cfg, std::uint64_t seed);

// Independent dense random-frame search for the same margin (soundness
// oracle; see dense_frame_search).
ConeMarginReport dense_min_iso(const CurvatureTensor& r, const IsoMode& mode,
                               std::size_t samples, int polish_top,
                               std::uint64_t seed, int threads = 1);

struct Membership {
    bool member = false;
    bool boundary = false; // |margin| < tol: indeterminate
    double margin = 0.0;
    ConeMarginReport report;
};

Membership is_pic(const CurvatureTensor& r, double tol = 1e-7,
                  const FrameSearchConfig& cfg = FrameSearchConfig::full(),
                  std::uint64_t seed = 1);
Membership is_pic1(const CurvatureTensor& r, double tol = 1e-7,
                   const FrameSearchConfig& cfg = FrameSearchConfig::full(),
                   std::uint64_t seed = 1);
Membership is_pic2(const CurvatureTensor& r, double tol = 1e-7,
                   const FrameSearchConfig& cfg = FrameSearchConfig::full(),
                   std::uint64_t seed = 1);

// All three margins with the hierarchy (PIC2 <= PIC1 <= PIC) enforced by
// feasible-point majorization across the searches.
struct ConeSummary {
    double pic = 0.0, pic1 = 0.0, pic2 = 0.0;
};
ConeSummary cone_summary(const CurvatureTensor& r,
                         const FrameSearchConfig& cfg = FrameSearchConfig::full(),
                         std::uint64_t seed = 1);

// ---------------------------------------------------------------------------
// Pinching functions (user supplied; hypotheses spot-checked on a grid).

struct PinchingFunctions {
    std::function<double(double)> f;
    std::function<double(double)> g;
    double theta = 0.0;
    double n_const = 0.0;  // the additive constant N
    double lambda_big = 0.0;
    double l_n = 0.0;

    // Checks f, g increasing and concave on a sample grid and f(s)/s decay;
    // theta in (0, 1/(2n(n-1))). Throws on violation.
    void spot_check(int n) const;
};

// Parses the CLI expression grammar: "<c>", "<c>*sqrt", "<c>*log1p",
// "<c>*pow:<p>" with p < 1. All shapes are increasing, concave, sublinear.
std::function<double(double)> parse_pinching_expr(const std::string& text);

struct ShiftedMargins {
    double pic_shift = 0.0;   // PIC margin of R - theta scal id^id
    double pic2_shift = 0.0;  // PIC2 margin of R + f(scal) id^id
    double ricci_pair = 0.0;  // l1 + l2 - theta scal + N
};

ShiftedMargins shifted_predicates(const CurvatureTensor& r, const PinchingFunctions& pf,
                                  const FrameSearchConfig& cfg = FrameSearchConfig::full(),
                                  std::uint64_t seed = 1);

// ---------------------------------------------------------------------------
// Condition sets.

// E(b) conditions (family C); T is a Bianchi-free witness.
struct EbMargins {
    double psd_T = 0.0;        // min eigenvalue of T as an N x N form
    double pic_S_minus_T = 0.0;
    double ricci_pair = 0.0;   // l1 + l2 of Ric(S) + (2 gamma / n) scal(S)
    double frame_iv = 0.0;     // -max over pairs of the (iv) deficit
    bool scal_positive = true; // (iv) is ill-posed when scal(S) <= 0

    double worst() const;
};

EbMargins check_Eb(const CurvatureTensor& s, const CurvatureTensor& t_witness,
                   const FamilyParams& params,
                   const FrameSearchConfig& cfg = FrameSearchConfig::full(),
                   std::uint64_t seed = 1);

// Etilde(b) (family Ctilde): the Z-margin is always computed; the
// C(b_max) sub-check runs only when a witness is supplied.
struct EtildeResult {
    double z_margin = 0.0;
    ConeMarginReport z_report;
    bool conclusive = false; // true when the witness sub-check ran
    std::optional<EbMargins> eb;
};

EtildeResult check_Etilde(const CurvatureTensor& s, const FamilyParams& params,
                          const CurvatureTensor* witness = nullptr,
                          const FrameSearchConfig& cfg = FrameSearchConfig::full(),
                          std::uint64_t seed = 1);

// G_t^(0) conditions (i)-(iv); (iv) is skipped when scal(R) <= 0.
struct G0Margins {
    double cond_i = 0.0;
    double cond_ii = 0.0;
    double cond_iii = 0.0;
    double cond_iv = 0.0;
    bool iv_converged = true;
    bool scal_positive = true;
    int b_grid = 0;

    double worst() const;
};

G0Margins check_G0(const CurvatureTensor& r, double delta, double t, int b_grid,
                   const FrameSearchConfig& cfg = FrameSearchConfig::full(),
                   std::uint64_t seed = 1);

// F_t margin: S = R + 2 g(scal) id^id, minimized over frames x (lambda, mu)
// with the (1-l^2)(1-m^2) f(scal) relaxation term.
struct FtResult {
    double margin = 0.0;
    ConeMarginReport report;
};
FtResult check_Ft(const CurvatureTensor& r, const PinchingFunctions& pf,
                  const FrameSearchConfig& cfg = FrameSearchConfig::full(),
                  std::uint64_t seed = 1);

// l^2(1-m^2)^2 + m^2(1-l^2)^2 + (1-l^2)^2(1-m^2)^2.
double lambda_mu_kappa_region(double lambda, double mu);

// ---------------------------------------------------------------------------
// Z-type quantities shared with the verification harness.
//
// Z(frame, lambda) = S_1313 + l^2 S_1414 + S_2323 + l^2 S_2424 - 2 l S_1234
//                  + (1 - l^2) [ G(e1,e1) + G(e2,e2) + c1212 * S_1212 ].

FrameSearchResult minimize_z_quantity(const CurvatureTensor& s,
                                      const SymmetricForm* g_form, double c1212,
                                      const FrameSearchConfig& cfg, std::uint64_t seed);

double z_value_at(const CurvatureTensor& s, const SymmetricForm* g_form, double c1212,
                  const Eigen::MatrixXd& frame, double lambda);

// Exact re-evaluation helpers used by report replay.
double iso_value_at(const CurvatureTensor& r, const Eigen::MatrixXd& frame,
                    double lambda, double mu);

// ---------------------------------------------------------------------------
// Cone-targeted sampling (declared in tensor.hpp; margin helpers live here).

// Finds c with margin(R + c id^id, mode) = target. Exact in PIC mode; secant
// plus bisection otherwise.
double shift_to_margin(const CurvatureTensor& r, const IsoMode& mode, double target,
                       const FrameSearchConfig& cfg, std::uint64_t seed);

} // namespace curvcone

#pragma once

#include <string>
#include <vector>

#include "warpcurv/convex_toolkit.hpp"

namespace warpcurv {

struct EpsilonParams {
    double eps = 0.1;
    double sigma = 0.0;
    double delta = 0.0;
    bool strict_regime = false;
    /// Share of the slope gap spent by each quadratic bend correction.
    double bend_fraction = 0.125;
};

/// Practical defaults: sigma = eps^4 / 8 and delta = sigma / 2^14.
[[nodiscard]] EpsilonParams default_params(double eps);
/// Throws a parameter error on eps >= 0.3, delta >= sigma / 4, strict-regime violations.
void validate(const EpsilonParams& p);

/// Root of sinh(r) = eps e^r, i.e. -ln(1 - 2 eps) / 2.
[[nodiscard]] double solve_r_epsilon(double eps);

struct VProfile {
    EpsilonParams params;
    double r_eps = 0.0;
    double r_minus = 0.0;
    double r_plus = 0.0;
    double r_zero = 0.0;
    double bend_coef = 0.0;
    /// ln of the bent profile before smoothing its two outer joints.
    SmoothedFunction bold_log_v;
    SmoothedFunction log_v;
};

struct HProfile {
    EpsilonParams params;
    double r_eps = 0.0;
    double rho_eps = 0.0;
    double z_eps = 0.0;
    double m_eps = 0.0;
    /// Where r / 2 meets the tangent line of ln q at m_eps.
    double r_star = 0.0;
    double n_eps = 0.0;
    /// q(r) = q0 + q1 (r - rho) + q2 (r - rho)^2.
    double q0 = 0.0;
    double q1 = 0.0;
    double q2 = 0.0;
    double bend_coef = 0.0;
    SmoothedFunction bold_log_h;
    SmoothedFunction log_h;

    [[nodiscard]] double q(double r) const;
    [[nodiscard]] double dq(double r) const;
};

struct GProfile {
    EpsilonParams params;
    HProfile h;
    double tau_eps = 0.0;
    double o_eps = 0.0;
    double p_eps = 0.0;
    /// Where the tangent line at p_eps meets r / 2.
    double r_g = 0.0;
    double bend_coef = 0.0;
    /// Above this point ln g is delegated to ln h (they agree on [o_eps, n_eps - sigma]).
    double handoff = 0.0;
    SmoothedFunction bold_log_g;
    SmoothedFunction log_g;

    /// F(r) = e^{r/2} / (2 (tau + e^{r/2})), the slope of ln(tau + e^{r/2}).
    [[nodiscard]] double F(double r) const;
};

[[nodiscard]] VProfile build_v(const EpsilonParams& params);
[[nodiscard]] HProfile build_h(const EpsilonParams& params);
[[nodiscard]] GProfile build_g(const EpsilonParams& params, const HProfile& h);

/// Jets of ln(profile) and of the profile itself.
[[nodiscard]] Jet log_eval(const VProfile& p, double r);
[[nodiscard]] Jet log_eval(const HProfile& p, double r);
[[nodiscard]] Jet log_eval(const GProfile& p, double r);
[[nodiscard]] Jet log_eval_bold(const VProfile& p, double r);
[[nodiscard]] Jet log_eval_bold(const HProfile& p, double r);
[[nodiscard]] Jet log_eval_bold(const GProfile& p, double r);
[[nodiscard]] Jet exp_jet(const Jet& log);
[[nodiscard]] Jet eval_profile(const VProfile& p, double r);
[[nodiscard]] Jet eval_profile(const HProfile& p, double r);
[[nodiscard]] Jet eval_profile(const GProfile& p, double r);

struct GridSpec {
    int points_per_window = 1000;
    int points_per_segment = 2000;
    /// Allowed sup |(ln f)' - (ln bold f)'| / max |(ln bold f)'| over the windows.
    double c1_tolerance = 1e-3;
};

struct InvariantCheck {
    std::string name;
    bool pass = false;
    /// Positive when the check passes; smallest slack observed.
    double margin = 0.0;
    std::string detail;
};

struct ProfileReport {
    std::string profile;
    std::vector<InvariantCheck> checks;
    [[nodiscard]] bool all_pass() const;
};

[[nodiscard]] ProfileReport verify_profile_invariants(const VProfile& p, const GridSpec& grid = {});
[[nodiscard]] ProfileReport verify_profile_invariants(const HProfile& p, const GridSpec& grid = {});
[[nodiscard]] ProfileReport verify_profile_invariants(const GProfile& p, const GridSpec& grid = {});

/// Profile documents: parameters plus breakpoints as 17-digit decimal strings.
[[nodiscard]] std::string profiles_to_json(const VProfile& v, const HProfile& h, const GProfile* g);
/// Rebuilds from the stored parameters and checks every stored breakpoint bit for bit.
struct LoadedProfiles {
    VProfile v;
    HProfile h;
    GProfile g;
};
[[nodiscard]] LoadedProfiles profiles_from_json(const std::string& text);

}  // namespace warpcurv

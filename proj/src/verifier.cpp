#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

#include "warpcurv/error.hpp"
#include "warpcurv/verifier.hpp"

namespace warpcurv {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

/// Runs fn(i) for i in [0, count); each index writes only its own output slot, so the
/// results do not depend on the thread count.
template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
    const int t = std::max(1, std::min<int>(threads, static_cast<int>(std::max<std::size_t>(count, 1))));
    if (t == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(t));
    for (int w = 0; w < t; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = count;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

int resolve_threads(int requested) { return requested > 0 ? requested : worker_count(); }

/// Smallest slack of an inequality over a grid; slack > 0 (or >= 0 when not strict) passes.
class Slack {
public:
    Slack(std::string name, bool strict = true) : name_(std::move(name)), strict_(strict) {}

    void add(double r, double slack) {
        if (std::isnan(slack)) slack = -inf;
        if (slack < margin_) {
            margin_ = slack;
            where_ = r;
        }
    }

    [[nodiscard]] InvariantCheck done() const {
        InvariantCheck c;
        c.name = name_;
        c.margin = margin_;
        c.pass = strict_ ? margin_ > 0.0 : margin_ >= 0.0;
        char buf[96];
        std::snprintf(buf, sizeof buf, "worst at r = %.17g", where_);
        c.detail = buf;
        return c;
    }

private:
    std::string name_;
    bool strict_;
    double margin_ = inf;
    double where_ = 0.0;
};

InvariantCheck tolerance_check(std::string name, double residual, double tolerance) {
    InvariantCheck c;
    c.name = std::move(name);
    c.margin = tolerance - residual;
    c.pass = residual <= tolerance;
    char buf[96];
    std::snprintf(buf, sizeof buf, "max residual %.3e, tolerance %.1e", residual, tolerance);
    c.detail = buf;
    return c;
}

std::array<double, 5> curvature_vector(const CoordinateCurvatures& cc) {
    return {cc.k21, cc.k32, cc.kr1, cc.kr2, cc.mixed};
}

/// Coefficients of the five coordinate curvatures in K(pp); sectional_curvature is linear in them.
std::array<double, 5> plane_coefficients(const PlanePair& pp) {
    std::array<double, 5> out{};
    for (int k = 0; k < 5; ++k) {
        CoordinateCurvatures unit;
        double* fields[5] = {&unit.k21, &unit.k32, &unit.kr1, &unit.kr2, &unit.mixed};
        *fields[k] = 1.0;
        out[static_cast<std::size_t>(k)] = sectional_curvature(unit, pp);
    }
    return out;
}

CoordinateCurvatures negated(CoordinateCurvatures cc) {
    cc.k21 = -cc.k21;
    cc.k32 = -cc.k32;
    cc.kr1 = -cc.kr1;
    cc.kr2 = -cc.kr2;
    cc.mixed = -cc.mixed;
    return cc;
}

bool same_params(const EpsilonParams& a, const EpsilonParams& b) {
    return a.eps == b.eps && a.sigma == b.sigma && a.delta == b.delta && a.strict_regime == b.strict_regime &&
           a.bend_fraction == b.bend_fraction;
}

std::vector<double> window_grid(const Window& w, int points) {
    std::vector<double> out;
    if (points < 2) return out;
    out.reserve(static_cast<std::size_t>(points));
    for (int j = 0; j < points; ++j) out.push_back(w.center - w.sigma + 2.0 * w.sigma * j / (points - 1));
    return out;
}

std::vector<double> uniform(double lo, double hi, int points) {
    std::vector<double> out;
    if (points <= 0) return out;
    if (points == 1) return {lo};
    out.reserve(static_cast<std::size_t>(points));
    for (int j = 0; j < points; ++j) out.push_back(j + 1 == points ? hi : lo + (hi - lo) * j / (points - 1));
    return out;
}

void sort_unique(std::vector<double>& xs) {
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
}

/// Max over the c23 grid of the plane search at one state.
struct SupOverC {
    double value = -inf;
    double c23 = 0.0;
    PlanePair plane;
};

SupOverC sup_over_c(const WarpState& ws, std::span<const double> c23, const SupSearchSpec& search) {
    SupOverC best;
    for (double c : c23) {
        const SupResult s = sup_sectional(coordinate_curvatures(ws, c), search);
        if (s.value > best.value) {
            best.value = s.value;
            best.c23 = c;
            best.plane = s.argmax;
        }
    }
    return best;
}

double window_sigma_at(const SmoothedFunction& f, double center, double fallback) {
    for (const Window& w : f.windows()) {
        if (w.center == center) return w.sigma;
    }
    return fallback;
}

}  // namespace

int worker_count() {
    if (const char* env = std::getenv("WARPCURV_THREADS")) {
        int n = 0;
        const char* end = env + std::strlen(env);
        const auto res = std::from_chars(env, end, n);
        if (res.ec == std::errc() && res.ptr == end && n > 0) return n;
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::vector<double> default_c23_grid() {
    std::vector<double> out;
    for (int i = 0; i <= 20; ++i) out.push_back((i - 10) / 20.0);
    return out;
}

// ---------------------------------------------------------------------------

bool ChnReport::pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const InvariantCheck& c) { return c.pass; });
}

ChnReport verify_chn_suite(const ChnGridSpec& spec) {
    if (spec.points < 1) throw Error(ErrorKind::parameter, "grid needs at least one point");
    if (!(spec.rmin > 0.0) || !(spec.rmax >= spec.rmin)) {
        throw Error(ErrorKind::parameter, "need 0 < rmin <= rmax");
    }
    if (spec.pairs < 0) throw Error(ErrorKind::parameter, "pairs must be non-negative");
    for (double c : spec.c23) {
        if (!(std::abs(c) <= 0.5)) throw Error(ErrorKind::parameter, "|c23| must be at most 1/2");
    }

    ChnReport rep;
    rep.spec = spec;

    std::mt19937_64 gen(spec.seed);
    std::normal_distribution<double> nd;
    std::vector<std::array<double, 5>> coefs;
    coefs.reserve(2 * static_cast<std::size_t>(spec.pairs));
    for (int i = 0; i < spec.pairs; ++i) {
        const std::array<double, 4> c = {nd(gen), nd(gen), nd(gen), nd(gen)};
        coefs.push_back(plane_coefficients(make_plane_pair(c, static_cast<std::uint64_t>(i))));
        const std::array<double, 3> c3 = {nd(gen), nd(gen), nd(gen)};
        coefs.push_back(plane_coefficients(make_nongeneric_pair(c3, static_cast<std::uint64_t>(i))));
    }

    const std::vector<double> grid =
        spec.points == 1 ? std::vector<double>{spec.rmin} : uniform(spec.rmin, spec.rmax, spec.points);
    double kmin = inf;
    double kmax = -inf;
    double res_k21 = 0.0, res_factor = 0.0, res_mixed = 0.0, res_kr1 = 0.0, res_kr2 = 0.0, res_k32 = 0.0;
    double res_chain21 = 0.0, res_chain32 = 0.0;
    for (double r : grid) {
        const WarpState ws = WarpState::complex_hyperbolic(r);
        const double lv = ws.v1 / ws.v;
        const double lh = ws.h1 / ws.h;
        const double vh2 = ws.v / (ws.h * ws.h);
        res_factor = std::max(res_factor, std::abs(vh2 * (lv - lh) - 1.0));
        for (double c : spec.c23) {
            const CoordinateCurvatures cc = coordinate_curvatures(ws, c);
            res_k21 = std::max(res_k21, std::abs(cc.k21 + 0.25));
            res_mixed = std::max(res_mixed, std::abs(cc.mixed + c));
            res_kr1 = std::max(res_kr1, std::abs(cc.kr1 + 1.0));
            res_kr2 = std::max(res_kr2, std::abs(cc.kr2 + 0.25));
            res_k32 = std::max(res_k32, std::abs(cc.k32 + 0.25 + 3.0 * c * c));
            const SubmersionCurvature sub = tube_submersion_curvature(ws.v, ws.h, c);
            res_chain21 = std::max(res_chain21, std::abs(cc.k21 - (sub.first / (ws.v * ws.v) - lv * lh)));
            res_chain32 = std::max(res_chain32, std::abs(cc.k32 - (sub.second / (ws.h * ws.h) - lh * lh)));

            const auto k = curvature_vector(cc);
            for (const auto& cf : coefs) {
                const double K = cf[0] * k[0] + cf[1] * k[1] + cf[2] * k[2] + cf[3] * k[3] + cf[4] * k[4];
                kmin = std::min(kmin, K);
                kmax = std::max(kmax, K);
            }
            kmax = std::max(kmax, sup_sectional(cc).value);
            kmin = std::min(kmin, -sup_sectional(negated(cc)).value);
        }
    }
    rep.pinching_min = kmin;
    rep.pinching_max = kmax;

    {
        InvariantCheck c;
        c.name = "pinching_min";
        c.margin = kmin - (-1.0 - spec.pinching_tolerance);
        c.pass = c.margin >= 0.0;
        c.detail = "min K " + std::to_string(kmin) + " >= -1";
        rep.checks.push_back(c);
        c.name = "pinching_max";
        c.margin = (-0.25 + spec.pinching_tolerance) - kmax;
        c.pass = c.margin >= 0.0;
        c.detail = "max K " + std::to_string(kmax) + " <= -1/4";
        rep.checks.push_back(c);
    }
    const double tol = spec.identity_tolerance;
    rep.checks.push_back(tolerance_check("k21=-1/4", res_k21, tol));
    rep.checks.push_back(tolerance_check("mixed_factor=1", res_factor, tol));
    rep.checks.push_back(tolerance_check("mixed=-c23", res_mixed, tol));
    rep.checks.push_back(tolerance_check("kr1=-1", res_kr1, tol));
    rep.checks.push_back(tolerance_check("kr2=-1/4", res_kr2, tol));
    rep.checks.push_back(tolerance_check("k32=-1/4-3c23^2", res_k32, tol));
    rep.checks.push_back(tolerance_check("scaling_chain_k21", res_chain21, tol));
    rep.checks.push_back(tolerance_check("scaling_chain_k32", res_chain32, tol));

    const CoordinateCurvatures at5 = coordinate_curvatures(WarpState::complex_hyperbolic(5.0), 0.5);
    const double k_dr_y1 = sectional_curvature(at5, make_nongeneric_pair({1.0, 0.0, 0.0}));
    const double k_y1_y2 = sectional_curvature(at5, make_plane_pair({0.0, 0.0, 1.0, 0.0}));
    rep.checks.push_back(tolerance_check("K(d_r,Y1)=-1 at r=5", std::abs(k_dr_y1 + 1.0), tol));
    rep.checks.push_back(tolerance_check("K(Y1,Y2)=-1/4 at r=5", std::abs(k_y1_y2 + 0.25), tol));
    return rep;
}

// ---------------------------------------------------------------------------

IntervalPartition::IntervalPartition(const VProfile& v, const HProfile& h, double below, double above)
    : n(h.n_eps), m(h.m_eps), rho(h.rho_eps), r_minus(v.r_minus), r_plus(v.r_plus) {
    if (!(n < m && m < rho && rho < r_minus && r_minus < r_plus)) {
        throw Error(ErrorKind::construction, "breakpoints n < m < rho < r- < r+ are not ordered");
    }
    if (!(below > 0.0) || !(above > 0.0)) throw Error(ErrorKind::parameter, "tail extents must be positive");
    intervals = {Interval{"step0", r_plus, r_plus + above}, Interval{"step1", r_minus, r_plus},
                 Interval{"step2", rho, r_minus},           Interval{"step3", m, rho},
                 Interval{"step4", n, m},                   Interval{"step5", n - below, n}};
}

int IntervalPartition::step_of(double r) const {
    for (int i = 0; i < 6; ++i) {
        const Interval& iv = intervals[static_cast<std::size_t>(i)];
        if (r >= iv.lo && r <= iv.hi) return i;
    }
    return -1;
}

bool CurvatureScanReport::pass() const {
    return global_max < 0.0 && (!threshold || global_max < *threshold);
}

bool CurvatureScanReport::checks_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const InvariantCheck& c) { return c.pass; });
}

namespace {

struct ScanPoint {
    int step = -1;
    double r = 0.0;
    WarpState ws;
    Jet log_v_bold;
    Jet log_h_bold;
    SupOverC sup;
    ScanRow row;
    /// min over c of -(1/5 + 3 c^2) - k32(c), and max over c of |mixed(c)|.
    double k32_slack = inf;
    double max_abs_mixed = 0.0;
    double max_k32 = -inf;
};

}  // namespace

CurvatureScanReport verify_negative_curvature(const VProfile& v, const HProfile& h,
                                              const ScanThresholds& thresholds, const ScanGridSpec& grid) {
    if (!same_params(v.params, h.params)) {
        throw Error(ErrorKind::profile_mismatch, "v and h profiles were built from different parameters");
    }
    if (grid.points_per_interval < 2) throw Error(ErrorKind::parameter, "need at least 2 points per interval");
    if (grid.c23.empty()) throw Error(ErrorKind::parameter, "c23 grid is empty");
    for (double c : grid.c23) {
        if (!(std::abs(c) <= 0.5)) throw Error(ErrorKind::parameter, "|c23| must be at most 1/2");
    }
    const IntervalPartition part(v, h, grid.below, grid.above);
    const double eps = v.params.eps;

    std::array<std::vector<double>, 6> rs;
    for (int i = 0; i < 6; ++i) {
        const Interval& iv = part.intervals[static_cast<std::size_t>(i)];
        rs[static_cast<std::size_t>(i)] = uniform(iv.lo, iv.hi, grid.points_per_interval);
    }
    std::vector<Window> windows = v.log_v.windows();
    for (const Window& w : h.log_h.windows()) windows.push_back(w);
    for (const Window& w : windows) {
        for (double r : window_grid(w, grid.points_per_window)) {
            const int s = part.step_of(r);
            if (s >= 0) rs[static_cast<std::size_t>(s)].push_back(r);
        }
    }
    std::vector<ScanPoint> pts;
    for (int i = 0; i < 6; ++i) {
        auto& xs = rs[static_cast<std::size_t>(i)];
        sort_unique(xs);
        for (double r : xs) {
            ScanPoint p;
            p.step = i;
            p.r = r;
            pts.push_back(p);
        }
    }

    parallel_for(pts.size(), resolve_threads(grid.threads), [&](std::size_t idx) {
        ScanPoint& p = pts[idx];
        p.ws = WarpState::from_log_jets(p.r, log_eval(v, p.r), log_eval(h, p.r));
        p.log_v_bold = log_eval_bold(v, p.r);
        p.log_h_bold = log_eval_bold(h, p.r);
        for (double c : grid.c23) {
            const CoordinateCurvatures cc = coordinate_curvatures(p.ws, c);
            const SupResult s = sup_sectional(cc, grid.search);
            if (s.value > p.sup.value) {
                p.sup.value = s.value;
                p.sup.c23 = c;
                p.sup.plane = s.argmax;
            }
            p.k32_slack = std::min(p.k32_slack, -(0.2 + 3.0 * c * c) - cc.k32);
            p.max_abs_mixed = std::max(p.max_abs_mixed, std::abs(cc.mixed));
            p.max_k32 = std::max(p.max_k32, cc.k32);
        }
        const CoordinateCurvatures c0 = coordinate_curvatures(p.ws, 0.0);
        const CoordinateCurvatures c5 = coordinate_curvatures(p.ws, 0.5);
        p.row = ScanRow{p.r, p.ws.v, p.ws.h, c0.k21, c0.k32, c5.k32, c0.kr1, c0.kr2, c5.mixed, p.sup.value};
    });

    CurvatureScanReport rep;
    rep.params = v.params;
    rep.threshold = thresholds.global;
    for (int i = 0; i < 6; ++i) {
        IntervalResult& ir = rep.intervals[static_cast<std::size_t>(i)];
        ir.interval = part.intervals[static_cast<std::size_t>(i)];
        ir.max_k = -inf;
        ir.threshold = thresholds.interval[static_cast<std::size_t>(i)];
    }
    const ScanPoint* prev = nullptr;
    for (const ScanPoint& p : pts) {
        IntervalResult& ir = rep.intervals[static_cast<std::size_t>(p.step)];
        ++ir.points;
        if (p.sup.value > ir.max_k) {
            ir.max_k = p.sup.value;
            ir.argmax_r = p.r;
            ir.argmax_c23 = p.sup.c23;
            ir.argmax_plane = p.sup.plane;
        }
        if (prev && prev->step == p.step && p.r > prev->r) {
            ir.lipschitz = std::max(ir.lipschitz, std::abs(p.sup.value - prev->sup.value) / (p.r - prev->r));
        }
        prev = &p;
    }
    rep.global_max = -inf;
    for (int i = 0; i < 6; ++i) {
        IntervalResult& ir = rep.intervals[static_cast<std::size_t>(i)];
        ir.pass = ir.points > 0 && ir.max_k < ir.threshold;
        if (ir.max_k > rep.global_max) {
            rep.global_max = ir.max_k;
            rep.global_step = i;
        }
    }

    // Intermediate inequalities of each proof step.
    const double coth_literal = 1.0 / std::tanh(v.r_eps + std::pow(eps, 4));
    const double coth_plus = 1.0 / std::tanh(v.r_plus);
    const double eps6 = std::pow(eps, 6);
    std::vector<Slack> s0{Slack("step0.K<=-1/5", false)};
    std::vector<Slack> s1{Slack("step1.v/h^2<2eps"),
                          Slack("step1.vbold'/vbold>=1", false),
                          Slack("step1.vbold'/vbold<=coth(r_eps+eps^4)", false),
                          Slack("step1.vbold'/vbold<=coth(r_plus)", false),
                          Slack("step1.h'/h*vbold'/vbold>eps/5"),
                          Slack("step1.K(Y2,Y1)<-eps/5"),
                          Slack("step1.K(Y3,Y2)<-(1/5+3c^2)")};
    std::vector<Slack> s2{Slack("step2.v/h^2<2eps"),       Slack("step2.h'/h>eps/9"),
                          Slack("step2.v''/v>1/4"),        Slack("step2.h''/h>eps^6"),
                          Slack("step2.K(Y2,Y1)<-eps/10"), Slack("step2.K(Y3,Y2)<-1/9"),
                          Slack("step2.K(d_r,Y1)<-1/4"),   Slack("step2.K(d_r,Y2)<-eps^6"),
                          Slack("step2.|mixed|<2eps")};
    std::vector<Slack> s3{Slack("step3.v/h^2<2eps"), Slack("step3.h'/h>eps/9"), Slack("step3.h'/h<4/5"),
                          Slack("step3.K(Y2,Y1)<-eps/10"), Slack("step3.|mixed|<eps")};
    std::vector<Slack> s4{Slack("step4.v/h^2<2eps"),    Slack("step4.h'/h>=1/3", false),
                          Slack("step4.h'/h<=1", false), Slack("step4.v'/v-h'/h<1"),
                          Slack("step4.hbold>=e^{r/2}", false), Slack("step4.K(Y2,Y1)<-1/4")};
    std::vector<Slack> s5{Slack("step5.v/h^2<2eps"), Slack("step5.h'/h>1/3"), Slack("step5.h''/h>1/9"),
                          Slack("step5.K<=-1/10", false)};

    for (const ScanPoint& p : pts) {
        const WarpState& w = p.ws;
        const double r = p.r;
        const double vh2 = w.v / (w.h * w.h);
        const double lv = w.v1 / w.v;
        const double lh = w.h1 / w.h;
        const double v2 = w.v2 / w.v;
        const double h2 = w.h2 / w.h;
        const CoordinateCurvatures cc = coordinate_curvatures(w, 0.0);
        const double lvb = p.log_v_bold.d1;
        switch (p.step) {
            case 0:
                s0[0].add(r, -0.2 - p.sup.value);
                break;
            case 1:
                s1[0].add(r, 2 * eps - vh2);
                s1[1].add(r, lvb - 1.0);
                s1[2].add(r, coth_literal - lvb);
                s1[3].add(r, coth_plus - lvb);
                s1[4].add(r, lh * lvb - eps / 5);
                s1[5].add(r, -eps / 5 - cc.k21);
                s1[6].add(r, p.k32_slack);
                break;
            case 2:
                s2[0].add(r, 2 * eps - vh2);
                s2[1].add(r, lh - eps / 9);
                s2[2].add(r, v2 - 0.25);
                s2[3].add(r, h2 - eps6);
                s2[4].add(r, -eps / 10 - cc.k21);
                s2[5].add(r, -1.0 / 9 - p.max_k32);
                s2[6].add(r, -0.25 - cc.kr1);
                s2[7].add(r, -eps6 - cc.kr2);
                s2[8].add(r, 2 * eps - p.max_abs_mixed);
                break;
            case 3:
                s3[0].add(r, 2 * eps - vh2);
                s3[1].add(r, lh - eps / 9);
                s3[2].add(r, 0.8 - lh);
                s3[3].add(r, -eps / 10 - cc.k21);
                s3[4].add(r, eps - p.max_abs_mixed);
                break;
            case 4:
                s4[0].add(r, 2 * eps - vh2);
                s4[1].add(r, lh - 1.0 / 3);
                s4[2].add(r, 1.0 - lh);
                s4[3].add(r, 1.0 - (lv - lh));
                s4[4].add(r, p.log_h_bold.v - r / 2);
                s4[5].add(r, -0.25 - cc.k21);
                break;
            case 5:
                s5[0].add(r, 2 * eps - vh2);
                s5[1].add(r, lh - 1.0 / 3);
                s5[2].add(r, h2 - 1.0 / 9);
                s5[3].add(r, -0.1 - p.sup.value);
                break;
            default:
                break;
        }
    }
    for (const auto* group : {&s0, &s1, &s2, &s3, &s4, &s5}) {
        for (const Slack& s : *group) rep.checks.push_back(s.done());
    }

    if (grid.keep_rows) {
        rep.rows.reserve(pts.size());
        for (const ScanPoint& p : pts) rep.rows.push_back(p.row);
    }
    return rep;
}

// ---------------------------------------------------------------------------

double TailIdentityTable::worst() const {
    double w = 0.0;
    for (const auto& r : rows) w = std::max(w, r.residual);
    return w;
}

TailIdentityTable tail_identities(const GProfile& g, std::span<const double> r_grid, const VProfile* v) {
    const double sigma_p = window_sigma_at(g.log_g, g.p_eps, g.params.sigma);
    const double top = g.p_eps - sigma_p;
    if (v && !same_params(v->params, g.params)) {
        throw Error(ErrorKind::profile_mismatch, "v and g profiles were built from different parameters");
    }
    for (double r : r_grid) {
        if (!(r <= top) || g.log_g.window_at(r) >= 0 || (v && v->log_v.window_at(r) >= 0)) {
            throw Error(ErrorKind::domain, "tail grid point " + std::to_string(r) + " touches a smoothing window");
        }
    }
    const double eps = g.params.eps;
    const char* names[] = {"F'=F/2-F^2", "g'/g=F",       "g''/g=F/2", "v/g^2=4epsF^2",
                           "(1/g^2)'=-2F/g^2", "v'/v=1", "v''/v=1"};
    TailIdentityTable out;
    for (const char* n : names) out.rows.push_back({n, 0.0});
    auto put = [&](std::size_t i, double lhs, double rhs) {
        const double res = std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs));
        out.rows[i].residual = std::max(out.rows[i].residual, std::isnan(res) ? inf : res);
    };
    for (double r : r_grid) {
        const Jet lg = log_eval(g, r);
        const double F = g.F(r);
        const double inv_g2 = std::exp(-2.0 * lg.v);
        const Jet lv = v ? log_eval(*v, r) : Jet{std::log(eps) + r, 1.0, 0.0};
        put(0, lg.d2, F / 2 - F * F);
        put(1, lg.d1, F);
        put(2, lg.d2 + lg.d1 * lg.d1, F / 2);
        put(3, std::exp(lv.v - 2.0 * lg.v), 4 * eps * F * F);
        put(4, -2.0 * lg.d1 * inv_g2, -2.0 * F * inv_g2);
        put(5, lv.d1, 1.0);
        put(6, lv.d2 + lv.d1 * lv.d1, 1.0);
    }
    return out;
}

bool ARegularityReport::pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const InvariantCheck& c) { return c.pass; }) &&
           std::all_of(derivatives.begin(), derivatives.end(), [](const DerivativeBound& d) { return d.pass; });
}

namespace {

const char* frame_name(int i) {
    static const char* names[] = {"d_r", "Y1", "Y2", "Y3", "Y4", "Y5", "Y6", "Y7", "Y8", "Y9"};
    return i < 10 ? names[i] : "Y?";
}

double named_value(const CoordinateCurvatures& cc, int which) {
    switch (which) {
        case 0: return cc.k21;
        case 1: return cc.k32;
        case 2: return cc.kr1;
        case 3: return cc.kr2;
        default: return cc.mixed;
    }
}

/// Central 5-point stencils up to order 4; higher orders compose the order-4 stencil.
double finite_difference(const std::function<double(double)>& f, double r, int order, double h) {
    switch (order) {
        case 0: return f(r);
        case 1: return (f(r - 2 * h) - 8 * f(r - h) + 8 * f(r + h) - f(r + 2 * h)) / (12 * h);
        case 2: return (-f(r - 2 * h) + 16 * f(r - h) - 30 * f(r) + 16 * f(r + h) - f(r + 2 * h)) / (12 * h * h);
        case 3: return (-f(r - 2 * h) + 2 * f(r - h) - 2 * f(r + h) + f(r + 2 * h)) / (2 * h * h * h);
        case 4: return (f(r - 2 * h) - 4 * f(r - h) + 6 * f(r) - 4 * f(r + h) + f(r + 2 * h)) / (h * h * h * h);
        default: {
            auto inner = [&](double x) { return finite_difference(f, x, order - 4, h); };
            return finite_difference(inner, r, 4, h);
        }
    }
}

}  // namespace

ARegularityReport verify_aregularity(const VProfile& v, const GProfile& g, const StructureConstants& sc, int kmax,
                                     const ARegGridSpec& grid) {
    if (!same_params(v.params, g.params)) {
        throw Error(ErrorKind::profile_mismatch, "v and g profiles were built from different parameters");
    }
    const StructureReport sr = validate_structure_constants(sc);
    if (!sr.pass()) throw Error(ErrorKind::parameter, "invalid structure constants: " + sr.describe());
    if (grid.tail_points < 5 || grid.step_points < 2 || !(grid.tail_span > 0.0) || !(grid.fd_step > 0.0)) {
        throw Error(ErrorKind::parameter, "invalid A-regularity grid");
    }
    const CurvatureClosure closure = covariant_derivative_closure(kmax, sc);
    const double eps = g.params.eps;
    const double tau = g.tau_eps;
    const double c23 = sc.at(2, 3);
    const int threads = resolve_threads(grid.threads);

    ARegularityReport rep;
    rep.params = g.params;
    rep.kmax = kmax;

    bool finite = true;
    for (int k = 0; k <= kmax; ++k) {
        const auto& ord = closure.orders[static_cast<std::size_t>(k)];
        rep.closure_bound.push_back(closure.bound(k, eps, tau));
        rep.closure_nonzero.push_back(ord.nonzero);
        rep.closure_min_f_degree.push_back(ord.min_f_degree);
        finite = finite && std::isfinite(rep.closure_bound.back());
    }
    {
        InvariantCheck c;
        c.name = "closure.bounds_finite";
        c.pass = finite;
        c.margin = finite ? 1.0 : -1.0;
        c.detail = "k <= " + std::to_string(kmax);
        rep.checks.push_back(c);
    }
    const int N = closure.frame_size;
    for (std::size_t idx = 0; idx < closure.orders[0].components.size(); ++idx) {
        const TailPolynomial& p = closure.orders[0].components[idx];
        if (p.is_zero()) continue;
        const int a = static_cast<int>(idx) / (N * N * N), b = static_cast<int>(idx) / (N * N) % N;
        const int c = static_cast<int>(idx) / N % N, d = static_cast<int>(idx) % N;
        rep.table.push_back(std::string("R(") + frame_name(a) + "," + frame_name(b) + "," + frame_name(c) + "," +
                            frame_name(d) + ") = " + p.to_string());
    }

    // Tail grid, kept clear of the window at p by the stencil reach.
    const double sigma_p = window_sigma_at(g.log_g, g.p_eps, g.params.sigma);
    const double reach = 2.0 * grid.fd_step * (kmax > 4 ? 2 : 1);
    const double top = g.p_eps - sigma_p - 1e-3 - reach;
    const std::vector<double> tail = uniform(top - grid.tail_span, top, grid.tail_points);
    rep.identities = tail_identities(g, tail, &v);
    rep.checks.push_back(tolerance_check("tail.identities", rep.identities.worst(), 1e-12));

    auto state = [&](double r) { return WarpState::from_log_jets(r, log_eval(v, r), log_eval(g, r)); };
    auto ring_point = [&](double r) {
        const Jet lg = log_eval(g, r);
        return std::pair<double, double>{g.F(r), std::exp(-lg.v)};
    };

    // k = 0 polynomials against direct evaluation.
    double agreement = 0.0;
    for (double r : tail) {
        const auto [F, u] = ring_point(r);
        const CoordinateCurvatures cc = coordinate_curvatures(state(r), c23);
        int which = 0;
        for (const NamedComponent& nc : named_components()) {
            const double num = named_value(cc, which++);
            const double sym = closure.at(0, nc.index).evaluate(F, u, eps, sc);
            agreement = std::max(agreement, std::abs(sym - num) / std::max(1.0, std::abs(num)));
        }
        if (sc.n == 2) {
            const CurvatureTensor R = curvature_tensor(cc);
            for (std::size_t i = 0; i < R.size(); ++i) {
                const double sym = closure.orders[0].components[i].evaluate(F, u, eps, sc);
                agreement = std::max(agreement, std::abs(sym - R[i]) / std::max(1.0, std::abs(R[i])));
            }
        }
    }
    rep.agreement = agreement;
    rep.checks.push_back(tolerance_check("tail.symbolic_numeric_agreement", agreement, 1e-9));

    // Radial derivatives: the all-d_r components of nabla^j R are d^j/dr^j of the named ones.
    double fd1 = 0.0;
    {
        int which = 0;
        for (const NamedComponent& nc : named_components()) {
            const int w = which++;
            auto f = [&](double r) { return named_value(coordinate_curvatures(state(r), c23), w); };
            for (int j = 0; j <= kmax; ++j) {
                std::vector<int> index(static_cast<std::size_t>(j), 0);
                index.insert(index.end(), nc.index.begin(), nc.index.end());
                const TailPolynomial& p = closure.at(j, index);
                DerivativeBound db;
                db.component = nc.name;
                db.order = j;
                db.polynomial = p.to_string();
                db.symbolic_bound = p.bound(eps, tau);
                std::vector<double> vals(tail.size());
                parallel_for(tail.size(), threads,
                             [&](std::size_t i) { vals[i] = std::abs(finite_difference(f, tail[i], j, grid.fd_step)); });
                db.numeric_sup = *std::max_element(vals.begin(), vals.end());
                db.pass = std::isfinite(db.symbolic_bound) && db.numeric_sup <= db.symbolic_bound + 1e-9;
                rep.derivatives.push_back(db);
                if (j == 1) {
                    for (double r : tail) {
                        const auto [F, u] = ring_point(r);
                        const double sym = p.evaluate(F, u, eps, sc);
                        const double scale = std::max(1.0, std::abs(f(r)));
                        fd1 = std::max(fd1, std::abs(finite_difference(f, r, 1, grid.fd_step) - sym) / scale);
                    }
                }
            }
        }
    }
    if (kmax >= 1) rep.checks.push_back(tolerance_check("tail.first_derivative_vs_finite_difference", fd1, 1e-9));

    // Negativity on the three tail steps.
    const double sigma_o = window_sigma_at(g.log_g, g.o_eps, g.params.sigma);
    std::vector<double> step1 = uniform(g.o_eps, g.o_eps + sigma_o, grid.step_points);
    std::vector<double> step2 = uniform(g.p_eps - sigma_p, g.o_eps, grid.step_points);
    for (const Window& w : g.log_g.windows()) {
        for (double r : window_grid(w, grid.points_per_window)) {
            if (r >= g.p_eps - sigma_p && r <= g.o_eps) step2.push_back(r);
            if (r >= g.o_eps && r <= g.o_eps + sigma_o) step1.push_back(r);
        }
    }
    sort_unique(step1);
    sort_unique(step2);

    struct TailEval {
        double r = 0.0;
        WarpState ws;
        Jet log_g_bold;
        double sup = -inf;
    };
    auto scan = [&](const std::vector<double>& rs) {
        std::vector<TailEval> out(rs.size());
        parallel_for(rs.size(), threads, [&](std::size_t i) {
            TailEval& e = out[i];
            e.r = rs[i];
            e.ws = state(e.r);
            e.log_g_bold = log_eval_bold(g, e.r);
            e.sup = sup_over_c(e.ws, grid.c23, grid.search).value;
        });
        return out;
    };
    const auto e1 = scan(step1);
    const auto e2 = scan(step2);
    const auto e3 = scan(tail);

    Slack n1("step1.sup_K<0"), n2("step2.sup_K<0"), n3("step3.sup_K<0");
    Slack a1("step1.g'/g>1/3"), b1("step1.K(Y2,Y1)<-1/4"), d1("step1.K(d_r,Y2)<-1/25");
    Slack a2("step2.g'/g>1/5"), b2("step2.v/g^2<2eps"), c2("step2.gbold>=e^{r/2}", false),
        d2("step2.K(d_r,Y2)<-1/25");
    Slack b3("step3.K(Y2,Y1)<-F/2");
    double closed = 0.0;
    for (const auto& e : e1) {
        const CoordinateCurvatures cc = coordinate_curvatures(e.ws, 0.0);
        n1.add(e.r, -e.sup);
        a1.add(e.r, e.ws.h1 / e.ws.h - 1.0 / 3);
        b1.add(e.r, -0.25 - cc.k21);
        d1.add(e.r, -1.0 / 25 - cc.kr2);
    }
    for (const auto& e : e2) {
        const CoordinateCurvatures cc = coordinate_curvatures(e.ws, 0.0);
        n2.add(e.r, -e.sup);
        a2.add(e.r, e.ws.h1 / e.ws.h - 1.0 / 5);
        b2.add(e.r, 2 * eps - e.ws.v / (e.ws.h * e.ws.h));
        c2.add(e.r, e.log_g_bold.v - e.r / 2);
        d2.add(e.r, -1.0 / 25 - cc.kr2);
    }
    for (const auto& e : e3) {
        const CoordinateCurvatures cc = coordinate_curvatures(e.ws, 0.0);
        const double F = g.F(e.r);
        n3.add(e.r, -e.sup);
        b3.add(e.r, -F / 2 - cc.k21);
        closed = std::max(closed, std::abs(cc.k21 + F - eps * eps * F * F * F * F));
    }
    for (const Slack* s : {&n1, &n2, &n3, &a1, &b1, &d1, &a2, &b2, &c2, &d2, &b3}) rep.checks.push_back(s->done());
    rep.checks.push_back(tolerance_check("step3.K(Y2,Y1)=eps^2F^4-F", closed, 1e-13));

    const double probe = g.p_eps - 50.0;
    const CoordinateCurvatures pc = coordinate_curvatures(state(probe), c23);
    rep.checks.push_back(tolerance_check("probe.|K(d_r,Y2)| at p-50", std::abs(pc.kr2), 1e-8));
    rep.checks.push_back(tolerance_check("probe.K(d_r,Y2)=-F/2 at p-50", std::abs(pc.kr2 + g.F(probe) / 2), 1e-15));
    return rep;
}

}  // namespace warpcurv

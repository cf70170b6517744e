#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "warpcurv/error.hpp"
#include "warpcurv/verifier.hpp"
#include "warpcurv/warp_builders.hpp"

using namespace warpcurv;

namespace {

namespace fs = std::filesystem;

constexpr int exit_pass = 0;
constexpr int exit_fail = 1;
constexpr int exit_usage = 2;
constexpr int exit_io = 3;

int exit_code(ErrorKind kind) { return kind == ErrorKind::io ? exit_io : exit_usage; }

/// Writes to a sibling temporary file, then renames it over the target.
void write_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::io, "cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) throw Error(ErrorKind::io, "write to " + tmp.string() + " failed");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(ErrorKind::io, "cannot rename onto " + path.string());
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw Error(ErrorKind::io, "cannot create directory " + dir.string());
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// Flat key=value config; keys are long flag names. Entries whose flag already appears on
/// the command line are dropped, so flags override the file.
std::vector<std::string> apply_config(const std::vector<std::string>& args) {
    std::optional<std::string> path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (!path) return args;
    std::vector<std::string> out = args;
    std::istringstream in(read_file(*path));
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::parameter, *path + ":" + std::to_string(lineno) + ": expected key=value");
        }
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        while (!key.empty() && key[0] == '-') key.erase(0, 1);
        const std::string flag = "--" + key;
        bool given = false;
        for (const auto& a : args) given = given || a == flag || a.rfind(flag + "=", 0) == 0;
        if (!given) out.push_back(flag + "=" + value);
    }
    return out;
}

struct ParamFlags {
    double eps = 0.1;
    std::optional<double> sigma;
    std::optional<double> delta;
    bool strict = false;

    void add_to(CLI::App* app) {
        app->add_option("--eps", eps, "construction parameter epsilon")->capture_default_str();
        app->add_option("--sigma", sigma, "smoothing window half-width (default eps^4/8)");
        app->add_option("--delta", delta, "mollifier width (default sigma/16384)");
        app->add_flag("--strict", strict, "strict parameter regime");
    }

    [[nodiscard]] EpsilonParams build() const {
        if (!(eps > 0.0 && eps < 0.3)) throw Error(ErrorKind::parameter, "eps must lie in (0, 0.3)");
        EpsilonParams p = default_params(eps);
        p.strict_regime = strict;
        if (sigma) {
            p.sigma = *sigma;
            if (!delta) p.delta = *sigma / 16384.0;
        }
        if (delta) p.delta = *delta;
        validate(p);
        return p;
    }
};

void print_failed_invariants(const ProfileReport& rep) {
    for (const auto& c : rep.checks) {
        if (!c.pass) std::cout << "  profile " << rep.profile << ": " << c.name << " FAILED (" << c.detail << ")\n";
    }
}

// ---------------------------------------------------------------------------

struct ChnFlags {
    double rmin = 0.01;
    double rmax = 10.0;
    int grid = 1000;
    int pairs = 10000;
    std::uint64_t seed = 20261019;
    std::string report = "chn_report.json";
};

int cmd_verify_chn(const ChnFlags& f) {
    ChnGridSpec spec;
    spec.rmin = f.rmin;
    spec.rmax = f.rmax;
    spec.points = f.grid;
    spec.pairs = f.pairs;
    spec.seed = f.seed;
    const ChnReport rep = verify_chn_suite(spec);
    write_atomic(f.report, to_json(rep));
    for (const auto& c : rep.checks) {
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "  " << c.detail << "\n";
    }
    std::printf("pinching: min %.17g max %.17g\n", rep.pinching_min, rep.pinching_max);
    std::cout << "report: " << f.report << "\n";
    return rep.pass() ? exit_pass : exit_fail;
}

struct ScanFlags {
    ParamFlags params;
    double threshold = 0.0;
    int grid = 2000;
    int window_grid = 500;
    int c23_count = 21;
    double below = 20.0;
    double above = 10.0;
    std::string out_dir = ".";
};

int cmd_scan(const ScanFlags& f) {
    const EpsilonParams p = f.params.build();
    const VProfile v = build_v(p);
    const HProfile h = build_h(p);
    print_failed_invariants(verify_profile_invariants(v));
    print_failed_invariants(verify_profile_invariants(h));

    ScanGridSpec grid;
    grid.points_per_interval = f.grid;
    grid.points_per_window = f.window_grid;
    grid.below = f.below;
    grid.above = f.above;
    if (f.c23_count < 2) throw Error(ErrorKind::parameter, "c23-count must be at least 2");
    grid.c23.clear();
    for (int i = 0; i < f.c23_count; ++i) grid.c23.push_back(-0.5 + static_cast<double>(i) / (f.c23_count - 1));
    for (double c : {-0.5, 0.0, 0.5}) {
        if (std::find(grid.c23.begin(), grid.c23.end(), c) == grid.c23.end()) grid.c23.push_back(c);
    }
    ScanThresholds t;
    t.global = f.threshold;
    const CurvatureScanReport rep = verify_negative_curvature(v, h, t, grid);

    const fs::path dir(f.out_dir);
    ensure_dir(dir);
    write_atomic(dir / "profile.json", profiles_to_json(v, h, nullptr));
    write_atomic(dir / "scan.csv", scan_csv(rep.rows));
    write_atomic(dir / "scan_report.json", to_json(rep));

    for (const auto& ir : rep.intervals) {
        std::printf("%-6s [%.6g, %.6g] points %5d  max K %.6e at r = %.10g\n", ir.interval.name.c_str(),
                    ir.interval.lo, ir.interval.hi, ir.points, ir.max_k, ir.argmax_r);
    }
    for (const auto& c : rep.checks) {
        if (!c.pass) std::cout << "inequality FAILED: " << c.name << " (margin " << c.margin << ")\n";
    }
    std::printf("global max K %.6e (threshold %g): %s\n", rep.global_max, f.threshold, rep.pass() ? "PASS" : "FAIL");
    return rep.pass() ? exit_pass : exit_fail;
}

struct ARegFlags {
    ParamFlags params;
    int kmax = 3;
    int n = 2;
    int tail_points = 1000;
    int grid = 2000;
    std::string out_dir = ".";
};

int cmd_aregular(const ARegFlags& f) {
    if (f.kmax > 6) throw Error(ErrorKind::guard, "kmax " + std::to_string(f.kmax) + " exceeds 6");
    if (f.n < 2) throw Error(ErrorKind::parameter, "complex dimension n must be at least 2");
    const EpsilonParams p = f.params.build();
    const VProfile v = build_v(p);
    const HProfile h = build_h(p);
    const GProfile g = build_g(p, h);
    const StructureConstants sc = structure_from_complex(standard_complex_structure(f.n - 1));
    ARegGridSpec grid;
    grid.tail_points = f.tail_points;
    grid.step_points = f.grid;
    const ARegularityReport rep = verify_aregularity(v, g, sc, f.kmax, grid);

    const fs::path dir(f.out_dir);
    ensure_dir(dir);
    write_atomic(dir / "aregular_report.json", to_json(rep));
    write_atomic(dir / "closure_table.txt", closure_table_text(rep));

    for (std::size_t k = 0; k < rep.closure_bound.size(); ++k) {
        std::printf("k=%zu  components %zu  bound %.6e\n", k, rep.closure_nonzero[k], rep.closure_bound[k]);
    }
    for (const auto& c : rep.checks) std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "  " << c.detail << "\n";
    for (const auto& d : rep.derivatives) {
        if (!d.pass) std::cout << "FAIL derivative bound " << d.component << " k=" << d.order << "\n";
    }
    std::cout << "A-regularity: " << (rep.pass() ? "PASS" : "FAIL") << "\n";
    return rep.pass() ? exit_pass : exit_fail;
}

struct SmoothFlags {
    double center = 0.0;
    double left_slope = -1.0;
    double right_slope = 1.0;
    double left_curv = 0.5;
    double right_curv = 0.5;
    double k = 0.0;
    double sigma = 0.1;
    double delta = 0.01;
    int points = 1000;
    std::string out = "smooth_demo.csv";
};

int cmd_smooth_demo(const SmoothFlags& f) {
    if (!(f.left_curv > f.k) || !(f.right_curv > f.k)) {
        throw Error(ErrorKind::parameter, "piece curvatures must exceed k");
    }
    if (f.points < 2) throw Error(ErrorKind::parameter, "points must be at least 2");
    // f_i(r) = curv_i / 2 (r - c)^2 + slope_i (r - c), joined continuously at c.
    const Expr left = Expr::sum({Expr::quadratic(0.5 * f.left_curv, f.center), Expr::affine(f.left_slope, f.center, 0.0)});
    const Expr right =
        Expr::sum({Expr::quadratic(0.5 * f.right_curv, f.center), Expr::affine(f.right_slope, f.center, 0.0)});
    const PiecewiseExpr base({f.center}, {left, right});
    if (!check_splice_convexity(PiecewiseExpr(left), PiecewiseExpr(right), f.center)) {
        throw Error(ErrorKind::convexity_violation, "left slope exceeds right slope at the joint");
    }
    const SmoothedFunction sf = smooth_at(base, f.center, f.delta, f.sigma);
    const double margin = min_second_derivative_margin(sf, 0, f.k, f.points);

    bool outside_exact = true;
    for (double x : {f.center - 3 * f.sigma, f.center - 1.5 * f.sigma, f.center + 1.5 * f.sigma, f.center + 3 * f.sigma}) {
        const Jet a = sf.eval(x);
        const Jet b = base.eval(x);
        outside_exact = outside_exact && a.v == b.v && a.d1 == b.d1 && a.d2 == b.d2;
    }
    const auto probe = c1_convergence_probe(base, f.center, f.sigma, {f.delta, f.delta / 10, f.delta / 100});
    bool monotone = true;
    for (std::size_t i = 1; i < probe.size(); ++i) {
        monotone = monotone && probe[i].sup_value <= probe[i - 1].sup_value + 1e-12 &&
                   probe[i].sup_slope <= probe[i - 1].sup_slope + 1e-12;
    }

    std::string csv = "r,base,base_d1,base_d2,smooth,smooth_d1,smooth_d2\n";
    char buf[512];
    for (int i = 0; i < f.points; ++i) {
        const double x = f.center - 2 * f.sigma + 4 * f.sigma * i / (f.points - 1);
        const Jet b = base.eval(x);
        const Jet s = sf.eval(x);
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", x, b.v, b.d1, b.d2, s.v, s.d1,
                      s.d2);
        csv += buf;
    }
    write_atomic(f.out, csv);

    std::printf("min f'' - k on the window: %.6e  %s\n", margin, margin > 0 ? "PASS" : "FAIL");
    std::printf("equal to base outside the window: %s\n", outside_exact ? "PASS" : "FAIL");
    for (const auto& row : probe) {
        std::printf("delta %.3e  sup|f - base| %.3e  sup|f' - base'| %.3e\n", row.delta, row.sup_value, row.sup_slope);
    }
    std::printf("C1 deviation decreasing with delta: %s\n", monotone ? "PASS" : "FAIL");
    return margin > 0 && outside_exact && monotone ? exit_pass : exit_fail;
}

struct ExportFlags {
    ParamFlags params;
    bool with_g = false;
    std::string out = "profile.json";
    std::string check;
    std::string curves;
    double rmin = -10.0;
    double rmax = 2.0;
    int points = 1000;
};

int cmd_export_profile(const ExportFlags& f) {
    if (!f.check.empty()) {
        const LoadedProfiles lp = profiles_from_json(read_file(f.check));
        std::printf("profile document %s reproduces: eps %.17g, m_eps %.17g\n", f.check.c_str(), lp.h.params.eps,
                    lp.h.m_eps);
        return exit_pass;
    }
    const EpsilonParams p = f.params.build();
    const VProfile v = build_v(p);
    const HProfile h = build_h(p);
    std::optional<GProfile> g;
    if (f.with_g) g = build_g(p, h);
    write_atomic(f.out, profiles_to_json(v, h, g ? &*g : nullptr));
    std::cout << "profile: " << f.out << "\n";
    if (!f.curves.empty()) {
        if (f.points < 2 || !(f.rmax > f.rmin)) throw Error(ErrorKind::parameter, "invalid curve grid");
        std::string csv = g ? "r,log_v,dlog_v,log_h,dlog_h,log_g,dlog_g\n" : "r,log_v,dlog_v,log_h,dlog_h\n";
        char buf[512];
        for (int i = 0; i < f.points; ++i) {
            const double r = f.rmin + (f.rmax - f.rmin) * i / (f.points - 1);
            const Jet lv = log_eval(v, r);
            const Jet lh = log_eval(h, r);
            int n = std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g", r, lv.v, lv.d1, lh.v, lh.d1);
            if (g) {
                const Jet lg = log_eval(*g, r);
                std::snprintf(buf + n, sizeof buf - static_cast<std::size_t>(n), ",%.17g,%.17g", lg.v, lg.d1);
            }
            csv += buf;
            csv += "\n";
        }
        write_atomic(f.curves, csv);
        std::cout << "curves: " << f.curves << "\n";
    }
    return exit_pass;
}

int run(int argc, char** argv) {
    CLI::App app{"warpcurv: warped-product curvature construction and verification"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "flat key=value file; flags override it");

    ChnFlags chn;
    auto* c_chn = app.add_subcommand("verify-chn", "complex hyperbolic identity and pinching suite");
    c_chn->add_option("--config", config_path, "flat key=value file; flags override it");
    c_chn->add_option("--rmin", chn.rmin)->capture_default_str();
    c_chn->add_option("--rmax", chn.rmax)->capture_default_str();
    c_chn->add_option("--grid", chn.grid, "number of r grid points")->check(CLI::PositiveNumber)->capture_default_str();
    c_chn->add_option("--pairs", chn.pairs, "random plane pairs of each kind")->capture_default_str();
    c_chn->add_option("--seed", chn.seed)->capture_default_str();
    c_chn->add_option("--report", chn.report, "JSON report path")->capture_default_str();

    ScanFlags scan;
    auto* c_scan = app.add_subcommand("scan", "build v and h, then scan sectional curvature over six intervals");
    c_scan->add_option("--config", config_path, "flat key=value file; flags override it");
    scan.params.add_to(c_scan);
    c_scan->add_option("--threshold", scan.threshold, "pass iff global max K is below this")->capture_default_str();
    c_scan->add_option("--grid", scan.grid, "points per interval")->check(CLI::Range(2, 100000000))->capture_default_str();
    c_scan->add_option("--window-grid", scan.window_grid, "points per smoothing window")->capture_default_str();
    c_scan->add_option("--c23-count", scan.c23_count, "evenly spaced c23 values on [-1/2, 1/2]")->capture_default_str();
    c_scan->add_option("--below", scan.below, "extent of the lower tail interval")->capture_default_str();
    c_scan->add_option("--above", scan.above, "extent of the upper interval")->capture_default_str();
    c_scan->add_option("--out-dir", scan.out_dir)->capture_default_str();

    ARegFlags areg;
    auto* c_areg = app.add_subcommand("aregular", "A-regularity program for the metric with warps v and g");
    c_areg->add_option("--config", config_path, "flat key=value file; flags override it");
    areg.params.add_to(c_areg);
    c_areg->add_option("--kmax", areg.kmax, "highest covariant derivative order (at most 6)")->capture_default_str();
    c_areg->add_option("--n", areg.n, "complex dimension")->capture_default_str();
    c_areg->add_option("--tail-points", areg.tail_points)->capture_default_str();
    c_areg->add_option("--grid", areg.grid, "points per step interval")->capture_default_str();
    c_areg->add_option("--out-dir", areg.out_dir)->capture_default_str();

    SmoothFlags sm;
    auto* c_sm = app.add_subcommand("smooth-demo", "smooth one convex splice and certify the result");
    c_sm->add_option("--config", config_path, "flat key=value file; flags override it");
    c_sm->add_option("--center", sm.center)->capture_default_str();
    c_sm->add_option("--left-slope", sm.left_slope)->capture_default_str();
    c_sm->add_option("--right-slope", sm.right_slope)->capture_default_str();
    c_sm->add_option("--left-curv", sm.left_curv, "f'' of the left piece")->capture_default_str();
    c_sm->add_option("--right-curv", sm.right_curv, "f'' of the right piece")->capture_default_str();
    c_sm->add_option("--k", sm.k, "lower bound to certify for f''")->capture_default_str();
    c_sm->add_option("--sigma", sm.sigma)->capture_default_str();
    c_sm->add_option("--delta", sm.delta)->capture_default_str();
    c_sm->add_option("--points", sm.points)->capture_default_str();
    c_sm->add_option("--out", sm.out, "CSV path")->capture_default_str();

    ExportFlags ex;
    auto* c_ex = app.add_subcommand("export-profile", "write the profile document (and optional curves)");
    c_ex->add_option("--config", config_path, "flat key=value file; flags override it");
    ex.params.add_to(c_ex);
    c_ex->add_flag("--with-g", ex.with_g, "include the A-regular warp g");
    c_ex->add_option("--out", ex.out)->capture_default_str();
    c_ex->add_option("--check", ex.check, "load a profile document and verify it instead");
    c_ex->add_option("--curves", ex.curves, "CSV of log-profiles on an r grid");
    c_ex->add_option("--rmin", ex.rmin)->capture_default_str();
    c_ex->add_option("--rmax", ex.rmax)->capture_default_str();
    c_ex->add_option("--points", ex.points)->capture_default_str();

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        args = apply_config(args);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        if (*c_chn) return cmd_verify_chn(chn);
        if (*c_scan) return cmd_scan(scan);
        if (*c_areg) return cmd_aregular(areg);
        if (*c_sm) return cmd_smooth_demo(sm);
        if (*c_ex) return cmd_export_profile(ex);
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    }
    return exit_usage;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }

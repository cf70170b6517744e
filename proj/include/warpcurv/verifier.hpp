#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "warpcurv/curvature_engine.hpp"
#include "warpcurv/frame_algebra.hpp"
#include "warpcurv/warp_builders.hpp"

namespace warpcurv {

/// Worker count for scans: WARPCURV_THREADS if set to a positive integer, else the
/// hardware concurrency.
[[nodiscard]] int worker_count();

/// 21 evenly spaced values on [-1/2, 1/2] (which already contain 0 and +-1/2).
[[nodiscard]] std::vector<double> default_c23_grid();

// ---------------------------------------------------------------------------
// Complex hyperbolic suite

struct ChnGridSpec {
    double rmin = 0.01;
    double rmax = 10.0;
    int points = 1000;
    std::vector<double> c23 = {0.0, 0.1, -0.1, 0.25, -0.25, 0.5, -0.5};
    /// Random pairs of each kind (generic, non-generic), reused at every grid point.
    int pairs = 10000;
    std::uint64_t seed = 20261019;
    double identity_tolerance = 1e-12;
    double pinching_tolerance = 1e-9;
};

struct ChnReport {
    ChnGridSpec spec;
    std::vector<InvariantCheck> checks;
    /// Extremes over sampled pairs and over the plane search.
    double pinching_min = 0.0;
    double pinching_max = 0.0;
    [[nodiscard]] bool pass() const;
};

/// Throws parameter on an empty or inverted grid; everything else is a report entry.
[[nodiscard]] ChnReport verify_chn_suite(const ChnGridSpec& spec = {});

// ---------------------------------------------------------------------------
// Six-interval negativity scan

struct Interval {
    std::string name;
    double lo = 0.0;
    double hi = 0.0;
};

/// n < m < rho < r^- < r^+ and the six intervals between them, indexed by proof step:
/// 0 = [r^+, r^+ + above], 1 = [r^-, r^+], 2 = [rho, r^-], 3 = [m, rho], 4 = [n, m],
/// 5 = [n - below, n].
struct IntervalPartition {
    double n = 0.0, m = 0.0, rho = 0.0, r_minus = 0.0, r_plus = 0.0;
    std::array<Interval, 6> intervals;

    /// Throws construction unless the breakpoints are strictly increasing.
    IntervalPartition(const VProfile& v, const HProfile& h, double below = 20.0, double above = 10.0);
    /// Step index whose interval contains r (the lower-numbered step on shared endpoints), or -1.
    [[nodiscard]] int step_of(double r) const;
};

struct ScanGridSpec {
    int points_per_interval = 2000;
    int points_per_window = 500;
    double below = 20.0;
    double above = 10.0;
    std::vector<double> c23 = default_c23_grid();
    SupSearchSpec search;
    bool keep_rows = true;
    /// 0 means worker_count().
    int threads = 0;
};

struct ScanThresholds {
    /// Global pass also requires max K below this, when supplied.
    std::optional<double> global;
    /// Per-interval pass flags compare against these (step order).
    std::array<double, 6> interval{0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
};

struct IntervalResult {
    Interval interval;
    int points = 0;
    double max_k = 0.0;
    double argmax_r = 0.0;
    double argmax_c23 = 0.0;
    PlanePair argmax_plane;
    double threshold = 0.0;
    bool pass = false;
    /// max |Delta supK / Delta r| between neighbouring grid points.
    double lipschitz = 0.0;
};

/// One CSV row; c0 is c23 = 0 and cmax is c23 = 1/2.
struct ScanRow {
    double r = 0.0, v = 0.0, h = 0.0;
    double k21 = 0.0, k32_c0 = 0.0, k32_cmax = 0.0, kr1 = 0.0, kr2 = 0.0, mixed_cmax = 0.0;
    double supK = 0.0;
};

struct CurvatureScanReport {
    EpsilonParams params;
    std::array<IntervalResult, 6> intervals;
    double global_max = 0.0;
    int global_step = -1;
    std::optional<double> threshold;
    std::vector<InvariantCheck> checks;
    std::vector<ScanRow> rows;

    [[nodiscard]] bool pass() const;
    [[nodiscard]] bool checks_pass() const;
};

/// Throws profile_mismatch when the profiles were built from different parameters.
[[nodiscard]] CurvatureScanReport verify_negative_curvature(const VProfile& v, const HProfile& h,
                                                            const ScanThresholds& thresholds = {},
                                                            const ScanGridSpec& grid = {});

// ---------------------------------------------------------------------------
// Tail ring of the A-regular metric: polynomials in F and u = 1/g

class Rational {
public:
    Rational() = default;
    Rational(long long num, long long den = 1);

    [[nodiscard]] long long num() const { return num_; }
    [[nodiscard]] long long den() const { return den_; }
    [[nodiscard]] double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
    [[nodiscard]] bool is_zero() const { return num_ == 0; }
    [[nodiscard]] std::string to_string() const;

    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a) { return Rational(-a.num_, a.den_); }
    friend Rational operator*(const Rational& a, const Rational& b);
    friend bool operator==(const Rational&, const Rational&) = default;

private:
    long long num_ = 0;
    long long den_ = 1;
};

/// F^f u^u eps^eps times a product of structure-constant symbols c_ij (i < j, ids i * 64 + j).
struct TailMonomial {
    int f = 0;
    int u = 0;
    int eps = 0;
    std::vector<int> c;
    auto operator<=>(const TailMonomial&) const = default;
};

class TailPolynomial {
public:
    TailPolynomial() = default;
    explicit TailPolynomial(Rational constant);

    [[nodiscard]] static TailPolynomial F();
    [[nodiscard]] static TailPolynomial u();
    [[nodiscard]] static TailPolynomial eps();
    /// c_ij with 1-based frame indices; c_ji = -c_ij, c_ii = 0.
    [[nodiscard]] static TailPolynomial c(int i, int j);

    [[nodiscard]] const std::map<TailMonomial, Rational>& terms() const { return terms_; }
    [[nodiscard]] bool is_zero() const { return terms_.empty(); }

    TailPolynomial& operator+=(const TailPolynomial& o);
    TailPolynomial& operator-=(const TailPolynomial& o);
    friend TailPolynomial operator+(TailPolynomial a, const TailPolynomial& b) { return a += b; }
    friend TailPolynomial operator-(TailPolynomial a, const TailPolynomial& b) { return a -= b; }
    friend TailPolynomial operator-(const TailPolynomial& a);
    friend TailPolynomial operator*(const TailPolynomial& a, const TailPolynomial& b);
    friend TailPolynomial operator*(const Rational& s, const TailPolynomial& a);
    friend bool operator==(const TailPolynomial&, const TailPolynomial&) = default;

    /// d/dr through F' = F/2 - F^2, u' = -F u.
    [[nodiscard]] TailPolynomial derivative() const;
    [[nodiscard]] double evaluate(double F, double u, double eps, const StructureConstants& sc) const;
    /// sum |coef| eps^e (1/2)^(deg c) (1/2)^f tau^(-u), the bound over F in (0, 1/2],
    /// u in (0, 1/tau], |c_ij| <= 1/2.
    [[nodiscard]] double bound(double eps, double tau) const;
    /// Smallest F-degree over the terms; -1 for the zero polynomial.
    [[nodiscard]] int min_f_degree() const;
    /// e.g. "-1/2 F" or "-1/4 u^2 - 3 c23^2 u^2 - F^2"; "0" for zero.
    [[nodiscard]] std::string to_string() const;

private:
    void add_term(const TailMonomial& m, const Rational& r);
    std::map<TailMonomial, Rational> terms_;
};

/// Components of nabla^k R in the frame (d_r, Y_1, ..., Y_{2n-1}) on the tail.
struct ClosureOrder {
    int k = 0;
    /// Index (i_1, ..., i_{4+k}) at sum i_j N^{4+k-j}, N = frame size; first index differentiates last.
    std::vector<TailPolynomial> components;
    std::size_t nonzero = 0;
    int min_f_degree = -1;
};

struct CurvatureClosure {
    int frame_size = 0;
    std::vector<ClosureOrder> orders;

    [[nodiscard]] const TailPolynomial& at(int k, std::span<const int> index) const;
    /// max over components of the coefficient-norm bound.
    [[nodiscard]] double bound(int k, double eps, double tau) const;
};

/// Frame connection on the tail, nabla_{e_x} e_y = sum_z gamma(x, y, z) e_z, x, y, z < 2n.
[[nodiscard]] TailPolynomial tail_connection(const StructureConstants& sc, int x, int y, int z);
/// R-components at k = 0, from the warped-product and submersion formulas with v = eps e^r,
/// g = tau + e^{r/2}. Uses sum_j c_aj c_bj = delta_ab / 4.
[[nodiscard]] TailPolynomial tail_curvature(const StructureConstants& sc, int a, int b, int c, int d);
/// Throws guard for kmax > 6 and parameter for kmax < 0 or n < 2.
[[nodiscard]] CurvatureClosure covariant_derivative_closure(int kmax, const StructureConstants& sc);

/// The five named components (k21, k32, kr1, kr2, mixed) as frame indices.
struct NamedComponent {
    const char* name;
    std::array<int, 4> index;
};
[[nodiscard]] std::span<const NamedComponent> named_components();

// ---------------------------------------------------------------------------
// Tail identities and the A-regularity program

struct IdentityResidual {
    std::string name;
    /// max |lhs - rhs| / max(1, |rhs|) over the grid.
    double residual = 0.0;
};

struct TailIdentityTable {
    std::vector<IdentityResidual> rows;
    [[nodiscard]] double worst() const;
};

/// Throws domain when a grid point lies above p_eps - sigma (into the smoothing windows).
/// With `v` the circle warp is read from its profile, otherwise eps e^r is used.
[[nodiscard]] TailIdentityTable tail_identities(const GProfile& g, std::span<const double> r_grid,
                                                const VProfile* v = nullptr);

struct ARegGridSpec {
    int tail_points = 1000;
    double tail_span = 60.0;
    int step_points = 2000;
    int points_per_window = 500;
    double fd_step = 1e-4;
    std::vector<double> c23 = default_c23_grid();
    SupSearchSpec search;
    int threads = 0;
};

struct DerivativeBound {
    std::string component;
    int order = 0;
    std::string polynomial;
    double symbolic_bound = 0.0;
    double numeric_sup = 0.0;
    bool pass = false;
};

struct ARegularityReport {
    EpsilonParams params;
    int kmax = 0;
    /// bound[k] = max over all frame components of nabla^k R.
    std::vector<double> closure_bound;
    std::vector<std::size_t> closure_nonzero;
    std::vector<int> closure_min_f_degree;
    /// k = 0 polynomials of every nonzero component, "R(a,b,c,d) = ..." lines.
    std::vector<std::string> table;
    std::vector<DerivativeBound> derivatives;
    TailIdentityTable identities;
    /// max relative disagreement between the k = 0 polynomials and direct evaluation.
    double agreement = 0.0;
    std::vector<InvariantCheck> checks;

    [[nodiscard]] bool pass() const;
};

[[nodiscard]] ARegularityReport verify_aregularity(const VProfile& v, const GProfile& g,
                                                   const StructureConstants& sc, int kmax = 3,
                                                   const ARegGridSpec& grid = {});

// ---------------------------------------------------------------------------
// Serialization

[[nodiscard]] std::string to_json(const ChnReport& report);
[[nodiscard]] std::string to_json(const CurvatureScanReport& report);
[[nodiscard]] std::string to_json(const ARegularityReport& report);
/// Header r,v,h,k21,k32_c0,k32_cmax,kr1,kr2,mixed_cmax,supK; 17 significant digits.
[[nodiscard]] std::string scan_csv(std::span<const ScanRow> rows);
/// Symbolic table, one "k=<k> <component> = <polynomial>" line per named component and order,
/// followed by every nonzero k = 0 frame component.
[[nodiscard]] std::string closure_table_text(const ARegularityReport& report);

}  // namespace warpcurv

#include <cstdio>
#include <string>

#include "json.hpp"
#include "warpcurv/verifier.hpp"

namespace warpcurv {

namespace {

using Json = nlohmann::ordered_json;

Json checks_json(const std::vector<InvariantCheck>& checks) {
    Json arr = Json::array();
    for (const auto& c : checks) {
        arr.push_back({{"name", c.name}, {"pass", c.pass}, {"margin", c.margin}, {"detail", c.detail}});
    }
    return arr;
}

Json params_json(const EpsilonParams& p) {
    return {{"eps", p.eps}, {"sigma", p.sigma}, {"delta", p.delta}, {"strict_regime", p.strict_regime}};
}

Json plane_json(const PlanePair& pp) {
    return {{"kind", pp.kind == PlaneKind::generic ? "generic" : "nongeneric"}, {"C", pp.C}, {"D", pp.D}};
}

}  // namespace

std::string to_json(const ChnReport& report) {
    Json j;
    j["command"] = "verify-chn";
    j["pass"] = report.pass();
    j["grid"] = {{"rmin", report.spec.rmin},
                 {"rmax", report.spec.rmax},
                 {"points", report.spec.points},
                 {"c23", report.spec.c23},
                 {"pairs", report.spec.pairs},
                 {"seed", report.spec.seed}};
    j["pinching"] = {{"min", report.pinching_min}, {"max", report.pinching_max}};
    j["checks"] = checks_json(report.checks);
    return j.dump(2) + "\n";
}

std::string to_json(const CurvatureScanReport& report) {
    Json j;
    j["command"] = "scan";
    j["pass"] = report.pass();
    j["params"] = params_json(report.params);
    j["global_max"] = report.global_max;
    j["global_step"] = report.global_step;
    j["threshold"] = report.threshold ? Json(*report.threshold) : Json(nullptr);
    Json iv = Json::array();
    for (const auto& ir : report.intervals) {
        iv.push_back({{"name", ir.interval.name},
                      {"lo", ir.interval.lo},
                      {"hi", ir.interval.hi},
                      {"points", ir.points},
                      {"max_k", ir.max_k},
                      {"argmax_r", ir.argmax_r},
                      {"argmax_c23", ir.argmax_c23},
                      {"argmax_plane", plane_json(ir.argmax_plane)},
                      {"threshold", ir.threshold},
                      {"pass", ir.pass},
                      {"lipschitz", ir.lipschitz}});
    }
    j["intervals"] = iv;
    j["checks_pass"] = report.checks_pass();
    j["checks"] = checks_json(report.checks);
    return j.dump(2) + "\n";
}

std::string to_json(const ARegularityReport& report) {
    Json j;
    j["command"] = "aregular";
    j["pass"] = report.pass();
    j["params"] = params_json(report.params);
    j["kmax"] = report.kmax;
    Json orders = Json::array();
    for (std::size_t k = 0; k < report.closure_bound.size(); ++k) {
        orders.push_back({{"k", k},
                          {"bound", report.closure_bound[k]},
                          {"nonzero_components", report.closure_nonzero[k]},
                          {"min_F_degree", report.closure_min_f_degree[k]}});
    }
    j["closure"] = orders;
    Json ders = Json::array();
    for (const auto& d : report.derivatives) {
        ders.push_back({{"component", d.component},
                        {"order", d.order},
                        {"polynomial", d.polynomial},
                        {"symbolic_bound", d.symbolic_bound},
                        {"numeric_sup", d.numeric_sup},
                        {"pass", d.pass}});
    }
    j["derivatives"] = ders;
    Json ids = Json::array();
    for (const auto& r : report.identities.rows) ids.push_back({{"identity", r.name}, {"residual", r.residual}});
    j["tail_identities"] = ids;
    j["agreement"] = report.agreement;
    j["checks"] = checks_json(report.checks);
    j["note"] = "smoothing windows are compact and covered by continuity; the symbolic bounds apply to the tail";
    return j.dump(2) + "\n";
}

std::string scan_csv(std::span<const ScanRow> rows) {
    std::string out = "r,v,h,k21,k32_c0,k32_cmax,kr1,kr2,mixed_cmax,supK\n";
    char buf[512];
    for (const ScanRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.r, r.v, r.h,
                      r.k21, r.k32_c0, r.k32_cmax, r.kr1, r.kr2, r.mixed_cmax, r.supK);
        out += buf;
    }
    return out;
}

std::string closure_table_text(const ARegularityReport& report) {
    std::string out;
    for (const auto& d : report.derivatives) {
        out += "k=" + std::to_string(d.order) + " " + d.component + " = " + d.polynomial + "\n";
    }
    out += "\n";
    for (const auto& line : report.table) out += "k=0 " + line + "\n";
    return out;
}

}  // namespace warpcurv

#include <cstdio>
#include <string>

#include "json.hpp"
#include "warpcurv/error.hpp"
#include "warpcurv/warp_builders.hpp"

namespace warpcurv {

namespace {

using nlohmann::ordered_json;

std::string exact(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double parse_exact(const ordered_json& j, const std::string& key) {
    if (!j.contains(key)) throw Error(ErrorKind::io, "profile document lacks '" + key + "'");
    const auto& v = j.at(key);
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        std::size_t used = 0;
        double x = 0.0;
        try {
            x = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size()) throw Error(ErrorKind::io, "'" + key + "' is not a decimal number: " + s);
        return x;
    }
    if (v.is_number()) return v.get<double>();
    throw Error(ErrorKind::io, "'" + key + "' must be a number or decimal string");
}

ordered_json windows_json(const char* profile, const SmoothedFunction& f) {
    ordered_json out = ordered_json::array();
    for (const Window& w : f.windows()) {
        out.push_back({{"profile", profile},
                       {"center", exact(w.center)},
                       {"sigma", exact(w.sigma)},
                       {"delta", exact(w.delta)}});
    }
    return out;
}

void compare(const ordered_json& stored, const ordered_json& rebuilt, const std::string& where) {
    if (stored != rebuilt) {
        throw Error(ErrorKind::profile_mismatch,
                    where + " differs after rebuild: stored " + stored.dump() + ", rebuilt " + rebuilt.dump());
    }
}

ordered_json breakpoints_json(const VProfile& v, const HProfile& h, const GProfile* g) {
    ordered_json b;
    b["r_eps"] = exact(v.r_eps);
    b["r_minus"] = exact(v.r_minus);
    b["r_zero"] = exact(v.r_zero);
    b["r_plus"] = exact(v.r_plus);
    b["rho_eps"] = exact(h.rho_eps);
    b["z_eps"] = exact(h.z_eps);
    b["m_eps"] = exact(h.m_eps);
    b["r_star"] = exact(h.r_star);
    b["n_eps"] = exact(h.n_eps);
    if (g != nullptr) {
        b["tau_eps"] = exact(g->tau_eps);
        b["o_eps"] = exact(g->o_eps);
        b["p_eps"] = exact(g->p_eps);
        b["r_g"] = exact(g->r_g);
    }
    return b;
}

ordered_json all_windows(const VProfile& v, const HProfile& h, const GProfile* g) {
    ordered_json w = windows_json("v", v.log_v);
    for (auto& x : windows_json("h", h.log_h)) w.push_back(x);
    if (g != nullptr) {
        for (auto& x : windows_json("g", g->log_g)) w.push_back(x);
    }
    return w;
}

}  // namespace

std::string profiles_to_json(const VProfile& v, const HProfile& h, const GProfile* g) {
    const EpsilonParams& p = v.params;
    ordered_json doc;
    doc["eps"] = exact(p.eps);
    doc["sigma"] = exact(p.sigma);
    doc["delta"] = exact(p.delta);
    doc["strict_regime"] = p.strict_regime;
    doc["bend_fraction"] = exact(p.bend_fraction);
    doc["q_coeffs"] = {exact(h.q0), exact(h.q1), exact(h.q2)};
    doc["breakpoints"] = breakpoints_json(v, h, g);
    doc["windows"] = all_windows(v, h, g);
    return doc.dump(2) + "\n";
}

LoadedProfiles profiles_from_json(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const ordered_json::parse_error& e) {
        throw Error(ErrorKind::io, std::string("profile document is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw Error(ErrorKind::io, "profile document must be a JSON object");

    EpsilonParams p;
    p.eps = parse_exact(doc, "eps");
    p.sigma = parse_exact(doc, "sigma");
    p.delta = parse_exact(doc, "delta");
    if (doc.contains("strict_regime")) p.strict_regime = doc.at("strict_regime").get<bool>();
    if (doc.contains("bend_fraction")) p.bend_fraction = parse_exact(doc, "bend_fraction");

    LoadedProfiles out;
    out.v = build_v(p);
    out.h = build_h(p);
    const bool with_g = doc.contains("breakpoints") && doc.at("breakpoints").contains("o_eps");
    if (with_g) out.g = build_g(p, out.h);
    const GProfile* g = with_g ? &out.g : nullptr;

    if (doc.contains("breakpoints")) compare(doc.at("breakpoints"), breakpoints_json(out.v, out.h, g), "breakpoints");
    if (doc.contains("q_coeffs")) {
        compare(doc.at("q_coeffs"), ordered_json{exact(out.h.q0), exact(out.h.q1), exact(out.h.q2)}, "q_coeffs");
    }
    if (doc.contains("windows")) compare(doc.at("windows"), all_windows(out.v, out.h, g), "windows");
    return out;
}

}  // namespace warpcurv

#pragma once

#include <cmath>
#include <string>

#include <json.hpp>

#include "homotopy.hpp"

namespace toric::io {

using json = nlohmann::json;

inline constexpr int report_version = 2;
inline constexpr const char* library_version = "0.3.0";

/// Malformed or mismatched input documents.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline json num(double x)
{
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

inline double get_num(const json& j)
{
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw FormatError("expected a number, got " + j.dump());
}

inline const json& field(const json& j, const char* key)
{
    if (!j.is_object()) throw FormatError(std::string("expected an object holding '") + key + "'");
    auto it = j.find(key);
    if (it == j.end()) throw FormatError(std::string("missing field '") + key + "'");
    return *it;
}

inline json to_json(cplx c) { return {{"re", num(c.real())}, {"im", num(c.imag())}}; }

inline cplx get_cplx(const json& j)
{
    if (j.is_number()) return {j.get<double>(), 0.0};
    return {get_num(field(j, "re")), get_num(field(j, "im"))};
}

inline json to_json(const VecC& v)
{
    json a = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(to_json(v[k]));
    return a;
}

inline VecC get_vecc(const json& j)
{
    if (!j.is_array()) throw FormatError("expected an array of complex numbers");
    VecC v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t k = 0; k < j.size(); ++k) v[static_cast<Eigen::Index>(k)] = get_cplx(j[k]);
    return v;
}

inline json to_json(const VecR& v)
{
    json a = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(num(v[k]));
    return a;
}

inline VecR get_vecr(const json& j)
{
    if (!j.is_array()) throw FormatError("expected an array of numbers");
    VecR v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t k = 0; k < j.size(); ++k) v[static_cast<Eigen::Index>(k)] = get_num(j[k]);
    return v;
}

/// Integers stay integers; other rationals are written "p/q".
inline json to_json(const Rat& r)
{
    if (r.denominator() == 1) return r.numerator();
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

inline Rat get_rat(const json& j)
{
    if (j.is_number_integer()) return Rat(j.get<long long>());
    if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        try {
            std::size_t pos = 0;
            long long p = std::stoll(s, &pos);
            if (pos == s.size()) return Rat(p);
            if (s[pos] != '/') throw FormatError("bad rational '" + s + "'");
            std::size_t pos2 = 0;
            long long q = std::stoll(s.substr(pos + 1), &pos2);
            if (pos + 1 + pos2 != s.size() || q == 0) throw FormatError("bad rational '" + s + "'");
            return Rat(p, q);
        } catch (const std::logic_error&) {
            throw FormatError("bad rational '" + s + "'");
        }
    }
    throw FormatError("expected an integer or \"p/q\" exponent, got " + j.dump());
}

inline json to_json(const std::vector<RowQ>& m)
{
    json a = json::array();
    for (const auto& r : m) {
        json row = json::array();
        for (const auto& x : r) row.push_back(to_json(x));
        a.push_back(row);
    }
    return a;
}

inline std::vector<RowQ> get_rows(const json& j)
{
    if (!j.is_array()) throw FormatError("expected an array of rows");
    std::vector<RowQ> m;
    for (const auto& row : j) {
        if (!row.is_array()) throw FormatError("expected a row array");
        RowQ r;
        for (const auto& x : row) r.push_back(get_rat(x));
        m.push_back(std::move(r));
    }
    return m;
}

inline json to_json(const LaurentSystem& f)
{
    json j;
    j["n"] = f.dim();
    json sup = json::array(), coef = json::array();
    for (int i = 0; i < f.dim(); ++i) {
        sup.push_back(to_json(f.tuple()[i].rows()));
        coef.push_back(to_json(VecC(f.row(i))));
    }
    j["supports"] = sup;
    j["coefficients"] = coef;
    return j;
}

inline LaurentSystem get_system(const json& j)
{
    const json& jn = field(j, "n");
    if (!jn.is_number_integer() || jn.get<int>() < 1) throw FormatError("'n' must be a positive integer");
    const int n = jn.get<int>();
    const json& js = field(j, "supports");
    const json& jc = field(j, "coefficients");
    if (!js.is_array() || !jc.is_array()) throw FormatError("'supports' and 'coefficients' must be arrays");
    std::vector<std::vector<RowQ>> rows;
    std::vector<std::vector<cplx>> coef;
    for (const auto& s : js) rows.push_back(get_rows(s));
    for (const auto& c : jc) {
        if (!c.is_array()) throw FormatError("coefficient row must be an array");
        std::vector<cplx> r;
        for (const auto& x : c) r.push_back(get_cplx(x));
        coef.push_back(std::move(r));
    }
    try {
        return LaurentSystem::from_unsorted(n, rows, coef);
    } catch (const Error& e) {
        throw FormatError(std::string("invalid system: ") + e.what());
    }
}

inline LaurentSystem parse_system(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("JSON parse error: ") + e.what());
    }
    return get_system(j);
}

inline json rays_json(const std::vector<RowQ>& rays)
{
    json a = json::array();
    for (const auto& r : rays) a.push_back(primitive_integer(r));
    return a;
}

inline json to_json(const Chart& c)
{
    return {{"Xi", to_json(c.Xi)}, {"theta", to_json(c.theta)}, {"rays", to_json(c.rays)}, {"l", c.l},
            {"k", c.k}, {"Phi", num(c.Phi)}, {"Psi", num(c.Psi)}, {"eps", num(c.eps)}, {"main", c.main}};
}

inline Chart get_chart(const json& j)
{
    Chart c;
    c.Xi = get_rows(field(j, "Xi"));
    c.theta = get_rows(field(j, "theta"));
    c.rays = get_rows(field(j, "rays"));
    c.l = field(j, "l").get<int>();
    c.k = j.value("k", 0);
    c.Phi = get_num(field(j, "Phi"));
    c.Psi = get_num(field(j, "Psi"));
    c.eps = get_num(field(j, "eps"));
    c.main = j.value("main", false);
    const std::size_t n = c.Xi.size();
    if (c.rays.size() != n || c.theta.size() != n || c.l < 0 || c.l > static_cast<int>(n))
        throw FormatError("inconsistent chart dimensions");
    return c;
}

inline json to_json(const ChartPoint& p){ return {{"X", to_json(p.X)}, {"y", to_json(p.y)}}; }

inline ChartPoint get_point(const json& j)
{
    ChartPoint p;
    p.X = get_vecc(field(j, "X"));
    p.y = get_vecc(field(j, "y"));
    return p;
}

inline json to_json(const MonomialAction& S)
{
    return {{"Xi", to_json(S.Xi)}, {"theta", to_json(S.theta)}, {"unimodular", S.unimodular()}};
}

inline json to_json(const NormalFormData& nf)
{
    json blocks = json::array();
    for (const auto& bi : nf.blocks) {
        json sizes = json::array();
        for (const auto& b : bi) sizes.push_back(b.size());
        blocks.push_back(sizes);
    }
    json nu_i = json::array(), s = json::array();
    for (double x : nf.nu_i) nu_i.push_back(num(x));
    for (double x : nf.s) s.push_back(num(x));
    return {{"n", nf.n},         {"l", nf.l},     {"block_sizes", blocks}, {"nu_i", nu_i},
            {"nu", num(nf.nu)},  {"lambda", num(nf.lambda)},                {"s", s},
            {"h_bound", num(nf.h_bound)},         {"smooth", nf.smooth}};
}

inline json to_json(const StepRecord& r)
{
    return {{"s", num(r.s)},         {"beta", num(r.beta)}, {"mu", num(r.mu)},       {"chart", r.chart},
            {"max_x", num(r.max_x)}, {"cstarstar", num(r.cstarstar)},               {"alpha", num(r.alpha)},
            {"d_q", num(r.d_q)},     {"d_x", num(r.d_x)},   {"d_sys", num(r.d_sys)}, {"d_amb", num(r.d_amb)},
            {"mu_true", num(r.mu_true)}};
}

inline StepRecord get_step(const json& j)
{
    StepRecord r;
    r.s = get_num(field(j, "s"));
    r.beta = get_num(field(j, "beta"));
    r.mu = get_num(field(j, "mu"));
    r.chart = field(j, "chart").get<int>();
    r.max_x = get_num(field(j, "max_x"));
    r.cstarstar = get_num(field(j, "cstarstar"));
    r.alpha = get_num(field(j, "alpha"));
    r.d_q = get_num(field(j, "d_q"));
    r.d_x = get_num(field(j, "d_x"));
    r.d_sys = get_num(field(j, "d_sys"));
    r.d_amb = get_num(field(j, "d_amb"));
    r.mu_true = get_num(field(j, "mu_true"));
    return r;
}

inline TrackStatus get_status(const std::string& s)
{
    for (auto t : {TrackStatus::converged, TrackStatus::singular_approach, TrackStatus::domain_exit,
                   TrackStatus::step_limit, TrackStatus::internal_error})
        if (s == status_name(t)) return t;
    throw FormatError("unknown status '" + s + "'");
}

inline json to_json(const TrackReport& r, bool with_log = true)
{
    json j;
    j["version"] = report_version;
    j["status"] = status_name(r.status);
    j["message"] = r.message;
    j["steps"] = r.steps;
    j["L_acc"] = num(r.L_acc);
    j["swaps"] = r.swaps;
    j["swap_newton_steps"] = r.swap_newton_steps;
    json log = json::array();
    if (with_log)
        for (const auto& s : r.log) log.push_back(to_json(s));
    j["log"] = log;
    json sl = json::array();
    for (const auto& s : r.swap_log)
        sl.push_back({{"from", s.from}, {"to", s.to}, {"s", num(s.s)}, {"continuity", num(s.continuity)},
                      {"newton_steps", s.newton_steps}});
    j["swap_log"] = sl;
    json ch = json::array();
    for (const auto& c : r.charts)
        ch.push_back({{"main", c.main}, {"l", c.l}, {"Xi", to_json(c.Xi)}, {"theta", to_json(c.theta)},
                      {"cstarstar", num(c.cstarstar)}, {"alpha", num(c.alpha)}});
    j["charts"] = ch;
    j["terminal_chart"] = r.terminal_chart;
    j["terminal"] = to_json(r.terminal);
    j["finite"] = r.finite;
    j["z"] = to_json(r.z);
    j["Z"] = to_json(r.Z);
    json amb = json::array();
    for (const auto& v : r.ambient) amb.push_back(to_json(v));
    j["ambient"] = amb;
    j["beta_final"] = num(r.beta_final);
    j["mu_final"] = num(r.mu_final);
    j["mu_true_final"] = num(r.mu_true_final);
    j["certified"] = r.certified;
    j["Phi"] = num(r.Phi);
    j["Psi"] = num(r.Psi);
    return j;
}

inline TrackReport get_report(const json& j)
{
    const json& v = field(j, "version");
    if (!v.is_number_integer()) throw FormatError("TrackReport version must be an integer");
    if (v.get<int>() != report_version)
        throw FormatError("unsupported TrackReport version " + v.dump() + " (this build reads version " +
                          std::to_string(report_version) + ")");
    TrackReport r;
    r.status = get_status(field(j, "status").get<std::string>());
    r.message = field(j, "message").get<std::string>();
    r.steps = field(j, "steps").get<long>();
    r.L_acc = get_num(field(j, "L_acc"));
    r.swaps = field(j, "swaps").get<int>();
    r.swap_newton_steps = field(j, "swap_newton_steps").get<int>();
    for (const auto& s : field(j, "log")) r.log.push_back(get_step(s));
    for (const auto& s : field(j, "swap_log")) {
        SwapRecord w;
        w.from = field(s, "from").get<int>();
        w.to = field(s, "to").get<int>();
        w.s = get_num(field(s, "s"));
        w.continuity = get_num(field(s, "continuity"));
        w.newton_steps = field(s, "newton_steps").get<int>();
        r.swap_log.push_back(w);
    }
    for (const auto& c : field(j, "charts")) {
        ChartRecord w;
        w.main = field(c, "main").get<bool>();
        w.l = field(c, "l").get<int>();
        w.Xi = get_rows(field(c, "Xi"));
        w.theta = get_rows(field(c, "theta"));
        w.cstarstar = get_num(field(c, "cstarstar"));
        w.alpha = get_num(field(c, "alpha"));
        r.charts.push_back(std::move(w));
    }
    r.terminal_chart = field(j, "terminal_chart").get<int>();
    r.terminal = get_point(field(j, "terminal"));
    r.finite = field(j, "finite").get<bool>();
    r.z = get_vecc(field(j, "z"));
    r.Z = get_vecc(field(j, "Z"));
    for (const auto& a : field(j, "ambient")) r.ambient.push_back(get_vecc(a));
    r.beta_final = get_num(field(j, "beta_final"));
    r.mu_final = get_num(field(j, "mu_final"));
    r.mu_true_final = get_num(field(j, "mu_true_final"));
    r.certified = field(j, "certified").get<bool>();
    r.Phi = get_num(field(j, "Phi"));
    r.Psi = get_num(field(j, "Psi"));
    return r;
}

inline TrackReport parse_report(const std::string& text)
{
    try {
        return get_report(json::parse(text));
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed TrackReport: ") + e.what());
    }
}

inline json to_json(const SolveReport& s, bool with_log = false)
{
    json roots = json::array(), fails = json::array();
    for (const auto& r : s.roots) roots.push_back(to_json(r, with_log));
    for (const auto& r : s.failures) fails.push_back(to_json(r, with_log));
    return {{"version", report_version}, {"expected", s.expected}, {"attempts", s.attempts},
            {"roots", roots},            {"failures", fails}};
}

} // namespace toric::io

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "toric/io.hpp"

using namespace toric;
using io::json;

namespace {

struct MathFailure {
    json diag;
    std::string text;
};

std::string slurp(const std::string& path)
{
    if (path == "-") {
        std::stringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path);
    if (!in) throw io::FormatError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_json(const std::string& text, const std::string& what)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw io::FormatError(what + ": JSON parse error: " + e.what());
    }
}

/// Inline JSON when the argument looks like a literal, a file path otherwise.
json json_arg(const std::string& arg, const std::string& what)
{
    if (!arg.empty() && (arg[0] == '[' || arg[0] == '{')) return parse_json(arg, what);
    return parse_json(slurp(arg), what);
}

LaurentSystem load_system(const std::string& path)
{
    return io::get_system(parse_json(slurp(path), path));
}

VecC vec_arg(const std::string& arg, const char* what, int n)
{
    VecC v = io::get_vecc(json_arg(arg, what));
    if (v.size() != n) throw io::FormatError(std::string(what) + " must have " + std::to_string(n) + " entries");
    return v;
}

VecR real_arg(const std::string& arg, const char* what, int n)
{
    VecR v = io::get_vecr(json_arg(arg, what));
    if (v.size() != n) throw io::FormatError(std::string(what) + " must have " + std::to_string(n) + " entries");
    return v;
}

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

std::uint64_t default_seed()
{
    if (const char* s = std::getenv("TORIC_SEED")) return std::strtoull(s, nullptr, 10);
    return 0;
}

struct TrackArgs {
    std::string start, target, root, log;
    double alpha = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t seed = default_seed();
    long max_steps = 100000;
    int max_swaps = 100;
    double tol = 1e-12;
    std::string roots;
};

TrackConfig make_config(const TrackArgs& a)
{
    if (!(a.tol > 0)) throw io::FormatError("--tol must be positive");
    if (a.max_steps < 1) throw io::FormatError("--max-steps must be at least 1");
    TrackConfig c;
    c.alpha = a.alpha;
    c.seed = a.seed;
    c.max_steps = a.max_steps;
    c.max_swaps = a.max_swaps;
    c.tol = a.tol;
    return c;
}

void write_log(const std::string& path, const json& j)
{
    if (path.empty()) return;
    std::ofstream out(path);
    if (!out) throw io::FormatError("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

int run_track(const TrackArgs& a)
{
    LaurentSystem g = load_system(a.start), f = load_system(a.target);
    VecC Z = vec_arg(a.root, "--start-root", g.dim());
    for (Eigen::Index j = 0; j < Z.size(); ++j)
        if (Z[j] == cplx(0.0)) throw io::FormatError("--start-root must lie in the torus");
    TrackReport r = solve_path(PathSpec{g, f}, Z.array().log().matrix(), make_config(a));
    json j = io::to_json(r);
    write_log(a.log, j);
    if (r.status != TrackStatus::converged) throw MathFailure{j, std::string("tracking failed: ") + r.message};
    emit(j);
    return 0;
}

int run_solve(const TrackArgs& a)
{
    if (!a.roots.empty() && a.roots != "all") throw io::FormatError("--roots accepts only 'all'");
    LaurentSystem f = load_system(a.target);
    SolveReport s = solve_all(f, make_config(a));
    json j = io::to_json(s);
    write_log(a.log, io::to_json(s, true));
    if (static_cast<long long>(s.roots.size()) < s.expected)
        throw MathFailure{j, "found " + std::to_string(s.roots.size()) + " of " + std::to_string(s.expected) + " roots"};
    emit(j);
    return 0;
}

int run_chart(const std::string& sys, const std::string& zs, const std::string& chis, double tau, std::uint64_t seed)
{
    LaurentSystem f = load_system(sys);
    const SupportTuple& T = f.tuple();
    const int n = T.dim();
    VecC z = vec_arg(zs, "--z", n);
    VecR chi = chis.empty() ? VecR::Zero(n) : real_arg(chis, "--chi", n);
    auto rays = fan_rays(T);
    GlobalConstants gc = global_constants(T);
    InfinityClass cls = classify_infinity(T, z, chi, tau, &rays);
    std::mt19937_64 rng(seed);
    ChartBuild b = build_chart(T, cls, gc.Phi, gc.Psi, 1e-2, rng, &rays);
    emit({{"chart", io::to_json(b.chart)}, {"point", io::to_json(b.point)}, {"tau", io::num(b.tau)}});
    return 0;
}

int run_normal_form(const std::string& sys, const std::string& chis)
{
    LaurentSystem f = load_system(sys);
    const SupportTuple& T = f.tuple();
    const int n = T.dim();
    VecR chi = chis.empty() ? VecR::Zero(n) : real_arg(chis, "--chi", n);
    auto rays = fan_rays(T);
    Cone sigma = minimal_cone(T, rays, chi);
    NormalFormReduction red = reduce_to_normal_form(T, sigma, chi);
    ActedTuple acted = apply_action(T, red.S);
    NormalFormData nf = block_decompose(acted.tuple, red.l);
    json sup = json::array();
    for (const auto& A : acted.tuple.supports()) sup.push_back(io::to_json(A.rows()));
    emit({{"action", io::to_json(red.S)}, {"l", red.l}, {"supports", sup}, {"normal_form", io::to_json(nf)}});
    return 0;
}

int run_condition(const std::string& sys, const std::string& Zs, const std::string& chart_path,
                  const std::string& Xs, const std::string& ys)
{
    LaurentSystem f = load_system(sys);
    const SupportTuple& T = f.tuple();
    const int n = T.dim();
    Chart c;
    ChartPoint p;
    json out;
    if (!Zs.empty()) {
        if (!chart_path.empty()) throw io::FormatError("give either --Z or --chart with --X --y");
        VecC Z = vec_arg(Zs, "--Z", n);
        out["mu"] = io::num(mu_main(f, Z));
        c = main_chart(T, 2, 1);
        p.X = VecC::Zero(0);
        p.y = to_mat(inverse_q(c.Xi)).cast<cplx>() * Z.array().log().matrix();
    } else {
        if (chart_path.empty()) throw io::FormatError("condition needs --Z or --chart with --X --y");
        json jc = json_arg(chart_path, "--chart");
        c = io::get_chart(jc.contains("chart") ? jc["chart"] : jc);
        if (static_cast<int>(c.Xi.size()) != n) throw io::FormatError("chart dimension does not match the system");
        p.X = c.l == 0 ? VecC::Zero(0) : vec_arg(Xs, "--X", c.l);
        p.y = vec_arg(ys, "--y", n - c.l);
    }
    ChartContext ctx = make_context(T, c, TrackConfig{});
    std::vector<VecC> rows;
    for (int i = 0; i < n; ++i) rows.push_back(f.row(i));
    std::vector<VecC> q = ctx.coeffs(rows);
    LocalMapQ Q(ctx.nf, q, p.y);
    ChartPoint at;
    at.X = p.X;
    at.y = VecC::Zero(p.y.size());
    out["mu_chart"] = io::num(mu_chart(LaurentSystem(ctx.nf->tuple, q), p));
    out["dq_inverse_norm"] = io::num(dq_inverse_norm(Q, at));
    out["gamma_bound"] = io::num(gamma_bound(Q, at, 0.25));
    out["h_bound"] = io::num(ctx.nf->h_bound);
    out["l"] = c.l;
    emit(out);
    return 0;
}

int dispatch(int argc, char** argv)
{
    CLI::App app{"Toric homotopy continuation for sparse Laurent systems"};
    app.require_subcommand(0, 1);
    bool version = false;
    app.add_flag("--version", version, "Print schema and library versions");

    std::string sys;
    auto* fan = app.add_subcommand("fan", "Rays of the outer normal fan");
    fan->add_option("system", sys, "System JSON")->required();
    auto* mv = app.add_subcommand("mixed-volume", "Bernstein root count n! V");
    mv->add_option("system", sys, "System JSON")->required();

    std::string z, chi, Z, chart_path, X, y;
    double tau = 1.0;
    std::uint64_t seed = default_seed();
    auto* chart = app.add_subcommand("chart", "Caratheodory chart around a point");
    chart->add_option("system", sys, "System JSON")->required();
    chart->add_option("--z", z, "Log point, JSON array")->required();
    chart->add_option("--chi", chi, "Direction to infinity, JSON array");
    chart->add_option("--tau", tau, "Initial scale along chi");
    chart->add_option("--seed", seed, "Seed for generic costs");

    auto* nf = app.add_subcommand("normal-form", "Monomial action to normal form");
    nf->add_option("system", sys, "System JSON")->required();
    nf->add_option("--chi", chi, "Direction to infinity, JSON array");

    auto* cond = app.add_subcommand("condition", "Condition numbers at a point");
    cond->add_option("system", sys, "System JSON")->required();
    cond->add_option("--Z", Z, "Torus point, JSON array");
    cond->add_option("--chart", chart_path, "Chart JSON from the chart command");
    cond->add_option("--X", X, "Chart X coordinates, JSON array");
    cond->add_option("--y", y, "Chart y coordinates, JSON array");

    TrackArgs ta;
    auto add_track = [&](CLI::App* s) {
        s->add_option("--alpha", ta.alpha, "Override the step threshold alpha");
        s->add_option("--seed", ta.seed, "Random seed");
        s->add_option("--max-steps", ta.max_steps, "Step limit");
        s->add_option("--max-swaps", ta.max_swaps, "Chart swap limit");
        s->add_option("--tol", ta.tol, "Final residual tolerance");
        s->add_option("--log", ta.log, "Write the full report with step log here");
    };
    auto* track = app.add_subcommand("track", "Track one root along the linear path");
    track->add_option("--start-system", ta.start, "Start system JSON")->required();
    track->add_option("--target-system", ta.target, "Target system JSON")->required();
    track->add_option("--start-root", ta.root, "Start root in torus coordinates, JSON array or file")->required();
    add_track(track);
    auto* solve = app.add_subcommand("solve", "Find all roots from random start pairs");
    solve->add_option("--target-system", ta.target, "Target system JSON")->required();
    solve->add_option("--roots", ta.roots, "Only 'all' is supported");
    add_track(solve);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    if (version) {
        emit({{"library", io::library_version}, {"report_version", io::report_version}});
        return 0;
    }
    if (fan->parsed()) {
        LaurentSystem f = load_system(sys);
        emit({{"rays", io::rays_json(fan_rays(f.tuple()))}});
        return 0;
    }
    if (mv->parsed()) {
        LaurentSystem f = load_system(sys);
        Rat v = mixed_volume(f.tuple());
        emit({{"bernstein_count", v.numerator() / v.denominator()}});
        return 0;
    }
    if (chart->parsed()) return run_chart(sys, z, chi, tau, seed);
    if (nf->parsed()) return run_normal_form(sys, chi);
    if (cond->parsed()) return run_condition(sys, Z, chart_path, X, y);
    if (track->parsed()) return run_track(ta);
    if (solve->parsed()) return run_solve(ta);
    std::cerr << app.help();
    return 2;
}

} // namespace

int main(int argc, char** argv)
{
    try {
        return dispatch(argc, argv);
    } catch (const io::FormatError& e) {
        emit({{"error", "usage"}, {"message", e.what()}});
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const MathFailure& m) {
        emit(m.diag);
        std::cerr << "error: " << m.text << '\n';
        return 1;
    } catch (const Error& e) {
        const bool usage = e.code() == errc::contract;
        emit({{"error", errc_name(e.code())}, {"message", e.what()}});
        std::cerr << "error: " << e.what() << '\n';
        return usage ? 2 : 1;
    } catch (const std::exception& e) {
        emit({{"error", "internal"}, {"message", e.what()}});
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

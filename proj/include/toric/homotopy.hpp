#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>

#include "condition.hpp"

namespace toric {

/// (1-s) g + s f on the original tuple; g + t f with t = s/(1-s) up to scaling.
struct PathSpec {
    LaurentSystem g, f;

    std::vector<VecC> at(double s) const
    {
        std::vector<VecC> r;
        for (int i = 0; i < g.dim(); ++i) r.push_back((1.0 - s) * g.row(i) + s * f.row(i));
        return r;
    }
};

struct TrackConfig {
    double alpha = std::numeric_limits<double>::quiet_NaN();
    double cstarstar = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> Phi, Psi;
    double eps = 1e-2;
    long max_steps = 100000;
    int max_swaps = 100;
    double tol = 1e-12;
    std::uint64_t seed = 0;
    bool lattice_minimal = true;
    double delta0 = 0.01;
};

struct StepRecord {
    double s = 0;
    double beta = 0;
    double mu = 0;
    int chart = 0;
    double max_x = 0;
    double cstarstar = 0;
    double alpha = 0;
    double d_q = 0;     // projective distance of consecutive renormalized systems
    double d_x = 0;     // omega-norm of the Newton displacement
    double d_sys = 0;   // projective distance of consecutive path systems
    double d_amb = 0;   // projective distance of consecutive ambient points
    double mu_true = 0; // toric condition number at the iterate
};

struct SwapRecord {
    int from = 0, to = 0;
    double s = 0;
    double continuity = 0;
    int newton_steps = 0;
};

struct ChartRecord {
    bool main = false;
    int l = 0;
    std::vector<RowQ> Xi, theta;
    double cstarstar = 0, alpha = 0;
};

enum class TrackStatus { converged, singular_approach, domain_exit, step_limit, internal_error };

inline const char* status_name(TrackStatus s)
{
    switch (s) {
    case TrackStatus::converged: return "converged";
    case TrackStatus::singular_approach: return "singular-approach";
    case TrackStatus::domain_exit: return "domain-exit";
    case TrackStatus::step_limit: return "step-limit";
    default: return "internal-error";
    }
}

struct TrackReport {
    TrackStatus status = TrackStatus::internal_error;
    std::string message;
    long steps = 0;
    double L_acc = 0;
    int swaps = 0;
    int swap_newton_steps = 0;
    std::vector<StepRecord> log;
    std::vector<SwapRecord> swap_log;
    std::vector<ChartRecord> charts;
    int terminal_chart = 0;
    ChartPoint terminal;          // X and the anchor y
    bool finite = false;
    VecC z;                       // log coordinates when finite
    VecC Z;                       // torus coordinates when finite
    std::vector<VecC> ambient;    // unit representatives of [v_{A_i}], original row order
    double beta_final = 0;
    double mu_final = 0;
    double mu_true_final = 0;
    bool certified = false;
    double Phi = 0, Psi = 0;
};

struct NewtonData {
    VecC delta;
    double beta = std::numeric_limits<double>::infinity();
    double mu = std::numeric_limits<double>::infinity();
    double smin = 0;   // reciprocal condition estimate of DQ
    bool singular = true;
};

/// Newton displacement DQ^{-1}Q, its omega-norm and |DQ^{-1}| in one factorization.
inline NewtonData newton_data(const LocalMapQ& Q, const ChartPoint& p)
{
    NewtonData d;
    VecC F;
    MatC J;
    Q.evaluate(p, F, J);
    MatC Jinv = Eigen::PartialPivLU<MatC>(J).inverse();
    if (!Jinv.allFinite()) return d;
    const double rc = 1.0 / (J.cwiseAbs().colwise().sum().maxCoeff() * Jinv.cwiseAbs().colwise().sum().maxCoeff());
    d.smin = rc;
    if (!(rc >= singular_ratio)) return d;
    d.delta = Jinv * F;
    d.beta = Q.nf().norm(d.delta);
    MatC H = Jinv.adjoint() * Q.nf().G.cast<cplx>() * Jinv;
    Eigen::SelfAdjointEigenSolver<MatC> es(H, Eigen::EigenvaluesOnly);
    d.mu = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
    d.singular = false;
    return d;
}

inline ChartPoint chart_point_sub(const ChartPoint& p, const VecC& delta)
{
    ChartPoint r;
    const int l = p.l();
    r.X = p.X - delta.head(l);
    r.y = p.y - delta.tail(p.y.size());
    return r;
}

inline ChartPoint newton_step(const LocalMapQ& Q, const ChartPoint& p)
{
    NewtonData d = newton_data(Q, p);
    if (d.singular) throw Error(errc::numeric, "singular derivative, reciprocal condition " + std::to_string(d.smin));
    return chart_point_sub(p, d.delta);
}

struct RefineResult {
    ChartPoint point;
    bool certified = false;
    int iterations = 0;
    double beta0 = 0;
    double mu0 = 0;
    double radius = 0;   // r0(alpha) beta0 bounds the distance to the zero
    std::vector<double> betas;
};

/// Plain Newton on Q until the update drops below target; certified when c* beta0 mu0 <= alpha.
inline RefineResult newton_refine(const LocalMapQ& Q, const ChartPoint& p0, double target, int max_iter,
                                  const AlphaConstants& ac, double alpha)
{
    RefineResult r;
    r.point = p0;
    NewtonData d = newton_data(Q, p0);
    if (d.singular) throw Error(errc::numeric, "singular derivative at the refinement start");
    r.beta0 = d.beta;
    r.mu0 = d.mu;
    r.certified = ac.cstar * d.beta * d.mu <= alpha;
    r.radius = AlphaConstants::r0(alpha) * d.beta;
    int grow = 0;
    double prev = d.beta;
    for (int it = 0; it < max_iter; ++it) {
        r.betas.push_back(d.beta);
        if (d.beta < target) break;
        r.point = chart_point_sub(r.point, d.delta);
        ++r.iterations;
        d = newton_data(Q, r.point);
        if (d.singular) throw Error(errc::numeric, "singular derivative during refinement");
        grow = d.beta > prev ? grow + 1 : 0;
        if (grow >= 3) throw Error(errc::numeric, "Newton refinement diverges");
        prev = d.beta;
    }
    if (r.betas.empty() || r.betas.back() != d.beta) r.betas.push_back(d.beta);
    return r;
}

/// Unit representative of [Omega_A(X, y)], evaluated in logarithmic scale.
inline VecC omega_normalized(const Support& A, const VecC& X, const VecC& y)
{
    const int l = static_cast<int>(X.size());
    VecC s(A.size());
    std::vector<bool> zero(static_cast<std::size_t>(A.size()), false);
    double top = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < A.size(); ++k) {
        cplx t(0.0, 0.0);
        for (int j = 0; j < l; ++j) {
            long long b = A.row(k)[static_cast<std::size_t>(j)].numerator();
            if (b == 0) continue;
            if (X[j] == cplx(0.0)) zero[static_cast<std::size_t>(k)] = true;
            else t += static_cast<double>(b) * std::log(X[j]);
        }
        for (int j = 0; j < y.size(); ++j) t += A.matrix()(k, l + j) * y[j];
        s[k] = t;
        if (!zero[static_cast<std::size_t>(k)]) top = std::max(top, t.real());
    }
    VecC w(A.size());
    for (int k = 0; k < A.size(); ++k) w[k] = zero[static_cast<std::size_t>(k)] ? cplx(0.0) : std::exp(s[k] - top);
    return w / w.norm();
}

/// A chart together with its transformed tuple, normal form data and constants.
struct ChartContext {
    Chart chart;
    ActedTuple acted;
    std::shared_ptr<const NormalFormData> nf;
    AlphaConstants ac;
    double alpha = 0;
    std::vector<VecC> gB, fB;   // path endpoints in chart row order

    std::vector<VecC> coeffs(const std::vector<VecC>& fA) const { return reindex(fA, acted.perm); }

    std::vector<VecC> path_at(double s) const
    {
        std::vector<VecC> r;
        for (std::size_t i = 0; i < gB.size(); ++i) r.push_back((1.0 - s) * gB[i] + s * fB[i]);
        return r;
    }

    std::vector<VecC> ambient(const VecC& X, const VecC& y) const
    {
        std::vector<VecC> r;
        for (int i = 0; i < nf->n; ++i) r.push_back(omega_normalized(acted.tuple[i], X, y));
        return unindex(r, acted.perm);
    }

    bool finite(const VecC& X) const
    {
        for (Eigen::Index j = 0; j < X.size(); ++j)
            if (X[j] == cplx(0.0)) return false;
        return true;
    }

    /// z = Xi (log X, y); with zero entries of X those coordinates are dropped and returned in chi.
    VecC log_point(const VecC& X, const VecC& y, VecR* chi = nullptr) const
    {
        const int n = nf->n;
        VecC x(n);
        VecR c = VecR::Zero(n);
        for (int j = 0; j < X.size(); ++j) {
            if (X[j] == cplx(0.0)) {
                x[j] = 0.0;
                c += to_vec(chart.rays[static_cast<std::size_t>(j)]);
            } else {
                x[j] = std::log(X[j]);
            }
        }
        for (int j = 0; j < y.size(); ++j) x[X.size() + j] = y[j];
        if (chi) *chi = c;
        return to_mat(chart.Xi).cast<cplx>() * x;
    }
};

inline ChartContext make_context(const SupportTuple& T, const Chart& c, const TrackConfig& cfg)
{
    ChartContext ctx;
    ctx.chart = c;
    ctx.acted = apply_action(T, chart_action(c));
    ctx.nf = std::make_shared<const NormalFormData>(block_decompose(ctx.acted.tuple, c.l));
    ctx.ac = alpha_constants(*ctx.nf, 0.25, cfg.cstarstar);
    ctx.alpha = std::isnan(cfg.alpha) ? ctx.ac.alpha : std::min(cfg.alpha, ctx.ac.alpha_star);
    return ctx;
}

struct GlobalConstants {
    double Phi = 0, Psi = 0;
    int charts_used = 0, charts_skipped = 0;
};

/// Phi and Psi over the chart library: every basis of rays inside a fan cone, every choice of X-block.
inline GlobalConstants global_constants(const SupportTuple& T, bool lattice_minimal = true)
{
    const int n = T.dim();
    GlobalConstants g;
    auto rays = fan_rays(T);
    double max_b = 0, max_gap = -std::numeric_limits<double>::infinity();
    auto consider = [&](const SupportTuple& B, int l) {
        NormalFormData nf = block_decompose(B, l);
        if (!nf.smooth || !std::isfinite(nf.nu) || !(nf.lambda > 0)) {
            ++g.charts_skipped;
            return;
        }
        ++g.charts_used;
        for (const auto& A : B.supports())
            for (const auto& r : A.rows()) {
                double s = 0;
                for (int j = 0; j < l; ++j) s += std::abs(to_double(r[static_cast<std::size_t>(j)]));
                max_b = std::max(max_b, s);
            }
        max_gap = std::max(max_gap, std::log(nf.nu) - std::log(nf.lambda));
    };
    if (n >= 2) consider(apply_action(T, chart_action(main_chart(T, 2, 1))).tuple, 0);
    std::vector<int> pick;
    std::function<void(std::size_t)> rec = [&](std::size_t from) {
        if (static_cast<int>(pick.size()) == n) {
            std::vector<RowQ> basis;
            for (int k : pick) basis.push_back(rays[static_cast<std::size_t>(k)]);
            if (rank_q(basis) != n || !rays_share_cone(T, basis)) return;
            if (lattice_minimal)
                for (auto& r : basis) r = T.dual_primitive(r);
            for (unsigned mask = 0; mask < (1u << n); ++mask) {
                std::vector<RowQ> ordered;
                for (int j = 0; j < n; ++j)
                    if (mask & (1u << j)) ordered.push_back(basis[static_cast<std::size_t>(j)]);
                const int l = static_cast<int>(ordered.size());
                for (int j = 0; j < n; ++j)
                    if (!(mask & (1u << j))) ordered.push_back(basis[static_cast<std::size_t>(j)]);
                Chart c;
                c.l = l;
                c.rays = ordered;
                c.Xi.assign(static_cast<std::size_t>(n), RowQ(static_cast<std::size_t>(n)));
                for (int r = 0; r < n; ++r)
                    for (int j = 0; j < n; ++j) c.Xi[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] = -ordered[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)];
                c.theta = chart_shifts(T, c.Xi, c.rays, l);
                consider(apply_action(T, chart_action(c)).tuple, l);
            }
            return;
        }
        for (std::size_t k = from; k < rays.size(); ++k) {
            pick.push_back(static_cast<int>(k));
            rec(k + 1);
            pick.pop_back();
        }
    };
    rec(0);
    if (g.charts_used == 0) throw Error(errc::degenerate, "no smooth chart in the library");
    g.Phi = 4.0 * max_b;
    g.Psi = max_gap + 0.5 * std::log(static_cast<double>(T.max_size())) + std::log(8.0);
    return g;
}

struct StartPair {
    LaurentSystem g;
    VecC z;
};

/// Gaussian rows projected so that g_i . V_{A_i}(e^{z*}) = 0.
inline StartPair random_start_pair(const SupportTuple& T, std::uint64_t seed)
{
    const int n = T.dim();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ure(-0.5, 0.5), uim(-M_PI, M_PI);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (const auto& A : T.supports())
        if (A.size() < 2) throw Error(errc::degenerate, "singleton support admits no start system");
    for (int attempt = 0; attempt < 100; ++attempt) {
        VecC z(n);
        for (int j = 0; j < n; ++j) z[j] = cplx(ure(rng), uim(rng));
        std::vector<VecC> rows;
        for (int i = 0; i < n; ++i) {
            const auto& A = T[i];
            VecC v = evaluate_v(A, z);
            VecC g(A.size());
            for (int k = 0; k < A.size(); ++k) g[k] = cplx(nd(rng), nd(rng));
            g -= (g.transpose() * v)(0) / v.squaredNorm() * v.conjugate();
            rows.push_back(g);
        }
        LaurentSystem sys(T, rows);
        if (std::isfinite(mu_main_log(sys, z))) return {sys, z};
    }
    throw Error(errc::numeric, "could not sample a well-posed start pair");
}

namespace detail {

struct Tracker {
    const SupportTuple& T;
    const PathSpec& path;
    const TrackConfig& cfg;
    TrackReport& rep;
    std::mt19937_64 rng;
    std::vector<RowQ> rays;
    double Phi, Psi;
    double last_delta;

    ChartContext ctx;
    int chart_id = -1;
    double s = 0;
    VecC X, ybar;

    Tracker(const SupportTuple& t, const PathSpec& p, const TrackConfig& c, TrackReport& r, double phi, double psi)
        : T(t), path(p), cfg(c), rep(r), rng(c.seed), rays(fan_rays(t)), Phi(phi), Psi(psi), last_delta(c.delta0) {}

    LocalMapQ local(double t, const VecC& anchor) const { return LocalMapQ(ctx.nf, ctx.path_at(t), anchor); }

    ChartPoint at_anchor() const
    {
        ChartPoint p;
        p.X = X;
        p.y = VecC::Zero(ybar.size());
        return p;
    }

    double main_bound() const
    {
        const int n = T.dim();
        return n <= 1 ? 0.0 : (std::pow(Phi, n - 1) - 1.0) / (Phi - 1.0) * Psi;
    }

    void enter_chart(const Chart& c, const VecC& X0, const VecC& y0)
    {
        ctx = make_context(T, c, cfg);
        ctx.gB = ctx.coeffs(path.g.coefficients());
        ctx.fB = ctx.coeffs(path.f.coefficients());
        ChartRecord cr;
        cr.main = c.main;
        cr.l = c.l;
        cr.Xi = c.Xi;
        cr.theta = c.theta;
        cr.cstarstar = ctx.ac.cstarstar;
        cr.alpha = ctx.alpha;
        rep.charts.push_back(cr);
        chart_id = static_cast<int>(rep.charts.size()) - 1;
        X = X0;
        ybar = y0;
    }

    /// Chart containing the log point z (chi != 0: toric infinity in direction chi).
    void choose_chart(const VecC& z, const VecR& chi)
    {
        const int n = T.dim();
        if (n >= 2 && chi.norm() == 0.0 && z.real().cwiseAbs().maxCoeff() < main_bound()) {
            Chart m = main_chart(T, Phi, Psi, cfg.eps);
            enter_chart(m, VecC::Zero(0), z);
            return;
        }
        InfinityClass cls = classify_infinity(T, z, chi, chi.norm() == 0.0 ? 0.0 : 1.0, &rays);
        ChartOptions opt;
        opt.lattice_minimal = cfg.lattice_minimal;
        ChartBuild b = build_chart(T, cls, Phi, Psi, cfg.eps, rng, &rays, opt);
        enter_chart(b.chart, b.point.X, b.point.y);
    }

    /// Newton at fixed s, folding the y-update into the anchor.
    int polish(int max_iter, double target)
    {
        int it = 0;
        for (; it < max_iter; ++it) {
            NewtonData d = newton_data(local(s, ybar), at_anchor());
            if (d.singular) throw Error(errc::numeric, "singular derivative while polishing");
            X -= d.delta.head(X.size());
            ybar -= d.delta.tail(ybar.size());
            if (d.beta < target) {
                ++it;
                break;
            }
        }
        return it;
    }

    bool alpha_ok(const NewtonData& d) const
    {
        return !d.singular && std::isfinite(d.beta) && ctx.ac.cstarstar * d.beta * d.mu <= ctx.alpha;
    }

    bool inside() const
    {
        ChartPoint p;
        p.X = X;
        p.y = ybar;
        if (!in_domain(ctx.chart, p)) return false;
        for (Eigen::Index j = 0; j < X.size(); ++j)
            if (std::abs(X[j]) > 0.25 - 1.0 / 16.0) return false;
        return true;
    }

    double true_mu(const LocalMapQ& Q) const
    {
        LaurentSystem q(ctx.nf->tuple, Q.q());
        return mu_chart(q, at_anchor());
    }

    void swap()
    {
        if (++rep.swaps > cfg.max_swaps) throw TrackStatus::step_limit;
        SwapRecord sr;
        sr.from = chart_id;
        sr.s = s;
        sr.newton_steps = polish(8, 1e-15);
        auto before = ctx.ambient(X, ybar);
        VecR chi;
        VecC z = ctx.log_point(X, ybar, &chi);
        choose_chart(z, chi);
        sr.newton_steps += polish(8, 1e-15);
        auto after = ctx.ambient(X, ybar);
        sr.continuity = projective_distance(before, after, DistKind::projective);
        sr.to = chart_id;
        rep.swap_newton_steps += sr.newton_steps;
        rep.swap_log.push_back(sr);
    }

    /// One step of the recurrence plus step selection; returns false when leaving the chart.
    void step()
    {
        LocalMapQ Q0 = local(s, ybar);
        NewtonData d0 = newton_data(Q0, at_anchor());
        if (d0.singular) throw TrackStatus::singular_approach;
        VecC X1 = X - d0.delta.head(X.size());
        VecC y1 = ybar - d0.delta.tail(ybar.size());
        ChartPoint p1;
        p1.X = X1;
        p1.y = VecC::Zero(y1.size());

        auto probe = [&](double t, NewtonData& out) {
            out = newton_data(LocalMapQ(ctx.nf, ctx.path_at(t), y1), p1);
            return alpha_ok(out);
        };
        NewtonData dg, db;
        double good = s, bad = -1;
        double delta = last_delta;
        double t = std::min(1.0, s + delta);
        if (probe(t, dg)) {
            good = t;
            NewtonData tmp;
            while (good < 1.0) {
                delta *= 2;
                t = std::min(1.0, s + delta);
                if (!probe(t, tmp)) {
                    bad = t;
                    break;
                }
                good = t;
                dg = tmp;
            }
        } else {
            bad = t;
            for (;;) {
                delta /= 2;
                if (delta < 1e-12) throw Error(errc::numeric, "path too ill-conditioned: step underflow");
                t = s + delta;
                if (probe(t, dg)) {
                    good = t;
                    break;
                }
                bad = t;
            }
        }
        if (bad > 0) {
            NewtonData tmp;
            while (bad - good > 1e-2 * (bad - s)) {
                double mid = 0.5 * (good + bad);
                if (probe(mid, tmp)) {
                    good = mid;
                    dg = tmp;
                } else {
                    bad = mid;
                }
            }
        }
        last_delta = good - s;

        LocalMapQ Q1 = local(good, y1);
        StepRecord r;
        r.s = good;
        r.beta = dg.beta;
        r.mu = dg.mu;
        r.chart = chart_id;
        r.max_x = X1.size() ? X1.cwiseAbs().maxCoeff() : 0.0;
        r.cstarstar = ctx.ac.cstarstar;
        r.alpha = ctx.alpha;
        r.d_q = projective_distance(Q0.q(), Q1.q(), DistKind::projective);
        r.d_x = d0.beta;
        r.d_sys = projective_distance(path.at(s), path.at(good), DistKind::projective);
        r.d_amb = projective_distance(ctx.ambient(X, ybar), ctx.ambient(X1, y1), DistKind::projective);
        const double mu_prev = rep.log.empty() ? d0.mu : rep.log.back().mu;
        rep.L_acc += (r.d_q + r.d_x) * 0.5 * (mu_prev + dg.mu);

        s = good;
        X = X1;
        ybar = y1;
        r.mu_true = true_mu(Q1);
        rep.log.push_back(r);
        ++rep.steps;
        if (!(r.cstarstar * r.beta * r.mu <= r.alpha) || r.max_x > 0.25) {
            rep.message = "alpha condition or |X| budget violated after a step";
            throw TrackStatus::internal_error;
        }
    }

    void finish()
    {
        polish(20, cfg.tol);
        LocalMapQ Q = local(1.0, ybar);
        NewtonData d = newton_data(Q, at_anchor());
        rep.terminal_chart = chart_id;
        rep.terminal.X = X;
        rep.terminal.y = ybar;
        rep.beta_final = d.beta;
        rep.mu_final = d.mu;
        rep.mu_true_final = true_mu(Q);
        rep.certified = !d.singular && ctx.ac.cstar * d.beta * d.mu <= ctx.alpha;
        rep.ambient = ctx.ambient(X, ybar);
        rep.finite = ctx.finite(X);
        if (rep.finite) {
            rep.z = ctx.log_point(X, ybar);
            rep.Z = rep.z.array().exp().matrix();
        }
        rep.status = TrackStatus::converged;
    }
};

} // namespace detail

/// Track one root of the path from z0 at s = 0 to s = 1, swapping charts as needed.
inline TrackReport solve_path(const PathSpec& path, const VecC& z0, const TrackConfig& cfg,
                              const GlobalConstants* consts = nullptr)
{
    const SupportTuple& T = path.g.tuple();
    if (!(path.f.tuple().supports() == T.supports())) throw Error(errc::contract, "path endpoints need identical supports");
    TrackReport rep;
    GlobalConstants gc;
    if (cfg.Phi && cfg.Psi) {
        gc.Phi = *cfg.Phi;
        gc.Psi = *cfg.Psi;
    } else {
        gc = consts ? *consts : global_constants(T, cfg.lattice_minimal);
        if (cfg.Phi) gc.Phi = *cfg.Phi;
        if (cfg.Psi) gc.Psi = *cfg.Psi;
    }
    rep.Phi = gc.Phi;
    rep.Psi = gc.Psi;
    detail::Tracker tr(T, path, cfg, rep, gc.Phi, gc.Psi);
    try {
        tr.choose_chart(z0, VecR::Zero(T.dim()));
        tr.polish(8, 1e-15);
        NewtonData d = newton_data(tr.local(0.0, tr.ybar), tr.at_anchor());
        if (!tr.alpha_ok(d)) {
            rep.status = TrackStatus::internal_error;
            rep.message = "start point fails the alpha test";
            return rep;
        }
        while (tr.s < 1.0) {
            if (rep.steps >= cfg.max_steps) throw TrackStatus::step_limit;
            tr.step();
            if (tr.s < 1.0 && !tr.inside()) tr.swap();
        }
        tr.finish();
    } catch (TrackStatus st) {
        rep.status = st;
        if (rep.message.empty()) rep.message = status_name(st);
        rep.terminal.X = tr.X;
        rep.terminal.y = tr.ybar;
        rep.terminal_chart = tr.chart_id;
    } catch (const Error& e) {
        rep.status = e.code() == errc::numeric ? TrackStatus::singular_approach : TrackStatus::internal_error;
        rep.message = e.what();
        rep.terminal.X = tr.X;
        rep.terminal.y = tr.ybar;
        rep.terminal_chart = tr.chart_id;
    }
    return rep;
}

/// Track inside one given chart only; leaving the domain ends the run with domain-exit.
inline TrackReport track_partial(const PathSpec& path, const Chart& chart, const ChartPoint& p0, double s0,
                                 const TrackConfig& cfg)
{
    const SupportTuple& T = path.g.tuple();
    TrackReport rep;
    rep.Phi = chart.Phi;
    rep.Psi = chart.Psi;
    detail::Tracker tr(T, path, cfg, rep, chart.Phi, chart.Psi);
    try {
        tr.enter_chart(chart, p0.X, p0.y);
        tr.s = s0;
        NewtonData d = newton_data(tr.local(s0, tr.ybar), tr.at_anchor());
        if (!tr.alpha_ok(d)) {
            rep.status = TrackStatus::internal_error;
            rep.message = "start point fails the alpha test";
            return rep;
        }
        while (tr.s < 1.0) {
            if (rep.steps >= cfg.max_steps) throw TrackStatus::step_limit;
            tr.step();
            if (tr.s < 1.0 && !tr.inside()) throw TrackStatus::domain_exit;
        }
        tr.finish();
    } catch (TrackStatus st) {
        rep.status = st;
        if (rep.message.empty()) rep.message = status_name(st);
        rep.terminal.X = tr.X;
        rep.terminal.y = tr.ybar;
        rep.terminal_chart = tr.chart_id;
    } catch (const Error& e) {
        rep.status = e.code() == errc::numeric ? TrackStatus::singular_approach : TrackStatus::internal_error;
        rep.message = e.what();
        rep.terminal.X = tr.X;
        rep.terminal.y = tr.ybar;
    }
    return rep;
}

/// The l = 0 specialization in the main chart: z0 are log coordinates.
inline TrackReport track_main(const PathSpec& path, const VecC& z0, double Phi, double Psi, const TrackConfig& cfg)
{
    Chart m = main_chart(path.g.tuple(), Phi, Psi, cfg.eps);
    ChartPoint p;
    p.X = VecC::Zero(0);
    p.y = z0;
    return track_partial(path, m, p, 0.0, cfg);
}

enum class LengthKind { natural, renormalized, partial };

/// Trapezoidal condition length over the logged steps.
inline double condition_length(const std::vector<StepRecord>& log, LengthKind which, double mu_start = -1)
{
    double L = 0;
    for (std::size_t j = 0; j < log.size(); ++j) {
        const auto& r = log[j];
        double prev_true = j ? log[j - 1].mu_true : (mu_start >= 0 ? mu_start : r.mu_true);
        double prev_loc = j ? log[j - 1].mu : (mu_start >= 0 ? mu_start : r.mu);
        switch (which) {
        case LengthKind::natural: L += (r.d_sys + r.d_amb) * 0.5 * (prev_true + r.mu_true); break;
        case LengthKind::renormalized: L += (r.d_q + r.d_x) * 0.5 * (prev_true + r.mu_true); break;
        case LengthKind::partial: L += (r.d_q + r.d_x) * 0.5 * (prev_loc + r.mu); break;
        }
    }
    return L;
}

struct SolveReport {
    long long expected = 0;
    int attempts = 0;
    std::vector<TrackReport> roots;
    std::vector<TrackReport> failures;
};

/// Random start pairs until n! V distinct certified finite roots are found (cap 40 n! V attempts).
inline SolveReport solve_all(const LaurentSystem& target, const TrackConfig& cfg)
{
    const SupportTuple& T = target.tuple();
    SolveReport out;
    Rat cnt = mixed_volume(T);
    out.expected = cnt.numerator() / cnt.denominator();
    if (out.expected == 0) throw Error(errc::degenerate, "mixed volume is zero");
    GlobalConstants gc;
    if (cfg.Phi && cfg.Psi) {
        gc.Phi = *cfg.Phi;
        gc.Psi = *cfg.Psi;
    } else {
        gc = global_constants(T, cfg.lattice_minimal);
    }
    const long long cap = 40 * out.expected;
    for (long long a = 0; a < cap && static_cast<long long>(out.roots.size()) < out.expected; ++a) {
        ++out.attempts;
        StartPair sp = random_start_pair(T, cfg.seed * 1000003ULL + static_cast<std::uint64_t>(a));
        TrackConfig c = cfg;
        c.seed = cfg.seed + static_cast<std::uint64_t>(a);
        c.Phi = gc.Phi;
        c.Psi = gc.Psi;
        TrackReport r = solve_path(PathSpec{sp.g, target}, sp.z, c, &gc);
        if (r.status != TrackStatus::converged || !r.certified || !r.finite) {
            out.failures.push_back(std::move(r));
            continue;
        }
        bool dup = false;
        for (const auto& o : out.roots)
            if ((o.Z - r.Z).norm() <= 1e-6 * (1.0 + r.Z.norm())) dup = true;
        if (!dup) out.roots.push_back(std::move(r));
    }
    return out;
}

} // namespace toric

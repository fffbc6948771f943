#pragma once

#include <algorithm>
#include <limits>
#include <random>
#include <vector>

#include "fan.hpp"

namespace toric {

struct LPInstance {
    MatR Xi;   // n x m, columns are the generators
    VecR x;
    VecR b;    // positive costs
    VecR y0;   // non-negative, Xi y0 = x
};

struct LPResult {
    VecR y;
    int descent_iterations = 0;
    int pivots = 0;
    std::vector<int> support() const
    {
        std::vector<int> s;
        for (Eigen::Index j = 0; j < y.size(); ++j)
            if (y[j] > 1e-9) s.push_back(static_cast<int>(j));
        return s;
    }
};

struct SelectOptions {
    bool polish = true;
    double feas_tol = 1e-9;
};

/// b = 1 + U(0, 1e-3) per coordinate.
inline VecR generic_costs(Eigen::Index m, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1e-3);
    VecR b(m);
    for (Eigen::Index j = 0; j < m; ++j) b[j] = 1.0 + u(rng);
    return b;
}

namespace detail {

inline MatR columns(const MatR& M, const std::vector<int>& J)
{
    MatR r(M.rows(), static_cast<Eigen::Index>(J.size()));
    for (std::size_t k = 0; k < J.size(); ++k) r.col(static_cast<Eigen::Index>(k)) = M.col(J[k]);
    return r;
}

/// Orthogonal projector onto the row space of M (columns of M^T), rank tolerance 1e-10 |M|.
inline MatR row_space_projector(const MatR& M)
{
    const Eigen::Index m = M.cols();
    if (M.rows() == 0 || m == 0) return MatR::Zero(m, m);
    Eigen::ColPivHouseholderQR<MatR> qr(M.transpose());
    qr.setThreshold(1e-10);
    const double scale = M.norm();
    if (scale == 0.0) return MatR::Zero(m, m);
    const Eigen::Index r = qr.rank();
    MatR Q = qr.householderQ() * MatR::Identity(m, m);
    MatR Q1 = Q.leftCols(r);
    return Q1 * Q1.transpose();
}

inline bool solve_exact(const MatR& M, const VecR& rhs, VecR& out, double tol)
{
    Eigen::ColPivHouseholderQR<MatR> qr(M);
    out = qr.solve(rhs);
    return (M * out - rhs).norm() <= tol * (1.0 + rhs.norm());
}

} // namespace detail

/// Steepest descent of b.y along ker(Xi_J) with a ratio test, then optional simplex-style polishing.
inline LPResult select_generators(const LPInstance& inst, const SelectOptions& opt = {})
{
    const Eigen::Index n = inst.Xi.rows();
    const Eigen::Index m = inst.Xi.cols();
    if (inst.b.size() != m || inst.y0.size() != m || inst.x.size() != n)
        throw Error(errc::contract, "LP instance dimensions mismatch");
    if ((inst.b.array() <= 0).any()) throw Error(errc::contract, "LP costs must be positive");
    if ((inst.y0.array() < 0).any() || (inst.Xi * inst.y0 - inst.x).norm() > opt.feas_tol * (1.0 + inst.x.norm()))
        throw Error(errc::contract, "initial point is not feasible");

    LPResult res;
    VecR y = inst.y0;
    std::vector<int> J;
    for (Eigen::Index j = 0; j < m; ++j)
        if (y[j] > 0) J.push_back(static_cast<int>(j));

    const long cap = std::max<long>(1, static_cast<long>(m * n * 10));
    const double ynorm = std::max(1.0, y.lpNorm<Eigen::Infinity>());
    for (;;) {
        if (J.empty()) break;
        if (++res.descent_iterations > cap) throw Error(errc::numeric, "degenerate b, re-perturb");
        MatR XJ = detail::columns(inst.Xi, J);
        VecR bJ(static_cast<Eigen::Index>(J.size()));
        for (std::size_t k = 0; k < J.size(); ++k) bJ[static_cast<Eigen::Index>(k)] = inst.b[J[k]];
        VecR ydot = -(bJ - detail::row_space_projector(XJ) * bJ);
        if (ydot.norm() <= 1e-13 * bJ.norm()) break;
        double hmax = 0;
        std::size_t arg = 0;
        for (std::size_t k = 0; k < J.size(); ++k) {
            double h = -ydot[static_cast<Eigen::Index>(k)] / y[J[k]];
            if (h > hmax) {
                hmax = h;
                arg = k;
            }
        }
        if (hmax <= 0) break;
        const double step = 1.0 / hmax;
        for (std::size_t k = 0; k < J.size(); ++k) y[J[k]] += step * ydot[static_cast<Eigen::Index>(k)];
        y[J[arg]] = 0.0;
        std::vector<int> keep;
        for (int j : J) {
            if (y[j] <= 1e-13 * ynorm) y[j] = 0.0;
            if (y[j] > 0) keep.push_back(j);
        }
        J = keep;
    }

    if (opt.polish) {
        const double tol = 1e-10 * std::max(1.0, inst.Xi.cwiseAbs().maxCoeff());
        auto rank_of = [&](const std::vector<int>& K) {
            if (K.empty()) return Eigen::Index(0);
            Eigen::FullPivLU<MatR> lu(detail::columns(inst.Xi, K));
            lu.setThreshold(1e-10);
            return lu.rank();
        };
        // cost-neutral moves along ker(Xi_J) until the support columns are independent
        for (long it = 0; it < cap && rank_of(J) < static_cast<Eigen::Index>(J.size()); ++it) {
            Eigen::FullPivLU<MatR> lu(detail::columns(inst.Xi, J));
            lu.setThreshold(1e-10);
            VecR v = lu.kernel().col(0);
            if (v.maxCoeff() <= 0) v = -v;
            double t = std::numeric_limits<double>::infinity();
            std::size_t arg = 0;
            for (std::size_t k = 0; k < J.size(); ++k)
                if (v[static_cast<Eigen::Index>(k)] > 0 && y[J[k]] / v[static_cast<Eigen::Index>(k)] < t) {
                    t = y[J[k]] / v[static_cast<Eigen::Index>(k)];
                    arg = k;
                }
            for (std::size_t k = 0; k < J.size(); ++k) y[J[k]] -= t * v[static_cast<Eigen::Index>(k)];
            y[J[arg]] = 0.0;
            std::vector<int> keep;
            for (int j : J)
                if (y[j] > 1e-13 * ynorm) keep.push_back(j);
                else y[j] = 0.0;
            J = keep;
        }
        // complete to a basis of the column space with zero-valued columns
        std::vector<int> B = J;
        const Eigen::Index r = Eigen::FullPivLU<MatR>(inst.Xi).setThreshold(1e-10).rank();
        for (Eigen::Index j = 0; j < m && static_cast<Eigen::Index>(B.size()) < r; ++j) {
            if (std::find(B.begin(), B.end(), static_cast<int>(j)) != B.end()) continue;
            B.push_back(static_cast<int>(j));
            if (rank_of(B) < static_cast<Eigen::Index>(B.size())) B.pop_back();
        }
        // revised simplex with Bland's rule
        for (long it = 0; it < cap * 10 && !B.empty(); ++it) {
            MatR XB = detail::columns(inst.Xi, B);
            VecR bB(static_cast<Eigen::Index>(B.size()));
            for (std::size_t k = 0; k < B.size(); ++k) bB[static_cast<Eigen::Index>(k)] = inst.b[B[k]];
            VecR lam = XB.transpose().colPivHouseholderQr().solve(bB);
            int enter = -1;
            for (Eigen::Index j = 0; j < m && enter < 0; ++j) {
                if (std::find(B.begin(), B.end(), static_cast<int>(j)) != B.end()) continue;
                if (inst.b[j] - lam.dot(inst.Xi.col(j)) < -1e-12 * inst.b[j]) enter = static_cast<int>(j);
            }
            if (enter < 0) break;
            VecR d = XB.colPivHouseholderQr().solve(-inst.Xi.col(enter));
            double t = std::numeric_limits<double>::infinity();
            std::size_t leave = B.size();
            for (std::size_t k = 0; k < B.size(); ++k) {
                const double dk = d[static_cast<Eigen::Index>(k)];
                if (dk >= -tol) continue;
                const double q = std::max(0.0, y[B[k]]) / -dk;
                if (q < t - 1e-15 || (q <= t + 1e-15 && leave < B.size() && B[k] < B[leave])) {
                    t = q;
                    leave = k;
                }
            }
            if (leave == B.size()) break;
            for (std::size_t k = 0; k < B.size(); ++k) y[B[k]] += t * d[static_cast<Eigen::Index>(k)];
            y[enter] = t;
            y[B[leave]] = 0.0;
            B[leave] = enter;
            for (int j : B)
                if (y[j] <= 1e-13 * ynorm) y[j] = 0.0;
            ++res.pivots;
        }
        J.clear();
        for (int j : B)
            if (y[j] > 0) J.push_back(j);
        std::sort(J.begin(), J.end());
    }

    // remove drift on the final support
    if (!J.empty()) {
        VecR yJ;
        MatR XJ = detail::columns(inst.Xi, J);
        if (detail::solve_exact(XJ, inst.x, yJ, 1e-12) && (yJ.array() >= 0).all())
            for (std::size_t k = 0; k < J.size(); ++k) y[J[k]] = yJ[static_cast<Eigen::Index>(k)];
    }
    res.y = y;
    return res;
}

/// Maximal l with h_l > Phi h_{l+1} + Psi; h has n+2 entries, h[0] = inf, h[n+1] = 0.
inline int choose_splitting(const std::vector<double>& h, double Phi, double Psi)
{
    const int n = static_cast<int>(h.size()) - 2;
    if (n < 0) throw Error(errc::contract, "splitting sequence too short");
    for (int l = n; l >= 0; --l) {
        const double a = h[static_cast<std::size_t>(l)];
        const double b = h[static_cast<std::size_t>(l + 1)];
        if (std::isinf(a) && !std::isinf(b)) return l;
        if (a > Phi * b + Psi) return l;
    }
    return 0;
}

struct Chart {
    std::vector<RowQ> Xi;      // n x n rows; column j is -xi_j
    std::vector<RowQ> theta;   // shift rows: transformed support is A_i Xi + theta_i
    std::vector<RowQ> rays;    // xi_1..xi_n
    int l = 0;
    int k = 0;                 // leading coordinates sitting at toric infinity
    double Phi = 2, Psi = 1, eps = 1e-2;
    bool main = false;
};

struct ChartBuild {
    Chart chart;
    ChartPoint point;
    double tau = 0;
};

struct ChartOptions {
    bool lattice_minimal = true;
    int max_retries = 20;
    double perturbation = 1e-6;
};

/// The point lies in the chart domain (strict inequalities).
inline bool in_domain(const Chart& c, const ChartPoint& p)
{
    const int n = static_cast<int>(c.Xi.size());
    if (c.main) {
        // the main chart domain is expressed in ambient log coordinates, y = z
        const double bound = n <= 1 ? 0.0 : (std::pow(c.Phi, n - 1) - 1.0) / (c.Phi - 1.0) * c.Psi;
        for (Eigen::Index j = 0; j < p.y.size(); ++j)
            if (!(std::abs(p.y[j].real()) < bound)) return false;
        return true;
    }
    double ry = 0;
    for (Eigen::Index j = 0; j < p.y.size(); ++j) ry = std::max(ry, std::abs(p.y[j].real()));
    const double xb = std::exp(-c.Phi * ry - c.Psi);
    for (Eigen::Index j = 0; j < p.X.size(); ++j)
        if (!(std::abs(p.X[j]) < xb)) return false;
    const double lo = -(std::pow(c.Phi, n - c.l) - 1.0) / (c.Phi - 1.0) * c.Psi - c.eps;
    for (Eigen::Index j = 0; j < p.y.size(); ++j)
        if (!(p.y[j].real() > lo && p.y[j].real() < c.eps)) return false;
    return true;
}

namespace detail {

inline MatR ray_matrix(const std::vector<RowQ>& rays, int n)
{
    MatR M(n, static_cast<Eigen::Index>(rays.size()));
    for (std::size_t k = 0; k < rays.size(); ++k) M.col(static_cast<Eigen::Index>(k)) = to_vec(rays[k]);
    return M;
}

/// Carathéodory reduction of w over the given generators via a big-M feasibility lift.
inline std::vector<int> caratheodory_subset(const std::vector<RowQ>& gens, const VecR& w, int n, std::mt19937_64& rng)
{
    if (gens.empty() || w.norm() == 0.0) return {};
    const Eigen::Index m = static_cast<Eigen::Index>(gens.size());
    MatR G = ray_matrix(gens, n);
    const double eps = 1e-3 * w.norm() / std::max(1.0, G.rowwise().sum().norm());
    MatR Xi(n, m + 1);
    Xi.leftCols(m) = G;
    Xi.col(m) = w - eps * G.rowwise().sum();
    LPInstance inst;
    inst.Xi = Xi;
    inst.x = w;
    inst.b = generic_costs(m + 1, rng);
    inst.b[m] = 1e6;
    inst.y0 = VecR::Constant(m + 1, eps);
    inst.y0[m] = 1.0;
    LPResult r = select_generators(inst);
    if (r.y[m] > 1e-9) throw Error(errc::not_found, "point is not in the cone of the given rays");
    std::vector<int> s;
    for (Eigen::Index j = 0; j < m; ++j)
        if (r.y[j] > 1e-9 * w.norm()) s.push_back(static_cast<int>(j));
    return s;
}

inline bool independent(const std::vector<RowQ>& rays) { return rank_q(rays) == static_cast<int>(rays.size()); }

inline bool in_cone_of(const std::vector<RowQ>& rays, const VecR& w, int n)
{
    if (rays.empty()) return w.norm() == 0.0;
    MatR M = ray_matrix(rays, n);
    VecR c = M.colPivHouseholderQr().solve(w);
    return (M * c - w).norm() <= 1e-9 * (1.0 + w.norm()) && (c.array() >= -1e-9 * (1.0 + w.norm())).all();
}

} // namespace detail

/// Shift rows of Step 4: theta_i maximizes a.xi_j for all j; then c-block recentring.
inline std::vector<RowQ> chart_shifts(const SupportTuple& T, const std::vector<RowQ>& Xi, const std::vector<RowQ>& rays, int l)
{
    const int n = T.dim();
    std::vector<RowQ> theta;
    for (int i = 0; i < n; ++i) {
        std::vector<int> common;
        for (std::size_t j = 0; j < rays.size(); ++j) {
            auto f = facet_support(T[i], rays[j]);
            if (j == 0) {
                common = f;
            } else {
                std::vector<int> tmp;
                std::set_intersection(common.begin(), common.end(), f.begin(), f.end(), std::back_inserter(tmp));
                common = tmp;
            }
        }
        if (common.empty()) throw Error(errc::degenerate, "rays do not share a cone of the fan");
        RowQ th = row_times(T[i].row(common[0]), Xi);
        for (auto& x : th) x = -x;
        // recentre the c-block over rows with vanishing b-block
        RowQ csum(static_cast<std::size_t>(n), Rat(0));
        long long cnt = 0;
        for (const auto& a : T[i].rows()) {
            RowQ r = row_times(a, Xi);
            for (int j = 0; j < n; ++j) r[static_cast<std::size_t>(j)] += th[static_cast<std::size_t>(j)];
            bool zero_b = true;
            for (int j = 0; j < l; ++j)
                if (r[static_cast<std::size_t>(j)].numerator() != 0) zero_b = false;
            if (!zero_b) continue;
            ++cnt;
            for (int j = l; j < n; ++j) csum[static_cast<std::size_t>(j)] += r[static_cast<std::size_t>(j)];
        }
        for (int j = l; j < n; ++j) th[static_cast<std::size_t>(j)] -= csum[static_cast<std::size_t>(j)] / Rat(cnt);
        theta.push_back(th);
    }
    return theta;
}

/// The main chart: Xi = I, l = 0, supports recentred at their barycentres.
inline Chart main_chart(const SupportTuple& T, double Phi, double Psi, double eps = 1e-2)
{
    const int n = T.dim();
    Chart c;
    c.main = true;
    c.l = 0;
    c.Phi = Phi;
    c.Psi = Psi;
    c.eps = eps;
    c.Xi.assign(static_cast<std::size_t>(n), RowQ(static_cast<std::size_t>(n), Rat(0)));
    for (int j = 0; j < n; ++j) {
        c.Xi[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)] = 1;
        RowQ r(static_cast<std::size_t>(n), Rat(0));
        r[static_cast<std::size_t>(j)] = -1;
        c.rays.push_back(r);
    }
    for (int i = 0; i < n; ++i) {
        RowQ th(static_cast<std::size_t>(n), Rat(0));
        for (const auto& a : T[i].rows())
            for (int j = 0; j < n; ++j) th[static_cast<std::size_t>(j)] -= a[static_cast<std::size_t>(j)];
        for (auto& x : th) x /= Rat(T[i].size());
        c.theta.push_back(th);
    }
    return c;
}

/// Chart around the point lim v_A(z + tau chi) following Steps 1-4.
inline ChartBuild build_chart(const SupportTuple& T, const InfinityClass& cls, double Phi, double Psi, double eps,
                              std::mt19937_64& rng, const std::vector<RowQ>* rays_in = nullptr,
                              const ChartOptions& opt = {})
{
    const int n = T.dim();
    std::vector<RowQ> all_rays = rays_in ? *rays_in : fan_rays(T);
    const bool finite = cls.chi.norm() == 0.0;

    // Step 1: independent rays of sigma with w in their cone, stable under doubling tau
    double tau = finite ? 0.0 : std::max(cls.tau, 1.0);
    std::vector<RowQ> chosen;
    for (int it = 0;; ++it) {
        VecR w = cls.z.real() + tau * cls.chi;
        auto idx = detail::caratheodory_subset(cls.sigma.generators, w, n, rng);
        chosen.clear();
        for (int k : idx) chosen.push_back(cls.sigma.generators[static_cast<std::size_t>(k)]);
        if (finite || detail::in_cone_of(chosen, cls.z.real() + 2 * tau * cls.chi, n)) break;
        if (it >= 50) throw Error(errc::numeric, "ray selection did not stabilize");
        tau *= 2;
    }

    // Step 2: rays for chi first, then extend inside an n-cone reached by a small perturbation
    std::vector<RowQ> chi_rays, rest;
    if (!finite) {
        auto idx = detail::caratheodory_subset(chosen, cls.chi, n, rng);
        for (std::size_t k = 0; k < chosen.size(); ++k) {
            if (std::find(idx.begin(), idx.end(), static_cast<int>(k)) != idx.end()) chi_rays.push_back(chosen[k]);
            else rest.push_back(chosen[k]);
        }
    } else {
        rest = chosen;
    }
    std::vector<RowQ> basis = chi_rays;
    basis.insert(basis.end(), rest.begin(), rest.end());
    if (static_cast<int>(basis.size()) < n) {
        VecR w = cls.z.real() + tau * cls.chi;
        std::normal_distribution<double> nd(0.0, 1.0);
        bool done = false;
        for (int attempt = 0; attempt < opt.max_retries && !done; ++attempt) {
            VecR r(n);
            for (int j = 0; j < n; ++j) r[j] = nd(rng);
            r *= opt.perturbation * std::max(1.0, w.norm()) / r.norm();
            Cone big = minimal_cone(T, all_rays, w + r);
            if (big.dim < n) continue;
            bool contains = true;
            for (const auto& b : basis)
                if (!big.contains_ray(b)) contains = false;
            if (!contains) continue;
            std::vector<RowQ> ext = basis;
            for (const auto& g : big.generators) {
                if (static_cast<int>(ext.size()) == n) break;
                if (std::find(ext.begin(), ext.end(), g) != ext.end()) continue;
                ext.push_back(g);
                if (!detail::independent(ext)) ext.pop_back();
            }
            if (static_cast<int>(ext.size()) == n) {
                basis = ext;
                done = true;
            }
        }
        if (!done) throw Error(errc::numeric, "perturbation did not reach an n-cone");
    }
    if (!detail::independent(basis)) throw Error(errc::internal, "chart rays are dependent");
    const int k = static_cast<int>(chi_rays.size());

    std::vector<RowQ> rays = basis;
    if (opt.lattice_minimal)
        for (auto& r : rays) r = T.dual_primitive(r);

    // Step 3: coordinates of z + tau chi in the basis -xi_j, ordering and splitting
    MatR M(n, n);
    for (int j = 0; j < n; ++j) M.col(j) = -to_vec(rays[static_cast<std::size_t>(j)]);
    VecC target = cls.z + (tau * cls.chi).cast<cplx>();
    VecC x = M.cast<cplx>().partialPivLu().solve(target);
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin() + k, order.end(), [&](int a, int b) { return -x[a].real() > -x[b].real(); });
    std::vector<double> h(static_cast<std::size_t>(n + 2), 0.0);
    h[0] = std::numeric_limits<double>::infinity();
    for (int j = 1; j <= n; ++j)
        h[static_cast<std::size_t>(j)] = j <= k ? std::numeric_limits<double>::infinity() : std::max(0.0, -x[order[static_cast<std::size_t>(j - 1)]].real());
    const int l = std::max(k, choose_splitting(h, Phi, Psi));

    ChartBuild out;
    Chart& c = out.chart;
    c.l = l;
    c.k = k;
    c.Phi = Phi;
    c.Psi = Psi;
    c.eps = eps;
    for (int j = 0; j < n; ++j) c.rays.push_back(rays[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])]);
    c.Xi.assign(static_cast<std::size_t>(n), RowQ(static_cast<std::size_t>(n)));
    for (int r = 0; r < n; ++r)
        for (int j = 0; j < n; ++j) c.Xi[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] = -c.rays[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)];

    // Step 4
    c.theta = chart_shifts(T, c.Xi, c.rays, l);

    out.point.X = VecC::Zero(l);
    out.point.y = VecC::Zero(n - l);
    for (int j = 0; j < n; ++j) {
        const cplx xj = x[order[static_cast<std::size_t>(j)]];
        if (j < k) out.point.X[j] = 0.0;
        else if (j < l) out.point.X[j] = std::exp(xj);
        else out.point.y[j - l] = xj;
    }
    out.tau = tau;
    return out;
}

} // namespace toric

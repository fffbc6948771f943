#pragma once

#include <functional>
#include <limits>
#include <string>

#include <boost/math/special_functions/erf.hpp>

#include "caratheodory.hpp"

namespace toric {

/// Element (Xi, theta_1..theta_n) of the monoid acting on tuples by A_i -> A_i Xi + theta_i.
struct MonomialAction {
    std::vector<RowQ> Xi;
    std::vector<RowQ> theta;

    int dim() const { return static_cast<int>(Xi.size()); }
    bool integral() const
    {
        for (const auto& r : Xi)
            for (const auto& x : r)
                if (!is_integer(x)) return false;
        return true;
    }
    bool unimodular() const
    {
        if (!integral()) return false;
        Rat d = det_q(Xi);
        return d.denominator() == 1 && std::abs(d.numerator()) == 1;
    }
    bool operator==(const MonomialAction& o) const { return Xi == o.Xi && theta == o.theta; }
};

inline MonomialAction identity_action(int n)
{
    MonomialAction S;
    S.Xi.assign(static_cast<std::size_t>(n), RowQ(static_cast<std::size_t>(n), Rat(0)));
    for (int j = 0; j < n; ++j) S.Xi[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)] = 1;
    S.theta.assign(static_cast<std::size_t>(n), RowQ(static_cast<std::size_t>(n), Rat(0)));
    return S;
}

/// (Xi, theta) o (Xi', theta') = (Xi' Xi, theta + theta' Xi): apply the right factor first.
inline MonomialAction compose(const MonomialAction& S, const MonomialAction& Sp)
{
    const int n = S.dim();
    if (Sp.dim() != n) throw Error(errc::contract, "compose: dimension mismatch");
    MonomialAction r;
    for (int k = 0; k < n; ++k) r.Xi.push_back(row_times(Sp.Xi[static_cast<std::size_t>(k)], S.Xi));
    for (int i = 0; i < n; ++i) {
        RowQ t = row_times(Sp.theta[static_cast<std::size_t>(i)], S.Xi);
        for (int j = 0; j < n; ++j) t[static_cast<std::size_t>(j)] += S.theta[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        r.theta.push_back(t);
    }
    return r;
}

inline MonomialAction chart_action(const Chart& c) { return {c.Xi, c.theta}; }

struct ActedTuple {
    SupportTuple tuple;
    std::vector<std::vector<int>> perm;   // perm[i][k]: source row of transformed row k
};

inline ActedTuple apply_action(const SupportTuple& T, const MonomialAction& S)
{
    const int n = T.dim();
    if (S.dim() != n || static_cast<int>(S.theta.size()) != n) throw Error(errc::contract, "action dimension mismatch");
    if (det_q(S.Xi).numerator() == 0) throw Error(errc::domain, "action matrix is singular");
    ActedTuple out;
    std::vector<Support> sup;
    for (int i = 0; i < n; ++i) {
        std::vector<RowQ> rows;
        for (const auto& a : T[i].rows()) {
            RowQ r = row_times(a, S.Xi);
            for (int j = 0; j < n; ++j) r[static_cast<std::size_t>(j)] += S.theta[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            rows.push_back(r);
        }
        auto p = Support::sort_order(rows);
        out.perm.emplace_back(p.begin(), p.end());
        sup.emplace_back(n, std::move(rows));
    }
    out.tuple = SupportTuple(std::move(sup));
    return out;
}

/// Coefficients follow their monomials: g_{i, a Xi + theta} = f_{ia}.
inline std::vector<VecC> reindex(const std::vector<VecC>& f, const std::vector<std::vector<int>>& perm)
{
    std::vector<VecC> g;
    for (std::size_t i = 0; i < f.size(); ++i) {
        VecC r(static_cast<Eigen::Index>(perm[i].size()));
        for (std::size_t k = 0; k < perm[i].size(); ++k) r[static_cast<Eigen::Index>(k)] = f[i][perm[i][k]];
        g.push_back(r);
    }
    return g;
}

/// Inverse of reindex: back to the source row order.
inline std::vector<VecC> unindex(const std::vector<VecC>& g, const std::vector<std::vector<int>>& perm)
{
    std::vector<VecC> f;
    for (std::size_t i = 0; i < g.size(); ++i) {
        VecC r(static_cast<Eigen::Index>(perm[i].size()));
        for (std::size_t k = 0; k < perm[i].size(); ++k) r[perm[i][k]] = g[i][static_cast<Eigen::Index>(k)];
        f.push_back(r);
    }
    return f;
}

inline LaurentSystem apply_action(const LaurentSystem& f, const MonomialAction& S)
{
    ActedTuple a = apply_action(f.tuple(), S);
    return LaurentSystem(a.tuple, reindex(f.coefficients(), a.perm));
}

struct NormalFormReport {
    bool a = true, b = true, c = true, d = true, e = true;
    std::vector<std::string> violations;
    bool ok() const { return a && b && c && d && e; }
};

inline NormalFormReport verify_normal_form(const SupportTuple& T, int l)
{
    const int n = T.dim();
    NormalFormReport rep;
    if (l < 0 || l > n) {
        rep.a = false;
        rep.violations.push_back("splitting out of range");
        return rep;
    }
    for (int i = 0; i < n; ++i) {
        bool has_zero = false;
        RowQ csum(static_cast<std::size_t>(n - l), Rat(0));
        for (const auto& r : T[i].rows()) {
            bool zero = true;
            for (int j = 0; j < l; ++j) {
                const Rat& x = r[static_cast<std::size_t>(j)];
                if (x.numerator() < 0 || !is_integer(x)) {
                    if (rep.a) rep.violations.push_back("(a) negative or fractional b in support " + std::to_string(i));
                    rep.a = false;
                }
                if (x.numerator() != 0) zero = false;
            }
            if (zero) {
                has_zero = true;
                for (int j = l; j < n; ++j) csum[static_cast<std::size_t>(j - l)] += r[static_cast<std::size_t>(j)];
            }
        }
        if (!has_zero) {
            rep.b = false;
            rep.violations.push_back("(b) no row with b = 0 in support " + std::to_string(i));
        }
        for (const auto& x : csum)
            if (x.numerator() != 0) {
                rep.c = false;
                rep.violations.push_back("(c) c-block of b = 0 rows does not sum to zero in support " + std::to_string(i));
                break;
            }
    }
    if (!rep.a || !rep.b) return rep;
    std::vector<RowQ> rays;
    try {
        rays = fan_rays(T);
    } catch (const Error&) {
        rep.d = rep.e = false;
        rep.violations.push_back("(d) fan is degenerate");
        return rep;
    }
    std::vector<RowQ> minus_e;
    for (int j = 0; j < l; ++j) {
        RowQ r(static_cast<std::size_t>(n), Rat(0));
        r[static_cast<std::size_t>(j)] = -1;
        minus_e.push_back(r);
        if (std::find(rays.begin(), rays.end(), r) == rays.end()) {
            rep.d = false;
            rep.violations.push_back("(d) -e_" + std::to_string(j + 1) + " is not a ray of the fan");
        }
    }
    if (!minus_e.empty() && !rays_share_cone(T, minus_e)) {
        rep.e = false;
        rep.violations.push_back("(e) no cone of the fan contains all -e_j");
    }
    return rep;
}

struct NormalFormReduction {
    MonomialAction S;
    int l = 0;
};

/// Monomial action bringing T into normal form around the cone sigma containing chi.
inline NormalFormReduction reduce_to_normal_form(const SupportTuple& T, const Cone& sigma, const VecR& chi,
                                                 bool lattice_minimal = true)
{
    const int n = T.dim();
    NormalFormReduction out;
    if (sigma.dim == 0) {
        Chart m = main_chart(T, 2, 1);
        out.S = chart_action(m);
        out.l = 0;
        return out;
    }
    auto all_rays = fan_rays(T);
    if (!(minimal_cone(T, all_rays, chi) == sigma)) throw Error(errc::contract, "chi is not interior to sigma");
    std::vector<RowQ> block;
    if (static_cast<int>(sigma.generators.size()) == sigma.dim) {
        block = sigma.generators;
    } else {
        std::mt19937_64 rng(0);
        for (int k : detail::caratheodory_subset(sigma.generators, chi, n, rng))
            block.push_back(sigma.generators[static_cast<std::size_t>(k)]);
    }
    const int l = static_cast<int>(block.size());
    std::vector<RowQ> others;
    for (const auto& r : all_rays)
        if (std::find(block.begin(), block.end(), r) == block.end()) others.push_back(r);

    std::vector<RowQ> best;
    Rat best_det = 0;
    const int need = n - l;
    std::vector<int> pick;
    std::function<void(std::size_t)> rec = [&](std::size_t from) {
        if (static_cast<int>(pick.size()) == need) {
            std::vector<RowQ> cand = block;
            for (int k : pick) cand.push_back(others[static_cast<std::size_t>(k)]);
            Rat d = det_q(cand);
            if (d.numerator() == 0) return;
            if (d.numerator() < 0) d = -d;
            if (!rays_share_cone(T, cand)) return;
            if (best.empty() || d < best_det) {
                best = cand;
                best_det = d;
            }
            return;
        }
        for (std::size_t k = from; k < others.size(); ++k) {
            pick.push_back(static_cast<int>(k));
            rec(k + 1);
            pick.pop_back();
        }
    };
    rec(0);
    if (best.empty()) throw Error(errc::not_found, "no completion of the cone rays to an n-cone");
    if (lattice_minimal)
        for (auto& r : best) r = T.dual_primitive(r);
    std::vector<RowQ> Xi(static_cast<std::size_t>(n), RowQ(static_cast<std::size_t>(n)));
    for (int r = 0; r < n; ++r)
        for (int j = 0; j < n; ++j) Xi[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] = -best[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)];
    out.S.Xi = Xi;
    out.S.theta = chart_shifts(T, Xi, best, l);
    out.l = l;
    return out;
}

namespace detail {

/// Quasi-random points on S^{n-1}: Halton sequence pushed through the normal quantile.
inline std::vector<VecR> sphere_samples(int n, int count)
{
    static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19};
    std::vector<VecR> pts;
    if (n == 1) return {VecR::Constant(1, 1.0), VecR::Constant(1, -1.0)};
    for (int j = 0; j < n; ++j) {
        pts.push_back(VecR::Unit(n, j));
        pts.push_back(-VecR::Unit(n, j));
    }
    for (int k = 1; static_cast<int>(pts.size()) < count; ++k) {
        VecR w(n);
        for (int j = 0; j < n; ++j) {
            double f = 1, r = 0;
            for (int i = k; i > 0; i /= primes[j]) {
                f /= primes[j];
                r += f * (i % primes[j]);
            }
            w[j] = std::sqrt(2.0) * boost::math::erf_inv(2.0 * r - 1.0);
        }
        if (w.norm() > 1e-12) pts.push_back(w / w.norm());
    }
    return pts;
}

/// Infimum of a degree-zero homogeneous ratio over real w != 0.
inline double minimize_ratio(int n, const std::function<double(const VecR&)>& F, int samples = 10000, int rounds = 50)
{
    auto safe = [&](const VecR& w) {
        double v = F(w);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };
    VecR best;
    double bv = std::numeric_limits<double>::infinity();
    for (const auto& w : sphere_samples(n, samples)) {
        double v = safe(w);
        if (v < bv) {
            bv = v;
            best = w;
        }
    }
    if (best.size() == 0 || n == 1) return bv;
    double step = 0.05;
    for (int r = 0; r < rounds; ++r) {
        bool improved = false;
        for (int j = 0; j < n; ++j)
            for (double sgn : {1.0, -1.0}) {
                VecR w = best;
                w[j] += sgn * step;
                w /= w.norm();
                double v = safe(w);
                if (v < bv) {
                    bv = v;
                    best = w;
                    improved = true;
                }
            }
        if (!improved) step /= 2;
    }
    return bv;
}

inline double max_spread(const Support& A, const VecR& w)
{
    VecR p = A.matrix() * w;
    return p.maxCoeff() - p.minCoeff();
}

} // namespace detail

struct NormalFormData {
    int n = 0, l = 0;
    SupportTuple tuple;
    std::vector<std::vector<std::vector<int>>> blocks;   // blocks[i][r]: rows with |b| = r
    std::vector<double> omega_norm;
    std::vector<MatR> L;
    MatR Lstack;
    std::vector<double> nu_i;
    double nu = 0;
    double lambda = 0;
    std::vector<double> s;
    double h_bound = 0;
    bool smooth = false;
    std::vector<Eigen::MatrixXi> bexp;   // b-blocks as integers
    std::vector<MatR> cexp;              // c-blocks
    MatR G;                              // L^T L

    int count0(int i) const { return static_cast<int>(blocks[static_cast<std::size_t>(i)][0].size()); }
    double sum_s2() const
    {
        double t = 0;
        for (double x : s) t += x * x;
        return t;
    }
    double max_s() const { return *std::max_element(s.begin(), s.end()); }
    double max_omega() const { return *std::max_element(omega_norm.begin(), omega_norm.end()); }
    /// Hermitian norm at omega: sqrt(sum_i |L_i u|^2).
    double norm(const VecC& u) const { return std::sqrt(std::max(0.0, (u.adjoint() * G.cast<cplx>() * u)(0).real())); }
    double finsler(const VecC& u) const
    {
        double m = 0;
        for (const auto& Li : L) m = std::max(m, (Li.cast<cplx>() * u).norm());
        return m;
    }
};

namespace detail {

inline int b_degree(const RowQ& r, int l)
{
    long long s = 0;
    for (int j = 0; j < l; ++j) s += r[static_cast<std::size_t>(j)].numerator();
    return static_cast<int>(s);
}

inline bool full_rank(const MatR& M, int n)
{
    if (M.rows() < n) return false;
    Eigen::JacobiSVD<MatR> svd(M);
    const auto& sv = svd.singularValues();
    if (sv.size() < n || sv[0] == 0.0) return false;
    return sv[n - 1] >= 1e-10 * sv[0];
}

inline double nu_closed_form(const Support& A, const MatR& Li)
{
    MatR G = Li.transpose() * Li;
    Eigen::SelfAdjointEigenSolver<MatR> es(G);
    const VecR& ev = es.eigenvalues();
    const double top = ev.cwiseAbs().maxCoeff();
    double best = 0;
    for (int k = 0; k < A.size(); ++k) {
        VecR a = A.matrix().row(k).transpose();
        VecR c = es.eigenvectors().transpose() * a;
        double q = 0;
        for (Eigen::Index j = 0; j < ev.size(); ++j) {
            if (ev[j] > 1e-12 * std::max(top, 1e-300)) q += c[j] * c[j] / ev[j];
            else if (std::abs(c[j]) > 1e-9 * (1.0 + a.norm())) return std::numeric_limits<double>::infinity();
        }
        best = std::max(best, std::sqrt(q));
    }
    return best;
}

inline double lambda_omega_impl(const NormalFormData& nf, int b_block)
{
    const int n = nf.n, l = nf.l;
    auto F = [&](const VecR& w) {
        double num = 0;
        for (int i = 0; i < n; ++i) {
            const auto& A = nf.tuple[i];
            for (int k : nf.blocks[static_cast<std::size_t>(i)][static_cast<std::size_t>(b_block)]) {
                double s = 0;
                for (int j = 0; j < l; ++j) s += A.matrix()(k, j) * w[j];
                num = std::max(num, std::abs(s));
            }
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (int k : nf.blocks[static_cast<std::size_t>(i)][0]) {
                double s = 0;
                for (int j = l; j < n; ++j) s += A.matrix()(k, j) * w[j];
                lo = std::min(lo, s);
                hi = std::max(hi, s);
            }
            if (hi > lo) num = std::max(num, hi - lo);
        }
        double den = nf.finsler(w.cast<cplx>());
        if (den <= 1e-300) return std::numeric_limits<double>::infinity();
        return num / den;
    };
    return minimize_ratio(n, F);
}

} // namespace detail

/// L rank n and some choice of one row per L_i is independent.
inline bool smoothness_check(const NormalFormData& nf)
{
    const int n = nf.n;
    if (!detail::full_rank(nf.Lstack, n)) return false;
    std::vector<VecR> chosen;
    std::function<bool(int)> rec = [&](int i) {
        if (i == n) return true;
        const MatR& Li = nf.L[static_cast<std::size_t>(i)];
        for (Eigen::Index r = 0; r < Li.rows(); ++r) {
            if (Li.row(r).norm() < 1e-14) continue;
            MatR M(i + 1, n);
            for (int k = 0; k < i; ++k) M.row(k) = chosen[static_cast<std::size_t>(k)].transpose();
            M.row(i) = Li.row(r);
            Eigen::JacobiSVD<MatR> svd(M);
            const auto& sv = svd.singularValues();
            if (sv[i] < 1e-10 * sv[0]) continue;
            chosen.push_back(Li.row(r).transpose());
            if (rec(i + 1)) return true;
            chosen.pop_back();
        }
        return false;
    };
    return rec(0);
}

inline NormalFormData block_decompose(const SupportTuple& T, int l)
{
    const int n = T.dim();
    NormalFormData nf;
    nf.n = n;
    nf.l = l;
    nf.tuple = T;
    for (int i = 0; i < n; ++i) {
        const auto& A = T[i];
        detail::check_normal_rows(A, l);
        std::vector<std::vector<int>> bl;
        for (int k = 0; k < A.size(); ++k) {
            int r = detail::b_degree(A.row(k), l);
            if (static_cast<int>(bl.size()) <= r) bl.resize(static_cast<std::size_t>(r + 1));
            bl[static_cast<std::size_t>(r)].push_back(k);
        }
        if (bl.empty() || bl[0].empty()) throw Error(errc::contract, "support has no row with b = 0");
        if (bl.size() < 2) bl.resize(2);
        const double on = std::sqrt(static_cast<double>(bl[0].size()));
        MatR Li = MatR::Zero(static_cast<Eigen::Index>(bl[0].size() + bl[1].size()), n);
        Eigen::Index row = 0;
        for (int k : bl[0]) {
            for (int j = l; j < n; ++j) Li(row, j) = A.matrix()(k, j) / on;
            ++row;
        }
        for (int k : bl[1]) {
            for (int j = 0; j < l; ++j) Li(row, j) = A.matrix()(k, j) / on;
            ++row;
        }
        nf.blocks.push_back(bl);
        nf.omega_norm.push_back(on);
        nf.L.push_back(Li);
        nf.s.push_back(std::sqrt(static_cast<double>(A.size()) / static_cast<double>(bl[0].size())));
    }
    Eigen::Index rows = 0;
    for (const auto& Li : nf.L) rows += Li.rows();
    nf.Lstack.resize(rows, n);
    rows = 0;
    for (const auto& Li : nf.L) {
        nf.Lstack.middleRows(rows, Li.rows()) = Li;
        rows += Li.rows();
    }
    nf.G = nf.Lstack.transpose() * nf.Lstack;
    for (int i = 0; i < n; ++i) {
        const auto& A = T[i];
        Eigen::MatrixXi b(A.size(), l);
        for (int k = 0; k < A.size(); ++k)
            for (int j = 0; j < l; ++j) b(k, j) = static_cast<int>(A.row(k)[static_cast<std::size_t>(j)].numerator());
        nf.bexp.push_back(b);
        nf.cexp.push_back(A.matrix().rightCols(n - l));
    }
    for (int i = 0; i < n; ++i) nf.nu_i.push_back(detail::nu_closed_form(T[i], nf.L[static_cast<std::size_t>(i)]));
    nf.nu = *std::max_element(nf.nu_i.begin(), nf.nu_i.end());
    nf.lambda = detail::lambda_omega_impl(nf, 1);
    double m = 0;
    for (int i = 0; i < n; ++i) m = std::max(m, std::sqrt(static_cast<double>(T[i].size())));
    nf.h_bound = nf.lambda / (8.0 * nf.nu * m);
    nf.smooth = smoothness_check(nf);
    return nf;
}

/// The thickness at omega with b ranging over B^(0), whose rows are all zero.
inline double lambda_omega_literal(const NormalFormData& nf) { return detail::lambda_omega_impl(nf, 0); }

/// Joint thickness at the origin of the main chart.
inline double lambda_zero(const SupportTuple& T)
{
    const int n = T.dim();
    std::vector<MatR> C;
    for (int i = 0; i < n; ++i) {
        const MatR& A = T[i].matrix();
        MatR c = A.rowwise() - A.colwise().mean();
        C.push_back(c / std::sqrt(static_cast<double>(A.rows())));
    }
    auto F = [&](const VecR& w) {
        double num = 0, den = 0;
        for (int i = 0; i < n; ++i) {
            num = std::max(num, detail::max_spread(T[i], w));
            den = std::max(den, (C[static_cast<std::size_t>(i)] * w).norm());
        }
        if (den <= 1e-300) return std::numeric_limits<double>::infinity();
        return num / den;
    };
    return detail::minimize_ratio(n, F);
}

} // namespace toric

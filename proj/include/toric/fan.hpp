#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "polysys.hpp"

namespace toric {

using PointSet = std::vector<RowQ>;

/// Rows of A maximizing a.xi (exact for rational xi).
inline std::vector<int> facet_support(const Support& A, const RowQ& xi)
{
    std::vector<int> idx;
    Rat best = 0;
    for (int k = 0; k < A.size(); ++k) {
        Rat v = dot(A.row(k), xi);
        if (idx.empty() || v > best) {
            idx.assign(1, k);
            best = v;
        } else if (v == best) {
            idx.push_back(k);
        }
    }
    return idx;
}

/// Floating version with absolute tolerance on the pairing.
inline std::vector<int> facet_support(const Support& A, const VecR& xi, double tol = 1e-9)
{
    VecR s = A.matrix() * xi;
    const double top = s.maxCoeff();
    std::vector<int> idx;
    for (int k = 0; k < A.size(); ++k)
        if (s[k] >= top - tol) idx.push_back(k);
    return idx;
}

namespace detail {

inline RowQ sign_normalized(const std::vector<long long>& v)
{
    RowQ r = to_rat(v);
    for (const auto& x : r) {
        if (x.numerator() == 0) continue;
        if (x.numerator() < 0)
            for (auto& y : r) y = -y;
        break;
    }
    return r;
}

inline bool is_zero(const RowQ& v)
{
    return std::all_of(v.begin(), v.end(), [](const Rat& x) { return x.numerator() == 0; });
}

/// Primitive, sign-normalized edge directions of all summands.
inline std::vector<RowQ> edge_directions(const std::vector<PointSet>& summands)
{
    std::set<RowQ> dirs;
    for (const auto& P : summands)
        for (std::size_t a = 0; a < P.size(); ++a)
            for (std::size_t b = a + 1; b < P.size(); ++b) {
                RowQ d(P[a].size());
                for (std::size_t k = 0; k < d.size(); ++k) d[k] = P[a][k] - P[b][k];
                if (is_zero(d)) continue;
                dirs.insert(sign_normalized(primitive_integer(d)));
            }
    return {dirs.begin(), dirs.end()};
}

/// Generalized cross product of d-1 vectors in Q^d.
inline RowQ cofactor_normal(const std::vector<RowQ>& m, std::size_t d)
{
    RowQ nu(d);
    for (std::size_t k = 0; k < d; ++k) {
        std::vector<RowQ> minor;
        for (const auto& r : m) {
            RowQ s;
            for (std::size_t j = 0; j < d; ++j)
                if (j != k) s.push_back(r[j]);
            minor.push_back(s);
        }
        Rat det = minor.empty() ? Rat(1) : det_q(minor);
        nu[k] = (k % 2 == 0) ? det : -det;
    }
    return nu;
}

template <class F>
void for_each_subset(std::size_t m, std::size_t k, F&& f)
{
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    if (k > m) return;
    for (;;) {
        f(idx);
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == m - k + (i - 1)) --i;
        if (i == 0) return;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

inline int dimension(const std::vector<PointSet>& summands)
{
    std::vector<RowQ> diffs;
    for (const auto& P : summands)
        for (std::size_t a = 1; a < P.size(); ++a) {
            RowQ d(P[a].size());
            for (std::size_t k = 0; k < d.size(); ++k) d[k] = P[a][k] - P[0][k];
            diffs.push_back(d);
        }
    return rank_q(diffs);
}

inline PointSet argmax_set(const PointSet& P, const RowQ& nu)
{
    PointSet out;
    Rat best = 0;
    for (const auto& p : P) {
        Rat v = dot(p, nu);
        if (out.empty() || v > best) {
            out.assign(1, p);
            best = v;
        } else if (v == best) {
            out.push_back(p);
        }
    }
    return out;
}

} // namespace detail

struct Facet {
    RowQ normal;                  // primitive integer outer normal
    Rat height;                   // max of normal . p over the sum
    std::vector<PointSet> face;   // maximizing subsets of each summand
};

/// Facets of the Minkowski sum of conv(summands) in Q^d; empty if the sum is not full dimensional.
inline std::vector<Facet> minkowski_facets(const std::vector<PointSet>& summands, std::size_t d)
{
    std::vector<Facet> out;
    if (detail::dimension(summands) != static_cast<int>(d)) return out;
    std::set<RowQ> cands;
    if (d == 1) {
        cands.insert(RowQ{Rat(1)});
    } else {
        auto dirs = detail::edge_directions(summands);
        detail::for_each_subset(dirs.size(), d - 1, [&](const std::vector<std::size_t>& s) {
            std::vector<RowQ> m;
            for (auto k : s) m.push_back(dirs[k]);
            RowQ nu = detail::cofactor_normal(m, d);
            if (detail::is_zero(nu)) return;
            cands.insert(detail::sign_normalized(primitive_integer(nu)));
        });
    }
    for (const auto& c : cands) {
        for (int sgn : {1, -1}) {
            RowQ nu = c;
            if (sgn < 0)
                for (auto& x : nu) x = -x;
            Facet f;
            f.normal = nu;
            f.height = 0;
            for (const auto& P : summands) {
                auto F = detail::argmax_set(P, nu);
                f.height += dot(F[0], nu);
                f.face.push_back(std::move(F));
            }
            if (detail::dimension(f.face) == static_cast<int>(d) - 1) out.push_back(std::move(f));
        }
    }
    return out;
}

/// Euclidean volume of the Minkowski sum of conv(summands) in Q^d, exact.
inline Rat minkowski_volume(const std::vector<PointSet>& summands, std::size_t d)
{
    if (d == 0) return 1;
    if (detail::dimension(summands) != static_cast<int>(d)) return 0;
    if (d == 1) {
        Rat len = 0;
        for (const auto& P : summands) {
            Rat lo = P[0][0], hi = P[0][0];
            for (const auto& p : P) {
                lo = std::min(lo, p[0]);
                hi = std::max(hi, p[0]);
            }
            len += hi - lo;
        }
        return len;
    }
    RowQ p0(d, Rat(0));
    for (const auto& P : summands)
        for (std::size_t k = 0; k < d; ++k) p0[k] += P[0][k];
    Rat vol = 0;
    for (const auto& f : minkowski_facets(summands, d)) {
        Rat h = f.height - dot(f.normal, p0);
        if (h.numerator() == 0) continue;
        std::size_t k = 0;
        while (f.normal[k].numerator() == 0) ++k;
        std::vector<PointSet> proj;
        for (const auto& F : f.face) {
            PointSet Q;
            for (const auto& p : F) {
                RowQ q;
                for (std::size_t j = 0; j < d; ++j)
                    if (j != k) q.push_back(p[j]);
                Q.push_back(q);
            }
            proj.push_back(Q);
        }
        Rat nk = f.normal[k].numerator() < 0 ? -f.normal[k] : f.normal[k];
        vol += h * minkowski_volume(proj, d - 1) / nk;
    }
    return vol / Rat(static_cast<long long>(d));
}

/// n! times the mixed volume, by inclusion-exclusion over subsets of supports.
inline Rat mixed_volume(const SupportTuple& T)
{
    const int n = T.dim();
    if (n > 4) throw Error(errc::unsupported, "mixed volume is limited to n <= 4");
    Rat mv = 0;
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        std::vector<PointSet> s;
        int cnt = 0;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) {
                s.push_back(T[i].rows());
                ++cnt;
            }
        Rat v = minkowski_volume(s, static_cast<std::size_t>(n));
        mv += ((n - cnt) % 2 == 0) ? v : -v;
    }
    return mv;
}

inline bool check_ndh(const SupportTuple& T) { return mixed_volume(T).numerator() > 0; }

/// Primitive outer normals of the facets of conv(A_1)+...+conv(A_n), sorted.
inline std::vector<RowQ> fan_rays(const SupportTuple& T)
{
    if (!check_ndh(T)) throw Error(errc::degenerate, "degenerate support tuple");
    std::vector<PointSet> s;
    for (const auto& A : T.supports()) s.push_back(A.rows());
    std::vector<RowQ> rays;
    for (const auto& f : minkowski_facets(s, static_cast<std::size_t>(T.dim()))) rays.push_back(f.normal);
    std::sort(rays.begin(), rays.end());
    return rays;
}

struct Cone {
    std::vector<RowQ> generators;
    int dim = 0;

    bool operator==(const Cone& o) const { return generators == o.generators; }
    bool contains_ray(const RowQ& r) const
    {
        return std::find(generators.begin(), generators.end(), r) != generators.end();
    }
};

inline Cone make_cone(std::vector<RowQ> gens)
{
    Cone c;
    std::sort(gens.begin(), gens.end());
    c.dim = rank_q(gens);
    c.generators = std::move(gens);
    return c;
}

/// Minimal fan cone containing w: rays whose facet supports contain those of w.
inline Cone minimal_cone(const SupportTuple& T, const std::vector<RowQ>& rays, const VecR& w, double tol = 1e-9)
{
    std::vector<std::vector<int>> fw;
    for (const auto& A : T.supports()) fw.push_back(facet_support(A, w, tol));
    std::vector<RowQ> gens;
    for (const auto& r : rays) {
        bool ok = true;
        for (int i = 0; i < T.dim() && ok; ++i) {
            auto fr = facet_support(T[i], r);
            for (int k : fw[static_cast<std::size_t>(i)])
                if (std::find(fr.begin(), fr.end(), k) == fr.end()) {
                    ok = false;
                    break;
                }
        }
        if (ok) gens.push_back(r);
    }
    return make_cone(std::move(gens));
}

/// Do all given rays lie in a common cone of the fan, that cone having dimension >= k?
inline bool rays_share_cone(const SupportTuple& T, const std::vector<RowQ>& chosen)
{
    for (int i = 0; i < T.dim(); ++i) {
        std::vector<int> common;
        bool first = true;
        for (const auto& r : chosen) {
            auto f = facet_support(T[i], r);
            if (first) {
                common = f;
                first = false;
            } else {
                std::vector<int> tmp;
                std::set_intersection(common.begin(), common.end(), f.begin(), f.end(), std::back_inserter(tmp));
                common = tmp;
            }
        }
        if (common.empty()) return false;
    }
    return true;
}

struct InfinityClass {
    Cone sigmaInf;
    VecR chi;
    VecC z;
    Cone sigma;
    double tau = 0;
};

/// Cones attached to the point lim v_A(z + tau chi); tau is doubled until sigma stabilizes.
inline InfinityClass classify_infinity(const SupportTuple& T, const VecC& z, const VecR& chi, double tau,
                                       const std::vector<RowQ>* rays_in = nullptr)
{
    const int n = T.dim();
    if (z.size() != n || chi.size() != n) throw Error(errc::contract, "classify_infinity: dimension mismatch");
    if (tau < 0) throw Error(errc::contract, "classify_infinity: tau must be non-negative");
    std::vector<RowQ> rays = rays_in ? *rays_in : fan_rays(T);
    InfinityClass c;
    c.chi = chi;
    const double cn = chi.squaredNorm();
    if (cn == 0.0) {
        c.sigmaInf = make_cone({});
        c.z = z;
    } else {
        c.sigmaInf = minimal_cone(T, rays, chi);
        if (c.sigmaInf.dim == 0) throw Error(errc::not_found, "chi is not in the relative interior of a fan cone");
        MatR G(n, static_cast<Eigen::Index>(c.sigmaInf.generators.size()));
        for (std::size_t k = 0; k < c.sigmaInf.generators.size(); ++k) G.col(static_cast<Eigen::Index>(k)) = to_vec(c.sigmaInf.generators[k]);
        VecR coef = G.colPivHouseholderQr().solve(chi);
        if ((G * coef - chi).norm() > 1e-8 * std::sqrt(cn))
            throw Error(errc::not_found, "chi is not in the span of its minimal cone");
        c.z = z - chi.cast<cplx>() * (chi.cast<cplx>().dot(z) / cn);
    }
    double t = std::max(tau, 1.0);
    if (cn == 0.0) {
        c.sigma = minimal_cone(T, rays, c.z.real());
        c.tau = tau;
        return c;
    }
    Cone prev = minimal_cone(T, rays, c.z.real() + t * chi);
    for (int it = 0; it < 50; ++it) {
        Cone next = minimal_cone(T, rays, c.z.real() + 2 * t * chi);
        if (next == prev) {
            c.sigma = prev;
            c.tau = t;
            return c;
        }
        prev = next;
        t *= 2;
    }
    throw Error(errc::numeric, "minimal cone did not stabilize after 50 doublings of tau");
}

} // namespace toric

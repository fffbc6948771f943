#pragma once

#include <cmath>
#include <limits>
#include <memory>

#include "normal_form.hpp"

namespace toric {

inline constexpr double singular_ratio = 1e-13;

struct RenormalizedSystem {
    std::vector<VecC> q;
    VecC point;          // z (full) or y (partial)
    bool partial = false;
};

/// q_{ia} = f_{ia} e^{a z}.
inline RenormalizedSystem renormalize(const LaurentSystem& f, const VecC& z)
{
    RenormalizedSystem r;
    r.point = z;
    for (int i = 0; i < f.dim(); ++i)
        r.q.push_back(f.row(i).cwiseProduct(evaluate_v(f.tuple()[i], z)));
    return r;
}

/// q_{ia} = f_{ia} e^{c y}, c the trailing n-l exponents.
inline RenormalizedSystem renormalize_partial(const LaurentSystem& f, int l, const VecC& y)
{
    const int n = f.dim();
    if (y.size() != n - l) throw Error(errc::contract, "partial renormalization: wrong y length");
    RenormalizedSystem r;
    r.point = y;
    r.partial = true;
    for (int i = 0; i < n; ++i) {
        const auto& A = f.tuple()[i];
        VecC e = A.matrix().rightCols(n - l).cast<cplx>() * y;
        r.q.push_back(f.row(i).cwiseProduct(e.array().exp().matrix()));
    }
    return r;
}

namespace detail {

/// sigma_max(D M^{-1}), or +inf when M is singular to the threshold.
inline double conditioned_norm(const MatC& D, const MatC& M)
{
    Eigen::JacobiSVD<MatC> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv[0] == 0.0 || sv[sv.size() - 1] < singular_ratio * sv[0])
        return std::numeric_limits<double>::infinity();
    MatC Minv = svd.matrixV() * sv.cwiseInverse().cast<cplx>().asDiagonal() * svd.matrixU().adjoint();
    return spectral_norm(D * Minv);
}

inline MatC stack_rows(const std::vector<MatC>& parts)
{
    Eigen::Index rows = 0, cols = parts.empty() ? 0 : parts[0].cols();
    for (const auto& p : parts) rows += p.rows();
    MatC S(rows, cols);
    rows = 0;
    for (const auto& p : parts) {
        S.middleRows(rows, p.rows()) = p;
        rows += p.rows();
    }
    return S;
}

/// Row f P J / (|f| |v|) with P the projection orthogonal to v.
inline Eigen::RowVectorXcd condition_row(const VecC& f, const VecC& v, const MatC& J)
{
    const double nv = v.norm();
    VecC vh = v / nv;
    Eigen::RowVectorXcd fr = f.transpose();
    Eigen::RowVectorXcd fp = fr - (fr * vh) * vh.adjoint();
    return fp * J / (f.norm() * nv);
}

} // namespace detail

/// Condition number at a log point z of the main chart.
inline double mu_main_log(const LaurentSystem& f, const VecC& z)
{
    const int n = f.dim();
    MatC M(n, n);
    std::vector<MatC> D;
    for (int i = 0; i < n; ++i) {
        const auto& A = f.tuple()[i];
        VecR re = A.matrix() * z.real();
        VecC v = ((A.matrix().cast<cplx>() * z).array() - cplx(re.maxCoeff(), 0.0)).exp().matrix();
        MatC J = v.asDiagonal() * A.matrix().cast<cplx>();
        M.row(i) = detail::condition_row(f.row(i), v, J);
        D.push_back(projected_derivative(v, J));
    }
    return detail::conditioned_norm(detail::stack_rows(D), M);
}

inline double mu_main(const LaurentSystem& f, const VecC& Z)
{
    if (Z.size() != f.dim()) throw Error(errc::contract, "point dimension mismatch");
    for (Eigen::Index j = 0; j < Z.size(); ++j)
        if (Z[j] == cplx(0.0)) throw Error(errc::domain, "zero coordinate in evaluation point");
    return mu_main_log(f, Z.array().log().matrix());
}

/// Condition number at a chart point; f must be given on the chart tuple.
inline double mu_chart(const LaurentSystem& f, const ChartPoint& p)
{
    const int n = f.dim();
    MatC M(n, n);
    std::vector<MatC> D;
    for (int i = 0; i < n; ++i) {
        const auto& A = f.tuple()[i];
        VecC w = evaluate_omega(A, p);
        if (w.norm() == 0.0) throw Error(errc::internal, "chart point maps to the zero vector");
        MatC J = omega_jacobian(A, p);
        M.row(i) = detail::condition_row(f.row(i), w, J);
        D.push_back(projected_derivative(w, J));
    }
    return detail::conditioned_norm(detail::stack_rows(D), M);
}

/// nu at a log point: max_i max_a sup |(a - m_i(z)) u| over the factor unit ball.
inline double nu_point(const SupportTuple& T, const VecC& z)
{
    double best = 0;
    for (int i = 0; i < T.dim(); ++i) {
        const auto& A = T[i];
        MatC D = log_derivative(A, z);
        MatC H = D.adjoint() * D;
        Eigen::SelfAdjointEigenSolver<MatC> es(H);
        const VecR& ev = es.eigenvalues();
        const double top = ev.cwiseAbs().maxCoeff();
        VecR m = momentum(A, z);
        for (int k = 0; k < A.size(); ++k) {
            VecC a = (A.matrix().row(k).transpose() - m).cast<cplx>();
            VecC c = es.eigenvectors().adjoint() * a;
            double q = 0;
            for (Eigen::Index j = 0; j < ev.size(); ++j) {
                if (ev[j] > 1e-12 * top) q += std::norm(c[j]) / ev[j];
                else if (std::abs(c[j]) > 1e-9 * (1.0 + a.norm())) return std::numeric_limits<double>::infinity();
            }
            best = std::max(best, std::sqrt(q));
        }
    }
    return best;
}

/// Q(X', y') with rows q_i Omega_i(X', y') / (|omega_i| |q_i|), q the partial renormalization at ybar.
class LocalMapQ {
public:
    LocalMapQ() = default;

    LocalMapQ(std::shared_ptr<const NormalFormData> nf, const std::vector<VecC>& g, const VecC& ybar)
        : nf_(std::move(nf)), ybar_(ybar)
    {
        const int n = nf_->n, l = nf_->l;
        if (ybar.size() != n - l) throw Error(errc::contract, "anchor has wrong length");
        for (int i = 0; i < n; ++i) {
            VecC e = nf_->cexp[static_cast<std::size_t>(i)].cast<cplx>() * ybar;
            const double top = e.size() ? e.real().maxCoeff() : 0.0;
            VecC q = g[static_cast<std::size_t>(i)].cwiseProduct((e.array() - cplx(top, 0.0)).exp().matrix());
            const double qn = q.norm();
            if (qn == 0.0) throw Error(errc::domain, "renormalized row vanishes");
            q_.push_back(q);
            scale_.push_back(1.0 / (nf_->omega_norm[static_cast<std::size_t>(i)] * qn));
        }
    }

    const NormalFormData& nf() const { return *nf_; }
    std::shared_ptr<const NormalFormData> nf_ptr() const { return nf_; }
    const std::vector<VecC>& q() const { return q_; }
    const VecC& anchor() const { return ybar_; }

    /// Q and DQ together from the precomputed exponent tables.
    void evaluate(const ChartPoint& p, VecC& F, MatC& J) const
    {
        const int n = nf_->n, l = nf_->l;
        F.resize(n);
        J.setZero(n, n);
        for (int i = 0; i < n; ++i) {
            const auto& b = nf_->bexp[static_cast<std::size_t>(i)];
            const auto& c = nf_->cexp[static_cast<std::size_t>(i)];
            const VecC& q = q_[static_cast<std::size_t>(i)];
            cplx fi(0.0);
            for (Eigen::Index k = 0; k < q.size(); ++k) {
                cplx e(0.0);
                for (int j = 0; j < n - l; ++j) e += c(k, j) * p.y[j];
                const cplx ey = q[k] * std::exp(e);
                cplx mono(1.0);
                bool zero = false;
                for (int j = 0; j < l; ++j) {
                    const int bj = b(k, j);
                    if (bj == 0) continue;
                    if (p.X[j] == cplx(0.0)) zero = true;
                    mono *= detail::ipow(p.X[j], bj);
                }
                const cplx w = ey * mono;
                fi += w;
                for (int j = 0; j < l; ++j) {
                    const int bj = b(k, j);
                    if (bj == 0) continue;
                    cplx d = static_cast<double>(bj) * ey;
                    if (zero || p.X[j] == cplx(0.0)) {
                        for (int m = 0; m < l; ++m) d *= detail::ipow(p.X[m], b(k, m) - (m == j ? 1 : 0));
                    } else {
                        d = static_cast<double>(bj) * w / p.X[j];
                    }
                    J(i, j) += d;
                }
                for (int j = 0; j < n - l; ++j) J(i, l + j) += c(k, j) * w;
            }
            const double sc = scale_[static_cast<std::size_t>(i)];
            F[i] = sc * fi;
            J.row(i) *= sc;
        }
    }

    VecC value(const ChartPoint& p) const
    {
        VecC F;
        MatC J;
        evaluate(p, F, J);
        return F;
    }

    MatC jacobian(const ChartPoint& p) const
    {
        VecC F;
        MatC J;
        evaluate(p, F, J);
        return J;
    }

private:
    std::shared_ptr<const NormalFormData> nf_;
    VecC ybar_;
    std::vector<VecC> q_;
    std::vector<double> scale_;
};

/// |DQ(p)^{-1}| from the Euclidean norm to the norm at omega; +inf when singular.
inline double dq_inverse_norm(const LocalMapQ& Q, const ChartPoint& p)
{
    return detail::conditioned_norm(Q.nf().Lstack.cast<cplx>(), Q.jacobian(p));
}

inline double gamma_bound(const LocalMapQ& Q, const ChartPoint& p, double h)
{
    if (!(h < 1.0) || h < 0) throw Error(errc::domain, "gamma bound needs 0 <= h < 1");
    const auto& nf = Q.nf();
    return dq_inverse_norm(Q, p) * nf.nu * std::sqrt(nf.sum_s2()) / std::pow(1.0 - h, 3);
}

struct AlphaConstants {
    double alpha0 = 0, u0 = 0, h = 0.25;
    double cstar = 0, c = 0, cstarstar = 0;
    double alpha_star = 0, alpha_cross = 0, alpha = 0;

    static double r0(double a) { return (1 + a - std::sqrt(1 - 6 * a + a * a)) / (4 * a); }
    static double r1(double a) { return (1 - 3 * a - std::sqrt(1 - 6 * a + a * a)) / (4 * a); }
    static double psi(double u) { return 1 - 4 * u + 2 * u * u; }
    static double ustar(double a) { return a * r0(a) / (1 - r0(a) * a); }
    static double ustarstar(double a) { return a * r1(a) / (1 - r0(a) * a); }
    double ustarstarstar(double a) const
    {
        const double us = ustar(a);
        return a * psi(us) / (cstarstar * (1 + a * r0(a)) * (psi(us) + us));
    }
    bool ordering_holds(double a) const
    {
        return ustarstar(a) <= ustarstarstar(a) && ustarstarstar(a) <= ustar(a) && ustar(a) <= u0;
    }
};

inline AlphaConstants alpha_constants(const NormalFormData& nf, double h = 0.25,
                                      double cstarstar_override = std::numeric_limits<double>::quiet_NaN())
{
    if (!(h > 0 && h < 1)) throw Error(errc::domain, "h must lie in (0, 1)");
    AlphaConstants k;
    k.h = h;
    k.alpha0 = (13 - 3 * std::sqrt(17.0)) / 4;
    k.u0 = (5 - std::sqrt(17.0)) / 4;
    const double nu = nf.nu, ss = std::sqrt(nf.sum_s2()), ms = nf.max_s();
    k.cstar = nu * ss / std::pow(1 - h, 3);
    k.c = nu * (2 * std::sqrt(5.0) / std::sqrt(3.0) * (1 + 4 * nu * ms)
                + 4.0 / 3.0 * ((2 * std::sqrt(5.0) - 1) / (6 - 2 * std::sqrt(5.0))) * ss);
    k.cstarstar = std::isnan(cstarstar_override) ? std::max(k.cstar, k.c) : cstarstar_override;
    if (!(k.cstarstar >= k.cstar)) throw Error(errc::contract, "c** must dominate c*");
    k.alpha_star = std::min(k.alpha0, 1.0 / (8 * AlphaConstants::r0(k.alpha0) * nf.max_omega()));
    auto gap = [&](double a) { return k.ustarstarstar(a) - AlphaConstants::ustarstar(a); };
    // gap > 0 near 0; locate the first sign change on (0, alpha0]
    double lo = 1e-12, hi = k.alpha0;
    if (gap(hi) >= 0) {
        lo = hi;
    } else {
        double a = 1e-6;
        while (a < hi && gap(a) >= 0) {
            lo = a;
            a *= 1.25;
        }
        hi = std::min(a, hi);
        for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
            double mid = 0.5 * (lo + hi);
            (gap(mid) >= 0 ? lo : hi) = mid;
        }
    }
    k.alpha_cross = lo;
    k.alpha = 0.9 * std::min(k.alpha_star, k.alpha_cross);
    return k;
}

} // namespace toric

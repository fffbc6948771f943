#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "types.hpp"

namespace toric {

/// Finite exponent set, rows kept in lexicographic order.
class Support {
public:
    Support() = default;

    Support(int n, std::vector<RowQ> rows) : n_(n), rows_(std::move(rows))
    {
        if (rows_.empty()) throw Error(errc::contract, "empty support");
        for (const auto& r : rows_)
            if (static_cast<int>(r.size()) != n_) throw Error(errc::contract, "support row has wrong length");
        std::sort(rows_.begin(), rows_.end());
        if (std::adjacent_find(rows_.begin(), rows_.end()) != rows_.end())
            throw Error(errc::contract, "repeated support row");
        mat_ = to_mat(rows_);
    }

    static Support from_int(int n, const std::vector<std::vector<long long>>& rows)
    {
        std::vector<RowQ> q;
        for (const auto& r : rows) q.push_back(to_rat(r));
        return Support(n, std::move(q));
    }

    /// Permutation sending sorted index to input index.
    static std::vector<std::size_t> sort_order(const std::vector<RowQ>& rows)
    {
        std::vector<std::size_t> p(rows.size());
        std::iota(p.begin(), p.end(), 0);
        std::stable_sort(p.begin(), p.end(), [&](std::size_t a, std::size_t b) { return rows[a] < rows[b]; });
        return p;
    }

    int dim() const { return n_; }
    int size() const { return static_cast<int>(rows_.size()); }
    const std::vector<RowQ>& rows() const { return rows_; }
    const RowQ& row(int k) const { return rows_[static_cast<std::size_t>(k)]; }
    const MatR& matrix() const { return mat_; }

    bool operator==(const Support& o) const { return n_ == o.n_ && rows_ == o.rows_; }

private:
    int n_ = 0;
    std::vector<RowQ> rows_;
    MatR mat_;
};

/// Hermite-style row reduction of integer generators; returns a basis (rows).
inline std::vector<std::vector<long long>> integer_row_basis(std::vector<std::vector<long long>> g, int n)
{
    std::vector<std::vector<long long>> basis;
    for (int c = 0; c < n && !g.empty(); ++c) {
        for (;;) {
            std::size_t piv = g.size();
            for (std::size_t i = 0; i < g.size(); ++i)
                if (g[i][static_cast<std::size_t>(c)] != 0 &&
                    (piv == g.size() || std::abs(g[i][static_cast<std::size_t>(c)]) < std::abs(g[piv][static_cast<std::size_t>(c)])))
                    piv = i;
            if (piv == g.size()) break;
            bool done = true;
            for (std::size_t i = 0; i < g.size(); ++i) {
                if (i == piv) continue;
                long long q = g[i][static_cast<std::size_t>(c)] / g[piv][static_cast<std::size_t>(c)];
                if (q != 0)
                    for (int k = 0; k < n; ++k) g[i][static_cast<std::size_t>(k)] -= q * g[piv][static_cast<std::size_t>(k)];
                if (g[i][static_cast<std::size_t>(c)] != 0) done = false;
            }
            if (done) {
                basis.push_back(g[piv]);
                g.erase(g.begin() + static_cast<std::ptrdiff_t>(piv));
                break;
            }
        }
        g.erase(std::remove_if(g.begin(), g.end(),
                               [](const std::vector<long long>& r) {
                                   return std::all_of(r.begin(), r.end(), [](long long x) { return x == 0; });
                               }),
                g.end());
    }
    return basis;
}

class SupportTuple {
public:
    SupportTuple() = default;

    explicit SupportTuple(std::vector<Support> s) : supports_(std::move(s))
    {
        if (supports_.empty()) throw Error(errc::contract, "empty support tuple");
        n_ = supports_[0].dim();
        if (static_cast<int>(supports_.size()) != n_)
            throw Error(errc::contract, "number of supports must equal the dimension");
        std::vector<std::vector<long long>> gens;
        for (const auto& A : supports_) {
            if (A.dim() != n_) throw Error(errc::contract, "support dimension mismatch");
            for (int k = 1; k < A.size(); ++k) {
                std::vector<long long> d(static_cast<std::size_t>(n_));
                for (int j = 0; j < n_; ++j) {
                    Rat x = A.row(k)[static_cast<std::size_t>(j)] - A.row(0)[static_cast<std::size_t>(j)];
                    if (!is_integer(x)) throw Error(errc::contract, "support differences must be integral");
                    d[static_cast<std::size_t>(j)] = x.numerator();
                }
                gens.push_back(d);
            }
        }
        lattice_ = integer_row_basis(gens, n_);
    }

    int dim() const { return n_; }
    const std::vector<Support>& supports() const { return supports_; }
    const Support& operator[](int i) const { return supports_[static_cast<std::size_t>(i)]; }
    int max_size() const
    {
        int m = 0;
        for (const auto& A : supports_) m = std::max(m, A.size());
        return m;
    }

    /// Basis of the lattice generated by all differences a - a' (rows).
    const std::vector<std::vector<long long>>& lattice() const { return lattice_; }
    bool lattice_full() const { return static_cast<int>(lattice_.size()) == n_; }

    /// Columns of the inverse of the lattice basis: a basis of the dual lattice.
    std::vector<RowQ> dual_lattice() const
    {
        if (!lattice_full()) throw Error(errc::degenerate, "lattice is not full rank");
        std::vector<RowQ> b;
        for (const auto& r : lattice_) b.push_back(to_rat(r));
        auto inv = inverse_q(b);
        std::vector<RowQ> cols(static_cast<std::size_t>(n_), RowQ(static_cast<std::size_t>(n_)));
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) cols[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = inv[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        return cols;
    }

    long long lattice_index() const
    {
        if (!lattice_full()) return 0;
        std::vector<RowQ> b;
        for (const auto& r : lattice_) b.push_back(to_rat(r));
        return std::abs(det_q(b).numerator());
    }

    /// Rescale a direction to the minimal vector of the dual lattice on its ray.
    RowQ dual_primitive(const RowQ& xi) const
    {
        std::vector<RowQ> b;
        for (const auto& r : lattice_) b.push_back(to_rat(r));
        RowQ w(b.size());
        for (std::size_t k = 0; k < b.size(); ++k) w[k] = dot(b[k], xi);
        auto wp = primitive_integer(w);
        Rat scale = 0;
        for (std::size_t k = 0; k < w.size(); ++k)
            if (w[k].numerator() != 0) {
                scale = Rat(wp[k]) / w[k];
                break;
            }
        RowQ r = xi;
        for (auto& x : r) x *= scale;
        return r;
    }

private:
    int n_ = 0;
    std::vector<Support> supports_;
    std::vector<std::vector<long long>> lattice_;
};

/// Coefficient rows f_i indexed by the sorted rows of A_i.
class LaurentSystem {
public:
    LaurentSystem() = default;

    LaurentSystem(SupportTuple t, std::vector<VecC> coef) : t_(std::move(t)), coef_(std::move(coef))
    {
        if (static_cast<int>(coef_.size()) != t_.dim()) throw Error(errc::contract, "coefficient row count mismatch");
        for (int i = 0; i < t_.dim(); ++i) {
            if (coef_[static_cast<std::size_t>(i)].size() != t_[i].size())
                throw Error(errc::contract, "coefficient row length mismatch");
            if (coef_[static_cast<std::size_t>(i)].norm() == 0.0) throw Error(errc::contract, "zero coefficient row");
        }
    }

    /// Build from rows in arbitrary order; coefficients follow their rows into sorted order.
    static LaurentSystem from_unsorted(int n, const std::vector<std::vector<RowQ>>& rows,
                                       const std::vector<std::vector<cplx>>& coef)
    {
        std::vector<Support> sup;
        std::vector<VecC> c;
        if (static_cast<int>(rows.size()) != n || coef.size() != rows.size())
            throw Error(errc::contract, "system needs n supports and n coefficient rows");
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (coef[i].size() != rows[i].size()) throw Error(errc::contract, "coefficient row length mismatch");
            auto p = Support::sort_order(rows[i]);
            VecC ci(static_cast<Eigen::Index>(p.size()));
            for (std::size_t k = 0; k < p.size(); ++k) ci[static_cast<Eigen::Index>(k)] = coef[i][p[k]];
            sup.emplace_back(n, rows[i]);
            c.push_back(ci);
        }
        return LaurentSystem(SupportTuple(std::move(sup)), std::move(c));
    }

    int dim() const { return t_.dim(); }
    const SupportTuple& tuple() const { return t_; }
    const std::vector<VecC>& coefficients() const { return coef_; }
    const VecC& row(int i) const { return coef_[static_cast<std::size_t>(i)]; }

private:
    SupportTuple t_;
    std::vector<VecC> coef_;
};

/// Mixed coordinates of a chart: X (small block, length l) and y (length n-l).
struct ChartPoint {
    VecC X;
    VecC y;
    int l() const { return static_cast<int>(X.size()); }
    VecC stacked() const
    {
        VecC r(X.size() + y.size());
        r << X, y;
        return r;
    }
};

/// Monomial vector Z^a with the principal branch for rational exponents.
template <class Scalar = cplx>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> evaluate_V(const Support& A, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& Z)
{
    const int n = A.dim();
    if (Z.size() != n) throw Error(errc::contract, "point dimension mismatch");
    for (int j = 0; j < n; ++j)
        if (Z[j] == Scalar(0)) throw Error(errc::domain, "zero coordinate in evaluation point");
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v(A.size());
    for (int k = 0; k < A.size(); ++k) {
        Scalar p(1);
        bool integral = true;
        for (int j = 0; j < n; ++j)
            if (!is_integer(A.row(k)[static_cast<std::size_t>(j)])) integral = false;
        if (integral) {
            for (int j = 0; j < n; ++j) {
                long long e = A.row(k)[static_cast<std::size_t>(j)].numerator();
                Scalar b = e >= 0 ? Z[j] : Scalar(1) / Z[j];
                for (long long m = std::abs(e); m > 0; --m) p *= b;
            }
        } else {
            Scalar s(0);
            for (int j = 0; j < n; ++j) s += Scalar(to_double(A.row(k)[static_cast<std::size_t>(j)])) * std::log(Z[j]);
            p = std::exp(s);
        }
        v[k] = p;
    }
    return v;
}

/// v_A(z) = exp(A z), logarithmic coordinates.
inline VecC evaluate_v(const Support& A, const VecC& z)
{
    if (z.size() != A.dim()) throw Error(errc::contract, "point dimension mismatch");
    VecC e = A.matrix().cast<cplx>() * z;
    return e.array().exp().matrix();
}

namespace detail {

inline void check_normal_rows(const Support& A, int l)
{
    for (const auto& r : A.rows())
        for (int j = 0; j < l; ++j) {
            const Rat& b = r[static_cast<std::size_t>(j)];
            if (b.numerator() < 0 || !is_integer(b)) throw Error(errc::contract, "b block must be a non-negative integer");
        }
}

inline cplx ipow(cplx x, long long e)
{
    cplx p(1.0, 0.0);
    for (; e > 0; --e) p *= x;
    return p;
}

} // namespace detail

/// Omega_a(X, y) = X^b e^{c y}; 0^0 = 1.
inline VecC evaluate_omega(const Support& A, const ChartPoint& p)
{
    const int l = p.l();
    if (l + p.y.size() != A.dim()) throw Error(errc::contract, "chart point dimension mismatch");
    detail::check_normal_rows(A, l);
    VecC w(A.size());
    for (int k = 0; k < A.size(); ++k) {
        const auto& r = A.row(k);
        cplx v(1.0, 0.0);
        for (int j = 0; j < l; ++j) v *= detail::ipow(p.X[j], r[static_cast<std::size_t>(j)].numerator());
        cplx s(0.0, 0.0);
        for (int j = 0; j < p.y.size(); ++j) s += to_double(r[static_cast<std::size_t>(l + j)]) * p.y[j];
        w[k] = v * std::exp(s);
    }
    return w;
}

/// Jacobian of Omega_A with respect to (X, y); rows follow A.
inline MatC omega_jacobian(const Support& A, const ChartPoint& p)
{
    const int l = p.l();
    const int n = A.dim();
    detail::check_normal_rows(A, l);
    MatC J = MatC::Zero(A.size(), n);
    for (int k = 0; k < A.size(); ++k) {
        const auto& r = A.row(k);
        cplx s(0.0, 0.0);
        for (int j = 0; j < p.y.size(); ++j) s += to_double(r[static_cast<std::size_t>(l + j)]) * p.y[j];
        const cplx ey = std::exp(s);
        cplx full(1.0, 0.0);
        for (int j = 0; j < l; ++j) full *= detail::ipow(p.X[j], r[static_cast<std::size_t>(j)].numerator());
        for (int j = 0; j < l; ++j) {
            long long bj = r[static_cast<std::size_t>(j)].numerator();
            if (bj == 0) continue;
            cplx d(static_cast<double>(bj), 0.0);
            for (int m = 0; m < l; ++m) {
                long long e = r[static_cast<std::size_t>(m)].numerator() - (m == j ? 1 : 0);
                d *= detail::ipow(p.X[m], e);
            }
            J(k, j) = d * ey;
        }
        for (int j = 0; j < p.y.size(); ++j) J(k, l + j) = to_double(r[static_cast<std::size_t>(l + j)]) * full * ey;
    }
    return J;
}

/// max over rows of Re(a y), pairing y with the trailing y.size() coordinates of each row.
inline double ell(const Support& A, const VecC& y)
{
    const int off = A.dim() - static_cast<int>(y.size());
    if (off < 0) throw Error(errc::contract, "ell: vector longer than rows");
    double m = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < A.size(); ++k) {
        double s = 0;
        for (int j = 0; j < y.size(); ++j) s += A.matrix()(k, off + j) * y[j].real();
        m = std::max(m, s);
    }
    return m;
}

/// Momentum m_A(z): exponents weighted by |v_a|^2 / |v|^2.
inline VecR momentum(const Support& A, const VecC& z)
{
    VecR re = A.matrix() * z.real();
    const double top = re.maxCoeff();
    VecR w = (2.0 * (re.array() - top)).exp().matrix();
    w /= w.sum();
    return A.matrix().transpose() * w;
}

/// (I - v v*/|v|^2) diag(v) J / |v|, rows of J indexed like v.
inline MatC projected_derivative(const VecC& v, const MatC& J)
{
    const double nv = v.norm();
    VecC vh = v / nv;
    MatC D = J / nv;
    return D - vh * (vh.adjoint() * D);
}

/// Projected derivative of [v_A] at a log point.
inline MatC log_derivative(const Support& A, const VecC& z)
{
    VecR re = A.matrix() * z.real();
    const double top = re.maxCoeff();
    VecC e = (A.matrix().cast<cplx>() * z).array() - cplx(top, 0.0);
    VecC v = e.array().exp().matrix();
    MatC J = v.asDiagonal() * A.matrix().cast<cplx>();
    return projected_derivative(v, J);
}

/// Projected derivative of [Omega_A] at a chart point.
inline MatC chart_derivative(const Support& A, const ChartPoint& p)
{
    return projected_derivative(evaluate_omega(A, p), omega_jacobian(A, p));
}

enum class NormKind { factor, hermitian, finsler };

namespace detail {

template <class F>
double combine_norms(int n, const VecC& u, NormKind kind, int i, F&& deriv)
{
    if (kind == NormKind::factor) return (deriv(i) * u).norm();
    double s = 0, m = 0;
    for (int k = 0; k < n; ++k) {
        double v = (deriv(k) * u).norm();
        s += v * v;
        m = std::max(m, v);
    }
    return kind == NormKind::hermitian ? std::sqrt(s) : m;
}

} // namespace detail

/// Norm of a tangent vector at a log point of the main chart.
inline double point_norm(const SupportTuple& T, const VecC& z, const VecC& u, NormKind kind, int i = 0)
{
    return detail::combine_norms(T.dim(), u, kind, i, [&](int k) { return log_derivative(T[k], z); });
}

/// Norm of a tangent vector at a chart point; T must already be in chart coordinates.
inline double point_norm(const SupportTuple& T, const ChartPoint& p, const VecC& u, NormKind kind, int i = 0)
{
    return detail::combine_norms(T.dim(), u, kind, i, [&](int k) {
        VecC w = evaluate_omega(T[k], p);
        if (w.norm() == 0.0) throw Error(errc::domain, "chart point outside the parameterization domain");
        return chart_derivative(T[k], p);
    });
}

enum class DistKind { projective, chordal };

/// Per-factor distance between coefficient rows: sin of the angle, or 2 sin(angle/2).
inline double factor_distance(const VecC& q, const VecC& qp, DistKind kind)
{
    const double a = q.norm(), b = qp.norm();
    if (a == 0.0 || b == 0.0) throw Error(errc::domain, "zero coefficient row");
    const cplx ip = q.dot(qp);
    // sine from the projection residual
    const double s = std::min(1.0, (qp - (ip / (a * a)) * q).norm() / b);
    if (kind == DistKind::projective) return s;
    const double c = std::min(1.0, std::abs(ip) / (a * b));
    return 2.0 * std::sin(0.5 * std::atan2(s, c));
}

inline double projective_distance(const std::vector<VecC>& q, const std::vector<VecC>& qp, DistKind kind)
{
    if (q.size() != qp.size()) throw Error(errc::contract, "distance between different tuples");
    double s = 0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        double d = factor_distance(q[i], qp[i], kind);
        s += d * d;
    }
    return std::sqrt(s);
}

inline double projective_distance(const LaurentSystem& q, const LaurentSystem& qp, DistKind kind)
{
    return projective_distance(q.coefficients(), qp.coefficients(), kind);
}

} // namespace toric

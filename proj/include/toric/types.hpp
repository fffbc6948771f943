#pragma once

#include <complex>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/rational.hpp>

namespace toric {

using Rat = boost::rational<long long>;
using RowQ = std::vector<Rat>;
using cplx = std::complex<double>;

using VecC = Eigen::VectorXcd;
using MatC = Eigen::MatrixXcd;
using VecR = Eigen::VectorXd;
using MatR = Eigen::MatrixXd;

enum class errc { domain, contract, degenerate, unsupported, not_found, numeric, internal };

inline const char* errc_name(errc c)
{
    switch (c) {
    case errc::domain: return "domain";
    case errc::contract: return "contract";
    case errc::degenerate: return "degenerate";
    case errc::unsupported: return "unsupported";
    case errc::not_found: return "not_found";
    case errc::numeric: return "numeric";
    default: return "internal";
    }
}

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    errc code() const noexcept { return code_; }

private:
    errc code_;
};

inline double to_double(const Rat& r)
{
    return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

inline bool is_integer(const Rat& r) { return r.denominator() == 1; }

inline long long lcm_ll(long long a, long long b)
{
    if (a == 0 || b == 0) return 0;
    return std::abs(a / std::gcd(a, b) * b);
}

/// Scale a rational vector to the primitive integer vector on the same ray.
inline std::vector<long long> primitive_integer(const RowQ& v)
{
    long long den = 1;
    for (const auto& x : v) den = lcm_ll(den, x.denominator());
    std::vector<long long> w(v.size());
    long long g = 0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        w[k] = v[k].numerator() * (den / v[k].denominator());
        g = std::gcd(g, std::abs(w[k]));
    }
    if (g > 1)
        for (auto& x : w) x /= g;
    return w;
}

inline RowQ to_rat(const std::vector<long long>& v)
{
    RowQ r;
    r.reserve(v.size());
    for (auto x : v) r.emplace_back(x);
    return r;
}

inline Rat dot(const RowQ& a, const RowQ& b)
{
    Rat s = 0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

inline VecR to_vec(const RowQ& v)
{
    VecR r(static_cast<Eigen::Index>(v.size()));
    for (std::size_t k = 0; k < v.size(); ++k) r[static_cast<Eigen::Index>(k)] = to_double(v[k]);
    return r;
}

/// Exact rank and determinant helpers on small rational matrices (row lists).
inline int rank_q(std::vector<RowQ> m)
{
    if (m.empty()) return 0;
    const std::size_t cols = m[0].size();
    int r = 0;
    for (std::size_t c = 0; c < cols && r < static_cast<int>(m.size()); ++c) {
        std::size_t p = static_cast<std::size_t>(r);
        while (p < m.size() && m[p][c].numerator() == 0) ++p;
        if (p == m.size()) continue;
        std::swap(m[p], m[static_cast<std::size_t>(r)]);
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (i == static_cast<std::size_t>(r) || m[i][c].numerator() == 0) continue;
            Rat f = m[i][c] / m[static_cast<std::size_t>(r)][c];
            for (std::size_t k = c; k < cols; ++k) m[i][k] -= f * m[static_cast<std::size_t>(r)][k];
        }
        ++r;
    }
    return r;
}

inline Rat det_q(std::vector<RowQ> m)
{
    const std::size_t n = m.size();
    Rat d = 1;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        while (p < n && m[p][c].numerator() == 0) ++p;
        if (p == n) return 0;
        if (p != c) {
            std::swap(m[p], m[c]);
            d = -d;
        }
        d *= m[c][c];
        for (std::size_t i = c + 1; i < n; ++i) {
            if (m[i][c].numerator() == 0) continue;
            Rat f = m[i][c] / m[c][c];
            for (std::size_t k = c; k < n; ++k) m[i][k] -= f * m[c][k];
        }
    }
    return d;
}

/// Inverse of a square rational matrix given as rows; throws on singular input.
inline std::vector<RowQ> inverse_q(const std::vector<RowQ>& m)
{
    const std::size_t n = m.size();
    std::vector<RowQ> a(n, RowQ(2 * n, Rat(0)));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) a[i][j] = m[i][j];
        a[i][n + i] = 1;
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        while (p < n && a[p][c].numerator() == 0) ++p;
        if (p == n) throw Error(errc::domain, "singular rational matrix");
        std::swap(a[p], a[c]);
        Rat piv = a[c][c];
        for (auto& x : a[c]) x /= piv;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == c || a[i][c].numerator() == 0) continue;
            Rat f = a[i][c];
            for (std::size_t k = 0; k < 2 * n; ++k) a[i][k] -= f * a[c][k];
        }
    }
    std::vector<RowQ> inv(n, RowQ(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) inv[i][j] = a[i][n + j];
    return inv;
}

/// Row vector times matrix (matrix given as rows).
inline RowQ row_times(const RowQ& a, const std::vector<RowQ>& m)
{
    const std::size_t cols = m.empty() ? 0 : m[0].size();
    RowQ r(cols, Rat(0));
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k].numerator() == 0) continue;
        for (std::size_t j = 0; j < cols; ++j) r[j] += a[k] * m[k][j];
    }
    return r;
}

inline MatR to_mat(const std::vector<RowQ>& m)
{
    const auto rows = static_cast<Eigen::Index>(m.size());
    const auto cols = rows ? static_cast<Eigen::Index>(m[0].size()) : 0;
    MatR r(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            r(i, j) = to_double(m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    return r;
}

/// Largest singular value.
inline double spectral_norm(const MatC& m)
{
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<MatC> svd(m);
    return svd.singularValues()(0);
}

} // namespace toric

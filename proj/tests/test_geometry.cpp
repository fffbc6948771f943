#include <algorithm>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "toric/normal_form.hpp"

using namespace toric;

namespace {

SupportTuple example3d()
{
    auto A = Support::from_int(3, {{1, 1, -1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, -1}, {0, 0, 1}});
    return SupportTuple({A, A, A});
}

VecC vc(std::initializer_list<cplx> v)
{
    VecC r(static_cast<Eigen::Index>(v.size()));
    Eigen::Index k = 0;
    for (auto x : v) r[k++] = x;
    return r;
}

std::set<std::vector<long long>> ray_set(const std::vector<RowQ>& rays)
{
    std::set<std::vector<long long>> s;
    for (const auto& r : rays) s.insert(primitive_integer(r));
    return s;
}

std::vector<RowQ> rows_q(const std::vector<std::vector<Rat>>& m) { return m; }

} // namespace

TEST(EvaluateV, MonomialVectors)
{
    auto A = Support::from_int(1, {{0}, {1}, {2}});
    VecC v = evaluate_V(A, vc({2.0}));
    EXPECT_EQ(v, vc({1.0, 2.0, 4.0}));
    auto B = Support::from_int(2, {{0, 0}, {1, 0}, {0, 1}});
    EXPECT_EQ(evaluate_V(B, vc({1.0, 1.0})), vc({1.0, 1.0, 1.0}));
    auto C = Support::from_int(1, {{0}, {2}});
    EXPECT_EQ(evaluate_V(C, vc({3.0})), vc({1.0, 9.0}));
    EXPECT_THROW(evaluate_V(C, vc({0.0})), Error);
}

TEST(EvaluateOmega, ChartExamples)
{
    auto A = Support::from_int(2, {{0, 1}, {0, -1}, {1, 0}});
    ChartPoint p{vc({0.0}), vc({0.0})};
    // rows are sorted: (0,-1), (0,1), (1,0)
    EXPECT_EQ(A.row(0), to_rat({0, -1}));
    VecC w = evaluate_omega(A, p);
    EXPECT_NEAR(std::abs(w[0] - 1.0), 0, 1e-15);
    EXPECT_NEAR(std::abs(w[1] - 1.0), 0, 1e-15);
    EXPECT_NEAR(std::abs(w[2]), 0, 1e-15);
    p.X[0] = 0.5;
    EXPECT_NEAR(std::abs(evaluate_omega(A, p)[2] - 0.5), 0, 1e-15);
    p.X[0] = 0.0;
    p.y[0] = std::log(2.0);
    w = evaluate_omega(A, p);
    EXPECT_NEAR(std::abs(w[1] - 2.0), 0, 1e-14);
    EXPECT_NEAR(std::abs(w[0] - 0.5), 0, 1e-14);
    EXPECT_NEAR(std::abs(w[2]), 0, 1e-15);
}

TEST(Ell, MaxOverSupport)
{
    EXPECT_DOUBLE_EQ(ell(Support::from_int(1, {{0}, {2}}), vc({1.0})), 2.0);
    EXPECT_DOUBLE_EQ(ell(Support::from_int(2, {{3, 1}, {-2, 5}}), vc({0.0, 0.0})), 0.0);
    EXPECT_DOUBLE_EQ(ell(Support::from_int(1, {{1}, {-1}}), vc({0.5})), 0.5);
}

TEST(Momentum, WeightedMeans)
{
    EXPECT_NEAR(momentum(Support::from_int(1, {{0}, {2}}), vc({0.0}))[0], 1.0, 1e-15);
    EXPECT_NEAR(momentum(Support::from_int(1, {{-1}, {1}}), vc({0.0}))[0], 0.0, 1e-15);
    // weights |Z^a|^2 = (1, 4) at Z = 2
    const double oracle = (0 * 1.0 + 1 * 4.0) / 5.0;
    EXPECT_NEAR(momentum(Support::from_int(1, {{0}, {1}}), vc({std::log(2.0)}))[0], oracle, 1e-15);
}

TEST(PointNorm, FactorNormAtChartOrigin)
{
    auto A = Support::from_int(2, {{0, 1}, {0, -1}, {1, 0}});
    auto B = Support::from_int(2, {{0, 1}, {0, -1}, {1, 2}});
    SupportTuple T({A, B});
    ChartPoint p{vc({0.0}), vc({0.0})};
    // finite differences of the unit representative of [Omega]
    auto unit = [&](const ChartPoint& q) {
        VecC w = evaluate_omega(A, q);
        return VecC(w / w.norm());
    };
    const double h = 1e-6;
    ChartPoint ph = p;
    ph.X[0] += h;
    VecC d = (unit(ph) - unit(p)) / h;
    VecC w0 = unit(p);
    d -= w0 * (w0.adjoint() * d)(0);
    EXPECT_NEAR(point_norm(T, p, vc({1.0, 0.0}), NormKind::factor, 0), d.norm(), 1e-5);
    EXPECT_NEAR(point_norm(T, p, vc({1.0, 0.0}), NormKind::factor, 0), 1 / std::sqrt(2.0), 1e-12);
    for (auto k : {NormKind::factor, NormKind::hermitian, NormKind::finsler})
        EXPECT_EQ(point_norm(T, p, vc({0.0, 0.0}), k), 0.0);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    for (int t = 0; t < 100; ++t) {
        VecC u = vc({{nd(rng), nd(rng)}, {nd(rng), nd(rng)}});
        const double fin = point_norm(T, p, u, NormKind::finsler), her = point_norm(T, p, u, NormKind::hermitian);
        EXPECT_LE(fin, her * (1 + 1e-12));
        EXPECT_LE(her, std::sqrt(2.0) * fin * (1 + 1e-12));
    }
}

TEST(ProjectiveDistance, ScaleInvarianceAndChordalSandwich)
{
    auto A = Support::from_int(1, {{0}, {1}});
    SupportTuple T({A});
    LaurentSystem q(T, {vc({1.0, 0.0})}), qp(T, {vc({0.0, 1.0})});
    EXPECT_NEAR(projective_distance(q, qp, DistKind::projective), 1.0, 1e-15);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    auto A2 = Support::from_int(2, {{0, 0}, {1, 0}, {0, 1}});
    SupportTuple T2({A2, A2});
    auto rnd = [&] {
        VecC v(3);
        for (int k = 0; k < 3; ++k) v[k] = cplx(nd(rng), nd(rng));
        return v;
    };
    for (int t = 0; t < 200; ++t) {
        std::vector<VecC> a{rnd(), rnd()}, b;
        for (const auto& r : a) b.push_back(r * cplx(nd(rng), nd(rng)));
        EXPECT_NEAR(projective_distance(a, b, DistKind::projective), 0, 1e-7);
        EXPECT_NEAR(projective_distance(a, b, DistKind::chordal), 0, 1e-7);
        std::vector<VecC> c{a[0] + 0.3 * rnd(), a[1] + 0.3 * rnd()};
        double eta = 0;
        for (int i = 0; i < 2; ++i) eta = std::max(eta, factor_distance(a[static_cast<std::size_t>(i)], c[static_cast<std::size_t>(i)], DistKind::projective));
        if (eta >= 1) continue;
        const double dp = projective_distance(a, c, DistKind::projective), dc = projective_distance(a, c, DistKind::chordal);
        EXPECT_LE(dp, dc * (1 + 1e-12));
        EXPECT_LE(dc, dp / std::sqrt(1 - eta * eta) * (1 + 1e-12));
    }
}

TEST(FacetSupport, Maximizers)
{
    auto A = Support::from_int(1, {{0}, {1}, {2}});
    EXPECT_EQ(facet_support(A, to_rat({1})), std::vector<int>{2});
    EXPECT_EQ(facet_support(A, to_rat({-1})), std::vector<int>{0});
    auto B = example3d()[0];
    auto F = facet_support(B, to_rat({0, 0, -1}));
    EXPECT_EQ(F.size(), 4u);
    for (int k : F) EXPECT_EQ(B.row(k)[2], Rat(-1));
}

TEST(FanRays, ThreeDimensionalExample)
{
    std::set<std::vector<long long>> want{{2, 0, 1}, {0, 2, 1}, {-2, 0, 1}, {0, -2, 1}, {0, 0, -1}};
    EXPECT_EQ(ray_set(fan_rays(example3d())), want);
}

TEST(FanRays, CubeAndSegment)
{
    std::vector<std::vector<long long>> cube;
    for (int m = 0; m < 8; ++m) cube.push_back({m & 1, (m >> 1) & 1, (m >> 2) & 1});
    auto C = Support::from_int(3, cube);
    // facet normals of the cube by brute force: directions whose maximizer set has 4 points
    std::set<std::vector<long long>> oracle;
    for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b)
            for (int c = -1; c <= 1; ++c) {
                if (!a && !b && !c) continue;
                if (facet_support(C, to_rat({a, b, c})).size() == 4) oracle.insert({a, b, c});
            }
    EXPECT_EQ(oracle.size(), 6u);
    EXPECT_EQ(ray_set(fan_rays(SupportTuple({C, C, C}))), oracle);
    std::set<std::vector<long long>> seg{{1}, {-1}};
    EXPECT_EQ(ray_set(fan_rays(SupportTuple({Support::from_int(1, {{0}, {3}})}))), seg);
}

TEST(MixedVolume, SmallTuples)
{
    auto sq = Support::from_int(2, {{0, 0}, {1, 0}, {0, 1}, {1, 1}});
    // 2 V(P, P) = Vol(2P) - 2 Vol(P) for equal squares
    EXPECT_EQ(mixed_volume(SupportTuple({sq, sq})), Rat(4 - 2));
    auto e1 = Support::from_int(2, {{0, 0}, {1, 0}}), e2 = Support::from_int(2, {{0, 0}, {0, 1}});
    EXPECT_EQ(mixed_volume(SupportTuple({e1, e2})), Rat(1));
    auto l1 = Support::from_int(2, {{0, 0}, {1, 1}}), l2 = Support::from_int(2, {{1, 0}, {3, 2}});
    EXPECT_EQ(mixed_volume(SupportTuple({l1, l2})), Rat(0));
    EXPECT_TRUE(check_ndh(SupportTuple({sq, sq})));
    EXPECT_FALSE(check_ndh(SupportTuple({l1, l2})));
    EXPECT_FALSE(check_ndh(SupportTuple({Support::from_int(1, {{5}})})));
    EXPECT_EQ(mixed_volume(SupportTuple({Support::from_int(1, {{0}, {1}, {2}})})), Rat(2));
}

TEST(ClassifyInfinity, FiniteAndAtInfinity)
{
    auto T = example3d();
    VecC z = vc({0.1, -0.2, 0.05});
    auto fin = classify_infinity(T, z, VecR::Zero(3), 1.0);
    EXPECT_EQ(fin.sigmaInf.dim, 0);
    auto inf = classify_infinity(T, z, (VecR(3) << 2, 0, 1).finished(), 1.0);
    EXPECT_EQ(inf.sigmaInf.dim, 1);
    EXPECT_EQ(ray_set(inf.sigmaInf.generators), (std::set<std::vector<long long>>{{2, 0, 1}}));
    SupportTuple U({Support::from_int(1, {{0}, {2}})});
    auto u = classify_infinity(U, vc({0.0}), (VecR(1) << -1).finished(), 1.0);
    EXPECT_EQ(ray_set(u.sigmaInf.generators), (std::set<std::vector<long long>>{{-1}}));
}

namespace {

/// Minimum of b.y over basic solutions from column subsets of size <= rank.
double enumerate_lp(const LPInstance& in)
{
    const int m = static_cast<int>(in.Xi.cols());
    double best = std::numeric_limits<double>::infinity();
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
        std::vector<int> cols;
        for (int j = 0; j < m; ++j)
            if (mask & (1u << j)) cols.push_back(j);
        MatR S(in.Xi.rows(), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t k = 0; k < cols.size(); ++k) S.col(static_cast<Eigen::Index>(k)) = in.Xi.col(cols[k]);
        if (!cols.empty() && Eigen::FullPivLU<MatR>(S).rank() < static_cast<Eigen::Index>(cols.size())) continue;
        VecR y = cols.empty() ? VecR() : VecR(S.colPivHouseholderQr().solve(in.x));
        if (((cols.empty() ? in.x : VecR(in.x - S * y)).norm()) > 1e-9) continue;
        if (!cols.empty() && y.minCoeff() < -1e-12) continue;
        double c = 0;
        for (std::size_t k = 0; k < cols.size(); ++k) c += in.b[cols[k]] * y[static_cast<Eigen::Index>(k)];
        best = std::min(best, c);
    }
    return best;
}

} // namespace

TEST(SelectGenerators, SmallInstances)
{
    LPInstance in;
    in.Xi = (MatR(2, 3) << 1, 0, 1, 0, 1, 1).finished();
    in.x = (VecR(2) << 1, 1).finished();
    in.y0 = VecR::Constant(3, 0.5);
    in.b = (VecR(3) << 1, 1.01, 1.02).finished();
    LPResult r = select_generators(in);
    EXPECT_LE(r.support().size(), 2u);
    EXPECT_LT((in.Xi * r.y - in.x).norm(), 1e-9);
    EXPECT_NEAR(in.b.dot(r.y), enumerate_lp(in), 1e-9);

    in.x.setZero();
    in.y0.setZero();
    EXPECT_EQ(select_generators(in).y, VecR::Zero(3));

    in.Xi = (MatR(2, 3) << 1, 1, 1, 1, 1, 1).finished();
    in.x = (VecR(2) << 2, 2).finished();
    in.y0 = VecR::Constant(3, 2.0 / 3.0);
    r = select_generators(in);
    ASSERT_EQ(r.support().size(), 1u);
    EXPECT_NEAR(r.y.sum(), 2.0, 1e-12);
}

TEST(SelectGenerators, InfeasibleStartRejected)
{
    LPInstance in;
    in.Xi = MatR::Identity(2, 2);
    in.x = (VecR(2) << 1, 1).finished();
    in.y0 = (VecR(2) << 1, 0).finished();
    in.b = VecR::Ones(2);
    EXPECT_THROW(select_generators(in), Error);
}

TEST(ChooseSplitting, ScanRule)
{
    const double inf = std::numeric_limits<double>::infinity();
    EXPECT_EQ(choose_splitting({inf, 5, 0.1, 0}, 2, 1), 1);
    EXPECT_EQ(choose_splitting({inf, 0, 0, 0}, 3, 2), 0);
    // exhaustive oracle: largest l with h_l > Phi h_{l+1} + Psi and h_{l+1} <= Psi (Phi^{n-l}-1)/(Phi-1)
    std::vector<double> h{inf, 10, 9, 8, 0};
    int oracle = 0;
    for (int l = 1; l <= 3; ++l) {
        const double cap = 1.0 * (std::pow(2.0, 3 - l) - 1) / (2.0 - 1);
        if (h[static_cast<std::size_t>(l)] > 2 * h[static_cast<std::size_t>(l + 1)] + 1 && h[static_cast<std::size_t>(l + 1)] <= cap) oracle = l;
    }
    EXPECT_EQ(choose_splitting(h, 2, 1), oracle);
}

TEST(BuildChart, MainChartAtFinitePoint)
{
    auto sq = Support::from_int(2, {{0, 0}, {1, 0}, {0, 1}, {1, 1}});
    SupportTuple T({sq, sq});
    std::mt19937_64 rng(1);
    auto cls = classify_infinity(T, vc({0.1, 0.2}), VecR::Zero(2), 1.0);
    auto b = build_chart(T, cls, 4, 2, 1e-2, rng);
    EXPECT_EQ(b.chart.l, 0);
    EXPECT_TRUE(verify_normal_form(apply_action(T, chart_action(b.chart)).tuple, 0).ok());
}

TEST(BuildChart, AtInfinityGivesNormalForm)
{
    auto T = example3d();
    std::mt19937_64 rng(1);
    auto cls = classify_infinity(T, vc({0.0, {0.3, 0.1}, 0.0}), (VecR(3) << 2, 0, 1).finished(), 1.0);
    auto b = build_chart(T, cls, 4, 2, 1e-2, rng);
    EXPECT_EQ(b.chart.l, 1);
    EXPECT_EQ(primitive_integer(b.chart.rays[0]), (std::vector<long long>{2, 0, 1}));
    EXPECT_TRUE(verify_normal_form(apply_action(T, chart_action(b.chart)).tuple, b.chart.l).ok());
}

TEST(BuildChart, UnivariateSquare)
{
    SupportTuple U({Support::from_int(1, {{0}, {2}})});
    std::mt19937_64 rng(1);
    auto cls = classify_infinity(U, vc({0.0}), (VecR(1) << -1).finished(), 1.0);
    ChartOptions opt;
    opt.lattice_minimal = false;
    auto b = build_chart(U, cls, 4, 2, 1e-2, rng, nullptr, opt);
    EXPECT_EQ(b.chart.l, 1);
    auto B = apply_action(U, chart_action(b.chart)).tuple;
    EXPECT_EQ(B[0].rows(), (std::vector<RowQ>{to_rat({0}), to_rat({2})}));
    auto m = build_chart(U, cls, 4, 2, 1e-2, rng);
    EXPECT_EQ(apply_action(U, chart_action(m.chart)).tuple[0].rows(), (std::vector<RowQ>{to_rat({0}), to_rat({1})}));
}

TEST(InDomain, StrictBoundaries)
{
    SupportTuple U({Support::from_int(1, {{0}, {1}})});
    std::mt19937_64 rng(1);
    auto cls = classify_infinity(U, vc({0.0}), (VecR(1) << -1).finished(), 1.0);
    Chart c = build_chart(U, cls, 2, 1, 1e-2, rng).chart;
    EXPECT_TRUE(in_domain(c, ChartPoint{vc({0.0}), VecC(0)}));
    EXPECT_FALSE(in_domain(c, ChartPoint{vc({std::exp(-c.Psi)}), VecC(0)}));
    auto sq = Support::from_int(2, {{0, 0}, {1, 0}, {0, 1}, {1, 1}});
    SupportTuple T({sq, sq});
    auto ci = classify_infinity(T, vc({0.0, 0.0}), (VecR(2) << -1, 0).finished(), 1.0);
    Chart c2 = build_chart(T, ci, 2, 1, 0.25, rng).chart;
    ASSERT_EQ(c2.l, 1);
    EXPECT_TRUE(in_domain(c2, ChartPoint{vc({0.0}), vc({0.0})}));
    EXPECT_FALSE(in_domain(c2, ChartPoint{vc({0.0}), vc({c2.eps})}));
}

TEST(ApplyAction, WorkedExampleMatrices)
{
    auto T = example3d();
    MonomialAction S;
    S.Xi = {to_rat({-2, 0, 0}), to_rat({0, -2, 2}), to_rat({-1, -1, -1})};
    S.theta.assign(3, RowQ(3, Rat(0)));
    std::vector<RowQ> AS{to_rat({-1, -1, 3}), to_rat({-1, 3, -1}), to_rat({3, -1, 3}), to_rat({3, 3, -1}), to_rat({-1, -1, -1})};
    std::sort(AS.begin(), AS.end());
    EXPECT_EQ(apply_action(T, S).tuple[0].rows(), AS);
    for (auto& t : S.theta) t = {Rat(1), Rat(-1, 3), Rat(-1, 3)};
    std::vector<RowQ> shifted = rows_q({{0, Rat(-4, 3), Rat(8, 3)}, {0, Rat(8, 3), Rat(-4, 3)}, {4, Rat(-4, 3), Rat(8, 3)},
                                        {4, Rat(8, 3), Rat(-4, 3)}, {0, Rat(-4, 3), Rat(-4, 3)}});
    std::sort(shifted.begin(), shifted.end());
    auto B = apply_action(T, S).tuple;
    for (int i = 0; i < 3; ++i) EXPECT_EQ(B[i].rows(), shifted);
    EXPECT_TRUE(verify_normal_form(B, 1).ok());
}

TEST(ApplyAction, IdentityAndComposition)
{
    auto T = example3d();
    auto I = identity_action(3);
    EXPECT_EQ(apply_action(T, I).tuple.supports(), T.supports());
    MonomialAction S{{to_rat({1, 1, 0}), to_rat({0, 1, 0}), to_rat({0, 0, 1})}, {to_rat({1, 0, 0}), to_rat({0, 0, 0}), to_rat({0, 2, 0})}};
    MonomialAction R{{to_rat({1, 0, 0}), to_rat({0, 1, 1}), to_rat({0, 0, 1})}, {to_rat({0, 0, 1}), to_rat({1, 0, 0}), to_rat({0, 0, 0})}};
    EXPECT_TRUE(S.unimodular());
    auto two = apply_action(apply_action(T, S).tuple, R).tuple;
    EXPECT_EQ(apply_action(T, compose(R, S)).tuple.supports(), two.supports());
}

TEST(VerifyNormalForm, Violations)
{
    SupportTuple U({Support::from_int(1, {{0}, {2}})});
    EXPECT_TRUE(verify_normal_form(U, 1).b);
    EXPECT_FALSE(block_decompose(U, 1).smooth);
    SupportTuple N({Support::from_int(1, {{-1}, {0}})});
    EXPECT_FALSE(verify_normal_form(N, 1).a);
}

TEST(ReduceToNormalForm, Cases)
{
    auto T = example3d();
    VecR chi = (VecR(3) << 2, 0, 1).finished();
    auto red = reduce_to_normal_form(T, minimal_cone(T, fan_rays(T), chi), chi);
    EXPECT_EQ(red.l, 1);
    EXPECT_TRUE(verify_normal_form(apply_action(T, red.S).tuple, red.l).ok());

    auto sq = Support::from_int(2, {{0, 0}, {1, 0}, {0, 1}, {1, 1}});
    SupportTuple Q({sq, sq});
    auto m = reduce_to_normal_form(Q, minimal_cone(Q, fan_rays(Q), VecR::Zero(2)), VecR::Zero(2));
    EXPECT_EQ(m.l, 0);
    EXPECT_TRUE(m.S.unimodular());

    SupportTuple U({Support::from_int(1, {{0}, {2}})});
    VecR c1 = (VecR(1) << -1).finished();
    auto u = reduce_to_normal_form(U, minimal_cone(U, fan_rays(U), c1), c1, false);
    EXPECT_EQ(u.S.Xi, std::vector<RowQ>{to_rat({1})});
    EXPECT_EQ(u.S.theta, std::vector<RowQ>{to_rat({0})});
}

TEST(BlockDecompose, LMatrixAndBounds)
{
    auto A = Support::from_int(2, {{0, 1}, {0, -1}, {1, 0}});
    auto B = Support::from_int(2, {{0, 1}, {0, -1}, {1, 2}});
    auto nf = block_decompose(SupportTuple({A, B}), 1);
    // sorted rows (0,-1), (0,1), (1,0)
    MatR L0 = (MatR(3, 2) << 0, -1, 0, 1, 1, 0).finished() / std::sqrt(2.0);
    EXPECT_LT((nf.L[0] - L0).norm(), 1e-12);
    EXPECT_TRUE(nf.smooth);
    EXPECT_GE(nf.nu, 1.0);
    EXPECT_LE(nf.lambda, 2 * nf.nu * (1 + 1e-9));
    EXPECT_EQ(lambda_omega_literal(nf), 0.0);
}

TEST(SmoothnessCheck, SingularCharts)
{
    EXPECT_FALSE(block_decompose(SupportTuple({Support::from_int(1, {{0}, {2}})}), 1).smooth);
    EXPECT_FALSE(block_decompose(SupportTuple({Support::from_int(1, {{0}, {2}, {3}})}), 1).smooth);
    EXPECT_TRUE(block_decompose(SupportTuple({Support::from_int(1, {{0}, {1}})}), 1).smooth);
}

TEST(LambdaZero, ClosedFormAndTranslation)
{
    // A = {0, 1}: spread |w| over the Finsler norm at the origin, the same ratio for every w
    SupportTuple U({Support::from_int(1, {{0}, {1}})});
    const double lam = lambda_zero(U);
    VecC w = vc({1.0});
    const double oracle = 1.0 / point_norm(U, vc({0.0}), w, NormKind::finsler);
    EXPECT_NEAR(lam, oracle, 1e-9);
    SupportTuple V({Support::from_int(1, {{3}, {4}})});
    EXPECT_NEAR(lambda_zero(V), lam, 1e-12);
    EXPECT_GT(lambda_zero(example3d()), 0.0);
}

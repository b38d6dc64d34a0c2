#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "tfwi/error.hpp"
#include "tfwi/optimize.hpp"

using namespace tfwi;
using RealMatrix = Eigen::MatrixXd;

namespace {

// f(x) = 1/2 (x - x*)^T A (x - x*) with a fixed SPD matrix.
class Quadratic : public Objective {
public:
    Quadratic(int n, unsigned seed)
    {
        std::mt19937 rng(seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        RealMatrix b(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                b(i, j) = u(rng);
            }
        }
        a = b.transpose() * b + RealMatrix::Identity(n, n);
        minimizer.resize(n);
        for (int i = 0; i < n; ++i) {
            minimizer[i] = u(rng);
        }
    }

    double value(const RealVector& x) override
    {
        ++calls;
        const RealVector d = x - minimizer;
        return 0.5 * d.dot(a * d);
    }
    double value_and_gradient(const RealVector& x, RealVector& g) override
    {
        g = a * (x - minimizer);
        return value(x);
    }

    RealMatrix a;
    RealVector minimizer;
    int calls = 0;
};

// Reports the negated gradient, so no step along -H g descends.
class Misleading : public Quadratic {
public:
    using Quadratic::Quadratic;
    double value_and_gradient(const RealVector& x, RealVector& g) override
    {
        const double f = Quadratic::value_and_gradient(x, g);
        g = -g;
        return f;
    }
};

// Dense BFGS inverse update starting from H0 = gamma diag(h0).
RealVector dense_bfgs_direction(const std::vector<std::pair<RealVector, RealVector>>& pairs, const RealVector& g,
                                const RealVector& h0)
{
    const auto n = g.size();
    const auto& [s_last, y_last] = pairs.back();
    const double gamma = s_last.dot(y_last) / y_last.dot(h0.asDiagonal() * y_last);
    RealMatrix h = gamma * RealMatrix(h0.asDiagonal());
    const RealMatrix id = RealMatrix::Identity(n, n);
    for (const auto& [s, y] : pairs) {
        const double rho = 1.0 / s.dot(y);
        h = (id - rho * s * y.transpose()) * h * (id - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    return -h * g;
}

}  // namespace

TEST(Schedule, BlindTestGroups)
{
    std::vector<std::vector<double>> expected;
    for (double w = 300; w <= 1000; w += 100) {
        expected.push_back({w});
    }
    for (double w = 600; w <= 2100; w += 100) {
        expected.push_back({w, 2 * w});
    }
    for (int k = 0; k < 4; ++k) {
        expected.push_back({1980.0 - 120.0 * k, 4400.0 + 200.0 * k});
    }
    const FrequencySchedule s = FrequencySchedule::blind_test();
    ASSERT_EQ(s.groups.size(), 28u);
    EXPECT_EQ(s.groups, expected);
    EXPECT_EQ(s.groups.front(), std::vector<double>{300});
    EXPECT_EQ(s.groups.back(), (std::vector<double>{1620, 5000}));
    EXPECT_NO_THROW(s.validate());
}

TEST(Schedule, AllFrequenciesAreDistinctAndSorted)
{
    FrequencySchedule s{{{300}, {200, 400}, {300, 500}}};
    EXPECT_EQ(s.all_frequencies(), (std::vector<double>{200, 300, 400, 500}));
    const auto all = FrequencySchedule::blind_test().all_frequencies();
    EXPECT_TRUE(std::is_sorted(all.begin(), all.end()));
    EXPECT_EQ(std::adjacent_find(all.begin(), all.end()), all.end());
}

TEST(Schedule, RejectsNonIncreasingMaxima)
{
    FrequencySchedule s{{{300}, {200, 300}}};
    try {
        s.validate();
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::validation_error);
        EXPECT_NE(std::string(e.what()).find("does not exceed"), std::string::npos);
    }
    EXPECT_THROW((FrequencySchedule{{{}}}).validate(), Error);
    EXPECT_THROW((FrequencySchedule{{{-5}}}).validate(), Error);
}

TEST(Lbfgs, HistorySkipsCurvatureViolationsAndDropsOldest)
{
    LbfgsHistory h(2);
    RealVector s(2), y(2);
    s << 1, 0;
    y << -1, 0;
    EXPECT_FALSE(h.push(s, y));
    EXPECT_TRUE(h.empty());
    for (int k = 1; k <= 3; ++k) {
        s << k, 0;
        y << 1, 0;
        EXPECT_TRUE(h.push(s, y));
    }
    ASSERT_EQ(h.size(), 2u);
    EXPECT_DOUBLE_EQ(h.pairs().front().s[0], 2);
    EXPECT_DOUBLE_EQ(h.pairs().back().rho, 1.0 / 3.0);
}

TEST(Lbfgs, EmptyHistoryIsScaledSteepestDescent)
{
    RealVector g(3), h0(3);
    g << 1, -2, 3;
    h0 << 2, 1, 0.5;
    EXPECT_TRUE(lbfgs_direction(LbfgsHistory(), g).isApprox(-g));
    const RealVector d = lbfgs_direction(LbfgsHistory(), g, h0);
    EXPECT_DOUBLE_EQ(d[0], -2);
    EXPECT_DOUBLE_EQ(d[2], -1.5);
}

TEST(Lbfgs, TwoLoopMatchesDenseBfgs)
{
    std::mt19937 rng(3);
    std::normal_distribution<double> n01;
    const int n = 6;
    const auto random = [&] {
        RealVector v(n);
        for (int i = 0; i < n; ++i) {
            v[i] = n01(rng);
        }
        return v;
    };
    Quadratic q(n, 11);
    LbfgsHistory history(4);
    std::vector<std::pair<RealVector, RealVector>> pairs;
    for (int k = 0; k < 4; ++k) {
        const RealVector s = random();
        const RealVector y = q.a * s;
        ASSERT_TRUE(history.push(s, y));
        pairs.emplace_back(s, y);
    }
    const RealVector g = random();
    RealVector h0(n);
    h0 << 1, 2, 0.5, 3, 1, 0.25;
    const RealVector expected_identity = dense_bfgs_direction(pairs, g, RealVector::Ones(n));
    const RealVector expected_scaled = dense_bfgs_direction(pairs, g, h0);
    EXPECT_LT((lbfgs_direction(history, g) - expected_identity).norm(), 1e-12 * expected_identity.norm());
    EXPECT_LT((lbfgs_direction(history, g, h0) - expected_scaled).norm(), 1e-12 * expected_scaled.norm());
}

TEST(LineSearch, ParabolaVertex)
{
    const auto f = [](double a) { return 3 * (a - 0.7) * (a - 0.7) + 2; };
    const auto v = parabola_vertex(0, f(0), 1, f(1), 2.5, f(2.5));
    ASSERT_TRUE(v.has_value());
    EXPECT_NEAR(*v, 0.7, 1e-14);
    EXPECT_FALSE(parabola_vertex(0, 0, 1, 1, 2, 0).has_value());
    EXPECT_FALSE(parabola_vertex(0, 0, 1, 1, 2, 2).has_value());
}

TEST(LineSearch, RecoversQuadraticMinimizerInOneFit)
{
    for (const double star : {0.3, 1.0, 1.7, 3.5}) {
        int calls = 0;
        const auto chi = [&](double a) {
            ++calls;
            return 5 * (a - star) * (a - star) + 1;
        };
        const LineSearchResult r = line_search(chi, chi(0.0), 1.0, 1);
        EXPECT_TRUE(r.success);
        EXPECT_EQ(r.fits, 1);
        EXPECT_NEAR(r.alpha, star, 1e-12 * star) << star;
        EXPECT_NEAR(r.value, 1.0, 1e-12);
    }
}

TEST(LineSearch, BacktracksUntilDecrease)
{
    const auto chi = [](double a) { return (a - 0.01) * (a - 0.01); };
    const LineSearchResult r = line_search(chi, chi(0.0), 1.0);
    EXPECT_TRUE(r.success);
    EXPECT_NEAR(r.alpha, 0.01, 1e-12);
}

TEST(LineSearch, FailsWhenNothingDecreases)
{
    const auto chi = [](double a) { return 1.0 + a; };
    const LineSearchResult r = line_search(chi, 1.0, 1.0, 5, 10);
    EXPECT_FALSE(r.success);
    EXPECT_EQ(r.alpha, 0.0);
}

TEST(FrequencyGroup, ConvergesOnConvexQuadratic)
{
    Quadratic q(10, 5);
    OptimizerSettings s;
    s.max_iterations = 20;
    s.stop_threshold = 0.0;
    s.gradient_tolerance = 1e-8;
    const GroupResult r = run_frequency_group(q, RealVector::Zero(10), s);
    EXPECT_FALSE(r.failed) << r.diagnostics;
    EXPECT_LE(r.iterations, 20);
    RealVector g;
    q.value_and_gradient(r.model, g);
    EXPECT_LT(g.norm(), 1e-8);
    for (std::size_t k = 1; k < r.log.size(); ++k) {
        EXPECT_LE(r.log[k].misfit, r.log[k - 1].misfit);
    }
}

TEST(FrequencyGroup, StopsOnSmallRelativeReduction)
{
    Quadratic q(10, 5);
    OptimizerSettings s;
    s.max_iterations = 100;
    s.stop_threshold = 0.5;
    const GroupResult r = run_frequency_group(q, RealVector::Zero(10), s);
    EXPECT_LT(r.iterations, 100);
    EXPECT_LT(r.final_misfit, r.initial_misfit);
}

TEST(FrequencyGroup, ZeroMisfitReturnsInitialModel)
{
    Quadratic q(4, 2);
    const GroupResult r = run_frequency_group(q, q.minimizer, OptimizerSettings{});
    EXPECT_EQ(r.model, q.minimizer);
    EXPECT_EQ(r.iterations, 0);
    EXPECT_FALSE(r.failed);
}

TEST(FrequencyGroup, FirstStepLimitsModelChange)
{
    Quadratic q(4, 2);
    OptimizerSettings s;
    s.max_iterations = 1;
    s.first_step = 1e-3;
    s.line_search_rounds = 1;
    const GroupResult r = run_frequency_group(q, RealVector::Zero(4), s);
    // The fitted step is clamped to four times the largest sample 2 alpha_init.
    EXPECT_GT(q.minimizer.cwiseAbs().maxCoeff(), 0.1);
    EXPECT_LE(r.model.cwiseAbs().maxCoeff(), 8e-3 * (1 + 1e-12));
    EXPECT_GT(r.model.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Inversion, SingleGroupEqualsFrequencyGroup)
{
    Quadratic q(6, 9);
    OptimizerSettings s;
    s.max_iterations = 5;
    const auto factory = [&](std::size_t, const std::vector<double>&) { return std::make_unique<Quadratic>(6, 9); };
    const InversionResult inv = run_inversion(factory, RealVector::Zero(6), FrequencySchedule{{{100}}}, s);
    const GroupResult single = run_frequency_group(q, RealVector::Zero(6), s);
    EXPECT_EQ(inv.model, single.model);
    ASSERT_EQ(inv.log.size(), single.log.size());
    for (std::size_t k = 0; k < inv.log.size(); ++k) {
        EXPECT_EQ(inv.log[k].misfit, single.log[k].misfit);
    }
}

TEST(Inversion, GroupsChainAndReportToCallback)
{
    OptimizerSettings s;
    s.max_iterations = 3;
    std::vector<std::vector<double>> seen;
    const auto factory = [&](std::size_t, const std::vector<double>& omegas) {
        seen.push_back(omegas);
        return std::make_unique<Quadratic>(5, 4);
    };
    std::vector<std::size_t> reported;
    const FrequencySchedule schedule{{{100}, {150, 200}, {300}}};
    const InversionResult inv =
        run_inversion(factory, RealVector::Zero(5), schedule, s, [&](std::size_t g, const GroupResult&) {
            reported.push_back(g);
        });
    EXPECT_EQ(seen, schedule.groups);
    EXPECT_EQ(reported, (std::vector<std::size_t>{0, 1, 2}));
    ASSERT_EQ(inv.groups.size(), 3u);
    EXPECT_EQ(inv.groups[1].initial_misfit, inv.groups[0].final_misfit);
    EXPECT_EQ(inv.model, inv.groups[2].model);
    for (const auto& entry : inv.log) {
        EXPECT_LT(entry.group, 3);
    }
}

TEST(Inversion, ObservedEqualsInitialLeavesModel)
{
    Quadratic q(3, 1);
    const RealVector start = q.minimizer;
    const auto factory = [&](std::size_t, const std::vector<double>&) { return std::make_unique<Quadratic>(3, 1); };
    const InversionResult inv =
        run_inversion(factory, start, FrequencySchedule{{{100}, {200}}}, OptimizerSettings{});
    EXPECT_EQ(inv.model, start);
    EXPECT_TRUE(inv.failures.empty());
}

TEST(Inversion, FailingGroupIsReportedOrThrows)
{
    const auto factory = [](std::size_t, const std::vector<double>&) { return std::make_unique<Misleading>(3, 1); };
    OptimizerSettings s;
    s.max_backtracks = 8;
    const InversionResult inv = run_inversion(factory, RealVector::Zero(3), FrequencySchedule{{{100}, {200}}}, s);
    EXPECT_EQ(inv.failures.size(), 2u);
    EXPECT_TRUE(inv.groups[0].failed);
    EXPECT_EQ(inv.model, RealVector::Zero(3));

    s.strict = true;
    try {
        run_inversion(factory, RealVector::Zero(3), FrequencySchedule{{{100}, {200}}}, s);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::line_search_failure);
    }
}

TEST(Inversion, Deterministic)
{
    const auto factory = [](std::size_t g, const std::vector<double>&) {
        return std::make_unique<Quadratic>(8, static_cast<unsigned>(g + 20));
    };
    const FrequencySchedule schedule{{{1}, {2}}};
    const InversionResult a = run_inversion(factory, RealVector::Zero(8), schedule, OptimizerSettings{});
    const InversionResult b = run_inversion(factory, RealVector::Zero(8), schedule, OptimizerSettings{});
    EXPECT_EQ(a.model, b.model);
    ASSERT_EQ(a.log.size(), b.log.size());
    for (std::size_t k = 0; k < a.log.size(); ++k) {
        EXPECT_EQ(a.log[k].misfit, b.log[k].misfit);
        EXPECT_EQ(a.log[k].step, b.log[k].step);
    }
}

TEST(Settings, Validation)
{
    EXPECT_NO_THROW(OptimizerSettings{}.validate());
    OptimizerSettings s;
    s.history = 0;
    EXPECT_THROW(s.validate(), Error);
    s = {};
    s.max_iterations = -1;
    EXPECT_THROW(s.validate(), Error);
    s = {};
    s.stop_threshold = -0.1;
    EXPECT_THROW(s.validate(), Error);
}

namespace {

// 4 x 4 m box with a 1 m layer on all sides.
Mesh box()
{
    TunnelGeometry g;
    g.domain_width = 4;
    g.depth_above_tunnel = 4;
    g.pml_width = 1;
    g.pml_on_top = true;
    return build_tunnel_mesh(g);
}

// Homogeneous (v_p, v_s) exposed as a two-parameter objective.
class Homogeneous : public Objective {
public:
    Homogeneous(FwiObjective& inner, std::size_t nodes) : inner_(inner), nodes_(nodes) {}

    double value(const RealVector& m) override { return inner_.value(expand(m)); }
    double value_and_gradient(const RealVector& m, RealVector& g) override
    {
        RealVector full;
        const double f = inner_.value_and_gradient(expand(m), full);
        const auto n = static_cast<Eigen::Index>(nodes_);
        g.resize(2);
        g << full.head(n).sum(), full.tail(n).sum();
        return f;
    }

private:
    RealVector expand(const RealVector& m) const
    {
        return ModelVector::homogeneous(nodes_, m[0], m[1]).as_eigen();
    }
    FwiObjective& inner_;
    std::size_t nodes_;
};

}  // namespace

TEST(FwiToy, TwoParameterInversionFindsGridMinimum)
{
    const Mesh mesh = box();
    OperatorSettings settings;
    settings.discretization.degree = 2;
    const ForwardModel forward(mesh, settings);
    StationLayout layout;
    layout.sources.push_back({{0.5, 3.2}, {0.6, 0.8}});
    layout.receivers.push_back({{3.5, 0.5}, {{1, 0}, {0, 1}}});
    layout.receivers.push_back({{3.2, 3.7}, {{1, 0}, {0, 1}}});
    const std::vector<double> omegas{3000, 5000};
    const double vp_true = 4100;
    const double vs_true = 2350;
    const RecordSet observed =
        simulate_records(forward, ModelVector::homogeneous(mesh.node_count(), vp_true, vs_true), omegas, layout);

    PreconditionMask mask;
    mask.factors.assign(mesh.node_count(), 1.0);
    FwiObjective inner(forward, observed, layout, {}, mask);
    Homogeneous objective(inner, mesh.node_count());

    // Brute-force scan of the misfit on a 25 m/s grid.
    double best = std::numeric_limits<double>::infinity();
    double best_vp = 0;
    double best_vs = 0;
    for (double vp = 3900; vp <= 4300; vp += 25) {
        for (double vs = 2200; vs <= 2500; vs += 25) {
            RealVector m(2);
            m << vp, vs;
            const double f = objective.value(m);
            if (f < best) {
                best = f;
                best_vp = vp;
                best_vs = vs;
            }
        }
    }
    EXPECT_EQ(best_vp, vp_true);
    EXPECT_EQ(best_vs, vs_true);

    OptimizerSettings s;
    s.max_iterations = 40;
    s.stop_threshold = 1e-6;
    s.first_step = 20;
    RealVector start(2);
    start << 4000, 2400;
    const GroupResult r = run_frequency_group(objective, start, s);
    EXPECT_NEAR(r.model[0], best_vp, 1.0);
    EXPECT_NEAR(r.model[1], best_vs, 1.0);
    EXPECT_LT(r.final_misfit, 1e-6 * r.initial_misfit);
}

#include "bergomi/sampler.hpp"

#include "bergomi/encoding.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace bergomi;

TEST(Rho12, IntervalEndpoints) {
    Rng rng = make_rng(1, 0);
    double lo = 1.0, hi = -1.0;
    for (int i = 0; i < 20000; ++i) {
        const double r = sample_rho12(-0.9, -0.9, rng);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    EXPECT_GE(lo, 0.62 - 1e-12);
    EXPECT_LE(hi, 1.0);
    EXPECT_LT(lo, 0.63);
    EXPECT_GT(hi, 0.99);

    lo = 1.0, hi = -1.0;
    for (int i = 0; i < 20000; ++i) {
        const double r = sample_rho12(0.0, 0.0, rng);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    EXPECT_LT(lo, -0.99);
    EXPECT_GT(hi, 0.99);
}

TEST(Rho12, CorrelationMatrixStaysPositiveSemidefinite) {
    Rng rng = make_rng(2, 0);
    double worst = 1.0;
    for (int i = 0; i < 100000; ++i) {
        const double r1 = uniform(rng, -0.9, 0.2);
        const double r2 = uniform(rng, -0.9, 0.2);
        const double r12 = sample_rho12(r1, r2, rng);
        Eigen::Matrix3d c;
        c << 1, r1, r2, r1, 1, r12, r2, r12, 1;
        worst = std::min(worst, Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(c).eigenvalues().minCoeff());
    }
    EXPECT_GE(worst, -1e-12);
}

TEST(Factors, LawAtTimeZeroIsTheInflation) {
    const auto law = factor_law(0.0, 1.3, 7.0, 0.4);
    EXPECT_DOUBLE_EQ(law.var1, 0.01);
    EXPECT_DOUBLE_EQ(law.var2, 0.01);
    EXPECT_DOUBLE_EQ(law.cov, 0.0);
}

TEST(Factors, SampleCovarianceMatchesLaw) {
    const double t = 0.7, k1 = 0.8, k2 = 5.0, rho12 = -0.6;
    const auto law = factor_law(t, k1, k2, rho12);
    Rng rng = make_rng(3, 0);
    const int n = 1'000'000;
    double s11 = 0, s22 = 0, s12 = 0, m1 = 0, m2 = 0;
    for (int i = 0; i < n; ++i) {
        const auto [a, b] = sample_factors_raw(t, k1, k2, rho12, rng);
        m1 += a;
        m2 += b;
        s11 += a * a;
        s22 += b * b;
        s12 += a * b;
    }
    m1 /= n;
    m2 /= n;
    const double v1 = s11 / n - m1 * m1, v2 = s22 / n - m2 * m2, c12 = s12 / n - m1 * m2;
    // Gaussian sampling errors of the second moments
    EXPECT_NEAR(v1, law.var1, 3.0 * law.var1 * std::sqrt(2.0 / n));
    EXPECT_NEAR(v2, law.var2, 3.0 * law.var2 * std::sqrt(2.0 / n));
    EXPECT_NEAR(c12, law.cov, 3.0 * std::sqrt((law.var1 * law.var2 + law.cov * law.cov) / n));
    EXPECT_NEAR(m1, 0.0, 3.0 * std::sqrt(law.var1 / n));
}

TEST(Factors, ClippedToBounds) {
    Rng rng = make_rng(4, 0);
    bool clipped = false;
    for (int i = 0; i < 100000; ++i) {
        const double k1 = 0.1, k2 = 2.0;
        const auto [a, b] = sample_factors(3.0, k1, k2, 0.9, rng);
        EXPECT_LE(std::abs(a), factor_bound(k1));
        EXPECT_LE(std::abs(b), factor_bound(k2));
        clipped = clipped || std::abs(a) == factor_bound(k1);
    }
    // 3-sigma bounds on a variance-inflated law: a few draws land on the clip
    EXPECT_TRUE(clipped);
}

TEST(SamplePoint, InvariantsHoldForEveryKind) {
    for (auto kind : kAllKinds) {
        for (auto mode : {CurveMode::Constant, CurveMode::NineSegment}) {
            SamplingConfig cfg{mode, kind, false, 11};
            const auto pts = sample_batch(cfg, 0, 20000);
            for (const auto& p : pts) {
                ASSERT_NO_THROW(validate(p));
                ASSERT_GE(p.tau(), 1e-6);
                ASSERT_LE(p.maturity, 3.0);
                const auto b = domain_bounds(p);
                ASSERT_GE(p.s, b.s_min);
                ASSERT_LE(p.s, b.s_max);
                if (is_barrier(kind)) {
                    const double lb = std::log(p.barrier);
                    ASSERT_TRUE(is_up(kind) ? p.s <= lb : p.s >= lb);
                }
            }
        }
    }
}

TEST(SamplePoint, MillionDrawsStayValid) {
    SamplingConfig cfg{CurveMode::NineSegment, OptionKind::UpInPut, false, 12};
    Rng rng = make_rng(cfg.seed, 0);
    for (int i = 0; i < 1'000'000; ++i) ASSERT_NO_THROW(validate(sample_point(cfg, rng)));
}

TEST(SamplePoint, UpCallBarrierRange) {
    SamplingConfig cfg{CurveMode::Constant, OptionKind::UpInCall, false, 13};
    for (const auto& p : sample_batch(cfg, 0, 50000)) {
        const double lb = std::log(p.barrier);
        ASSERT_LE(p.s, lb);
        ASSERT_GE(lb, std::log(kStrike) - 1e-12);
        ASSERT_LE(lb, std::log(1.5 * kStrike) + 1e-12);
    }
}

TEST(SamplePoint, NonDegenerateRegionOnly) {
    for (auto kind : {OptionKind::UpInCall, OptionKind::UpOutCall}) {
        SamplingConfig cfg{CurveMode::Constant, kind, false, 14};
        for (const auto& p : sample_batch(cfg, 0, 20000)) ASSERT_GE(p.barrier, kStrike * (1 - 1e-12));
    }
    for (auto kind : {OptionKind::DownInPut, OptionKind::DownOutPut}) {
        SamplingConfig cfg{CurveMode::Constant, kind, false, 14};
        for (const auto& p : sample_batch(cfg, 0, 20000)) ASSERT_LE(p.barrier, kStrike * (1 + 1e-12));
    }
}

TEST(SamplePoint, TestModeFixesStateVariables) {
    for (auto kind : {OptionKind::VanillaCall, OptionKind::DownInCall, OptionKind::UpInPut}) {
        SamplingConfig cfg{CurveMode::Constant, kind, true, 15};
        for (const auto& p : sample_batch(cfg, 0, 5000)) {
            ASSERT_EQ(p.t, 0.0);
            ASSERT_EQ(p.x1, 0.0);
            ASSERT_EQ(p.x2, 0.0);
            ASSERT_GE(p.s, std::log(kStrike / 2.0));
            ASSERT_LE(p.s, std::log(2.0 * kStrike));
        }
    }
}

TEST(SamplePoint, OmegaMarginalPassesKolmogorovSmirnov) {
    SamplingConfig cfg{CurveMode::Constant, OptionKind::VanillaPut, false, 16};
    const auto pts = sample_batch(cfg, 0, 100000);
    std::vector<double> w;
    for (const auto& p : pts) w.push_back(p.params.omega / 3.0);
    std::sort(w.begin(), w.end());
    double d = 0.0;
    const double n = static_cast<double>(w.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        d = std::max({d, (i + 1) / n - w[i], w[i] - i / n});
    EXPECT_LT(d, 1.628 / std::sqrt(n)); // 1% critical value
}

TEST(SamplePoint, DeterministicPerSeedAndStream) {
    SamplingConfig cfg{CurveMode::NineSegment, OptionKind::DownInCall, false, 17};
    const auto a = sample_batch(cfg, 3, 100);
    const auto b = sample_batch(cfg, 3, 100);
    const auto c = sample_batch(cfg, 4, 100);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(encode_raw(a[i], cfg.mode), encode_raw(b[i], cfg.mode));
    }
    EXPECT_NE(encode_raw(a[0], cfg.mode), encode_raw(c[0], cfg.mode));
}

#include "bergomi/losses.hpp"

#include "bergomi/analytic.hpp"
#include "bergomi/errors.hpp"
#include "bergomi/sampler.hpp"
#include "bergomi/tape.hpp"
#include "../support/fd_check.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace bergomi;

namespace {

ParamPoint interior(std::uint64_t seed, OptionKind kind = OptionKind::VanillaCall) {
    SamplingConfig cfg;
    cfg.kind = kind;
    Rng rng = make_rng(seed, 0);
    ParamPoint p = sample_point(cfg, rng);
    while (p.tau() < 0.05) p = sample_point(cfg, rng);
    return p;
}

// H written out term by term from the pricing PDE.
double straight_line_h(const DerivBundle& d, const ParamPoint& p) {
    const auto& m = p.params;
    const double var = xi_inst(p.t, p.x1, p.x2, m);
    const double sig = std::sqrt(var);
    return d.dt() + (m.r - m.q - 0.5 * var) * d.ds() - m.k1 * p.x1 * d.dx1() - m.k2 * p.x2 * d.dx2() +
           0.5 * var * d.dss() + 0.5 * d.dx1x1() + 0.5 * d.dx2x2() + m.rho1 * sig * d.dsx1() +
           m.rho2 * sig * d.dsx2() + m.rho12 * d.dx1x2() - m.r * d.value();
}

double sq(double x) { return x * x; }

LossTerms straight_line_vanilla(const PricingNetwork& net, const ParamPoint& p, const LossConfig& cfg) {
    const auto& m = p.params;
    const bool call = is_call(p.kind);
    const double tau = p.tau();
    const auto b = domain_bounds(p);
    const double w = call ? std::min(1.0, 4.0 * 100.0 * 100.0 * std::exp(-2.0 * p.s)) : 1.0;
    const double w_hi = call ? std::min(1.0, 4.0 * 100.0 * 100.0 * std::exp(-2.0 * b.s_max)) : 1.0;
    auto at = [&](auto edit) {
        ParamPoint q = p;
        edit(q);
        return net.price(q);
    };
    LossTerms t;
    t.pde = w * sq(straight_line_h(net.eval_with_derivs(p), p));
    const double payoff = call ? std::max(0.0, std::exp(p.s) - 100.0) : std::max(0.0, 100.0 - std::exp(p.s));
    t.initial = w * sq(at([&](ParamPoint& q) { q.t = q.maturity; }) - payoff);
    const double v_lo = at([&](ParamPoint& q) { q.s = b.s_min; });
    const double v_hi = at([&](ParamPoint& q) { q.s = b.s_max; });
    if (call) {
        t.s_low = sq(v_lo);
        t.s_high = w_hi * sq(v_hi - std::exp(b.s_max - m.q * tau) + 100.0 * std::exp(-m.r * tau));
    } else {
        t.s_low = sq(v_lo - 100.0 * std::exp(-m.r * tau) + std::exp(b.s_min - m.q * tau));
        t.s_high = sq(v_hi);
    }
    ParamPoint lo = p, hi = p;
    lo.x1 = b.x1_min;
    lo.x2 = b.x2_min;
    hi.x1 = b.x1_max;
    hi.x2 = b.x2_max;
    t.vol_low = cfg.lambda1 * w * sq(net.price(lo) - boundary_estimate(lo));
    t.vol_high = cfg.lambda1 * w * sq(net.price(hi) - boundary_estimate(hi));
    return t;
}

LossTerms straight_line_knock_in(const PricingNetwork& net, const PricingNetwork& van, const ParamPoint& p,
                                 const LossConfig& cfg) {
    const auto b = domain_bounds(p);
    LossTerms t;
    t.pde = sq(straight_line_h(net.eval_with_derivs(p), p));
    ParamPoint e = p;
    e.t = p.maturity;
    t.initial = cfg.lambda2 * sq(net.price(e));
    ParamPoint far = p;
    far.s = is_up(p.kind) ? b.s_min : b.s_max;
    (is_up(p.kind) ? t.s_low : t.s_high) = sq(net.price(far));
    ParamPoint at_b = p;
    at_b.s = std::log(p.barrier);
    ParamPoint v = at_b;
    v.kind = vanilla_of(p.kind);
    t.barrier = sq(net.price(at_b) - van.price(v));
    return t;
}

void expect_terms_near(const LossTerms& a, const LossTerms& b, double rel) {
    for (std::size_t i = 0; i < kLossTermNames.size(); ++i) {
        const double x = loss_term(a, i), y = loss_term(b, i);
        EXPECT_NEAR(x, y, rel * std::max(1.0, std::abs(y))) << kLossTermNames[i];
    }
}

} // namespace

TEST(PdeResidual, ForwardAndBondAreSolutions) {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const ParamPoint p = interior(seed);
        const auto& m = p.params;
        Tape tape;
        Var s = tape.input(Jet::variable(p.s, kVarS));
        Var t = tape.input(Jet::variable(p.t, kVarT));
        Var forward = exp(s - m.q * (p.maturity - t));
        Var bond = 100.0 * exp(-m.r * (p.maturity - t));
        EXPECT_LE(std::abs(pde_residual(tape.value(forward), p)), 1e-10 * std::exp(p.s));
        EXPECT_LE(std::abs(pde_residual(tape.value(bond), p)), 1e-10);
    }
}

TEST(PdeResidual, BlackScholesSolvesTheZeroVolOfVolEquation) {
    Rng rng = make_rng(21, 0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        ParamPoint p = interior(1000 + i);
        p.params.omega = 0.0;
        p.s = uniform(rng, std::log(60.0), std::log(160.0));
        const double sigma = std::sqrt(p.params.curve.value_at(0.0));
        auto bs = [&](double s, double t) {
            BsInputs in;
            in.s = s;
            in.tau = p.maturity - t;
            in.sigma = sigma;
            in.r = p.params.r;
            in.q = p.params.q;
            in.kind = p.kind;
            return bs_vanilla(in);
        };
        const double h = 1e-4;
        Jet v;
        v.v = bs(p.s, p.t);
        v.d[kVarS] = (bs(p.s + h, p.t) - bs(p.s - h, p.t)) / (2 * h);
        v.d[kVarT] = (bs(p.s, p.t + h) - bs(p.s, p.t - h)) / (2 * h);
        v.h[kSS] = (bs(p.s + h, p.t) - 2 * v.v + bs(p.s - h, p.t)) / (h * h);
        worst = std::max(worst, std::abs(pde_residual(v, p)));
    }
    EXPECT_LE(worst, 1e-4);
}

TEST(PdeResidual, RejectsExpiry) {
    ParamPoint p = interior(3);
    p.t = p.maturity;
    EXPECT_THROW(pde_residual(Jet::constant(1.0), p), DomainError);
}

TEST(PhiWeight, Examples) {
    EXPECT_DOUBLE_EQ(phi_weight(std::log(100.0)), 1.0);
    EXPECT_NEAR(phi_weight(std::log(200.0)), 1.0, 1e-15);
    EXPECT_NEAR(phi_weight(std::log(400.0)), 0.25, 1e-15);
}

TEST(LossVanilla, MatchesStraightLineImplementation) {
    LossConfig cfg;
    for (auto kind : {OptionKind::VanillaCall, OptionKind::VanillaPut}) {
        PricingNetwork net(Architecture::vanilla(kind, CurveMode::Constant, 3, 16));
        check::randomize(net, 7);
        for (std::uint64_t seed = 0; seed < 30; ++seed) {
            const ParamPoint p = interior(200 + seed, kind);
            expect_terms_near(loss_vanilla(net, p, cfg), straight_line_vanilla(net, p, cfg), 1e-12);
        }
    }
}

TEST(LossVanilla, NonNegativeAndRejectsBarrierKinds) {
    LossConfig cfg;
    PricingNetwork net(Architecture::vanilla(OptionKind::VanillaPut, CurveMode::NineSegment, 2, 8));
    check::randomize(net, 8);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        SamplingConfig sc{CurveMode::NineSegment, OptionKind::VanillaPut, false, seed};
        Rng rng = make_rng(seed, 0);
        const auto t = loss_vanilla(net, sample_point(sc, rng), cfg);
        for (std::size_t i = 0; i < kLossTermNames.size(); ++i) EXPECT_GE(loss_term(t, i), 0.0);
        EXPECT_GT(t.total(), 0.0);
    }
    EXPECT_THROW(loss_vanilla(net, interior(1, OptionKind::UpInPut), cfg), UsageError);
}

TEST(LossKnockIn, MatchesStraightLineImplementation) {
    LossConfig cfg;
    for (auto kind : {OptionKind::UpInCall, OptionKind::DownInCall, OptionKind::UpInPut, OptionKind::DownInPut}) {
        PricingNetwork van(Architecture::vanilla(vanilla_of(kind), CurveMode::Constant, 2, 16));
        check::randomize(van, 9);
        PricingNetwork net(Architecture::barrier(kind, CurveMode::Constant, 2, 1, 16));
        check::randomize(net, 10);
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const ParamPoint p = interior(300 + seed, kind);
            expect_terms_near(loss_knock_in(net, van, p, cfg), straight_line_knock_in(net, van, p, cfg), 1e-12);
        }
    }
}

TEST(LossKnockIn, InitialTermIsQuadraticInTheResidual) {
    LossConfig cfg;
    const auto arch = Architecture::barrier(OptionKind::UpInCall, CurveMode::Constant, 2, 1, 8);
    PricingNetwork van(Architecture::vanilla(OptionKind::VanillaCall, CurveMode::Constant, 2, 8));
    van.initialize(1);
    PricingNetwork net(arch);
    net.initialize(2);
    // With the last layer zeroed the network is its output bias everywhere.
    const auto& w = net.tensor("W" + std::to_string(arch.depth1 + arch.depth2));
    std::fill_n(net.weights().begin() + static_cast<std::ptrdiff_t>(w.offset), w.rows * w.cols, 0.0);
    double& bias = net.weights()[net.tensor("b" + std::to_string(arch.depth1 + arch.depth2)).offset];
    const ParamPoint p = interior(5, OptionKind::UpInCall);
    bias = 0.3;
    const double one = loss_knock_in(net, van, p, cfg).initial;
    bias = 0.6;
    const double two = loss_knock_in(net, van, p, cfg).initial;
    EXPECT_NEAR(one, cfg.lambda2 * 0.09, 1e-12);
    EXPECT_NEAR(two, 4.0 * one, 1e-12);
}

TEST(LossKnockIn, BarrierTermVanishesWhenMatchingVanilla) {
    // A vanilla network and a knock-in network that are both the same constant.
    LossConfig cfg;
    const auto arch = Architecture::barrier(OptionKind::DownInPut, CurveMode::Constant, 1, 1, 8);
    PricingNetwork net(arch);
    net.initialize(3);
    const auto& w = net.tensor("W" + std::to_string(arch.depth1 + arch.depth2));
    std::fill_n(net.weights().begin() + static_cast<std::ptrdiff_t>(w.offset), w.rows * w.cols, 0.0);
    const ParamPoint p = interior(6, OptionKind::DownInPut);
    PricingNetwork van(Architecture::vanilla(OptionKind::VanillaPut, CurveMode::Constant, 1, 8));
    van.initialize(4);
    ParamPoint at_b = p;
    at_b.s = std::log(p.barrier);
    at_b.kind = OptionKind::VanillaPut;
    net.weights()[net.tensor("b" + std::to_string(arch.depth1 + arch.depth2)).offset] = van.price(at_b);
    EXPECT_NEAR(loss_knock_in(net, van, p, cfg).barrier, 0.0, 1e-20);
}

TEST(LossKnockIn, NeedsMatchingFrozenVanilla) {
    LossConfig cfg;
    PricingNetwork net(Architecture::barrier(OptionKind::UpInCall, CurveMode::Constant, 1, 1, 8));
    PricingNetwork put(Architecture::vanilla(OptionKind::VanillaPut, CurveMode::Constant, 1, 8));
    const ParamPoint p = interior(7, OptionKind::UpInCall);
    EXPECT_THROW(batch_loss(net, nullptr, std::span(&p, 1), cfg), ConfigError);
    EXPECT_THROW(batch_loss(net, &put, std::span(&p, 1), cfg), ConfigError);
}

TEST(BatchLoss, EqualsMeanOfPerSampleLosses) {
    LossConfig cfg;
    PricingNetwork net(Architecture::vanilla(OptionKind::VanillaCall, CurveMode::Constant, 3, 16));
    check::randomize(net, 11);
    SamplingConfig sc{CurveMode::Constant, OptionKind::VanillaCall, false, 12};
    const auto pts = sample_batch(sc, 0, 64);
    const auto batch = batch_loss(net, nullptr, pts, cfg);
    std::vector<double> totals;
    for (const auto& p : pts) totals.push_back(loss_vanilla(net, p, cfg).total());
    const double mean = compensated_sum(totals) / static_cast<double>(totals.size());
    EXPECT_NEAR(batch.total, mean, 1e-12 * std::max(1.0, mean));
    EXPECT_NEAR(batch.mean.total(), batch.total, 1e-12 * std::max(1.0, mean));
}

TEST(BatchLoss, CompensatedSumRecoversCancellation) {
    const std::vector<double> xs = {1e16, 1.0, -1e16, 1.0};
    EXPECT_EQ(compensated_sum(xs), 2.0);
}

TEST(BatchLoss, GradientMatchesFiniteDifferences) {
    LossConfig cfg;
    Rng rng = make_rng(13, 0);
    struct Case {
        Architecture arch;
        bool knock_in;
    };
    const Case cases[] = {
        {Architecture::vanilla(OptionKind::VanillaCall, CurveMode::Constant, 2, 8), false},
        {Architecture::vanilla(OptionKind::VanillaPut, CurveMode::NineSegment, 2, 8), false},
        {Architecture::barrier(OptionKind::UpInCall, CurveMode::Constant, 2, 1, 8), true},
        {Architecture::barrier(OptionKind::DownInCall, CurveMode::Constant, 1, 2, 8), true},
    };
    for (const auto& c : cases) {
        PricingNetwork net(c.arch);
        check::randomize(net, 14);
        PricingNetwork van(Architecture::vanilla(vanilla_of(c.arch.kind), c.arch.mode, 2, 8));
        check::randomize(van, 15);
        const PricingNetwork* frozen = c.knock_in ? &van : nullptr;
        SamplingConfig sc{c.arch.mode, c.arch.kind, false, 16};
        auto pts = sample_batch(sc, 0, 8);
        std::erase_if(pts, [](const ParamPoint& p) { return p.tau() < 0.05; });
        std::vector<double> grad(net.num_weights());
        const double loss = batch_loss(net, frozen, pts, cfg, grad).total;
        for (int k = 0; k < 20; ++k) {
            const auto i = static_cast<std::size_t>(uniform(rng, 0.0, net.num_weights() - 1e-9));
            const double w = net.weights()[i];
            const double h = 1e-6 * std::max(1.0, std::abs(w));
            net.weights()[i] = w + h;
            const double up = batch_loss(net, frozen, pts, cfg).total;
            net.weights()[i] = w - h;
            const double dn = batch_loss(net, frozen, pts, cfg).total;
            net.weights()[i] = w;
            const double fd = (up - dn) / (2 * h);
            EXPECT_NEAR(grad[i], fd, 1e-4 * std::max(std::abs(fd), 1e-3 * (1.0 + loss))) << "weight " << i;
        }
    }
}

TEST(BatchLoss, DoesNotMutateThePoints) {
    LossConfig cfg;
    PricingNetwork net(Architecture::vanilla(OptionKind::VanillaPut, CurveMode::Constant, 2, 8));
    net.initialize(1);
    SamplingConfig sc{CurveMode::Constant, OptionKind::VanillaPut, false, 17};
    const auto pts = sample_batch(sc, 0, 16);
    const auto copy = pts;
    batch_loss(net, nullptr, pts, cfg);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        EXPECT_EQ(pts[i].s, copy[i].s);
        EXPECT_EQ(pts[i].t, copy[i].t);
        EXPECT_EQ(pts[i].x1, copy[i].x1);
        EXPECT_EQ(pts[i].x2, copy[i].x2);
    }
}

#include "bergomi/losses.hpp"

#include "bergomi/errors.hpp"

#include <cmath>

namespace bergomi {

double loss_term(const LossTerms& t, std::size_t i) {
    const double v[] = {t.pde, t.initial, t.s_low, t.s_high, t.vol_low, t.vol_high, t.barrier};
    return v[i];
}

double phi_weight(double s) { return std::min(1.0, 4.0 * kStrike * kStrike * std::exp(-2.0 * s)); }

Jet pde_coefficients(const ParamPoint& p) {
    const auto& m = p.params;
    const double var = xi_inst(p.t, p.x1, p.x2, m);
    const double sigma = std::sqrt(var);
    Jet c;
    c.v = -m.r;
    c.d[kVarS] = m.r - m.q - 0.5 * var;
    c.d[kVarT] = 1.0;
    c.d[kVarX1] = -m.k1 * p.x1;
    c.d[kVarX2] = -m.k2 * p.x2;
    c.h[kSS] = 0.5 * var;
    c.h[kX1X1] = 0.5;
    c.h[kX2X2] = 0.5;
    c.h[kSX1] = m.rho1 * sigma;
    c.h[kSX2] = m.rho2 * sigma;
    c.h[kX1X2] = m.rho12;
    return c;
}

double pde_residual(const Jet& v, const ParamPoint& p) {
    if (!(p.tau() > 0.0)) throw DomainError("the PDE residual is defined for t < T only");
    const Jet c = pde_coefficients(p);
    double h = 0.0;
    for (int i = 0; i < kJetWidth; ++i) h += c.component(i) * v.component(i);
    return h;
}

double pde_residual(const PricingNetwork& net, const ParamPoint& p) {
    return pde_residual(net.eval_with_derivs(p).jet, p);
}

double compensated_sum(std::span<const double> xs) {
    double sum = 0.0;
    double comp = 0.0;
    for (double x : xs) {
        const double t = sum + x;
        comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
        sum = t;
    }
    return sum + comp;
}

namespace {

enum Term : int { kPde, kInitial, kSLow, kSHigh, kVolLow, kVolHigh, kBarrier };

double& term_ref(LossTerms& t, int term) {
    double* v[] = {&t.pde, &t.initial, &t.s_low, &t.s_high, &t.vol_low, &t.vol_high, &t.barrier};
    return *v[term];
}

/// A boundary residual: weight * (V(point) - target)^2 charged to sample `owner`.
struct BoundaryTerm {
    ParamPoint point;
    double target;
    double weight;
    int term;
    std::size_t owner;
};

double payoff(OptionKind kind, double s) { return std::max(0.0, eta(kind) * (std::exp(s) - kStrike)); }

void vanilla_boundaries(const ParamPoint& p, std::size_t owner, const LossConfig& cfg, std::vector<BoundaryTerm>& out) {
    const bool call = is_call(p.kind);
    const DomainBounds d = domain_bounds(p);
    const double tau = p.tau();
    const double w_s = call ? phi_weight(p.s) : 1.0;

    ParamPoint at_expiry = p;
    at_expiry.t = p.maturity;
    out.push_back({at_expiry, payoff(p.kind, p.s), w_s, kInitial, owner});

    ParamPoint lo = p;
    lo.s = d.s_min;
    const double lo_target = call ? 0.0 : kStrike * std::exp(-p.params.r * tau) - std::exp(d.s_min - p.params.q * tau);
    out.push_back({lo, lo_target, 1.0, kSLow, owner});

    ParamPoint hi = p;
    hi.s = d.s_max;
    const double hi_target = call ? std::exp(d.s_max - p.params.q * tau) - kStrike * std::exp(-p.params.r * tau) : 0.0;
    out.push_back({hi, hi_target, call ? phi_weight(d.s_max) : 1.0, kSHigh, owner});

    ParamPoint vlo = p;
    vlo.x1 = d.x1_min;
    vlo.x2 = d.x2_min;
    out.push_back({vlo, boundary_estimate(vlo), cfg.lambda1 * w_s, kVolLow, owner});

    ParamPoint vhi = p;
    vhi.x1 = d.x1_max;
    vhi.x2 = d.x2_max;
    out.push_back({vhi, boundary_estimate(vhi), cfg.lambda1 * w_s, kVolHigh, owner});
}

/// Knock-in boundaries; the barrier targets are filled in afterwards from the
/// frozen vanilla network.
void knock_in_boundaries(const ParamPoint& p, std::size_t owner, const LossConfig& cfg, std::vector<BoundaryTerm>& out) {
    const DomainBounds d = domain_bounds(p);
    ParamPoint at_expiry = p;
    at_expiry.t = p.maturity;
    out.push_back({at_expiry, 0.0, cfg.lambda2, kInitial, owner});

    ParamPoint far = p;
    far.s = is_up(p.kind) ? d.s_min : d.s_max;
    out.push_back({far, 0.0, 1.0, is_up(p.kind) ? kSLow : kSHigh, owner});

    ParamPoint at_b = p;
    at_b.s = std::log(p.barrier);
    out.push_back({at_b, 0.0, 1.0, kBarrier, owner});
}

struct Evaluated {
    std::vector<LossTerms> per_sample;
};

/// Shared core of batch_loss and per_sample_losses.
Evaluated evaluate(const PricingNetwork& net, const PricingNetwork* vanilla, std::span<const ParamPoint> points,
                   const LossConfig& cfg, std::span<double> grad) {
    const bool knock_in = net.arch().net == NetKind::Barrier;
    if (knock_in && vanilla == nullptr) throw ConfigError("knock-in losses need the frozen vanilla network");
    if (!knock_in && !is_vanilla(net.arch().kind)) throw UsageError("vanilla loss with a non-vanilla network");
    if (knock_in && (vanilla->arch().net != NetKind::Vanilla || vanilla->arch().kind != vanilla_of(net.arch().kind) ||
                     vanilla->arch().mode != net.arch().mode))
        throw ConfigError("frozen vanilla network does not match the knock-in network");

    const std::size_t n = points.size();
    const bool want_grad = !grad.empty();
    const double inv_n = 1.0 / static_cast<double>(n);
    Evaluated ev;
    ev.per_sample.assign(n, LossTerms{});

    // Interior residuals with full jets.
    PricingNetwork::Cache cache;
    const auto jets = net.forward(points, JetMode::Full, want_grad ? &cache : nullptr);
    std::vector<Jet> jet_bar(want_grad ? n : 0);
    for (std::size_t b = 0; b < n; ++b) {
        const ParamPoint& p = points[b];
        const double w = (!knock_in && is_call(p.kind)) ? phi_weight(p.s) : 1.0;
        const double h = pde_residual(jets[b], p);
        ev.per_sample[b].pde = w * h * h;
        if (want_grad) jet_bar[b] = (2.0 * w * h * inv_n) * pde_coefficients(p);
    }
    if (want_grad) {
        std::fill(grad.begin(), grad.end(), 0.0);
        net.backward(cache, jet_bar, grad);
    }

    // Boundary residuals, values only.
    std::vector<BoundaryTerm> terms;
    terms.reserve(5 * n);
    for (std::size_t b = 0; b < n; ++b) {
        if (knock_in)
            knock_in_boundaries(points[b], b, cfg, terms);
        else
            vanilla_boundaries(points[b], b, cfg, terms);
    }
    std::vector<ParamPoint> bpoints;
    bpoints.reserve(terms.size());
    for (const auto& t : terms) bpoints.push_back(t.point);
    if (knock_in) {
        std::vector<ParamPoint> vpoints;
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < terms.size(); ++i)
            if (terms[i].term == kBarrier) {
                ParamPoint q = terms[i].point;
                q.kind = vanilla_of(q.kind);
                vpoints.push_back(q);
                idx.push_back(i);
            }
        const auto targets = vanilla->price_batch(vpoints);
        for (std::size_t k = 0; k < idx.size(); ++k) terms[idx[k]].target = targets[k];
    }
    PricingNetwork::Cache bcache;
    const auto values = net.forward(bpoints, JetMode::Value, want_grad ? &bcache : nullptr);
    std::vector<Jet> value_bar(want_grad ? terms.size() : 0);
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const auto& t = terms[i];
        const double res = values[i].v - t.target;
        term_ref(ev.per_sample[t.owner], t.term) = t.weight * res * res;
        if (want_grad) value_bar[i].v = 2.0 * t.weight * res * inv_n;
    }
    if (want_grad) net.backward(bcache, value_bar, grad);
    return ev;
}

} // namespace

std::vector<LossTerms> per_sample_losses(const PricingNetwork& net, const PricingNetwork* vanilla,
                                         std::span<const ParamPoint> points, const LossConfig& cfg) {
    return evaluate(net, vanilla, points, cfg, {}).per_sample;
}

BatchLoss batch_loss(const PricingNetwork& net, const PricingNetwork* vanilla, std::span<const ParamPoint> points,
                     const LossConfig& cfg, std::span<double> grad) {
    if (points.empty()) throw UsageError("batch_loss needs at least one point");
    if (!grad.empty() && grad.size() != net.num_weights()) throw UsageError("gradient buffer has the wrong length");
    const Evaluated ev = evaluate(net, vanilla, points, cfg, grad);
    const double inv_n = 1.0 / static_cast<double>(points.size());
    BatchLoss out;
    std::vector<double> col(points.size());
    for (int term = 0; term <= kBarrier; ++term) {
        for (std::size_t b = 0; b < points.size(); ++b) col[b] = loss_term(ev.per_sample[b], static_cast<std::size_t>(term));
        term_ref(out.mean, term) = compensated_sum(col) * inv_n;
    }
    for (std::size_t b = 0; b < points.size(); ++b) col[b] = ev.per_sample[b].total();
    out.total = compensated_sum(col) * inv_n;
    return out;
}

LossTerms loss_vanilla(const PricingNetwork& net, const ParamPoint& p, const LossConfig& cfg) {
    if (!is_vanilla(p.kind)) throw UsageError("loss_vanilla needs a vanilla kind");
    return per_sample_losses(net, nullptr, std::span(&p, 1), cfg)[0];
}

LossTerms loss_knock_in(const PricingNetwork& net, const PricingNetwork& vanilla, const ParamPoint& p,
                        const LossConfig& cfg) {
    if (!is_knock_in(p.kind)) throw UsageError("loss_knock_in needs a knock-in kind");
    return per_sample_losses(net, &vanilla, std::span(&p, 1), cfg)[0];
}

} // namespace bergomi

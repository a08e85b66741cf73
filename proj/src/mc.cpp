#include "bergomi/mc.hpp"

#include "bergomi/analytic.hpp"
#include "bergomi/errors.hpp"
#include "bergomi/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bergomi {

std::string_view to_string(McScheme s) {
    switch (s) {
    case McScheme::Conditional: return "conditional";
    case McScheme::Euler: return "euler";
    case McScheme::ImportanceSampling: return "is";
    }
    return "?";
}

McScheme parse_mc_scheme(std::string_view text) {
    if (text == "conditional") return McScheme::Conditional;
    if (text == "euler") return McScheme::Euler;
    if (text == "is" || text == "importance") return McScheme::ImportanceSampling;
    throw UsageError("unknown Monte Carlo scheme '" + std::string(text) + "'");
}

void McConfig::validate() const {
    if (paths < 2) throw ConfigError("mc.paths must be at least 2");
    if (steps_per_year == 0) throw ConfigError("mc.steps_per_year must be positive");
    if (block == 0) throw ConfigError("mc.block must be positive");
    if (antithetic && (paths % 2 != 0 || block % 2 != 0))
        throw ConfigError("antithetic sampling needs even mc.paths and mc.block");
}

CorrelationCoeffs correlation_coeffs(double rho1, double rho2, double rho12) {
    if (!correlation_admissible(rho1, rho2, rho12))
        throw DomainError("correlation matrix is not positive semidefinite");
    constexpr double tol = 1e-12;
    auto root = [](double x) {
        if (x < -tol) throw DomainError("negative radicand in correlation coefficients");
        return std::sqrt(std::max(x, 0.0));
    };
    CorrelationCoeffs c{};
    c.mu21 = rho12;
    c.mu22 = root(1.0 - rho12 * rho12);
    c.mu31 = rho1;
    if (c.mu22 > 1e-9) {
        c.mu32 = (rho2 - rho1 * rho12) / c.mu22;
    } else {
        if (std::abs(rho2 - rho1 * rho12) > 1e-9)
            throw DomainError("rho12 = +-1 requires rho2 = rho1 rho12");
        c.mu32 = 0.0;
    }
    c.mu33 = root(1.0 - c.mu31 * c.mu31 - c.mu32 * c.mu32);
    return c;
}

std::size_t grid_steps(double tau, std::size_t steps_per_year) {
    const double n = std::ceil(tau * static_cast<double>(steps_per_year) - 1e-9);
    return static_cast<std::size_t>(std::max(1.0, n));
}

namespace {

// Mergeable running mean / variance (Chan et al.).
struct Stats {
    double n = 0.0, mean = 0.0, m2 = 0.0;

    void add(double x) {
        n += 1.0;
        const double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    void merge(const Stats& o) {
        if (o.n == 0.0) return;
        const double total = n + o.n;
        const double d = o.mean - mean;
        mean += d * o.n / total;
        m2 += o.m2 + d * d * n * o.n / total;
        n = total;
    }
    double se() const { return n > 1.0 ? std::sqrt(m2 / (n - 1.0) / n) : 0.0; }
};

struct Grid {
    std::size_t steps;
    double dt, sqrt_dt;
    std::vector<double> xi_bar;  // curve average over each step
    std::vector<double> vol_bar; // its square root
    std::vector<double> var_left; // var(x_u^u) at each left end
    double e1, e2;                // OU decay over one step
    double q1, q2;                // OU noise scale per unit normal / sqrt(dt)
};

Grid make_grid(const ParamPoint& p, std::size_t steps_per_year) {
    const auto& m = p.params;
    Grid g;
    g.steps = grid_steps(p.tau(), steps_per_year);
    g.dt = p.tau() / static_cast<double>(g.steps);
    g.sqrt_dt = std::sqrt(g.dt);
    g.xi_bar.resize(g.steps);
    g.var_left.resize(g.steps);
    g.vol_bar.resize(g.steps);
    for (std::size_t n = 0; n < g.steps; ++n) {
        const double a = p.t + g.dt * static_cast<double>(n);
        const double b = n + 1 == g.steps ? p.maturity : a + g.dt;
        g.xi_bar[n] = m.curve.integral(a, b) / (b - a);
        g.vol_bar[n] = std::sqrt(g.xi_bar[n]);
        g.var_left[n] = var_xtt(a, m.k1, m.k2, m.theta, m.rho12);
    }
    auto ou = [&](double k, double& e, double& q) {
        e = std::exp(-k * g.dt);
        // Exact OU variance over the step, rescaled to a N(0, dt) increment.
        q = std::sqrt(-std::expm1(-2.0 * k * g.dt) / (2.0 * k) / g.dt);
    };
    ou(m.k1, g.e1, g.q1);
    ou(m.k2, g.e2, g.q2);
    return g;
}

struct PathOptions {
    bool monitor = false;  // track barrier crossings
    bool is_shift = false; // flip the Z^3 drift (importance sampling)
};

struct PathOut {
    double s = 0.0;
    double x1 = 0.0, x2 = 0.0;
    double w1 = 0.0, w2 = 0.0;
    double int_xi = 0.0;
    double cond_shift = 0.0; // log-spot shift carried by Z^1, Z^2 (conditional MC)
    double log_weight = 0.0;
    bool touched = false;
};

// One path driven by the stored normals (3 per step), multiplied by `sign`.
PathOut run_path(const ParamPoint& p, const Grid& g, const CorrelationCoeffs& c,
                 const double* z, double sign, const PathOptions& opt, double* xi_out) {
    const auto& m = p.params;
    const double alpha = alpha_theta(m.theta, m.rho12);
    const double drift_rq = m.r - m.q;
    const double lnb = std::log(p.barrier);
    const bool up = opt.monitor && is_up(p.kind);
    const double mu12sq = c.mu31 * c.mu31 + c.mu32 * c.mu32;
    const double mu33sq = c.mu33 * c.mu33;

    PathOut o;
    o.s = p.s;
    o.x1 = p.x1;
    o.x2 = p.x2;
    if (opt.monitor) o.touched = up ? o.s >= lnb : o.s <= lnb;
    for (std::size_t n = 0; n < g.steps; ++n) {
        const double dz1 = sign * z[3 * n] * g.sqrt_dt;
        const double dz2 = sign * z[3 * n + 1] * g.sqrt_dt;
        const double dz3 = sign * z[3 * n + 2] * g.sqrt_dt;

        double xi = g.xi_bar[n];
        double vol = g.vol_bar[n];
        if (m.omega != 0.0) {
            const double x = alpha * ((1.0 - m.theta) * o.x1 + m.theta * o.x2);
            xi *= std::exp(m.omega * x - 0.5 * m.omega * m.omega * g.var_left[n]);
            vol = std::sqrt(xi);
        }
        if (xi_out) xi_out[n] = xi;
        const double dw1 = dz1;
        const double dw2 = c.mu21 * dz1 + c.mu22 * dz2;
        const double common = c.mu31 * dz1 + c.mu32 * dz2;

        double drift = drift_rq - 0.5 * xi;
        if (opt.is_shift) {
            drift = drift_rq - 0.5 * mu12sq * xi + 0.5 * mu33sq * xi;
            o.log_weight -= 0.5 * mu33sq * xi * g.dt + c.mu33 * vol * dz3;
        }
        o.s += drift * g.dt + vol * (common + c.mu33 * dz3);
        o.cond_shift += vol * common - 0.5 * mu12sq * xi * g.dt;
        o.int_xi += xi * g.dt;
        o.x1 = o.x1 * g.e1 + g.q1 * dw1;
        o.x2 = o.x2 * g.e2 + g.q2 * dw2;
        o.w1 += dw1;
        o.w2 += dw2;
        if (opt.monitor && !o.touched) o.touched = up ? o.s >= lnb : o.s <= lnb;
    }
    return o;
}

double payoff(OptionKind kind, double s) {
    const double spot = std::exp(s);
    return is_call(kind) ? std::max(spot - kStrike, 0.0) : std::max(kStrike - spot, 0.0);
}

// Per-path contribution, optionally with a control whose mean is known.
struct Sample {
    double value = 0.0;
    double control = 0.0;
};

// Runs mc.paths paths in blocks. `value` maps a path to a Sample; with
// `control_mean` set, the estimate uses value - c (control - control_mean)
// with c the sample regression coefficient.
template <class F>
McEstimate run(const ParamPoint& p, const McConfig& mc, McScheme scheme, const PathOptions& opt,
               F&& value, const double* control_mean = nullptr) {
    validate(p);
    mc.validate();
    if (!(p.tau() > 0.0)) throw DomainError("Monte Carlo pricing needs t < T");
    const Grid g = make_grid(p, mc.steps_per_year);
    const auto c = correlation_coeffs(p.params.rho1, p.params.rho2, p.params.rho12);

    std::vector<Sample> samples;
    Stats weights;
    samples.reserve(mc.antithetic ? mc.paths / 2 : mc.paths);
    std::vector<double> z(3 * g.steps);
    const std::size_t blocks = (mc.paths + mc.block - 1) / mc.block;
    for (std::size_t b = 0; b < blocks; ++b) {
        Rng rng = make_rng(mc.seed, b, 0x3c);
        const std::size_t count = std::min(mc.block, mc.paths - b * mc.block);
        Stats bw;
        const std::size_t draws = mc.antithetic ? count / 2 : count;
        for (std::size_t i = 0; i < draws; ++i) {
            for (double& zi : z) zi = std_normal(rng);
            const auto a = run_path(p, g, c, z.data(), 1.0, opt, nullptr);
            const Sample sa = value(a);
            if (mc.antithetic) {
                const auto b2 = run_path(p, g, c, z.data(), -1.0, opt, nullptr);
                const Sample sb = value(b2);
                samples.push_back({0.5 * (sa.value + sb.value), 0.5 * (sa.control + sb.control)});
                bw.add(0.5 * (std::exp(a.log_weight) + std::exp(b2.log_weight)));
            } else {
                samples.push_back(sa);
                bw.add(std::exp(a.log_weight));
            }
        }
        weights.merge(bw);
    }

    double coef = 0.0;
    if (control_mean) {
        Stats sv, sc;
        for (const auto& x : samples) {
            sv.add(x.value);
            sc.add(x.control);
        }
        double cov = 0.0;
        for (const auto& x : samples) cov += (x.value - sv.mean) * (x.control - sc.mean);
        coef = sc.m2 > 0.0 ? cov / sc.m2 : 0.0;
    }
    Stats total;
    for (const auto& x : samples)
        total.add(control_mean ? x.value - coef * (x.control - *control_mean) : x.value);

    McEstimate e;
    e.mean = total.mean;
    e.se = total.se();
    e.paths = mc.paths;
    e.steps = g.steps;
    e.scheme = scheme;
    e.weight_mean = weights.mean;
    e.weight_se = weights.se();
    return e;
}

} // namespace

PathBundle simulate_paths(const ParamPoint& p, const McConfig& mc) {
    validate(p);
    mc.validate();
    if (!(p.tau() > 0.0)) throw DomainError("path simulation needs t < T");
    const Grid g = make_grid(p, mc.steps_per_year);
    const auto c = correlation_coeffs(p.params.rho1, p.params.rho2, p.params.rho12);
    PathBundle out;
    out.steps = g.steps;
    out.xi_first_path.resize(g.steps);
    std::vector<double> z(3 * g.steps);
    const std::size_t blocks = (mc.paths + mc.block - 1) / mc.block;
    for (std::size_t b = 0; b < blocks; ++b) {
        Rng rng = make_rng(mc.seed, b, 0x3c);
        const std::size_t count = std::min(mc.block, mc.paths - b * mc.block);
        for (std::size_t i = 0; i < count; ++i) {
            for (double& zi : z) zi = std_normal(rng);
            double* xi_out = out.s.empty() ? out.xi_first_path.data() : nullptr;
            const auto o = run_path(p, g, c, z.data(), 1.0, PathOptions{}, xi_out);
            out.s.push_back(o.s);
            out.x1.push_back(o.x1);
            out.x2.push_back(o.x2);
            out.w1.push_back(o.w1);
            out.w2.push_back(o.w2);
            out.int_xi.push_back(o.int_xi);
        }
    }
    return out;
}

McEstimate price_vanilla_conditional(const ParamPoint& p, const McConfig& mc) {
    if (!is_vanilla(p.kind)) throw UsageError("conditional Monte Carlo prices vanillas only");
    const auto c = correlation_coeffs(p.params.rho1, p.params.rho2, p.params.rho12);
    const double tau = p.tau();
    const double fwd_disc = std::exp(-p.params.q * tau);
    // E[exp(cond_shift)] = 1 exactly on the grid: each step is a conditionally
    // lognormal martingale increment.
    const double control_mean = std::exp(p.s) * fwd_disc;
    return run(
        p, mc, McScheme::Conditional, PathOptions{},
        [&](const PathOut& o) {
            BsInputs in;
            in.s = p.s + o.cond_shift;
            in.tau = tau;
            in.sigma = std::sqrt(c.mu33 * c.mu33 * o.int_xi / tau);
            in.r = p.params.r;
            in.q = p.params.q;
            in.kind = p.kind;
            return Sample{bs_vanilla(in), std::exp(in.s) * fwd_disc};
        },
        mc.control_variate ? &control_mean : nullptr);
}

McEstimate price_vanilla_euler(const ParamPoint& p, const McConfig& mc) {
    if (!is_vanilla(p.kind)) throw UsageError("price_vanilla_euler prices vanillas only");
    const double disc = std::exp(-p.params.r * p.tau());
    return run(p, mc, McScheme::Euler, PathOptions{},
               [&](const PathOut& o) { return Sample{disc * payoff(p.kind, o.s)}; });
}

McEstimate price_barrier_euler(const ParamPoint& p, const McConfig& mc) {
    if (!is_barrier(p.kind)) throw UsageError("price_barrier_euler prices barrier options only");
    const double disc = std::exp(-p.params.r * p.tau());
    const bool in = is_knock_in(p.kind);
    PathOptions opt;
    opt.monitor = true;
    return run(p, mc, McScheme::Euler, opt, [&](const PathOut& o) {
        return Sample{o.touched == in ? disc * payoff(p.kind, o.s) : 0.0};
    });
}

McEstimate price_barrier_put_euler(const ParamPoint& p, const McConfig& mc) {
    if (!is_barrier(p.kind) || is_call(p.kind))
        throw UsageError("price_barrier_put_euler prices barrier puts only");
    return price_barrier_euler(p, mc);
}

McEstimate price_barrier_call_is(const ParamPoint& p, const McConfig& mc) {
    if (!is_barrier(p.kind) || !is_call(p.kind))
        throw UsageError("price_barrier_call_is prices barrier calls only");
    const double disc = std::exp(-p.params.r * p.tau());
    const bool in = is_knock_in(p.kind);
    PathOptions opt;
    opt.monitor = true;
    opt.is_shift = true;
    return run(p, mc, McScheme::ImportanceSampling, opt, [&](const PathOut& o) {
        return Sample{o.touched == in ? disc * payoff(p.kind, o.s) * std::exp(o.log_weight) : 0.0};
    });
}

McEstimate benchmark_price(const ParamPoint& p, const McConfig& mc) {
    if (is_vanilla(p.kind)) return price_vanilla_conditional(p, mc);
    if (is_call(p.kind)) return price_barrier_call_is(p, mc);
    return price_barrier_euler(p, mc);
}

} // namespace bergomi

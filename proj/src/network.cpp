#include "bergomi/network.hpp"

#include "bergomi/errors.hpp"
#include "bergomi/singular.hpp"
#include "bergomi/tape.hpp"

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include <cmath>
#include <sstream>

namespace bergomi {

Architecture Architecture::vanilla(OptionKind kind, CurveMode mode, int depth, int width) {
    if (!is_vanilla(kind)) throw UsageError("vanilla architecture needs a vanilla kind");
    Architecture a;
    a.net = NetKind::Vanilla;
    a.kind = kind;
    a.mode = mode;
    a.depth = depth;
    a.width = width;
    return a;
}

Architecture Architecture::barrier(OptionKind kind, CurveMode mode, int depth1, int depth2, int width) {
    if (!is_knock_in(kind)) throw UsageError("barrier networks are trained for knock-in kinds only");
    Architecture a;
    a.net = NetKind::Barrier;
    a.kind = kind;
    a.mode = mode;
    a.depth1 = depth1;
    a.depth2 = depth2;
    a.width = width;
    return a;
}

std::string describe(const Architecture& a) {
    std::ostringstream os;
    os << (a.net == NetKind::Vanilla ? "vanilla" : "barrier") << " kind=" << to_string(a.kind)
       << " curve=" << to_string(a.mode) << " act=" << to_string(a.activation);
    if (a.net == NetKind::Vanilla)
        os << " L=" << a.depth;
    else
        os << " L1=" << a.depth1 << " L2=" << a.depth2;
    os << " n=" << a.width << " n0=" << a.input_dim();
    return os.str();
}

SingularContext singular_context(const ParamPoint& p) {
    SingularContext c;
    c.s = Jet::variable(p.s, kVarS);
    const double tau = p.tau();
    c.tau = Jet::constant(tau);
    c.tau.d[kVarT] = -1.0;
    if (tau > 0.0) {
        c.sigbar = Jet::constant(avg_sigma(p.t, p.maturity, p.params.curve));
        c.sigbar.d[kVarT] = avg_sigma_dt(p.t, p.maturity, p.params.curve);
    } else {
        c.sigbar = Jet::constant(std::sqrt(p.params.curve.value_at(p.maturity)));
    }
    c.barrier = p.barrier;
    c.r = p.params.r;
    c.q = p.params.q;
    c.kind = p.kind;
    return c;
}

// ---------------------------------------------------------------------------
// Activations on jet matrices

namespace {

constexpr int kDBlock = 1;                // first-partial blocks start here
constexpr int kHBlock = 1 + kNumFirst;    // second-partial blocks start here

} // namespace

namespace {

/// Activation value and derivatives up to `order`, elementwise.
struct ActArrays {
    Eigen::ArrayXXd g, g1, g2, g3;
};

ActArrays act_arrays(Activation act, const Eigen::ArrayXXd& z, int order) {
    ActArrays a;
    // Sigmoid written as 1 / (1 + e^{-z}); e^{-z} may overflow to inf, which
    // correctly yields 0.
    const Eigen::ArrayXXd sig = 1.0 / (1.0 + (-z).exp());
    const Eigen::ArrayXXd s1 = sig * (1.0 - sig);
    switch (act) {
    case Activation::Sigmoid:
        a.g = sig;
        if (order >= 1) a.g1 = s1;
        if (order >= 2) a.g2 = s1 * (1.0 - 2.0 * sig);
        if (order >= 3) a.g3 = s1 * (1.0 - 6.0 * sig + 6.0 * sig.square());
        break;
    case Activation::SiLU: {
        a.g = z * sig;
        if (order >= 1) a.g1 = sig + z * s1;
        const Eigen::ArrayXXd s2 = s1 * (1.0 - 2.0 * sig);
        if (order >= 2) a.g2 = 2.0 * s1 + z * s2;
        if (order >= 3) a.g3 = 3.0 * s2 + z * s1 * (1.0 - 6.0 * sig + 6.0 * sig.square());
        break;
    }
    case Activation::Softplus:
        a.g = z.max(0.0) + (-z.abs()).exp().log1p();
        if (order >= 1) a.g1 = sig;
        if (order >= 2) a.g2 = s1;
        if (order >= 3) a.g3 = s1 * (1.0 - 2.0 * sig);
        break;
    }
    return a;
}

} // namespace

Eigen::MatrixXd activation_forward(Activation act, const Eigen::MatrixXd& z, int comps, int batch) {
    Eigen::MatrixXd y(z.rows(), z.cols());
    if (comps == 1) {
        y.array() = act_arrays(act, z.array(), 0).g;
        return y;
    }
    const ActArrays a = act_arrays(act, z.leftCols(batch).array(), 2);
    auto blk = [&](const Eigen::MatrixXd& m, int c) { return m.middleCols(Eigen::Index(c) * batch, batch).array(); };
    y.leftCols(batch).array() = a.g;
    for (int k = 0; k < kNumFirst; ++k)
        y.middleCols(Eigen::Index(kDBlock + k) * batch, batch).array() = a.g1 * blk(z, kDBlock + k);
    for (int p = 0; p < kNumSecond; ++p) {
        const auto [i, j] = kSecondPairs[static_cast<std::size_t>(p)];
        y.middleCols(Eigen::Index(kHBlock + p) * batch, batch).array() =
            a.g1 * blk(z, kHBlock + p) + a.g2 * blk(z, kDBlock + i) * blk(z, kDBlock + j);
    }
    return y;
}

Eigen::MatrixXd activation_backward(Activation act, const Eigen::MatrixXd& z, const Eigen::MatrixXd& y_bar, int comps,
                                    int batch) {
    Eigen::MatrixXd z_bar(z.rows(), z.cols());
    if (comps == 1) {
        z_bar.array() = y_bar.array() * act_arrays(act, z.array(), 1).g1;
        return z_bar;
    }
    const ActArrays a = act_arrays(act, z.leftCols(batch).array(), 3);
    const Eigen::ArrayXXd &g1 = a.g1, &g2 = a.g2, &g3 = a.g3;
    auto zb = [&](int c) { return z.middleCols(Eigen::Index(c) * batch, batch).array(); };
    auto yb = [&](int c) { return y_bar.middleCols(Eigen::Index(c) * batch, batch).array(); };
    auto out = [&](int c) { return z_bar.middleCols(Eigen::Index(c) * batch, batch).array(); };

    Eigen::ArrayXXd v_acc = yb(0) * g1;
    std::array<Eigen::ArrayXXd, kNumFirst> d_acc;
    for (int k = 0; k < kNumFirst; ++k) {
        d_acc[static_cast<std::size_t>(k)] = yb(kDBlock + k) * g1;
        v_acc += g2 * yb(kDBlock + k) * zb(kDBlock + k);
    }
    for (int p = 0; p < kNumSecond; ++p) {
        const auto [i, j] = kSecondPairs[static_cast<std::size_t>(p)];
        const auto yh = yb(kHBlock + p);
        out(kHBlock + p) = yh * g1;
        d_acc[static_cast<std::size_t>(i)] += g2 * yh * zb(kDBlock + j);
        d_acc[static_cast<std::size_t>(j)] += g2 * yh * zb(kDBlock + i);
        v_acc += yh * (g3 * zb(kDBlock + i) * zb(kDBlock + j) + g2 * zb(kHBlock + p));
    }
    out(0) = v_acc;
    for (int k = 0; k < kNumFirst; ++k) out(kDBlock + k) = d_acc[static_cast<std::size_t>(k)];
    return z_bar;
}

// ---------------------------------------------------------------------------
// Layout

PricingNetwork::PricingNetwork(Architecture arch) : arch_(arch), encoding_(InputEncoding::standard(arch.mode)) {
    build_layout();
    weights_.assign(tensors_.empty() ? 0 : tensors_.back().offset + tensors_.back().size(), 0.0);
}

PricingNetwork::PricingNetwork(Architecture arch, InputEncoding encoding, std::vector<double> weights)
    : arch_(arch), encoding_(std::move(encoding)) {
    build_layout();
    if (encoding_.dim() != arch_.input_dim() || encoding_.mode != arch_.mode)
        throw ConfigError("input encoding does not match the architecture");
    const std::size_t n = tensors_.back().offset + tensors_.back().size();
    if (weights.size() != n) throw ConfigError("weight vector length does not match the architecture");
    weights_ = std::move(weights);
}

std::size_t PricingNetwork::add_tensor(const std::string& name, int rows, int cols) {
    const std::size_t offset = tensors_.empty() ? 0 : tensors_.back().offset + tensors_.back().size();
    tensors_.push_back({name, rows, cols, offset});
    return tensors_.size() - 1;
}

void PricingNetwork::build_layout() {
    const int n = arch_.width;
    const int n0 = arch_.input_dim();
    if (n < 1) throw ConfigError("network width must be positive");
    if (arch_.net == NetKind::Vanilla) {
        if (!is_vanilla(arch_.kind)) throw ConfigError("vanilla network with a barrier kind");
        if (arch_.depth < 1) throw ConfigError("vanilla depth must be at least 1");
        for (int j = 0; j < arch_.depth; ++j) {
            w_hidden_.push_back(add_tensor("W" + std::to_string(j), n, j == 0 ? n0 : n));
            b_hidden_.push_back(add_tensor("b" + std::to_string(j), n, 1));
        }
        w_beta_ = add_tensor("W_beta", 1, n);
        b_beta_ = add_tensor("b_beta", 1, 1);
        w_gamma_ = add_tensor("W_gamma", 1, n);
        b_gamma_ = add_tensor("b_gamma", 1, 1);
        for (int j = 0; j <= arch_.depth; ++j)
            w_skip_.push_back(add_tensor("W" + std::to_string(j) + "V", 1, j == 0 ? n0 : n));
        b_out_ = add_tensor("b_V", 1, 1);
    } else {
        if (!is_knock_in(arch_.kind)) throw ConfigError("barrier network needs a knock-in kind");
        if (arch_.depth1 < 1 || arch_.depth2 < 1) throw ConfigError("barrier depths must be at least 1");
        const int total = arch_.depth1 + arch_.depth2;
        for (int j = 0; j < total; ++j) {
            const int cols = j == 0 ? n0 : (j == arch_.depth1 ? n + 1 : n);
            w_hidden_.push_back(add_tensor("W" + std::to_string(j), n, cols));
            b_hidden_.push_back(add_tensor("b" + std::to_string(j), n, 1));
        }
        w_beta_ = add_tensor("W_beta", 1, n);
        b_beta_ = add_tensor("b_beta", 1, 1);
        w_gamma_ = add_tensor("W_gamma", 1, n);
        b_gamma_ = add_tensor("b_gamma", 1, 1);
        w_out_ = add_tensor("W" + std::to_string(total), 1, n);
        b_out_ = add_tensor("b" + std::to_string(total), 1, 1);
    }
}

const TensorSpec& PricingNetwork::tensor(const std::string& name) const {
    for (const auto& t : tensors_)
        if (t.name == name) return t;
    throw UsageError("no tensor named " + name);
}

PricingNetwork::RowMap PricingNetwork::mat(std::size_t idx) const {
    const auto& t = tensors_[idx];
    return RowMap(weights_.data() + t.offset, t.rows, t.cols);
}

PricingNetwork::MutRowMap PricingNetwork::mat(std::span<double> buf, std::size_t idx) const {
    const auto& t = tensors_[idx];
    return MutRowMap(buf.data() + t.offset, t.rows, t.cols);
}

void PricingNetwork::initialize(std::uint64_t seed) {
    boost::random::mt19937_64 rng(seed);
    auto fill = [&](std::size_t idx, double bound) {
        const auto& t = tensors_[idx];
        if (bound <= 0.0) {
            std::fill_n(weights_.begin() + static_cast<std::ptrdiff_t>(t.offset), t.size(), 0.0);
            return;
        }
        boost::random::uniform_real_distribution<double> u(-bound, bound);
        for (std::size_t i = 0; i < t.size(); ++i) weights_[t.offset + i] = u(rng);
    };
    // Uniform with variance gain^2 / fan_in; 1.676 keeps SiLU activations at unit scale.
    const double gain = arch_.activation == Activation::SiLU ? 1.676 : 1.0;
    auto hidden_bound = [&](int fan_in) { return gain * std::sqrt(3.0 / fan_in); };
    for (std::size_t j = 0; j < w_hidden_.size(); ++j) {
        fill(w_hidden_[j], hidden_bound(tensors_[w_hidden_[j]].cols));
        fill(b_hidden_[j], 0.0);
    }
    const int n = arch_.width;
    const double head = 0.1 * std::sqrt(3.0 / n);
    fill(w_beta_, head);
    fill(b_beta_, 0.0);
    fill(w_gamma_, head);
    weights_[tensors_[b_gamma_].offset] = softplus_inverse(1.0);
    if (arch_.net == NetKind::Vanilla) {
        for (auto idx : w_skip_) fill(idx, 0.1 * std::sqrt(3.0 / tensors_[idx].cols));
    } else {
        fill(w_out_, std::sqrt(3.0 / n));
    }
    fill(b_out_, 0.0);
}

void PricingNetwork::check_point(const ParamPoint& p) const {
    if (arch_.net == NetKind::Vanilla) {
        if (p.kind != arch_.kind)
            throw UsageError("point kind " + std::string(to_string(p.kind)) + " does not match vanilla network for " +
                             std::string(to_string(arch_.kind)));
    } else {
        if (is_knock_out(p.kind))
            throw UsageError("knock-out prices come from vanilla minus knock-in, not from a network");
        if (p.kind != arch_.kind)
            throw UsageError("point kind " + std::string(to_string(p.kind)) + " does not match barrier network for " +
                             std::string(to_string(arch_.kind)));
    }
    if (p.params.curve.segments() != static_cast<std::size_t>(curve_segments(arch_.mode)))
        throw UsageError("point curve layout does not match the network curve mode");
    if (!(p.t <= p.maturity)) throw DomainError("evaluation needs t <= T");
}

// ---------------------------------------------------------------------------
// Forward / backward

Eigen::MatrixXd PricingNetwork::input_jets(std::span<const ParamPoint> points, int comps) const {
    const int batch = static_cast<int>(points.size());
    const int n0 = arch_.input_dim();
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n0, Eigen::Index(comps) * batch);
    for (int b = 0; b < batch; ++b) {
        ParamPoint p = points[static_cast<std::size_t>(b)];
        if (arch_.net == NetKind::Vanilla) p.barrier = kStrike; // the vanilla price does not see B
        const auto z = encoding_.standardize(encode_raw(p, arch_.mode));
        for (int i = 0; i < n0; ++i) x(i, b) = z[static_cast<std::size_t>(i)];
        if (comps > 1) {
            x(kEncS, Eigen::Index(kDBlock + kVarS) * batch + b) = 1.0 / encoding_.half_width[kEncS];
            x(kEncT, Eigen::Index(kDBlock + kVarT) * batch + b) = 1.0 / encoding_.half_width[kEncT];
            x(kEncX1, Eigen::Index(kDBlock + kVarX1) * batch + b) = 1.0 / encoding_.half_width[kEncX1];
            x(kEncX2, Eigen::Index(kDBlock + kVarX2) * batch + b) = 1.0 / encoding_.half_width[kEncX2];
        }
    }
    return x;
}

Eigen::MatrixXd PricingNetwork::dense(std::size_t w, std::size_t b, const Eigen::MatrixXd& x, int batch) const {
    Eigen::MatrixXd z = mat(w) * x;
    const auto bias = mat(b);
    z.leftCols(batch).colwise() += Eigen::VectorXd(bias.col(0));
    return z;
}

void PricingNetwork::dense_backward(std::size_t w, std::size_t b, const Eigen::MatrixXd& x, const Eigen::MatrixXd& z_bar,
                                    int batch, std::span<double> grad) const {
    mat(grad, w).noalias() += z_bar * x.transpose();
    mat(grad, b).col(0) += z_bar.leftCols(batch).rowwise().sum();
}

namespace {

Jet column_jet(const Eigen::MatrixXd& m, Eigen::Index row, int b, int batch, int comps) {
    Jet j;
    for (int c = 0; c < comps; ++c) j.component(c) = m(row, Eigen::Index(c) * batch + b);
    return j;
}

struct SingularTape {
    Tape tape;
    Var beta;
    Var gamma_pre;
    Var out;

    void run(const SingularContext& c, const Jet& beta_jet, const Jet& gamma_jet, NetKind net) {
        tape.clear();
        beta = tape.input(beta_jet);
        gamma_pre = tape.input(gamma_jet);
        SingularArgs<Var> a{tape.input(c.s), tape.input(c.tau), tape.input(c.sigbar), beta, softplus(gamma_pre)};
        a.strike = kStrike;
        a.barrier = c.barrier;
        a.r = c.r;
        a.q = c.q;
        a.kind = c.kind;
        out = net == NetKind::Vanilla ? singular_vanilla(a) : singular_barrier(a);
    }
};

} // namespace

Eigen::MatrixXd PricingNetwork::apply_singular(const Eigen::MatrixXd& head, const std::vector<SingularContext>& ctx,
                                               int comps) const {
    const int batch = static_cast<int>(ctx.size());
    Eigen::MatrixXd out(1, Eigen::Index(comps) * batch);
    SingularTape st;
    for (int b = 0; b < batch; ++b) {
        st.run(ctx[static_cast<std::size_t>(b)], column_jet(head, 0, b, batch, comps), column_jet(head, 1, b, batch, comps),
               arch_.net);
        const Jet& y = st.out.jet();
        for (int c = 0; c < comps; ++c) out(0, Eigen::Index(c) * batch + b) = y.component(c);
    }
    return out;
}

Eigen::MatrixXd PricingNetwork::singular_backward(const Eigen::MatrixXd& head, const std::vector<SingularContext>& ctx,
                                                  const Eigen::MatrixXd& out_bar, int comps) const {
    const int batch = static_cast<int>(ctx.size());
    Eigen::MatrixXd head_bar = Eigen::MatrixXd::Zero(2, head.cols());
    SingularTape st;
    for (int b = 0; b < batch; ++b) {
        const Jet seed = column_jet(out_bar, 0, b, batch, comps);
        st.run(ctx[static_cast<std::size_t>(b)], column_jet(head, 0, b, batch, comps), column_jet(head, 1, b, batch, comps),
               arch_.net);
        const auto adj = st.tape.backward(st.out, seed);
        const Jet& bb = adj[static_cast<std::size_t>(st.beta.index())];
        const Jet& gb = adj[static_cast<std::size_t>(st.gamma_pre.index())];
        for (int c = 0; c < comps; ++c) {
            head_bar(0, Eigen::Index(c) * batch + b) = bb.component(c);
            head_bar(1, Eigen::Index(c) * batch + b) = gb.component(c);
        }
    }
    return head_bar;
}

std::vector<Jet> PricingNetwork::forward(std::span<const ParamPoint> points, JetMode mode, Cache* cache) const {
    const int batch = static_cast<int>(points.size());
    const int comps = mode == JetMode::Full ? kJetWidth : 1;
    std::vector<SingularContext> ctx;
    ctx.reserve(points.size());
    for (const auto& p : points) {
        check_point(p);
        ctx.push_back(singular_context(p));
    }
    if (cache) {
        cache->mode = mode;
        cache->batch = batch;
        cache->layer_in.clear();
        cache->pre_act.clear();
    }

    Eigen::MatrixXd x = input_jets(points, comps);
    Eigen::MatrixXd out_row;
    auto hidden = [&](std::size_t j, Eigen::MatrixXd in) {
        Eigen::MatrixXd z = dense(w_hidden_[j], b_hidden_[j], in, batch);
        Eigen::MatrixXd y = activation_forward(arch_.activation, z, comps, batch);
        if (cache) {
            cache->layer_in.push_back(std::move(in));
            cache->pre_act.push_back(std::move(z));
        }
        return y;
    };
    auto heads = [&](const Eigen::MatrixXd& xl) {
        Eigen::MatrixXd head(2, xl.cols());
        head.row(0) = mat(w_beta_) * xl;
        head.row(1) = mat(w_gamma_) * xl;
        head.row(0).leftCols(batch).array() += weights_[tensors_[b_beta_].offset];
        head.row(1).leftCols(batch).array() += weights_[tensors_[b_gamma_].offset];
        return head;
    };

    if (arch_.net == NetKind::Vanilla) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(1, x.cols());
        for (int j = 0; j < arch_.depth; ++j) {
            m.noalias() += mat(w_skip_[static_cast<std::size_t>(j)]) * x;
            x = hidden(static_cast<std::size_t>(j), std::move(x));
        }
        m.noalias() += mat(w_skip_.back()) * x;
        m.leftCols(batch).array() += weights_[tensors_[b_out_].offset];
        Eigen::MatrixXd head = heads(x);
        out_row = m + apply_singular(head, ctx, comps);
        if (cache) {
            cache->layer_in.push_back(std::move(x)); // x^(L), read by the heads and the skip read-out
            cache->head = std::move(head);
        }
    } else {
        for (int j = 0; j < arch_.depth1; ++j) x = hidden(static_cast<std::size_t>(j), std::move(x));
        Eigen::MatrixXd head = heads(x);
        const Eigen::MatrixXd alpha = apply_singular(head, ctx, comps);
        Eigen::MatrixXd cat(x.rows() + 1, x.cols());
        cat.topRows(x.rows()) = x;
        cat.bottomRows(1) = alpha;
        x = std::move(cat);
        const int total = arch_.depth1 + arch_.depth2;
        for (int j = arch_.depth1; j < total; ++j) x = hidden(static_cast<std::size_t>(j), std::move(x));
        out_row = mat(w_out_) * x;
        out_row.leftCols(batch).array() += weights_[tensors_[b_out_].offset];
        if (cache) {
            cache->layer_in.push_back(std::move(x)); // x^(L1+L2), read by the output layer
            cache->head = std::move(head);
        }
    }
    if (cache) cache->contexts = std::move(ctx);

    std::vector<Jet> out(points.size());
    for (int b = 0; b < batch; ++b) out[static_cast<std::size_t>(b)] = column_jet(out_row, 0, b, batch, comps);
    return out;
}

void PricingNetwork::backward(const Cache& cache, std::span<const Jet> out_bar, std::span<double> grad) const {
    const int batch = cache.batch;
    const int comps = cache.mode == JetMode::Full ? kJetWidth : 1;
    if (static_cast<int>(out_bar.size()) != batch) throw UsageError("backward: adjoint count does not match batch");
    if (grad.size() != weights_.size()) throw UsageError("backward: gradient buffer has the wrong length");

    Eigen::MatrixXd v_bar(1, Eigen::Index(comps) * batch);
    for (int b = 0; b < batch; ++b)
        for (int c = 0; c < comps; ++c) v_bar(0, Eigen::Index(c) * batch + b) = out_bar[static_cast<std::size_t>(b)].component(c);

    auto head_backward = [&](const Eigen::MatrixXd& alpha_bar, const Eigen::MatrixXd& xl) -> Eigen::MatrixXd {
        const Eigen::MatrixXd hb = singular_backward(cache.head, cache.contexts, alpha_bar, comps);
        mat(grad, w_beta_).noalias() += hb.row(0) * xl.transpose();
        mat(grad, w_gamma_).noalias() += hb.row(1) * xl.transpose();
        grad[tensors_[b_beta_].offset] += hb.row(0).leftCols(batch).sum();
        grad[tensors_[b_gamma_].offset] += hb.row(1).leftCols(batch).sum();
        return mat(w_beta_).transpose() * hb.row(0) + mat(w_gamma_).transpose() * hb.row(1);
    };

    if (arch_.net == NetKind::Vanilla) {
        const int depth = arch_.depth;
        const Eigen::MatrixXd& xl = cache.layer_in.back();
        grad[tensors_[b_out_].offset] += v_bar.leftCols(batch).sum();
        Eigen::MatrixXd x_bar = head_backward(v_bar, xl);
        for (int j = depth; j >= 0; --j) {
            const Eigen::MatrixXd& xj = cache.layer_in[static_cast<std::size_t>(j)];
            mat(grad, w_skip_[static_cast<std::size_t>(j)]).noalias() += v_bar * xj.transpose();
            if (j == 0) break;
            x_bar.noalias() += mat(w_skip_[static_cast<std::size_t>(j)]).transpose() * v_bar;
            const std::size_t layer = static_cast<std::size_t>(j - 1);
            const Eigen::MatrixXd z_bar =
                activation_backward(arch_.activation, cache.pre_act[layer], x_bar, comps, batch);
            dense_backward(w_hidden_[layer], b_hidden_[layer], cache.layer_in[layer], z_bar, batch, grad);
            if (j > 1) x_bar = mat(w_hidden_[layer]).transpose() * z_bar;
        }
    } else {
        const int total = arch_.depth1 + arch_.depth2;
        const Eigen::MatrixXd& xl = cache.layer_in.back();
        mat(grad, w_out_).noalias() += v_bar * xl.transpose();
        grad[tensors_[b_out_].offset] += v_bar.leftCols(batch).sum();
        Eigen::MatrixXd x_bar = mat(w_out_).transpose() * v_bar;
        for (int j = total - 1; j >= 0; --j) {
            const std::size_t layer = static_cast<std::size_t>(j);
            const Eigen::MatrixXd z_bar =
                activation_backward(arch_.activation, cache.pre_act[layer], x_bar, comps, batch);
            dense_backward(w_hidden_[layer], b_hidden_[layer], cache.layer_in[layer], z_bar, batch, grad);
            if (j == 0) break;
            x_bar = mat(w_hidden_[layer]).transpose() * z_bar;
            if (j == arch_.depth1) {
                // Split the concatenated input: the last row is the singular feature.
                const Eigen::MatrixXd alpha_bar = x_bar.bottomRows(1);
                Eigen::MatrixXd top = x_bar.topRows(x_bar.rows() - 1);
                top += head_backward(alpha_bar, cache.layer_in[layer].topRows(x_bar.rows() - 1));
                x_bar = std::move(top);
            }
        }
    }
}

double PricingNetwork::price(const ParamPoint& p) const { return forward(std::span(&p, 1), JetMode::Value)[0].v; }

std::vector<double> PricingNetwork::price_batch(std::span<const ParamPoint> points) const {
    std::vector<double> out;
    out.reserve(points.size());
    constexpr std::size_t kChunk = 4096;
    for (std::size_t i = 0; i < points.size(); i += kChunk) {
        const auto part = points.subspan(i, std::min(kChunk, points.size() - i));
        for (const Jet& j : forward(part, JetMode::Value)) out.push_back(j.v);
    }
    return out;
}

DerivBundle PricingNetwork::eval_with_derivs(const ParamPoint& p, bool weight_grad) const {
    Cache cache;
    DerivBundle out;
    out.jet = forward(std::span(&p, 1), JetMode::Full, weight_grad ? &cache : nullptr)[0];
    if (weight_grad) {
        out.weight_grad.assign(weights_.size(), 0.0);
        const Jet seed = Jet::constant(1.0);
        backward(cache, std::span(&seed, 1), out.weight_grad);
    }
    return out;
}

double PricingNetwork::singular_value(const ParamPoint& p) const {
    check_point(p);
    std::vector<SingularContext> ctx = {singular_context(p)};
    Eigen::MatrixXd x = input_jets(std::span(&p, 1), 1);
    const int upto = arch_.net == NetKind::Vanilla ? arch_.depth : arch_.depth1;
    for (int j = 0; j < upto; ++j)
        x = activation_forward(arch_.activation, dense(w_hidden_[static_cast<std::size_t>(j)], b_hidden_[static_cast<std::size_t>(j)], x, 1), 1, 1);
    Eigen::MatrixXd head(2, 1);
    head(0, 0) = (mat(w_beta_) * x)(0, 0) + weights_[tensors_[b_beta_].offset];
    head(1, 0) = (mat(w_gamma_) * x)(0, 0) + weights_[tensors_[b_gamma_].offset];
    return apply_singular(head, ctx, 1)(0, 0);
}

} // namespace bergomi

#pragma once

// The two pricing architectures.
//
// Vanilla: an L-layer MLP; beta and gamma heads read the last hidden layer and
// drive the singular term alpha_v; a skip-connected linear read-out m of every
// layer (input included) is added to it.
//
// Barrier (knock-in): L1 layers, beta/gamma heads, the singular value F1 or F2
// appended as an extra feature, L2 more layers and a linear output.
//
// Evaluation is batched. Every activation is carried as a second-order jet in
// (s, t, x1, x2) stored as an Eigen matrix of shape (features, comps * batch)
// with component-major column blocks; comps is 11 for full jets and 1 when only
// values are needed. backward() maps adjoints of the output jets to the weight
// gradient.

#include "bergomi/activations.hpp"
#include "bergomi/encoding.hpp"
#include "bergomi/jet.hpp"
#include "bergomi/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bergomi {

enum class NetKind { Vanilla, Barrier };

struct Architecture {
    NetKind net = NetKind::Vanilla;
    OptionKind kind = OptionKind::VanillaCall;
    CurveMode mode = CurveMode::Constant;
    Activation activation = Activation::SiLU;
    int depth = 5;  ///< L, vanilla only
    int depth1 = 3; ///< L1, barrier only
    int depth2 = 2; ///< L2, barrier only
    int width = 64;

    int input_dim() const { return bergomi::input_dim(mode); }
    bool operator==(const Architecture&) const = default;

    static Architecture vanilla(OptionKind kind, CurveMode mode, int depth, int width);
    static Architecture barrier(OptionKind kind, CurveMode mode, int depth1, int depth2, int width);
};

std::string describe(const Architecture& a);

/// A named block of the flat weight vector, stored row-major.
struct TensorSpec {
    std::string name;
    int rows;
    int cols;
    std::size_t offset;

    std::size_t size() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
};

enum class JetMode { Full, Value };

/// Per-point quantities the singular term needs, as jets in (s, t, x1, x2).
struct SingularContext {
    Jet s;
    Jet tau;
    Jet sigbar;
    double barrier;
    double r;
    double q;
    OptionKind kind;
};

SingularContext singular_context(const ParamPoint& p);

class PricingNetwork {
public:
    explicit PricingNetwork(Architecture arch);
    PricingNetwork(Architecture arch, InputEncoding encoding, std::vector<double> weights);

    const Architecture& arch() const { return arch_; }
    const InputEncoding& encoding() const { return encoding_; }
    const std::vector<TensorSpec>& tensors() const { return tensors_; }
    const TensorSpec& tensor(const std::string& name) const;
    std::size_t num_weights() const { return weights_.size(); }
    std::span<const double> weights() const { return weights_; }
    std::span<double> weights() { return weights_; }

    /// Variance-scaled uniform hidden weights; beta head bias 0, gamma head
    /// bias softplus^-1(1); small read-out weights.
    void initialize(std::uint64_t seed);

    /// Intermediate results kept for backward().
    struct Cache {
        JetMode mode = JetMode::Full;
        int batch = 0;
        std::vector<Eigen::MatrixXd> layer_in; ///< input of every dense layer
        std::vector<Eigen::MatrixXd> pre_act;  ///< pre-activation of every hidden layer
        Eigen::MatrixXd head;                  ///< rows: beta, gamma pre-activation
        std::vector<SingularContext> contexts;
    };

    /// Output jets (only .v is meaningful in Value mode). Throws UsageError
    /// when a point's kind or curve layout does not fit the network.
    std::vector<Jet> forward(std::span<const ParamPoint> points, JetMode mode, Cache* cache = nullptr) const;

    /// Accumulates into `grad` the weight gradient of sum_b <out_bar[b], V_b>.
    void backward(const Cache& cache, std::span<const Jet> out_bar, std::span<double> grad) const;

    double price(const ParamPoint& p) const;
    std::vector<double> price_batch(std::span<const ParamPoint> points) const;
    /// Value, the ten PDE partials and (optionally) dV/dweights at one point.
    DerivBundle eval_with_derivs(const ParamPoint& p, bool weight_grad = false) const;

    /// Singular term value (alpha_v or alpha_b) at p, from the current heads.
    double singular_value(const ParamPoint& p) const;

    void check_point(const ParamPoint& p) const;

private:
    using RowMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
    using MutRowMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

    void build_layout();
    std::size_t add_tensor(const std::string& name, int rows, int cols);
    RowMap mat(std::size_t idx) const;
    MutRowMap mat(std::span<double> buf, std::size_t idx) const;

    Eigen::MatrixXd input_jets(std::span<const ParamPoint> points, int comps) const;
    Eigen::MatrixXd dense(std::size_t w, std::size_t b, const Eigen::MatrixXd& x, int batch) const;
    void dense_backward(std::size_t w, std::size_t b, const Eigen::MatrixXd& x, const Eigen::MatrixXd& z_bar,
                        int batch, std::span<double> grad) const;
    Eigen::MatrixXd apply_singular(const Eigen::MatrixXd& head, const std::vector<SingularContext>& ctx,
                                   int comps) const;
    Eigen::MatrixXd singular_backward(const Eigen::MatrixXd& head, const std::vector<SingularContext>& ctx,
                                      const Eigen::MatrixXd& out_bar, int comps) const;

    Architecture arch_;
    InputEncoding encoding_;
    std::vector<TensorSpec> tensors_;
    std::vector<double> weights_;

    // Tensor indices.
    std::vector<std::size_t> w_hidden_, b_hidden_;
    std::size_t w_beta_ = 0, b_beta_ = 0, w_gamma_ = 0, b_gamma_ = 0;
    std::vector<std::size_t> w_skip_; ///< vanilla read-out of x^(0..L)
    std::size_t b_out_ = 0, w_out_ = 0;
};

/// Jet activations on (features, comps * batch) matrices.
Eigen::MatrixXd activation_forward(Activation act, const Eigen::MatrixXd& z, int comps, int batch);
Eigen::MatrixXd activation_backward(Activation act, const Eigen::MatrixXd& z, const Eigen::MatrixXd& y_bar, int comps,
                                    int batch);

} // namespace bergomi

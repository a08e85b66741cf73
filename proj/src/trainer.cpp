#include "bergomi/trainer.hpp"

#include "bergomi/checkpoint.hpp"
#include "bergomi/csv.hpp"
#include "bergomi/errors.hpp"

#include <cmath>
#include <deque>
#include <numeric>
#include <sstream>

namespace bergomi {

void TrainConfig::validate() const {
    if (batch < 1) throw ConfigError("batch size must be at least 1");
    if (samples < 1 || epochs < 1) throw ConfigError("sample budget must be positive");
    if (!(lr_end > 0.0 && lr_start > lr_end)) throw ConfigError("need lr_start > lr_end > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && eps > 0.0))
        throw ConfigError("invalid Adam hyperparameters");
    if ((samples * epochs) % batch != 0)
        throw ConfigError("sample budget " + std::to_string(samples * epochs) + " is not a multiple of batch size " +
                          std::to_string(batch));
}

std::size_t TrainConfig::total_steps() const { return samples * epochs / batch; }

double lr_at(std::size_t step, std::size_t total_steps, const TrainConfig& cfg) {
    if (step > total_steps) throw UsageError("lr_at: step beyond total_steps");
    if (total_steps == 0) return cfg.lr_start;
    if (step == total_steps) return cfg.lr_end;
    const double frac = static_cast<double>(step) / static_cast<double>(total_steps);
    return cfg.lr_start * std::pow(cfg.lr_end / cfg.lr_start, frac);
}

void adam_step(std::span<double> weights, std::span<const double> grads, AdamState& state, double lr,
               const TrainConfig& cfg) {
    if (grads.size() != weights.size()) throw UsageError("adam_step: gradient length mismatch");
    if (state.m.empty()) {
        state.m.assign(weights.size(), 0.0);
        state.v.assign(weights.size(), 0.0);
    }
    if (state.m.size() != weights.size()) throw UsageError("adam_step: state length mismatch");
    for (std::size_t i = 0; i < grads.size(); ++i)
        if (!std::isfinite(grads[i])) throw TrainingError("non-finite gradient at weight " + std::to_string(i));
    ++state.t;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < weights.size(); ++i) {
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grads[i];
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
        const double mhat = state.m[i] / c1;
        const double vhat = state.v[i] / c2;
        weights[i] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
}

double clip_global_norm(std::span<double> grads, double max_norm) {
    double sq = 0.0;
    for (double g : grads) sq += g * g;
    const double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm) {
        const double scale = max_norm / norm;
        for (double& g : grads) g *= scale;
    }
    return norm;
}

std::string log_header() {
    std::string h = "step,lr,loss,ma_loss";
    for (auto name : kLossTermNames) {
        h += ',';
        h += name;
    }
    return h + ",grad_norm";
}

std::string format_log_row(const LogRow& row) {
    std::string s = std::to_string(row.step) + ',' + format_double(row.lr) + ',' + format_double(row.loss) + ',' +
                    format_double(row.ma_loss);
    for (std::size_t i = 0; i < kLossTermNames.size(); ++i) s += ',' + format_double(loss_term(row.terms, i));
    return s + ',' + format_double(row.grad_norm);
}

std::vector<ParamPoint> training_batch(const Architecture& arch, const TrainConfig& cfg, std::size_t step) {
    SamplingConfig sc;
    sc.mode = arch.mode;
    sc.kind = arch.kind;
    sc.test = false;
    sc.seed = cfg.seed;
    return sample_batch(sc, step, cfg.batch);
}

namespace {

std::string describe_terms(const LossTerms& t) {
    std::ostringstream os;
    for (std::size_t i = 0; i < kLossTermNames.size(); ++i)
        os << (i ? " " : "") << kLossTermNames[i] << '=' << loss_term(t, i);
    return os.str();
}

} // namespace

TrainResult train(const TrainJob& job) {
    job.train.validate();
    if (is_knock_in(job.arch.kind) && job.vanilla == nullptr)
        throw ConfigError("knock-in training needs a vanilla checkpoint of the same curve mode");
    if (job.vanilla && job.vanilla->arch().mode != job.arch.mode)
        throw ConfigError("vanilla checkpoint curve mode does not match");

    TrainResult result{PricingNetwork(job.arch), {}};
    PricingNetwork& net = result.net;
    net.initialize(stream_seed(job.train.seed, 0, 0x1417));

    const std::size_t total = job.train.total_steps();
    AdamState adam;
    std::vector<double> grad(net.num_weights());
    std::deque<double> window;
    double window_sum = 0.0;
    std::string log_csv = log_header() + "\n";

    for (std::size_t step = 1; step <= total; ++step) {
        const auto batch = training_batch(job.arch, job.train, step);
        BatchLoss bl;
        try {
            bl = batch_loss(net, job.vanilla, batch, job.loss, grad);
        } catch (const NumericError& e) {
            throw TrainingError("batch " + std::to_string(step) + ": " + e.what());
        }
        if (!std::isfinite(bl.total))
            throw TrainingError("non-finite loss at batch " + std::to_string(step) + " (" + describe_terms(bl.mean) + ")");
        const double norm = clip_global_norm(grad, job.train.clip_norm);
        if (!std::isfinite(norm))
            throw TrainingError("non-finite gradient at batch " + std::to_string(step) + " (" + describe_terms(bl.mean) + ")");
        const double lr = lr_at(step - 1, total, job.train);
        adam_step(net.weights(), grad, adam, lr, job.train);

        window.push_back(bl.total);
        window_sum += bl.total;
        if (window.size() > job.train.ma_window) {
            window_sum -= window.front();
            window.pop_front();
        }
        if (step % job.train.log_every == 0 || step == total) {
            LogRow row{step, lr, bl.total, window_sum / static_cast<double>(window.size()), bl.mean, norm};
            result.log.push_back(row);
            log_csv += format_log_row(row) + "\n";
            if (job.on_log) job.on_log(row);
        }
        if (!job.checkpoint_path.empty() && job.train.checkpoint_every > 0 && step % job.train.checkpoint_every == 0 &&
            step != total)
            save_checkpoint(net, job.checkpoint_path);
    }
    if (!job.checkpoint_path.empty()) save_checkpoint(net, job.checkpoint_path);
    if (!job.log_path.empty()) write_file_atomic(job.log_path, log_csv);
    return result;
}

} // namespace bergomi

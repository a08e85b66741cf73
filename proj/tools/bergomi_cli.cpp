// bergomi: train pricing networks, benchmark with Monte Carlo, price and evaluate.

#include "bergomi/checkpoint.hpp"
#include "bergomi/config.hpp"
#include "bergomi/errors.hpp"
#include "bergomi/eval.hpp"
#include "bergomi/sampler.hpp"
#include "bergomi/trainer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace bergomi;
using nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "1.0.0";

std::string hex64(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string file_hash(const fs::path& p) {
    const auto bytes = read_file(p);
    return hex64(fnv1a64(bytes.data(), bytes.size()));
}

struct Manifest {
    ordered_json j;

    Manifest(const std::string& command, const RunConfig* cfg) {
        j["command"] = command;
        j["version"] = kVersion;
        if (cfg) {
            j["config_hash"] = hex64(config_hash(*cfg));
            ordered_json settings = ordered_json::object();
            std::istringstream lines(canonical_text(*cfg));
            for (std::string line; std::getline(lines, line);) {
                const auto eq = line.find('=');
                settings[line.substr(0, eq)] = line.substr(eq + 1);
            }
            j["config"] = settings;
        }
        j["inputs"] = ordered_json::object();
        j["outputs"] = ordered_json::object();
    }
    void input(const std::string& name, const fs::path& p) {
        j["inputs"][name] = {{"path", p.string()}, {"fnv1a64", file_hash(p)}};
    }
    void output(const std::string& name, const fs::path& p) {
        j["outputs"][name] = {{"path", p.filename().string()}, {"fnv1a64", file_hash(p)}};
    }
    void write(const fs::path& p) const { write_file_atomic(p, j.dump(2) + "\n"); }
};

fs::path manifest_beside(const fs::path& out) {
    return out.parent_path() / (out.filename().string() + ".manifest.json");
}

void write_csv(const fs::path& p, const CsvTable& t) { write_file_atomic(p, to_csv(t)); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Models {
    std::optional<PricingNetwork> vanilla, knock_in;
    PricingModels view() const {
        return {vanilla ? &*vanilla : nullptr, knock_in ? &*knock_in : nullptr};
    }
};

// One checkpoint may be either kind; a second one supplies the vanilla net.
Models load_models(const fs::path& checkpoint, const fs::path& vanilla_path) {
    Models m;
    auto net = load_checkpoint(checkpoint);
    if (net.arch().net == NetKind::Vanilla) m.vanilla = std::move(net);
    else m.knock_in = std::move(net);
    if (!vanilla_path.empty()) {
        auto v = load_checkpoint(vanilla_path);
        if (v.arch().net != NetKind::Vanilla) throw UsageError(vanilla_path.string() + " is not a vanilla network");
        if (m.vanilla) throw UsageError("two vanilla networks given");
        m.vanilla = std::move(v);
    }
    if (m.vanilla && m.knock_in) {
        if (m.vanilla->arch().mode != m.knock_in->arch().mode)
            throw UsageError("vanilla and knock-in networks use different curve modes");
        if (m.vanilla->arch().kind != vanilla_of(m.knock_in->arch().kind))
            throw UsageError("vanilla network does not match the knock-in payoff");
    }
    return m;
}

void check_mode(const Models& m, std::span<const ParamPoint> points) {
    const PricingNetwork* net = m.vanilla ? &*m.vanilla : &*m.knock_in;
    const auto segs = net->arch().mode == CurveMode::Constant ? 1u : 9u;
    for (const auto& p : points)
        if (p.params.curve.segments() != segs)
            throw UsageError("points use a different curve mode than the network");
}

// Held-out points for the configured kind; never drawn from a training seed.
std::vector<ParamPoint> test_points(const RunConfig& cfg) {
    SamplingConfig sc;
    sc.mode = cfg.arch.mode;
    sc.kind = cfg.arch.kind;
    sc.test = true;
    sc.seed = cfg.eval.seed;
    return sample_batch(sc, 0, cfg.eval.points);
}

int cmd_train(const RunConfig& cfg, const fs::path& out) {
    fs::create_directories(out);
    std::optional<PricingNetwork> vanilla;
    Manifest man("train", &cfg);
    if (cfg.arch.net == NetKind::Barrier) {
        if (cfg.vanilla_checkpoint.empty())
            throw ConfigError("knock-in training needs train.vanilla_checkpoint");
        vanilla = load_checkpoint(cfg.vanilla_checkpoint);
        man.input("vanilla_checkpoint", cfg.vanilla_checkpoint);
    }
    TrainJob job;
    job.arch = cfg.arch;
    job.train = cfg.train;
    job.loss = cfg.loss;
    job.vanilla = vanilla ? &*vanilla : nullptr;
    job.checkpoint_path = out / "checkpoint.bin";
    job.log_path = out / "train_log.csv";
    const auto t0 = std::chrono::steady_clock::now();
    const auto total = cfg.train.total_steps();
    job.on_log = [&](const LogRow& r) {
        std::fprintf(stderr, "step %zu/%zu lr %.3g loss %.4g ma %.4g grad %.3g (%.0f s)\n", r.step, total,
                     r.lr, r.loss, r.ma_loss, r.grad_norm, seconds_since(t0));
    };
    std::fprintf(stderr, "training %s, %zu steps\n", describe(cfg.arch).c_str(), total);
    train(job);
    man.j["seeds"] = {{"train", cfg.train.seed}};
    man.output("checkpoint", job.checkpoint_path);
    man.output("log", job.log_path);
    man.write(out / "manifest.json");
    return 0;
}

int cmd_sample(const RunConfig& cfg, const fs::path& out) {
    const auto pts = test_points(cfg);
    write_csv(out, points_table(pts));
    Manifest man("sample", &cfg);
    man.j["seeds"] = {{"eval", cfg.eval.seed}};
    man.output("points", out);
    man.write(manifest_beside(out));
    return 0;
}

int cmd_benchmark(const RunConfig& cfg, const fs::path& points_path, const fs::path& out) {
    const auto pts = points_path.empty() ? test_points(cfg) : points_from_table(read_csv(points_path));
    const auto t0 = std::chrono::steady_clock::now();
    const auto est = benchmark_points(pts, cfg.mc);
    std::fprintf(stderr, "benchmarked %zu points in %.1f s\n", pts.size(), seconds_since(t0));
    write_csv(out, benchmark_table(pts, est));
    Manifest man("benchmark", &cfg);
    if (!points_path.empty()) man.input("points", points_path);
    man.j["seeds"] = {{"mc", cfg.mc.seed}, {"eval", cfg.eval.seed}};
    man.output("benchmark", out);
    man.write(manifest_beside(out));
    return 0;
}

int cmd_price(const fs::path& ckpt, const fs::path& vanilla, const fs::path& points_path,
              const fs::path& out) {
    const auto models = load_models(ckpt, vanilla);
    const auto pts = points_from_table(read_csv(points_path));
    check_mode(models, pts);
    const auto t0 = std::chrono::steady_clock::now();
    const auto prices = price_points(models.view(), pts);
    const double dt = seconds_since(t0);
    std::fprintf(stderr, "priced %zu points in %.4f s (%.0f prices/s)\n", pts.size(), dt,
                 dt > 0 ? static_cast<double>(pts.size()) / dt : 0.0);
    CsvTable t = points_table(pts);
    t.header.emplace_back("price");
    for (std::size_t i = 0; i < pts.size(); ++i) t.rows[i].push_back(format_double(prices[i]));
    write_csv(out, t);
    Manifest man("price", nullptr);
    man.input("checkpoint", ckpt);
    if (!vanilla.empty()) man.input("vanilla", vanilla);
    man.input("points", points_path);
    man.output("prices", out);
    man.write(manifest_beside(out));
    return 0;
}

std::vector<McEstimate> estimates_from_table(const CsvTable& t) {
    const auto ie = t.column("estimate"), is = t.column("se"), isc = t.column("scheme"),
               ip = t.column("paths"), ist = t.column("steps");
    std::vector<McEstimate> out;
    for (const auto& row : t.rows) {
        McEstimate e;
        e.mean = parse_double(row[ie]);
        e.se = parse_double(row[is]);
        e.scheme = parse_mc_scheme(row[isc]);
        e.paths = static_cast<std::size_t>(parse_double(row[ip]));
        e.steps = static_cast<std::size_t>(parse_double(row[ist]));
        out.push_back(e);
    }
    return out;
}

int cmd_evaluate(const RunConfig& cfg, const fs::path& ckpt, const fs::path& vanilla,
                 const fs::path& bench_path, const fs::path& out) {
    fs::create_directories(out);
    const auto models = load_models(ckpt, vanilla);
    Manifest man("evaluate", &cfg);
    man.input("checkpoint", ckpt);
    if (!vanilla.empty()) man.input("vanilla", vanilla);
    std::vector<ParamPoint> pts;
    std::vector<McEstimate> bench;
    if (!bench_path.empty()) {
        const auto t = read_csv(bench_path);
        pts = points_from_table(t);
        bench = estimates_from_table(t);
        man.input("benchmark", bench_path);
    } else {
        pts = test_points(cfg);
        const auto t0 = std::chrono::steady_clock::now();
        bench = benchmark_points(pts, cfg.mc);
        std::fprintf(stderr, "benchmarked %zu points in %.1f s\n", pts.size(), seconds_since(t0));
        write_csv(out / "benchmark.csv", benchmark_table(pts, bench));
        man.output("benchmark", out / "benchmark.csv");
    }
    check_mode(models, pts);
    const auto pred = price_points(models.view(), pts);
    const auto report = evaluate(pred, bench, cfg.eval.h);
    write_csv(out / "evaluation.csv", evaluation_table(pts, pred, bench, cfg.eval.h));
    write_csv(out / "report.csv", report_table(report));
    std::printf("points %zu rmse %.6g max_abs_error %.6g bench_se_rms %.4g\n", report.count, report.rmse,
                report.max_abs_error, report.bench_se_rms);
    man.j["seeds"] = {{"mc", cfg.mc.seed}, {"eval", cfg.eval.seed}};
    man.output("evaluation", out / "evaluation.csv");
    man.output("report", out / "report.csv");
    man.write(out / "manifest.json");
    return 0;
}

int cmd_curve(const RunConfig& cfg, const fs::path& ckpt, const fs::path& vanilla, const fs::path& out) {
    const auto models = load_models(ckpt, vanilla);
    const auto& base = cfg.slice.base;
    const auto [lo, hi] = test_s_range(base.kind, base.barrier);
    const auto pts = slice_points(base, cfg.slice.s_min.value_or(lo), cfg.slice.s_max.value_or(hi),
                                  cfg.slice.points);
    check_mode(models, pts);
    const auto pred = price_points(models.view(), pts);
    const auto bench = benchmark_points(pts, cfg.mc);
    write_csv(out, curve_table(pts, pred, bench, cfg.eval.h));
    Manifest man("curve", &cfg);
    man.input("checkpoint", ckpt);
    if (!vanilla.empty()) man.input("vanilla", vanilla);
    man.j["seeds"] = {{"mc", cfg.mc.seed}};
    man.output("curve", out);
    man.write(manifest_beside(out));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bergomi option pricing networks and Monte Carlo benchmarks"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    fs::path config, out, points, ckpt, vanilla, bench;
    std::vector<std::string> sets;
    auto add_config = [&](CLI::App* sub) {
        sub->add_option("--config", config, "INI configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("--set", sets, "override, section.key=value (repeatable)");
    };

    auto* train = app.add_subcommand("train", "train a network; writes checkpoint, log and manifest");
    add_config(train);
    train->add_option("--out", out, "output directory")->required();

    auto* sample = app.add_subcommand("sample", "write the held-out test points");
    add_config(sample);
    sample->add_option("--out", out, "points CSV")->required();

    auto* benchmark = app.add_subcommand("benchmark", "Monte Carlo prices for a points file");
    add_config(benchmark);
    benchmark->add_option("--points", points, "points CSV (default: the test points)")->check(CLI::ExistingFile);
    benchmark->add_option("--out", out, "benchmark CSV")->required();

    auto* price = app.add_subcommand("price", "network prices for a points file");
    price->add_option("--checkpoint", ckpt, "network checkpoint")->required()->check(CLI::ExistingFile);
    price->add_option("--vanilla", vanilla, "vanilla checkpoint for knock-out kinds")->check(CLI::ExistingFile);
    price->add_option("--points", points, "points CSV")->required()->check(CLI::ExistingFile);
    price->add_option("--out", out, "prices CSV")->required();

    auto* evaluate = app.add_subcommand("evaluate", "RMSE and relative errors on the test points");
    add_config(evaluate);
    evaluate->add_option("--checkpoint", ckpt, "network checkpoint")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--vanilla", vanilla, "vanilla checkpoint for knock-out kinds")->check(CLI::ExistingFile);
    evaluate->add_option("--benchmark", bench, "reuse a benchmark CSV")->check(CLI::ExistingFile);
    evaluate->add_option("--out", out, "output directory")->required();

    auto* curve = app.add_subcommand("curve", "network and benchmark prices along an s-slice");
    add_config(curve);
    curve->add_option("--checkpoint", ckpt, "network checkpoint")->required()->check(CLI::ExistingFile);
    curve->add_option("--vanilla", vanilla, "vanilla checkpoint for knock-out kinds")->check(CLI::ExistingFile);
    curve->add_option("--out", out, "curve CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        std::optional<RunConfig> cfg;
        if (!config.empty()) cfg = load_config(config, sets);
        if (train->parsed()) return cmd_train(*cfg, out);
        if (sample->parsed()) return cmd_sample(*cfg, out);
        if (benchmark->parsed()) return cmd_benchmark(*cfg, points, out);
        if (price->parsed()) return cmd_price(ckpt, vanilla, points, out);
        if (evaluate->parsed()) return cmd_evaluate(*cfg, ckpt, vanilla, bench, out);
        if (curve->parsed()) return cmd_curve(*cfg, ckpt, vanilla, out);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

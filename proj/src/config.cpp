#include "bergomi/config.hpp"

#include "bergomi/checkpoint.hpp"
#include "bergomi/csv.hpp"
#include "bergomi/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace bergomi {

namespace {

namespace pt = boost::property_tree;

using Setter = std::function<void(RunConfig&, const std::string&)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Entry {
    Setter set;
    Getter get;
};

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double to_real(const std::string& v) {
    try {
        return parse_double(trim(v));
    } catch (const UsageError&) {
        throw ConfigError("not a number: '" + v + "'");
    }
}

std::uint64_t to_uint(const std::string& v) {
    const auto t = trim(v);
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
        throw ConfigError("not a non-negative integer: '" + v + "'");
    return out;
}

bool to_bool(const std::string& v) {
    const auto t = trim(v);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw ConfigError("not a boolean: '" + v + "'");
}

std::vector<double> to_list(const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_real(item));
    if (out.empty()) throw ConfigError("empty list");
    return out;
}

std::string from_list(std::span<const double> xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ',';
        s += format_double(xs[i]);
    }
    return s;
}

template <class T>
Entry real_entry(T RunConfig::*section, double T::*field) {
    return {[=](RunConfig& c, const std::string& v) { c.*section.*field = to_real(v); },
            [=](const RunConfig& c) { return format_double(c.*section.*field); }};
}

template <class T, class U>
Entry uint_entry(T RunConfig::*section, U T::*field) {
    return {[=](RunConfig& c, const std::string& v) { c.*section.*field = static_cast<U>(to_uint(v)); },
            [=](const RunConfig& c) { return std::to_string(c.*section.*field); }};
}

template <class T>
Entry bool_entry(T RunConfig::*section, bool T::*field) {
    return {[=](RunConfig& c, const std::string& v) { c.*section.*field = to_bool(v); },
            [=](const RunConfig& c) { return std::string(c.*section.*field ? "true" : "false"); }};
}

Entry slice_real(double ParamPoint::*field) {
    return {[=](RunConfig& c, const std::string& v) { c.slice.base.*field = to_real(v); },
            [=](const RunConfig& c) { return format_double(c.slice.base.*field); }};
}

Entry slice_param(double BergomiParams::*field) {
    return {[=](RunConfig& c, const std::string& v) { c.slice.base.params.*field = to_real(v); },
            [=](const RunConfig& c) { return format_double(c.slice.base.params.*field); }};
}

Entry optional_real(std::optional<double> SliceConfig::*field) {
    return {[=](RunConfig& c, const std::string& v) {
                const auto t = trim(v);
                if (t.empty() || t == "auto") c.slice.*field = std::nullopt;
                else c.slice.*field = to_real(t);
            },
            [=](const RunConfig& c) {
                const auto& o = c.slice.*field;
                return o ? format_double(*o) : std::string("auto");
            }};
}

int to_int(const std::string& v) {
    const auto u = to_uint(v);
    if (u > 1'000'000) throw ConfigError("value too large: " + v);
    return static_cast<int>(u);
}

const std::map<std::string, Entry>& registry() {
    static const std::map<std::string, Entry> reg = [] {
        std::map<std::string, Entry> r;
        r["option.kind"] = {[](RunConfig& c, const std::string& v) {
                                c.arch.kind = parse_option_kind(trim(v));
                                c.slice.base.kind = c.arch.kind;
                            },
                            [](const RunConfig& c) { return std::string(to_string(c.arch.kind)); }};
        r["option.curve"] = {[](RunConfig& c, const std::string& v) { c.arch.mode = parse_curve_mode(trim(v)); },
                             [](const RunConfig& c) { return std::string(to_string(c.arch.mode)); }};
        r["network.depth"] = {[](RunConfig& c, const std::string& v) { c.arch.depth = to_int(v); },
                              [](const RunConfig& c) { return std::to_string(c.arch.depth); }};
        r["network.depth1"] = {[](RunConfig& c, const std::string& v) { c.arch.depth1 = to_int(v); },
                               [](const RunConfig& c) { return std::to_string(c.arch.depth1); }};
        r["network.depth2"] = {[](RunConfig& c, const std::string& v) { c.arch.depth2 = to_int(v); },
                               [](const RunConfig& c) { return std::to_string(c.arch.depth2); }};
        r["network.width"] = {[](RunConfig& c, const std::string& v) { c.arch.width = to_int(v); },
                              [](const RunConfig& c) { return std::to_string(c.arch.width); }};
        r["network.activation"] = {
            [](RunConfig& c, const std::string& v) { c.arch.activation = parse_activation(trim(v)); },
            [](const RunConfig& c) { return std::string(to_string(c.arch.activation)); }};

        r["train.batch"] = uint_entry(&RunConfig::train, &TrainConfig::batch);
        r["train.samples"] = uint_entry(&RunConfig::train, &TrainConfig::samples);
        r["train.epochs"] = uint_entry(&RunConfig::train, &TrainConfig::epochs);
        r["train.lr_start"] = real_entry(&RunConfig::train, &TrainConfig::lr_start);
        r["train.lr_end"] = real_entry(&RunConfig::train, &TrainConfig::lr_end);
        r["train.beta1"] = real_entry(&RunConfig::train, &TrainConfig::beta1);
        r["train.beta2"] = real_entry(&RunConfig::train, &TrainConfig::beta2);
        r["train.eps"] = real_entry(&RunConfig::train, &TrainConfig::eps);
        r["train.clip_norm"] = real_entry(&RunConfig::train, &TrainConfig::clip_norm);
        r["train.seed"] = uint_entry(&RunConfig::train, &TrainConfig::seed);
        r["train.log_every"] = uint_entry(&RunConfig::train, &TrainConfig::log_every);
        r["train.checkpoint_every"] = uint_entry(&RunConfig::train, &TrainConfig::checkpoint_every);
        r["train.ma_window"] = uint_entry(&RunConfig::train, &TrainConfig::ma_window);
        r["train.vanilla_checkpoint"] = {
            [](RunConfig& c, const std::string& v) { c.vanilla_checkpoint = trim(v); },
            [](const RunConfig& c) { return c.vanilla_checkpoint.string(); }};

        r["loss.lambda1"] = real_entry(&RunConfig::loss, &LossConfig::lambda1);
        r["loss.lambda2"] = real_entry(&RunConfig::loss, &LossConfig::lambda2);
        r["loss.h_floor"] = real_entry(&RunConfig::loss, &LossConfig::h_floor);

        r["mc.paths"] = uint_entry(&RunConfig::mc, &McConfig::paths);
        r["mc.steps_per_year"] = uint_entry(&RunConfig::mc, &McConfig::steps_per_year);
        r["mc.seed"] = uint_entry(&RunConfig::mc, &McConfig::seed);
        r["mc.antithetic"] = bool_entry(&RunConfig::mc, &McConfig::antithetic);
        r["mc.block"] = uint_entry(&RunConfig::mc, &McConfig::block);
        r["mc.control_variate"] = bool_entry(&RunConfig::mc, &McConfig::control_variate);
        r["mc.target_se"] = real_entry(&RunConfig::mc, &McConfig::target_se);
        r["mc.max_paths"] = uint_entry(&RunConfig::mc, &McConfig::max_paths);

        r["eval.points"] = uint_entry(&RunConfig::eval, &EvalConfig::points);
        r["eval.seed"] = uint_entry(&RunConfig::eval, &EvalConfig::seed);
        r["eval.h"] = real_entry(&RunConfig::eval, &EvalConfig::h);

        r["slice.t"] = slice_real(&ParamPoint::t);
        r["slice.x1"] = slice_real(&ParamPoint::x1);
        r["slice.x2"] = slice_real(&ParamPoint::x2);
        r["slice.T"] = slice_real(&ParamPoint::maturity);
        r["slice.B"] = slice_real(&ParamPoint::barrier);
        r["slice.r"] = slice_param(&BergomiParams::r);
        r["slice.q"] = slice_param(&BergomiParams::q);
        r["slice.omega"] = slice_param(&BergomiParams::omega);
        r["slice.theta"] = slice_param(&BergomiParams::theta);
        r["slice.k1"] = slice_param(&BergomiParams::k1);
        r["slice.k2"] = slice_param(&BergomiParams::k2);
        r["slice.rho1"] = slice_param(&BergomiParams::rho1);
        r["slice.rho2"] = slice_param(&BergomiParams::rho2);
        r["slice.rho12"] = slice_param(&BergomiParams::rho12);
        r["slice.xi"] = {[](RunConfig& c, const std::string& v) {
                             const auto xs = to_list(v);
                             c.slice.base.params.curve = xs.size() == 1
                                 ? ForwardVarianceCurve::constant(xs[0])
                                 : ForwardVarianceCurve::nine_segment(xs);
                         },
                         [](const RunConfig& c) { return from_list(c.slice.base.params.curve.values()); }};
        r["slice.points"] = uint_entry(&RunConfig::slice, &SliceConfig::points);
        r["slice.s_min"] = optional_real(&SliceConfig::s_min);
        r["slice.s_max"] = optional_real(&SliceConfig::s_max);
        return r;
    }();
    return reg;
}

void apply(RunConfig& cfg, const std::string& key, const std::string& value) {
    const auto& reg = registry();
    const auto it = reg.find(key);
    if (it == reg.end()) throw ConfigError("unknown configuration key '" + key + "'");
    try {
        it->second.set(cfg, value);
    } catch (const ConfigError& e) {
        throw ConfigError(key + ": " + e.what());
    } catch (const DomainError& e) {
        throw ConfigError(key + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

void finish(RunConfig& cfg) {
    auto& a = cfg.arch;
    if (is_knock_out(a.kind))
        throw ConfigError("knock-out kinds are priced as vanilla minus knock-in; configure the knock-in kind");
    a.net = is_vanilla(a.kind) ? NetKind::Vanilla : NetKind::Barrier;
    if (a.width < 1 || a.depth < 1 || a.depth1 < 1 || a.depth2 < 1)
        throw ConfigError("network depths and width must be positive");
    cfg.train.validate();
    cfg.mc.validate();
    if (cfg.eval.points == 0) throw ConfigError("eval.points must be positive");
    if (!(cfg.eval.h > 0.0)) throw ConfigError("eval.h must be positive");
    if (cfg.eval.seed == cfg.train.seed)
        throw ConfigError("eval.seed must differ from train.seed");
    const auto segs = cfg.slice.base.params.curve.segments();
    if (segs != (a.mode == CurveMode::Constant ? 1u : 9u))
        throw ConfigError("slice.xi must have " + std::string(a.mode == CurveMode::Constant ? "1 value" : "9 values") +
                          " for curve mode " + std::string(to_string(a.mode)));
}

} // namespace

RunConfig parse_config(const std::string& ini_text, const std::vector<std::string>& overrides) {
    RunConfig cfg;
    // Defaults of the slice: the reference slice parameters.
    auto& b = cfg.slice.base;
    b.kind = cfg.arch.kind;
    b.maturity = 0.5;
    b.barrier = 120.0;
    b.params.omega = 1.0;
    b.params.k1 = 1.0;
    b.params.k2 = 10.0;
    b.params.theta = 0.5;
    b.params.rho1 = -0.5;
    b.params.rho2 = -0.5;
    b.params.rho12 = 0.0;
    b.params.curve = ForwardVarianceCurve::constant(0.1);

    pt::ptree tree;
    std::istringstream in(ini_text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("bad INI: ") + e.what());
    }
    // kind first so later keys (slice defaults) see it
    std::vector<std::pair<std::string, std::string>> items;
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw ConfigError("top-level key '" + section + "' outside a section");
        for (const auto& [key, value] : body) items.emplace_back(section + "." + key, value.data());
    }
    std::stable_partition(items.begin(), items.end(),
                          [](const auto& kv) { return kv.first == "option.kind"; });
    for (const auto& [k, v] : items) apply(cfg, k, v);
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not section.key=value");
        apply(cfg, trim(o.substr(0, eq)), o.substr(eq + 1));
    }
    finish(cfg);
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read config " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), overrides);
}

std::string canonical_text(const RunConfig& cfg) {
    std::string out;
    for (const auto& [key, entry] : registry()) out += key + "=" + entry.get(cfg) + "\n";
    return out;
}

std::uint64_t config_hash(const RunConfig& cfg) {
    const auto text = canonical_text(cfg);
    return fnv1a64(reinterpret_cast<const unsigned char*>(text.data()), text.size());
}

} // namespace bergomi

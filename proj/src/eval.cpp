#include "bergomi/eval.hpp"

#include "bergomi/errors.hpp"
#include "bergomi/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bergomi {

namespace {

void check_lengths(std::size_t a, std::size_t b) {
    if (a == 0) throw UsageError("empty series");
    if (a != b)
        throw UsageError("series length mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
}

constexpr const char* kPointCols[] = {"kind", "s",  "t",     "x1",    "x2",   "T",    "B",   "r",
                                      "q",    "omega", "theta", "k1", "k2", "rho1", "rho2", "rho12"};

} // namespace

double rmse(std::span<const double> pred, std::span<const double> bench) {
    check_lengths(pred.size(), bench.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - bench[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(pred.size()));
}

std::vector<double> relative_error(std::span<const double> pred, std::span<const double> bench,
                                   double h) {
    check_lengths(pred.size(), bench.size());
    if (!(h > 0.0)) throw UsageError("relative error floor must be positive");
    std::vector<double> out(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i)
        out[i] = (pred[i] - bench[i]) / std::max(bench[i], h);
    return out;
}

std::vector<std::string> point_columns(CurveMode mode) {
    std::vector<std::string> cols(std::begin(kPointCols), std::end(kPointCols));
    const int m = mode == CurveMode::Constant ? 1 : 9;
    for (int j = 1; j <= m; ++j) cols.push_back("xi_" + std::to_string(j));
    return cols;
}

void append_point(std::vector<std::string>& row, const ParamPoint& p) {
    const auto& m = p.params;
    row.emplace_back(to_string(p.kind));
    for (double v : {p.s, p.t, p.x1, p.x2, p.maturity, p.barrier, m.r, m.q, m.omega, m.theta, m.k1,
                     m.k2, m.rho1, m.rho2, m.rho12})
        row.push_back(format_double(v));
    for (double v : m.curve.values()) row.push_back(format_double(v));
}

CsvTable points_table(std::span<const ParamPoint> points) {
    CsvTable t;
    const auto mode =
        points.empty() || points[0].params.curve.segments() == 1 ? CurveMode::Constant : CurveMode::NineSegment;
    t.header = point_columns(mode);
    for (const auto& p : points) {
        if (p.params.curve.segments() != (mode == CurveMode::Constant ? 1u : 9u))
            throw UsageError("points mix curve modes");
        std::vector<std::string> row;
        append_point(row, p);
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::vector<ParamPoint> points_from_table(const CsvTable& table) {
    const auto mode = table.has_column("xi_9") ? CurveMode::NineSegment : CurveMode::Constant;
    std::vector<std::size_t> idx;
    for (const auto& c : point_columns(mode)) idx.push_back(table.column(c));
    std::vector<ParamPoint> out;
    out.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size()) throw UsageError("ragged row in points file");
        auto num = [&](std::size_t k) { return parse_double(row[idx[k]]); };
        ParamPoint p;
        p.kind = parse_option_kind(row[idx[0]]);
        p.s = num(1);
        p.t = num(2);
        p.x1 = num(3);
        p.x2 = num(4);
        p.maturity = num(5);
        p.barrier = num(6);
        auto& m = p.params;
        m.r = num(7);
        m.q = num(8);
        m.omega = num(9);
        m.theta = num(10);
        m.k1 = num(11);
        m.k2 = num(12);
        m.rho1 = num(13);
        m.rho2 = num(14);
        m.rho12 = num(15);
        std::vector<double> xi;
        for (std::size_t k = 16; k < idx.size(); ++k) xi.push_back(num(k));
        m.curve = mode == CurveMode::Constant ? ForwardVarianceCurve::constant(xi[0])
                                              : ForwardVarianceCurve::nine_segment(xi);
        out.push_back(std::move(p));
    }
    return out;
}

void reject_degenerate(const ParamPoint& p) {
    if (!is_barrier(p.kind)) return;
    if (is_up(p.kind) && is_call(p.kind) && p.barrier < kStrike)
        throw UsageError("up call with B < K is outside the trained domain");
    if (!is_up(p.kind) && !is_call(p.kind) && p.barrier > kStrike)
        throw UsageError("down put with B > K is outside the trained domain");
}

std::vector<double> price_points(const PricingModels& models, std::span<const ParamPoint> points) {
    std::vector<ParamPoint> van, kin;
    std::vector<std::size_t> van_of(points.size(), SIZE_MAX), kin_of(points.size(), SIZE_MAX);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        reject_degenerate(p);
        if (is_vanilla(p.kind) || is_knock_out(p.kind)) {
            if (!models.vanilla) throw UsageError("pricing needs a vanilla network");
            ParamPoint v = p;
            v.kind = vanilla_of(p.kind);
            van_of[i] = van.size();
            van.push_back(v);
        }
        if (is_barrier(p.kind)) {
            if (!models.knock_in) throw UsageError("pricing barrier kinds needs a knock-in network");
            ParamPoint k = p;
            k.kind = knock_in_of(p.kind);
            kin_of[i] = kin.size();
            kin.push_back(k);
        }
    }
    const auto pv = van.empty() ? std::vector<double>{} : models.vanilla->price_batch(van);
    const auto pk = kin.empty() ? std::vector<double>{} : models.knock_in->price_batch(kin);
    std::vector<double> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto kind = points[i].kind;
        if (is_vanilla(kind)) out[i] = pv[van_of[i]];
        else if (is_knock_in(kind)) out[i] = pk[kin_of[i]];
        else out[i] = pv[van_of[i]] - pk[kin_of[i]];
    }
    return out;
}

std::vector<McEstimate> benchmark_points(std::span<const ParamPoint> points, const McConfig& mc) {
    std::vector<McEstimate> out;
    out.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        McConfig local = mc;
        local.seed = stream_seed(mc.seed, i, 0xbe);
        out.push_back(price_to_target(points[i], local, benchmark_price));
    }
    return out;
}

CsvTable benchmark_table(std::span<const ParamPoint> points, std::span<const McEstimate> est) {
    check_lengths(points.size(), est.size());
    CsvTable t = points_table(points);
    for (const char* c : {"estimate", "se", "scheme", "paths", "steps", "weight_mean", "weight_se"})
        t.header.emplace_back(c);
    for (std::size_t i = 0; i < est.size(); ++i) {
        const auto& e = est[i];
        auto& row = t.rows[i];
        row.push_back(format_double(e.mean));
        row.push_back(format_double(e.se));
        row.emplace_back(to_string(e.scheme));
        row.push_back(std::to_string(e.paths));
        row.push_back(std::to_string(e.steps));
        row.push_back(format_double(e.weight_mean));
        row.push_back(format_double(e.weight_se));
    }
    return t;
}

EvalReport evaluate(std::span<const double> pred, std::span<const McEstimate> bench, double h) {
    check_lengths(pred.size(), bench.size());
    std::vector<double> b(bench.size());
    for (std::size_t i = 0; i < bench.size(); ++i) b[i] = bench[i].mean;
    EvalReport r;
    r.count = pred.size();
    r.rmse = rmse(pred, b);
    const auto rel = relative_error(pred, b, h);
    double se2 = 0.0, err = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - b[i];
        err += d;
        r.max_abs_error = std::max(r.max_abs_error, std::abs(d));
        r.max_abs_rel_error = std::max(r.max_abs_rel_error, std::abs(rel[i]));
        se2 += bench[i].se * bench[i].se;
        r.bench_se_max = std::max(r.bench_se_max, bench[i].se);
    }
    const double n = static_cast<double>(pred.size());
    r.mean_error = err / n;
    r.bench_se_rms = std::sqrt(se2 / n);
    return r;
}

CsvTable evaluation_table(std::span<const ParamPoint> points, std::span<const double> pred,
                          std::span<const McEstimate> bench, double h) {
    check_lengths(points.size(), pred.size());
    check_lengths(points.size(), bench.size());
    std::vector<double> b(bench.size());
    for (std::size_t i = 0; i < bench.size(); ++i) b[i] = bench[i].mean;
    const auto rel = relative_error(pred, b, h);
    CsvTable t = points_table(points);
    for (const char* c : {"network", "benchmark", "se", "error", "rel_error"}) t.header.emplace_back(c);
    for (std::size_t i = 0; i < points.size(); ++i) {
        auto& row = t.rows[i];
        for (double v : {pred[i], b[i], bench[i].se, pred[i] - b[i], rel[i]})
            row.push_back(format_double(v));
    }
    return t;
}

CsvTable report_table(const EvalReport& r) {
    CsvTable t;
    t.header = {"count", "rmse", "max_abs_error", "mean_error", "bench_se_rms", "bench_se_max",
                "max_abs_rel_error"};
    t.rows.push_back({std::to_string(r.count), format_double(r.rmse), format_double(r.max_abs_error),
                      format_double(r.mean_error), format_double(r.bench_se_rms),
                      format_double(r.bench_se_max), format_double(r.max_abs_rel_error)});
    return t;
}

std::vector<ParamPoint> slice_points(const ParamPoint& base, double s_lo, double s_hi,
                                     std::size_t count) {
    if (count < 2) throw UsageError("a slice needs at least two points");
    if (!(s_lo < s_hi)) throw UsageError("slice needs s_lo < s_hi");
    reject_degenerate(base);
    const auto [lo, hi] = test_s_range(base.kind, base.barrier);
    constexpr double tol = 1e-12;
    if (s_lo < lo - tol || s_hi > hi + tol)
        throw UsageError("slice s-range lies outside the test range of " +
                         std::string(to_string(base.kind)));
    std::vector<ParamPoint> out;
    for (std::size_t i = 0; i < count; ++i) {
        ParamPoint p = base;
        const double w = static_cast<double>(i) / static_cast<double>(count - 1);
        p.s = i + 1 == count ? s_hi : s_lo + w * (s_hi - s_lo);
        validate(p);
        out.push_back(std::move(p));
    }
    return out;
}

CsvTable curve_table(std::span<const ParamPoint> points, std::span<const double> pred,
                     std::span<const McEstimate> bench, double h) {
    check_lengths(points.size(), pred.size());
    check_lengths(points.size(), bench.size());
    std::vector<double> b(bench.size());
    for (std::size_t i = 0; i < bench.size(); ++i) b[i] = bench[i].mean;
    const auto rel = relative_error(pred, b, h);
    CsvTable t;
    t.header = {"S", "network", "benchmark", "se", "rel_error"};
    for (std::size_t i = 0; i < points.size(); ++i)
        t.rows.push_back({format_double(std::exp(points[i].s)), format_double(pred[i]),
                          format_double(b[i]), format_double(bench[i].se), format_double(rel[i])});
    return t;
}

} // namespace bergomi

#include "follmer/scenario.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "follmer/calculus.hpp"
#include "follmer/error.hpp"
#include "follmer/itofollmer.hpp"
#include "follmer/parallel.hpp"
#include "follmer/quadvar.hpp"
#include "follmer/stieltjes.hpp"

namespace follmer {

std::uint64_t SplitMix64::next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

CadlagPath scaled_walk(std::size_t steps, double horizon, std::uint64_t seed, const std::vector<Jump>& inject) {
    require(steps > 0, "scaled_walk: need at least one step");
    require(std::isfinite(horizon) && horizon > 0.0, "scaled_walk: horizon must be positive");
    const auto R = NormedSpace::l2(1);
    const double size = std::sqrt(horizon / static_cast<double>(steps));
    SplitMix64 rng(seed);
    std::vector<Jump> jumps;
    jumps.reserve(steps + inject.size());
    for (std::size_t k = 1; k <= steps; ++k) {
        const double sign = (rng.next() >> 63) ? -1.0 : 1.0;
        const double t = k == steps ? horizon : horizon * static_cast<double>(k) / static_cast<double>(steps);
        jumps.push_back(Jump{t, Vector(R, {sign * size})});
    }
    for (const auto& j : inject) {
        require(j.delta.dim() == 1, "scaled_walk: injected jumps must be scalar");
        jumps.push_back(Jump{j.time, j.delta.in(R)});
    }
    std::stable_sort(jumps.begin(), jumps.end(), [](const Jump& a, const Jump& b) { return a.time < b.time; });
    return CadlagPath::pure_jump(Vector(R), horizon, std::move(jumps));
}

namespace {

NormKind norm_kind(const std::string& name) {
    if (name == "L1") return NormKind::L1;
    if (name == "L2") return NormKind::L2;
    if (name == "LInf") return NormKind::LInf;
    if (name == "Operator") return NormKind::Operator;
    if (name == "Frobenius") return NormKind::Frobenius;
    if (name == "Nuclear") return NormKind::Nuclear;
    if (name == "DirectSum") return NormKind::DirectSum;
    throw ContractError("unknown norm '" + name + "'");
}

const char* norm_name(NormKind k) {
    switch (k) {
        case NormKind::L1: return "L1";
        case NormKind::L2: return "L2";
        case NormKind::LInf: return "LInf";
        case NormKind::Operator: return "Operator";
        case NormKind::Frobenius: return "Frobenius";
        case NormKind::Nuclear: return "Nuclear";
        case NormKind::DirectSum: return "DirectSum";
    }
    return "?";
}

std::size_t positive_size(const json& j, const char* what) {
    require(j.is_number_integer() && j.get<long long>() > 0, std::string(what) + " must be a positive integer");
    return j.get<std::size_t>();
}

std::vector<double> numbers(const json& j, const char* what) {
    require(j.is_array(), std::string(what) + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) {
        require(v.is_number(), std::string(what) + " must be an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

double number(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    require(j.at(key).is_number(), std::string(key) + " must be a number");
    return j.at(key).get<double>();
}

Vector vector_in(const NormedSpace& space, const json& j, const char* what) {
    if (j.is_number()) {
        require(space.dim() == 1, std::string(what) + ": scalar given for a non-scalar space");
        return Vector(space, {j.get<double>()});
    }
    auto v = numbers(j, what);
    require(v.size() == space.dim(), std::string(what) + ": wrong number of coordinates");
    return Vector(space, std::move(v));
}

/// [[t, c_1, ..., c_d], ...]
std::vector<std::pair<double, Vector>> timed_rows(const NormedSpace& space, const json& j, const char* what) {
    require(j.is_array(), std::string(what) + " must be an array of [t, coords...] rows");
    std::vector<std::pair<double, Vector>> out;
    for (const auto& row : j) {
        auto v = numbers(row, what);
        require(v.size() == space.dim() + 1, std::string(what) + ": each row needs a time and " +
                                                 std::to_string(space.dim()) + " coordinates");
        out.emplace_back(v[0], Vector(space, std::vector<double>(v.begin() + 1, v.end())));
    }
    return out;
}

std::vector<Jump> jumps_from(const NormedSpace& space, const json& j) {
    std::vector<Jump> out;
    for (auto& [t, v] : timed_rows(space, j, "jumps")) out.push_back(Jump{t, v});
    return out;
}

CadlagPath smooth_path(const json& spec) {
    const std::string id = spec.at("id").get<std::string>();
    const double horizon = number(spec, "horizon", 1.0);
    require(horizon > 0.0, "smooth path: horizon must be positive");
    const std::size_t knots = spec.contains("knots") ? positive_size(spec.at("knots"), "knots") : 1025;
    require(knots >= 2, "smooth path: need at least two knots");
    const double scale = number(spec, "scale", 1.0);
    const double two_pi = 2.0 * std::numbers::pi;
    std::function<std::vector<double>(double)> f;
    if (id == "identity")
        f = [](double t) { return std::vector<double>{t}; };
    else if (id == "parabola")
        f = [](double t) { return std::vector<double>{t * t}; };
    else if (id == "sin")
        f = [two_pi](double t) { return std::vector<double>{std::sin(two_pi * t)}; };
    else if (id == "cos")
        f = [two_pi](double t) { return std::vector<double>{std::cos(two_pi * t)}; };
    else if (id == "circle")
        f = [two_pi](double t) { return std::vector<double>{std::cos(two_pi * t), std::sin(two_pi * t)}; };
    else
        throw ContractError("unknown smooth path id '" + id + "'");
    const std::size_t d = f(0.0).size();
    const auto space = spec.contains("space") ? space_from_json(spec.at("space")) : NormedSpace::l2(d);
    require(space.dim() == d, "smooth path: space dimension does not match the fixture");
    Vector offset(space);
    if (spec.contains("offset")) {
        const auto& o = spec.at("offset");
        if (o.is_number())
            for (std::size_t k = 0; k < d; ++k) offset[k] = o.get<double>();
        else
            offset = vector_in(space, o, "offset");
    }
    std::vector<double> times;
    std::vector<Vector> values;
    for (std::size_t i = 0; i < knots; ++i) {
        const double t = i + 1 == knots ? horizon : horizon * static_cast<double>(i) / static_cast<double>(knots - 1);
        auto c = f(t);
        for (std::size_t k = 0; k < d; ++k) c[k] = scale * c[k] + offset[k];
        times.push_back(t);
        values.emplace_back(space, std::move(c));
    }
    return CadlagPath(space, horizon, std::move(times), std::move(values));
}

}  // namespace

NormedSpace space_from_json(const json& j) {
    if (j.is_number_integer()) return NormedSpace::l2(positive_size(j, "space dimension"));
    require(j.is_object(), "space must be an object or a dimension");
    const auto kind = norm_kind(j.value("norm", std::string("L2")));
    switch (kind) {
        case NormKind::L1: return NormedSpace::l1(positive_size(j.at("dim"), "dim"));
        case NormKind::L2: return NormedSpace::l2(positive_size(j.at("dim"), "dim"));
        case NormKind::LInf: return NormedSpace::linf(positive_size(j.at("dim"), "dim"));
        case NormKind::DirectSum: {
            std::vector<NormedSpace> parts;
            require(j.contains("components") && j.at("components").is_array(), "DirectSum needs components");
            for (const auto& c : j.at("components")) parts.push_back(space_from_json(c));
            return NormedSpace::direct_sum(std::move(parts));
        }
        default:
            return NormedSpace::matrix(kind, positive_size(j.at("rows"), "rows"), positive_size(j.at("cols"), "cols"));
    }
}

json space_to_json(const NormedSpace& s) {
    json j{{"norm", norm_name(s.kind())}};
    if (s.kind() == NormKind::DirectSum) {
        j["components"] = json::array();
        for (const auto& c : s.components()) j["components"].push_back(space_to_json(c));
    } else if (s.is_matrix()) {
        j["rows"] = s.rows();
        j["cols"] = s.cols();
    } else {
        j["dim"] = s.dim();
    }
    return j;
}

json vector_to_json(const Vector& v) { return json(std::vector<double>(v.coords().begin(), v.coords().end())); }

CadlagPath build_path(const json& spec, std::uint64_t seed) {
    require(spec.is_object() && spec.contains("kind"), "path spec needs a kind");
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "scaled_walk") {
        const std::size_t steps = positive_size(spec.at("steps"), "steps");
        if (spec.value("aligned", true))
            require(std::has_single_bit(steps), "scaled_walk: aligned walks need a power-of-two step count");
        const double horizon = number(spec, "horizon", 1.0);
        std::vector<Jump> inject;
        if (spec.contains("inject")) inject = jumps_from(NormedSpace::l2(1), spec.at("inject"));
        const std::uint64_t s = spec.contains("seed") ? spec.at("seed").get<std::uint64_t>() : seed;
        return scaled_walk(steps, horizon, s, inject);
    }
    if (kind == "pure_jump" || kind == "constant") {
        const double horizon = number(spec, "horizon", 1.0);
        const json& start = kind == "constant" ? spec.at("value") : spec.value("start", json(0.0));
        NormedSpace space = spec.contains("space") ? space_from_json(spec.at("space"))
                                                   : NormedSpace::l2(start.is_array() ? start.size() : 1);
        const Vector v = vector_in(space, start, "start");
        if (kind == "constant") return CadlagPath::constant(v, horizon);
        return CadlagPath::pure_jump(v, horizon, spec.contains("jumps") ? jumps_from(space, spec.at("jumps"))
                                                                         : std::vector<Jump>{});
    }
    if (kind == "smooth") return smooth_path(spec);
    if (kind == "explicit") {
        const auto space = space_from_json(spec.at("space"));
        const double horizon = spec.at("horizon").get<double>();
        std::vector<double> times;
        std::vector<Vector> values;
        for (auto& [t, v] : timed_rows(space, spec.at("skeleton"), "skeleton")) {
            times.push_back(t);
            values.push_back(v);
        }
        const std::string interp = spec.value("interpolation", std::string("linear"));
        require(interp == "linear" || interp == "step", "interpolation must be 'linear' or 'step'");
        return CadlagPath(space, horizon, std::move(times), std::move(values),
                          interp == "linear" ? Interpolation::Linear : Interpolation::StepRight,
                          spec.contains("jumps") ? jumps_from(space, spec.at("jumps")) : std::vector<Jump>{});
    }
    if (kind == "sum" || kind == "pair") {
        const char* key = kind == "sum" ? "terms" : "components";
        require(spec.contains(key) && spec.at(key).is_array() && !spec.at(key).empty(),
                kind + " needs a non-empty '" + key + "' array");
        const auto& parts = spec.at(key);
        CadlagPath acc = build_path(parts[0], seed);
        for (std::size_t i = 1; i < parts.size(); ++i) {
            const CadlagPath next = build_path(parts[i], seed);
            acc = kind == "sum" ? acc + next : pair(acc, next);
        }
        return acc;
    }
    throw ContractError("unknown path kind '" + kind + "'");
}

json path_to_json(const CadlagPath& x) {
    json skeleton = json::array();
    for (std::size_t i = 0; i < x.knot_times().size(); ++i) {
        json row{x.knot_times()[i]};
        const Vector v = x.knot_value(i);
        for (double c : v.coords()) row.push_back(c);
        skeleton.push_back(std::move(row));
    }
    json jumps = json::array();
    for (const auto& j : x.jumps()) {
        json row{j.time};
        for (double c : j.delta.coords()) row.push_back(c);
        jumps.push_back(std::move(row));
    }
    return json{{"kind", "explicit"},          {"space", space_to_json(x.space())}, {"horizon", x.horizon()},
                {"skeleton", std::move(skeleton)}, {"interpolation", "linear"},         {"jumps", std::move(jumps)}};
}

PartitionSequence build_partition(const json& spec, double horizon, const CadlagPath* x) {
    if (spec.is_null()) return PartitionSequence::dyadic(horizon);
    const json s = spec.is_string() ? json{{"kind", spec}} : spec;
    const std::string kind = s.at("kind").get<std::string>();
    const double h = number(s, "horizon", horizon);
    if (kind == "dyadic") return PartitionSequence::dyadic(h);
    if (kind == "integer") return PartitionSequence::integer(h);
    if (kind == "uniform")
        return PartitionSequence::uniform(h, s.contains("k0") ? positive_size(s.at("k0"), "k0") : 1,
                                          s.contains("growth") ? positive_size(s.at("growth"), "growth") : 2);
    if (kind == "oscillation") {
        require(x != nullptr, "oscillation-controlled partitions need a path");
        return PartitionSequence::oscillation_controlled(*x, number(s, "eps0", 1.0), number(s, "ratio", 0.5));
    }
    if (kind == "custom") {
        std::vector<std::vector<double>> levels;
        require(s.contains("levels") && s.at("levels").is_array(), "custom partitions need 'levels'");
        for (const auto& l : s.at("levels")) levels.push_back(numbers(l, "levels"));
        return PartitionSequence::custom(h, std::move(levels));
    }
    throw ContractError("unknown partition kind '" + kind + "'");
}

BilinearMap build_bilinear(const json& spec, const NormedSpace& left, const NormedSpace& right) {
    const json s = spec.is_string() ? json{{"kind", spec}} : spec;
    const std::string kind = s.at("kind").get<std::string>();
    if (kind == "inner") return BilinearMap::inner(left, right);
    if (kind == "outer") return BilinearMap::outer(left, right, norm_kind(s.value("norm", std::string("Frobenius"))));
    if (kind == "tensor") {
        const auto g = space_from_json(s.at("codomain"));
        return BilinearMap::tensor(left, right, g, numbers(s.at("coefficients"), "coefficients"));
    }
    if (kind == "evaluation") {
        const auto g = space_from_json(s.at("codomain"));
        require(left.dim() == g.dim() * right.dim(), "evaluation: left space must hold maps right -> codomain");
        return BilinearMap::evaluation(right, g);
    }
    throw ContractError("unknown bilinear kind '" + kind + "'");
}

StallRule rule_from_json(const json& j) {
    StallRule r;
    if (!j.is_object()) return r;
    r.tol_limit = number(j, "tol_limit", r.tol_limit);
    r.ratio = number(j, "ratio", r.ratio);
    if (j.contains("window")) r.window = positive_size(j.at("window"), "window");
    require(r.tol_limit > 0.0 && r.ratio > 1.0, "tolerances: need tol_limit > 0 and ratio > 1");
    return r;
}

namespace {

struct CommandName {
    Command c;
    const char* name;
};

constexpr CommandName kCommands[] = {{Command::QV, "qv"},
                                     {Command::TwoVar, "two-var"},
                                     {Command::Integrate, "integrate"},
                                     {Command::ItoCheck, "ito-check"},
                                     {Command::IbpCheck, "ibp-check"},
                                     {Command::PartitionDiag, "partition-diag"},
                                     {Command::WeightedQVCheck, "lemma2g-check"}};

}  // namespace

Command parse_command(const std::string& name) {
    for (const auto& c : kCommands)
        if (name == c.name) return c.c;
    throw ContractError("unknown subcommand '" + name + "'");
}

const char* to_string(Command c) {
    for (const auto& k : kCommands)
        if (k.c == c) return k.name;
    return "?";
}

std::vector<std::string> command_names() {
    std::vector<std::string> out;
    for (const auto& c : kCommands) out.emplace_back(c.name);
    return out;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

class Csv {
public:
    explicit Csv(std::vector<std::string> header) : width_(header.size()) { row_strings(header); }

    void row(const std::vector<double>& values) {
        require(values.size() == width_, "csv: row width does not match the header");
        std::vector<std::string> cells;
        for (double v : values) cells.push_back(format_double(v));
        row_strings(cells);
    }
    std::string str() const { return out_.str(); }

private:
    void row_strings(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << '\n';
    }
    std::size_t width_;
    std::ostringstream out_;
};

std::vector<std::string> coord_columns(const std::string& prefix, std::size_t d) {
    std::vector<std::string> out;
    for (std::size_t k = 0; k < d; ++k) out.push_back(prefix + std::to_string(k));
    return out;
}

template <class... Parts>
std::vector<std::string> columns(Parts&&... parts) {
    std::vector<std::string> out;
    auto add = [&out](const auto& p) {
        if constexpr (std::is_convertible_v<decltype(p), std::string>)
            out.emplace_back(p);
        else
            out.insert(out.end(), p.begin(), p.end());
    };
    (add(parts), ...);
    return out;
}

std::vector<double> cat(std::initializer_list<double> head, std::span<const double> tail = {},
                        std::initializer_list<double> after = {}) {
    std::vector<double> out(head);
    out.insert(out.end(), tail.begin(), tail.end());
    out.insert(out.end(), after.begin(), after.end());
    return out;
}

json verdict_json(Verdict v) { return to_string(v); }

json trace_json(const std::vector<double>& v) {
    json out = json::array();
    for (double x : v) out.push_back(std::isfinite(x) ? json(x) : json(nullptr));
    return out;
}

json n_trace_json(const std::vector<double>& v) {
    json out = json::array();
    for (std::size_t n = 0; n < v.size(); ++n) out.push_back(json{n, v[n]});
    return out;
}

json condition_c_json(const ConditionCReport& c) {
    json traces = json::array();
    for (const auto& t : c.c2_traces)
        traces.push_back(json{{"time", t.time}, {"residuals", trace_json(t.residuals)}, {"verdict", verdict_json(t.verdict)}});
    return json{{"passes", c.passes()},         {"c1", c.c1},
                {"c2", c.c2},                   {"c3", c.c3},
                {"c3_monotone", c.c3_monotone}, {"eps_grid", c.eps_grid},
                {"c1_onset", c.c1_onset},       {"c3_tail", trace_json(c.c3_tail)},
                {"c2_traces", std::move(traces)}};
}

json left_approx_json(const LeftApproximationReport& r) {
    json failing = json::array();
    for (std::size_t i = 0; i < r.times.size(); ++i)
        if (r.verdicts[i] != Verdict::ConvergingToZero)
            failing.push_back(json{{"time", r.times[i]}, {"residuals", trace_json(r.residuals[i])}});
    return json{{"passes", r.passes}, {"sample_times", r.times.size()}, {"failing", std::move(failing)}};
}

struct Context {
    const json& cfg;
    std::uint64_t seed;
    int n_max;
    StallRule rule;
    std::optional<double> residual_tol;

    CadlagPath path(const char* key) const {
        require(cfg.contains(key), std::string("scenario needs a '") + key + "' path");
        return build_path(cfg.at(key), seed);
    }
    std::vector<double> t_grid(double horizon) const {
        if (cfg.contains("t_grid")) return numbers(cfg.at("t_grid"), "t_grid");
        if (cfg.contains("t")) return {cfg.at("t").get<double>()};
        return {horizon};
    }
    double t(double horizon) const {
        const auto g = t_grid(horizon);
        require(g.size() == 1, "this subcommand takes a single t");
        require(g[0] >= 0.0 && g[0] <= horizon, "t outside [0, T]");
        return g[0];
    }
    PartitionSequence partition(double horizon, const CadlagPath* x) const {
        return build_partition(cfg.contains("partition") ? cfg.at("partition") : json(), horizon, x);
    }
    std::vector<Vector> functionals(const NormedSpace& g) const {
        std::vector<Vector> out;
        if (cfg.contains("functionals"))
            for (const auto& z : cfg.at("functionals")) out.push_back(vector_in(g, z, "functional"));
        return out;
    }
    bool passes(const std::vector<double>& residual) const {
        if (converges_to_zero(residual, rule)) return true;
        return residual_tol && !residual.empty() && residual.back() <= *residual_tol;
    }
    QVConvention convention() const {
        const std::string c = cfg.value("convention", std::string("truncated"));
        if (c == "truncated") return QVConvention::Truncated;
        if (c == "indicator_left") return QVConvention::IndicatorLeft;
        throw ContractError("convention must be 'truncated' or 'indicator_left'");
    }
};

json header(const Context& ctx, Command cmd, const std::string& id) {
    return json{{"scenario_id", id}, {"command", to_string(cmd)}, {"n_max", ctx.n_max}, {"seed", ctx.seed}};
}

ScenarioOutput run_qv(const Context& ctx, const std::string& id) {
    const CadlagPath x = ctx.path("x");
    const CadlagPath y = ctx.cfg.contains("y") ? ctx.path("y") : x;
    const auto seq = ctx.partition(x.horizon(), &x);
    std::vector<double> grid;
    if (ctx.cfg.contains("t_grid") || ctx.cfg.contains("t")) grid = ctx.t_grid(x.horizon());
    QVPathResult res = [&] {
        if (ctx.cfg.value("scalar", false)) return scalar_qv(x, seq, grid, ctx.n_max, ctx.rule);
        const json bspec = ctx.cfg.value("bilinear", json("outer"));
        QVRequest req{x, y, build_bilinear(bspec, x.space(), y.space()), seq, grid, ctx.convention(), ctx.n_max,
                      {}, ctx.rule};
        req.functionals = ctx.functionals(req.b.codomain());
        return qv_limit(req);
    }();

    const std::size_t d = res.codomain.dim();
    Csv csv(columns("n", "mesh", "t", coord_columns("v", d), "delta_norm"));
    json points = json::array();
    for (const auto& p : res.points) {
        for (const auto& e : p.trace.entries())
            csv.row(cat({double(e.n), e.mesh, e.t}, e.value, {e.delta_norm}));
        points.push_back(json{{"t", p.t},
                              {"limit", vector_to_json(p.limit.value)},
                              {"uncertainty", p.limit.uncertainty},
                              {"established", p.limit.established}});
    }
    json jumps = json::array();
    for (const auto& jc : res.jump_checks)
        jumps.push_back(json{{"time", jc.time},
                             {"expected", vector_to_json(jc.expected)},
                             {"residuals", trace_json(jc.residuals)},
                             {"verdict", verdict_json(jc.verdict)}});
    const bool pass = res.established && res.jumps_ok;
    json rep = header(ctx, Command::QV, id);
    rep["codomain"] = space_to_json(res.codomain);
    rep["established"] = res.established;
    rep["jumps_ok"] = res.jumps_ok;
    rep["points"] = std::move(points);
    rep["jump_checks"] = std::move(jumps);
    rep["weak_established"] = res.weak_established;
    rep["pass"] = pass;
    return ScenarioOutput{id, csv.str(), std::move(rep), pass};
}

ScenarioOutput run_two_var(const Context& ctx, const std::string& id) {
    const CadlagPath x = ctx.path("x");
    const auto seq = ctx.partition(x.horizon(), &x);
    const double t = ctx.t(x.horizon());
    const TwoVariation tv = two_variation(x, seq, t, ctx.n_max);
    Csv csv({"n", "mesh", "t", "value", "delta_norm"});
    for (std::size_t n = 0; n < tv.level_sums.size(); ++n) {
        const double delta = n == 0 ? std::nan("") : std::abs(tv.level_sums[n] - tv.level_sums[n - 1]);
        csv.row({double(n), seq.at(static_cast<int>(n)).mesh(), t, tv.level_sums[n], delta});
    }
    json rep = header(ctx, Command::TwoVar, id);
    rep["t"] = t;
    rep["value"] = tv.value;
    rep["level_sums"] = trace_json(tv.level_sums);
    rep["growing"] = tv.growing;
    rep["pass"] = !tv.growing;
    return ScenarioOutput{id, csv.str(), std::move(rep), !tv.growing};
}

ScenarioOutput run_integrate(const Context& ctx, const std::string& id) {
    const CadlagPath f = ctx.path("measure");
    const CadlagPath g = ctx.path("integrand");
    const auto seq = ctx.partition(f.horizon(), &f);
    const double t = ctx.t(f.horizon());
    const json bspec = ctx.cfg.value("bilinear", json("inner"));
    const auto b = build_bilinear(bspec, g.space(), f.space());
    const FVMeasure mu(f);
    const auto rep_if = if_vs_stieltjes(mu, g, b, seq, t, ctx.n_max, ctx.rule);

    const std::size_t d = b.codomain().dim();
    Csv csv(columns("n", "mesh", "t", coord_columns("v", d), "residual"));
    for (int n = 0; n <= ctx.n_max; ++n) {
        const Partition pi = seq.at(n);
        const Vector s = left_riemann_sum(mu, g, b, pi, t);
        csv.row(cat({double(n), pi.mesh(), t}, s.coords(), {rep_if.residual[static_cast<std::size_t>(n)]}));
    }
    const bool pass = ctx.passes(rep_if.residual);
    json rep = header(ctx, Command::Integrate, id);
    rep["t"] = t;
    rep["stieltjes"] = vector_to_json(rep_if.stieltjes);
    rep["dominated_bound"] = dominated_bound(mu, g, b, 0.0, t);
    rep["residual_trace"] = n_trace_json(rep_if.residual);
    rep["verdict"] = verdict_json(rep_if.verdict);
    rep["left_approximation"] = left_approx_json(rep_if.monitor);
    rep["reported_only"] = !rep_if.monitor.passes;
    rep["pass"] = pass;
    return ScenarioOutput{id, csv.str(), std::move(rep), pass};
}

ScenarioOutput run_ito(const Context& ctx, const std::string& id) {
    const CadlagPath x = ctx.path("x");
    const CadlagPath a = ctx.cfg.contains("a") ? ctx.path("a") : CadlagPath::constant(Vector(NormedSpace::l2(1)), x.horizon());
    const std::string fid = ctx.cfg.value("function", std::string("quadratic"));
    SmoothFunction f = make_fixture(fid, a.dim(), x.dim());
    const json bspec = ctx.cfg.value("bilinear", json("outer"));
    ItoScenario sc{id,
                   a,
                   x,
                   f,
                   build_bilinear(bspec, x.space(), x.space()),
                   ctx.partition(x.horizon(), &x),
                   ctx.t_grid(x.horizon()),
                   ctx.n_max,
                   ctx.functionals(f.codomain),
                   ctx.rule,
                   ctx.cfg.value("monitors", true)};
    const ItoReport r = ito_verify(sc);

    const std::size_t g = f.codomain.dim();
    Csv csv(columns("n", "mesh", "t", coord_columns("t2_", g), coord_columns("t3_", g), "residual"));
    json points = json::array();
    bool pass = r.testable;
    for (const auto& p : r.points) {
        for (std::size_t n = 0; n < p.t2.size(); ++n) {
            std::vector<double> row{double(n), p.mesh[n], p.t};
            row.insert(row.end(), p.t2[n].coords().begin(), p.t2[n].coords().end());
            if (r.testable) {
                row.insert(row.end(), p.t3[n].coords().begin(), p.t3[n].coords().end());
                row.push_back(p.residual[n]);
            } else {
                row.insert(row.end(), g + 1, std::nan(""));
            }
            csv.row(row);
        }
        json terms{{"T1", vector_to_json(p.t1)},
                   {"T1_alt", vector_to_json(p.t1_alt)},
                   {"T2", vector_to_json(p.t2.back())},
                   {"T4", vector_to_json(p.t4)},
                   {"LHS", vector_to_json(p.lhs)}};
        if (r.testable) terms["T3"] = vector_to_json(p.t3.back());
        if (p.t3_limit) terms["T3_limit"] = vector_to_json(*p.t3_limit);
        json pt{{"t", p.t},
                {"terms", std::move(terms)},
                {"t1_consistency", p.t1_consistency},
                {"residual_trace", n_trace_json(p.residual)},
                {"verdict", r.testable ? verdict_json(p.verdict) : json(nullptr)},
                {"weak_converging", p.weak_converging}};
        pass = pass && ctx.passes(p.residual);
        points.push_back(std::move(pt));
    }
    json rep = header(ctx, Command::ItoCheck, id);
    rep["function"] = fid;
    rep["testable"] = r.testable;
    if (!r.testable) rep["untestable_reason"] = r.untestable_reason;
    const json& last = points.back();
    rep["t"] = last["t"];
    rep["terms"] = last["terms"];
    rep["residual_trace"] = last["residual_trace"];
    rep["points"] = std::move(points);
    json monitors{{"qvStatus", r.qv_status}};
    monitors["conditionC"] = r.condition_c ? condition_c_json(*r.condition_c) : json(nullptr);
    monitors["leftApprox"] = r.left_approx ? left_approx_json(*r.left_approx) : json(nullptr);
    rep["monitors"] = std::move(monitors);
    rep["pass"] = pass;
    return ScenarioOutput{id, csv.str(), std::move(rep), pass};
}

ScenarioOutput run_ibp(const Context& ctx, const std::string& id) {
    const CadlagPath a = ctx.path("a");
    const CadlagPath x = ctx.path("x");
    const auto seq = ctx.partition(x.horizon(), &x);
    const auto pts = integration_by_parts(a, x, seq, ctx.t_grid(x.horizon()), ctx.n_max, ctx.convention());
    Csv csv({"n", "mesh", "t", "residual"});
    json points = json::array();
    bool pass = true;
    for (const auto& p : pts) {
        for (std::size_t n = 0; n < p.residual.size(); ++n) csv.row({double(n), p.mesh[n], p.t, p.residual[n]});
        const bool ok = ctx.passes(p.residual);
        pass = pass && ok;
        points.push_back(json{{"t", p.t},
                              {"target", vector_to_json(p.target)},
                              {"residual_trace", n_trace_json(p.residual)},
                              {"verdict", verdict_json(verdict_of(p.residual, ctx.rule))},
                              {"pass", ok}});
    }
    json rep = header(ctx, Command::IbpCheck, id);
    rep["convention"] = to_string(ctx.convention());
    rep["points"] = std::move(points);
    rep["pass"] = pass;
    return ScenarioOutput{id, csv.str(), std::move(rep), pass};
}

ScenarioOutput run_partition_diag(const Context& ctx, const std::string& id) {
    const CadlagPath x = ctx.path("x");
    const auto seq = ctx.partition(x.horizon(), &x);
    const double t = ctx.t(x.horizon());
    const ScalarTrace osc = controls_oscillation(seq, x, t, ctx.n_max, ctx.rule);
    const ScalarTrace flat = no_flat_interval(seq, x, t, ctx.n_max, ctx.rule);
    const auto exhaust = exhausts_jumps(seq, x, ctx.n_max);
    const auto cc = condition_C_diagnostic(seq, x, t, default_eps_grid(x), ctx.n_max, ctx.rule);
    const auto la = approximates_from_left(seq, x, monitor_times(x, t), ctx.n_max, ctx.rule);
    const Verdict mesh_verdict = verdict_of(osc.mesh, ctx.rule);

    Csv csv({"n", "mesh", "t", "osc_minus", "flat_gap"});
    for (std::size_t n = 0; n < osc.values.size(); ++n)
        csv.row({double(osc.n[n]), osc.mesh[n], t, osc.values[n], flat.values[n]});
    bool all_exhausted = true;
    json ex = json::array();
    for (const auto& e : exhaust) {
        all_exhausted = all_exhausted && e.exhausted;
        ex.push_back(json{{"time", e.time}, {"exhausted", e.exhausted}, {"onset", e.onset}});
    }
    const bool controls = osc.verdict == Verdict::ConvergingToZero;
    const bool pass = controls && cc.passes() && la.passes;
    json rep = header(ctx, Command::PartitionDiag, id);
    rep["t"] = t;
    rep["partition"] = to_string(seq.kind());
    rep["oscillation_control"] = json{{"values", trace_json(osc.values)}, {"verdict", verdict_json(osc.verdict)}};
    rep["mesh"] = json{{"values", trace_json(osc.mesh)}, {"verdict", verdict_json(mesh_verdict)}};
    rep["exhausts_jumps"] = json{{"all", all_exhausted}, {"jumps", std::move(ex)}};
    rep["no_flat_interval"] = json{{"values", trace_json(flat.values)}, {"verdict", verdict_json(flat.verdict)}};
    rep["condition_c"] = condition_c_json(cc);
    rep["left_approximation"] = left_approx_json(la);
    rep["triple"] = json{{"controls_oscillation", controls},
                         {"mesh_to_zero", mesh_verdict == Verdict::ConvergingToZero},
                         {"condition_c", cc.passes()}};
    rep["pass"] = pass;
    return ScenarioOutput{id, csv.str(), std::move(rep), pass};
}

ScenarioOutput run_weighted_qv(const Context& ctx, const std::string& id) {
    const CadlagPath x = ctx.path("x");
    const auto seq = ctx.partition(x.horizon(), &x);
    const double t = ctx.t(x.horizon());
    const json bspec = ctx.cfg.value("bilinear", json("outer"));
    const auto b = build_bilinear(bspec, x.space(), x.space());
    const auto g = ctx.cfg.contains("codomain") ? space_from_json(ctx.cfg.at("codomain")) : NormedSpace::l2(1);
    const CadlagPath xi_raw = ctx.path("xi");
    const auto maps = LinearMap::space_of(b.codomain(), g);
    require(xi_raw.dim() == maps.dim(), "lemma2g-check: xi must have dim(codomain) * dim(B codomain) coordinates");
    std::vector<double> q_grid;
    if (ctx.cfg.contains("q_grid")) q_grid = numbers(ctx.cfg.at("q_grid"), "q_grid");
    const auto r = weighted_qv_vs_integral(xi_raw, g, x, b, seq, t, ctx.n_max, q_grid, ctx.functionals(g), ctx.rule,
                                           ctx.cfg.value("monitors", true));
    Csv csv(columns("n", "mesh", "t", coord_columns("v", g.dim()), "residual"));
    for (std::size_t n = 0; n < r.lhs.size(); ++n)
        csv.row(cat({double(n), r.mesh[n], t}, r.lhs[n].coords(), {r.residual[n]}));
    const bool pass = ctx.passes(r.residual);
    json rep = header(ctx, Command::WeightedQVCheck, id);
    rep["t"] = t;
    rep["rhs"] = vector_to_json(r.rhs);
    rep["residual_trace"] = n_trace_json(r.residual);
    rep["verdict"] = verdict_json(r.verdict);
    rep["qv_established"] = r.qv_established;
    rep["condition_c"] = r.condition_c ? condition_c_json(*r.condition_c) : json(nullptr);
    rep["left_approximation"] = left_approx_json(r.left_approx);
    rep["weak_converging"] = r.weak_converging;
    rep["pass"] = pass;
    return ScenarioOutput{id, csv.str(), std::move(rep), pass};
}

std::string scenario_id(const json& cfg, std::size_t index, bool batch) {
    if (cfg.contains("id")) {
        const std::string id = cfg.at("id").get<std::string>();
        require(!id.empty() && id.find_first_of("/\\") == std::string::npos && id != "." && id != "..",
                "scenario id must be a plain directory name");
        return id;
    }
    return batch ? "scenario-" + std::to_string(index) : "scenario";
}

}  // namespace

ScenarioOutput run_scenario(Command command, const json& config, const RunOptions& opts) {
    require(config.is_object(), "scenario config must be a JSON object");
    if (config.contains("command"))
        require(parse_command(config.at("command").get<std::string>()) == command,
                "scenario was written for a different subcommand");
    const int default_n = command == Command::PartitionDiag ? 10 : 12;
    Context ctx{config,
                opts.seed ? *opts.seed : config.value("seed", std::uint64_t{42}),
                opts.n_max ? *opts.n_max : config.value("n_max", default_n),
                rule_from_json(config.value("tolerances", json::object())),
                std::nullopt};
    require(ctx.n_max >= 0 && ctx.n_max <= 30, "n_max must lie in [0, 30]");
    const json tol = config.value("tolerances", json::object());
    if (tol.contains("residual_tol")) ctx.residual_tol = tol.at("residual_tol").get<double>();
    const std::string id = scenario_id(config, 0, false);
    switch (command) {
        case Command::QV: return run_qv(ctx, id);
        case Command::TwoVar: return run_two_var(ctx, id);
        case Command::Integrate: return run_integrate(ctx, id);
        case Command::ItoCheck: return run_ito(ctx, id);
        case Command::IbpCheck: return run_ibp(ctx, id);
        case Command::PartitionDiag: return run_partition_diag(ctx, id);
        case Command::WeightedQVCheck: return run_weighted_qv(ctx, id);
    }
    throw ContractError("unknown subcommand");
}

void write_outputs(const std::filesystem::path& out, const ScenarioOutput& result) {
    const auto dir = out / result.id;
    std::filesystem::create_directories(dir);
    std::ofstream csv(dir / "trace.csv", std::ios::binary);
    csv << result.csv;
    std::ofstream rep(dir / "report.json", std::ios::binary);
    rep << result.report.dump(2) << '\n';
    if (!csv || !rep) throw std::runtime_error("cannot write outputs under " + dir.string());
}

BatchOutcome run_batch(Command command, const json& config, const std::filesystem::path& out, const RunOptions& opts) {
    std::vector<json> docs;
    const bool batch = config.is_object() && config.contains("scenarios");
    if (batch) {
        require(config.at("scenarios").is_array() && !config.at("scenarios").empty(),
                "'scenarios' must be a non-empty array");
        for (const auto& s : config.at("scenarios")) docs.push_back(s);
    } else {
        docs.push_back(config);
    }
    std::set<std::string> seen;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        require(docs[i].is_object(), "scenario config must be a JSON object");
        const std::string id = scenario_id(docs[i], i, batch);
        require(seen.insert(id).second, "duplicate scenario id '" + id + "'");
        docs[i]["id"] = id;
    }

    std::vector<std::optional<ScenarioOutput>> results(docs.size());
    std::vector<std::string> errors(docs.size());
    parallel_for(docs.size(), [&](std::size_t i) {
        try {
            results[i] = run_scenario(command, docs[i], opts);
            write_outputs(out, *results[i]);
        } catch (const json::exception& e) {
            errors[i] = e.what();
            results[i].reset();
        } catch (const ContractError& e) {
            errors[i] = e.what();
            results[i].reset();
        }
    });

    BatchOutcome outcome{{}, {}, 0};
    bool failed = false;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (results[i]) {
            failed = failed || !results[i]->pass;
            outcome.outputs.push_back(std::move(*results[i]));
        } else {
            outcome.errors.push_back(docs[i].at("id").get<std::string>() + ": " + errors[i]);
        }
    }
    outcome.exit_code = !outcome.errors.empty() ? 1 : failed ? 2 : 0;
    return outcome;
}

}  // namespace follmer

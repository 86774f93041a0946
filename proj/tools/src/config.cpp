// SPDX-License-Identifier: Apache-2.0
#include "sfde/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "sfde/errors.hpp"

namespace sfde::harness {

using nlohmann::json;

std::string_view to_string(ExperimentKind k) noexcept {
    switch (k) {
        case ExperimentKind::Simulate: return "simulate";
        case ExperimentKind::Couple: return "couple";
        case ExperimentKind::Harnack: return "harnack";
        case ExperimentKind::StrongFeller: return "strong-feller";
        case ExperimentKind::Stationary: return "stationary";
    }
    return "?";
}

std::optional<ExperimentKind> parse_experiment(std::string_view s) noexcept {
    for (auto k : {ExperimentKind::Simulate, ExperimentKind::Couple, ExperimentKind::Harnack,
                   ExperimentKind::StrongFeller, ExperimentKind::Stationary})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

namespace {

std::string describe(const std::string& field, std::optional<int> line, const std::string& message) {
    std::string out = field;
    if (line) out += " (line " + std::to_string(*line) + ")";
    return out + ": " + message;
}

}  // namespace

ConfigError::ConfigError(std::string field, std::optional<int> line, const std::string& message)
    : std::runtime_error(describe(field, line, message)), field_(std::move(field)), line_(line) {}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

__extension__ using i128 = __int128;

bool fits(i128 v) { return v <= INT64_MAX && v >= INT64_MIN; }

ExactValue normalized(std::string text, i128 num, i128 den) {
    if (den < 0) {
        num = -num;
        den = -den;
    }
    i128 a = num < 0 ? -num : num, b = den;
    while (b != 0) {
        const i128 t = a % b;
        a = b;
        b = t;
    }
    if (a > 1) {
        num /= a;
        den /= a;
    }
    if (!fits(num) || !fits(den)) throw std::invalid_argument("value out of 64-bit rational range");
    return {std::move(text), static_cast<std::int64_t>(num), static_cast<std::int64_t>(den)};
}

i128 parse_integer(std::string_view s) {
    if (s.empty()) throw std::invalid_argument("empty integer");
    bool neg = false;
    if (s.front() == '+' || s.front() == '-') {
        neg = s.front() == '-';
        s.remove_prefix(1);
    }
    if (s.empty() || s.size() > 18) throw std::invalid_argument("bad integer");
    i128 v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') throw std::invalid_argument("bad integer");
        v = v * 10 + (c - '0');
    }
    return neg ? -v : v;
}

std::string trim(std::string_view s) {
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string_view::npos) return {};
    const auto b = s.find_last_not_of(" \t");
    return std::string(s.substr(a, b - a + 1));
}

}  // namespace

ExactValue parse_exact(std::string_view raw) {
    const std::string text = trim(raw);
    std::string_view s = text;
    if (const auto slash = s.find('/'); slash != std::string_view::npos) {
        const i128 num = parse_integer(trim(s.substr(0, slash)));
        const i128 den = parse_integer(trim(s.substr(slash + 1)));
        if (den == 0) throw std::invalid_argument("zero denominator");
        return normalized(text, num, den);
    }
    std::string_view mant = s;
    int exp10 = 0;
    if (const auto e = s.find_first_of("eE"); e != std::string_view::npos) {
        mant = s.substr(0, e);
        const auto es = s.substr(e + 1);
        const auto r = std::from_chars(es.data() + (es.size() && es[0] == '+' ? 1 : 0), es.data() + es.size(), exp10);
        if (r.ec != std::errc() || r.ptr != es.data() + es.size()) throw std::invalid_argument("bad exponent");
    }
    bool neg = false;
    if (!mant.empty() && (mant.front() == '+' || mant.front() == '-')) {
        neg = mant.front() == '-';
        mant.remove_prefix(1);
    }
    const auto dot = mant.find('.');
    std::string digits(mant.substr(0, dot));
    if (dot != std::string_view::npos) {
        const auto frac = mant.substr(dot + 1);
        digits += frac;
        exp10 -= static_cast<int>(frac.size());
    }
    if (digits.empty()) throw std::invalid_argument("no digits");
    const auto first = digits.find_first_not_of('0');
    digits = first == std::string::npos ? "0" : digits.substr(first);
    i128 num = parse_integer(digits);
    i128 den = 1;
    if (exp10 > 18 || exp10 < -18) throw std::invalid_argument("exponent out of range");
    for (; exp10 > 0; --exp10) num *= 10;
    for (; exp10 < 0; ++exp10) den *= 10;
    return normalized(text, neg ? -num : num, den);
}

std::optional<std::uint64_t> ExactValue::multiple_of(const ExactValue& other) const {
    const i128 a = static_cast<i128>(num) * other.den;
    const i128 b = static_cast<i128>(den) * other.num;
    if (b == 0 || a % b != 0) return std::nullopt;
    const i128 q = a / b;
    if (q < 0) return std::nullopt;
    return static_cast<std::uint64_t>(q);
}

namespace {

ExactValue exact_ratio(i128 num, i128 den) {
    auto v = normalized("", num, den);
    v.text = v.den == 1 ? std::to_string(v.num) : std::to_string(v.num) + "/" + std::to_string(v.den);
    return v;
}

std::vector<double> broadcast(const std::vector<double>& v, std::size_t d, const char* what) {
    if (v.size() == d) return v;
    if (v.size() == 1) return std::vector<double>(d, v[0]);
    throw DomainError(std::string(what) + " has " + std::to_string(v.size()) + " components, expected 1 or " +
                      std::to_string(d));
}

}  // namespace

Segment build_segment(const SegmentDescriptor& desc, const TimeGrid& grid) {
    const auto d = grid.dimension();
    const double r = grid.memory_length();
    if (desc.kind == "constant") return Segment::constant(grid, broadcast(desc.value, d, "value"));
    if (desc.kind == "linear") {
        const auto a = broadcast(desc.start, d, "start"), b = broadcast(desc.end, d, "end");
        return Segment::sample(grid, [&](double u, std::span<double> out) {
            const double w = (u + r) / r;
            for (std::size_t i = 0; i < d; ++i) out[i] = a[i] + (b[i] - a[i]) * w;
        });
    }
    if (desc.kind == "sine") {
        const auto amp = broadcast(desc.amplitude, d, "amplitude"), off = broadcast(desc.offset, d, "offset");
        return Segment::sample(grid, [&](double u, std::span<double> out) {
            for (std::size_t i = 0; i < d; ++i) out[i] = off[i] + amp[i] * std::sin(desc.frequency * u + desc.phase);
        });
    }
    if (desc.kind == "values") {
        if (desc.rows.size() != grid.points())
            throw DomainError("values needs " + std::to_string(grid.points()) + " rows, got " +
                              std::to_string(desc.rows.size()));
        std::vector<double> flat;
        for (const auto& row : desc.rows) {
            if (row.size() != d) throw DomainError("values rows must have " + std::to_string(d) + " entries");
            flat.insert(flat.end(), row.begin(), row.end());
        }
        return Segment(grid, std::move(flat));
    }
    throw DomainError("unknown segment kind '" + desc.kind + "'");
}

namespace {

struct FunctionalKind {
    const char* kind;
    std::vector<std::pair<const char*, double>> params;
};

const std::vector<FunctionalKind>& functional_kinds() {
    static const std::vector<FunctionalKind> kinds{
        {"sigmoid", {{"scale", 1.0}, {"center", 0.0}}},
        {"ball", {{"radius", 1.0}}},
        {"clipped_integral", {{"lower", -1.0}, {"upper", 1.0}}},
        {"constant", {{"value", 1.0}}},
    };
    return kinds;
}

const FunctionalKind* find_functional_kind(std::string_view k) {
    for (const auto& fk : functional_kinds())
        if (k == fk.kind) return &fk;
    return nullptr;
}

}  // namespace

Functional build_functional(const FunctionalDescriptor& d) {
    const auto& p = d.params;
    if (d.kind == "sigmoid") return sigmoid_functional(p.at(0), p.at(1));
    if (d.kind == "ball") return ball_indicator(p.at(0));
    if (d.kind == "clipped_integral") return clipped_integral(p.at(0), p.at(1));
    if (d.kind == "constant") return constant_functional(p.at(0));
    throw DomainError("unknown functional kind '" + d.kind + "'");
}

std::vector<FunctionalDescriptor> default_functional_descriptors() {
    return {{"sigmoid", {1.0, 0.0}}, {"ball", {1.0}}, {"clipped_integral", {-1.0, 1.0}}};
}

TimeGrid make_grid(const ExperimentConfig& c) {
    const auto n = c.r.multiple_of(c.dt);
    if (!n || *n == 0) throw DomainError("r must be a positive integer multiple of dt");
    return TimeGrid(c.dt.value(), *n, c.dimension);
}

SolverConfig make_solver_config(const ExperimentConfig& c, const DriftSpec& drift) {
    const auto grid = make_grid(c);
    if (!c.horizon.multiple_of(c.dt)) throw GridAlignmentError("horizon must be an integer multiple of dt");
    return SolverConfig(grid, c.horizon.value(), drift);
}

namespace {

// ---- YAML reading --------------------------------------------------------

class Field {
public:
    Field(YAML::Node node, std::string path, int fallback_line)
        : node_(std::move(node)), path_(std::move(path)), fallback_line_(fallback_line) {}

    bool defined() const { return node_.IsDefined() && !node_.IsNull(); }
    const std::string& path() const { return path_; }

    int line() const {
        const auto m = node_.IsDefined() ? node_.Mark() : YAML::Mark::null_mark();
        return m.is_null() ? fallback_line_ : m.line + 1;
    }

    [[noreturn]] void fail(const std::string& message) const { throw ConfigError(path_, line(), message); }

    Field operator[](const std::string& key) const {
        if (defined() && !node_.IsMap()) fail("expected a mapping");
        const YAML::Node& cn = node_;
        return Field(defined() ? cn[key] : YAML::Node(YAML::NodeType::Undefined), join(key), line());
    }

    Field at(std::size_t i) const { return Field(node_[i], path_ + "[" + std::to_string(i) + "]", line()); }

    void allow(const std::vector<std::string_view>& keys) const {
        if (!defined()) return;
        if (!node_.IsMap()) fail("expected a mapping");
        for (const auto& kv : node_) {
            const auto k = kv.first.as<std::string>();
            if (std::find(keys.begin(), keys.end(), k) == keys.end())
                throw ConfigError(join(k), kv.first.Mark().line + 1, "unknown key");
        }
    }

    Field required() const {
        if (!defined()) fail("missing required field");
        return *this;
    }

    bool is_scalar() const { return node_.IsScalar(); }
    bool is_sequence() const { return node_.IsSequence(); }
    bool is_map() const { return node_.IsMap(); }
    std::size_t size() const { return node_.size(); }

    std::string text() const {
        if (!node_.IsScalar()) fail("expected a scalar");
        return node_.Scalar();
    }

    double number() const {
        const auto t = trim(text());
        double v = 0.0;
        const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
        if (r.ec != std::errc() || r.ptr != t.data() + t.size() || !std::isfinite(v))
            fail("expected a finite number, got '" + t + "'");
        return v;
    }

    double number_or(double fallback) const { return defined() ? number() : fallback; }

    std::uint64_t count() const {
        const auto t = trim(text());
        std::uint64_t v = 0;
        const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
        if (r.ec != std::errc() || r.ptr != t.data() + t.size()) fail("expected a nonnegative integer, got '" + t + "'");
        return v;
    }

    std::uint64_t count_or(std::uint64_t fallback) const { return defined() ? count() : fallback; }

    ExactValue exact() const {
        try {
            return parse_exact(text());
        } catch (const std::invalid_argument& e) {
            fail("expected an exact decimal or ratio, got '" + text() + "' (" + e.what() + ")");
        }
    }

    std::vector<double> numbers() const {
        if (is_scalar()) return {number()};
        if (!is_sequence()) fail("expected a number or a list of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).number());
        if (out.empty()) fail("empty list");
        return out;
    }

private:
    std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    YAML::Node node_;
    std::string path_;
    int fallback_line_;
};

template <typename F>
auto domain_guard(const Field& f, F&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        f.fail(e.what());
    }
}

DriftDescriptor read_drift(const Field& f) {
    f.required();
    if (f.is_scalar()) {
        const auto key = f.text();
        for (const auto& e : drift_catalog())
            if (e.key == key) return {e.key, e.spec};
        f.fail("unknown catalog drift '" + key + "'");
    }
    f.allow({"name", "catalog", "dissipative", "memory"});
    DriftDescriptor out;
    if (f["catalog"].defined()) {
        if (f["dissipative"].defined() || f["memory"].defined())
            f.fail("give either catalog or dissipative/memory, not both");
        const auto key = f["catalog"].text();
        bool found = false;
        for (const auto& e : drift_catalog())
            if (e.key == key) {
                out = {e.key, e.spec};
                found = true;
            }
        if (!found) f["catalog"].fail("unknown catalog drift '" + key + "'");
    } else {
        out.name = "custom";
        const auto v = f["dissipative"];
        v.allow({"kind", "lambda0"});
        if (v.defined()) {
            const auto kind_text = v["kind"].required().text();
            const auto kind = parse_dissipative_kind(kind_text);
            if (!kind) v["kind"].fail("unknown dissipative kind '" + kind_text + "'");
            if (*kind == DissipativeKind::Linear) {
                const double l = v["lambda0"].required().number();
                out.spec.dissipative = domain_guard(v["lambda0"], [&] { return DissipativeField::linear(l); });
            } else {
                if (v["lambda0"].defined()) v["lambda0"].fail("only the linear field takes lambda0");
                out.spec.dissipative =
                    *kind == DissipativeKind::CubicDecay ? DissipativeField::cubic_decay() : DissipativeField::zero();
            }
        }
        const auto m = f["memory"];
        m.allow({"kind", "map", "amplitude", "bound", "slope"});
        if (m.defined()) {
            const auto kind_text = m["kind"].required().text();
            const auto kind = parse_memory_kind(kind_text);
            if (!kind) m["kind"].fail("unknown memory kind '" + kind_text + "'");
            ScalarMap map = ScalarMap::Identity;
            if (m["map"].defined()) {
                const auto mt = m["map"].text();
                const auto parsed = parse_scalar_map(mt);
                if (!parsed) m["map"].fail("unknown scalar map '" + mt + "'");
                map = *parsed;
            }
            const double slope = m["slope"].number_or(1.0);
            switch (*kind) {
                case MemoryKind::Zero: out.spec.memory = MemoryFunctional::zero(); break;
                case MemoryKind::PointDelay:
                case MemoryKind::IntegralDelay: {
                    if (m["bound"].defined()) m["bound"].fail("bound applies to the bounded kind only");
                    const double a = m["amplitude"].required().number();
                    out.spec.memory = domain_guard(m, [&] {
                        return *kind == MemoryKind::PointDelay ? MemoryFunctional::point_delay(map, a, slope)
                                                               : MemoryFunctional::integral_delay(map, a, slope);
                    });
                    break;
                }
                case MemoryKind::Bounded: {
                    if (m["amplitude"].defined()) m["amplitude"].fail("the bounded kind takes bound, not amplitude");
                    const double b = m["bound"].required().number();
                    out.spec.memory = domain_guard(m, [&] { return MemoryFunctional::bounded(map, b, slope); });
                    break;
                }
            }
        }
    }
    if (f["name"].defined()) out.name = f["name"].text();
    return out;
}

SegmentDescriptor read_segment(const Field& f) {
    f.required();
    SegmentDescriptor d;
    if (f.is_scalar() || f.is_sequence()) {
        d.value = f.numbers();
        return d;
    }
    d.kind = f["kind"].required().text();
    if (d.kind == "constant") {
        f.allow({"kind", "value"});
        d.value = f["value"].required().numbers();
    } else if (d.kind == "linear") {
        f.allow({"kind", "start", "end"});
        d.start = f["start"].required().numbers();
        d.end = f["end"].required().numbers();
    } else if (d.kind == "sine") {
        f.allow({"kind", "amplitude", "offset", "frequency", "phase"});
        d.amplitude = f["amplitude"].required().numbers();
        d.offset = f["offset"].defined() ? f["offset"].numbers() : std::vector<double>{0.0};
        d.frequency = f["frequency"].number_or(1.0);
        d.phase = f["phase"].number_or(0.0);
    } else if (d.kind == "values") {
        f.allow({"kind", "rows"});
        const auto rows = f["rows"].required();
        if (!rows.is_sequence()) rows.fail("expected a list of rows");
        for (std::size_t i = 0; i < rows.size(); ++i) d.rows.push_back(rows.at(i).numbers());
    } else {
        f["kind"].fail("unknown segment kind '" + d.kind + "' (constant, linear, sine, values)");
    }
    return d;
}

std::vector<FunctionalDescriptor> read_functionals(const Field& f) {
    if (!f.defined()) return default_functional_descriptors();
    if (!f.is_sequence()) f.fail("expected a list of functionals");
    std::vector<FunctionalDescriptor> out;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto e = f.at(i);
        FunctionalDescriptor d;
        d.kind = e.is_scalar() ? e.text() : e["kind"].required().text();
        const auto* fk = find_functional_kind(d.kind);
        if (!fk) (e.is_scalar() ? e : e["kind"]).fail("unknown functional '" + d.kind + "'");
        for (const auto& [name, fallback] : fk->params) d.params.push_back(e.is_scalar() ? fallback : e[name].number_or(fallback));
        if (e.is_map()) {
            std::vector<std::string_view> keys{"kind"};
            for (const auto& p : fk->params) keys.push_back(p.first);
            e.allow(keys);
        }
        domain_guard(e, [&] { return build_functional(d); });
        out.push_back(std::move(d));
    }
    if (out.empty()) f.fail("at least one functional is required");
    return out;
}

std::vector<double> read_list(const Field& f, std::vector<double> fallback) {
    return f.defined() ? f.numbers() : fallback;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError("<document>", e.mark.is_null() ? std::nullopt : std::optional<int>(e.mark.line + 1), e.msg);
    }
    const Field top(root, "", 1);
    if (!top.defined() || !top.is_map()) top.fail("config must be a YAML mapping");
    top.allow({"experiment", "grid", "drift", "initial", "coupling", "monte_carlo", "functionals", "harnack",
               "strong_feller", "stationary", "output"});

    ExperimentConfig c;
    const auto ex = top["experiment"].required();
    const auto kind = parse_experiment(ex.text());
    if (!kind) ex.fail("unknown experiment '" + ex.text() + "'");
    c.experiment = *kind;

    const auto grid = top["grid"].required();
    grid.allow({"dt", "r", "horizon", "dimension"});
    c.dt = grid["dt"].required().exact();
    c.r = grid["r"].required().exact();
    c.horizon = grid["horizon"].required().exact();
    c.dimension = grid["dimension"].count_or(1);
    if (c.dt.num <= 0) grid["dt"].fail("dt must be > 0");
    if (c.r.num <= 0) grid["r"].fail("r must be > 0");
    if (c.dimension == 0) grid["dimension"].fail("dimension must be >= 1");
    if (!c.r.multiple_of(c.dt)) grid["r"].fail("r must be an integer multiple of dt");
    if (c.horizon.num <= 0) grid["horizon"].fail("horizon must be > 0");
    if (!c.horizon.multiple_of(c.dt)) grid["horizon"].fail("horizon must be an integer multiple of dt");

    c.drift = read_drift(top["drift"]);

    const auto init = top["initial"].required();
    init.allow({"x", "y"});
    c.x = read_segment(init["x"]);
    if (init["y"].defined()) c.y = read_segment(init["y"]);

    const auto cp = top["coupling"];
    cp.allow({"epsilon", "s"});
    c.coupling.epsilon = cp["epsilon"].number_or(1e-3);
    if (!(c.coupling.epsilon > 0.0 && c.coupling.epsilon < 1.0)) cp["epsilon"].fail("epsilon must lie in (0, 1)");
    if (cp["s"].defined() && cp["s"].text() != "auto") {
        c.coupling.s = cp["s"].exact();
        if (!c.coupling.s->multiple_of(c.dt)) cp["s"].fail("s must be an integer multiple of dt");
    }

    const auto mc = top["monte_carlo"];
    mc.allow({"paths", "seed", "confidence", "threads"});
    c.monte_carlo.paths = mc["paths"].count_or(1000);
    c.monte_carlo.seed = mc["seed"].count_or(0);
    c.monte_carlo.confidence = mc["confidence"].number_or(0.99);
    c.monte_carlo.threads = static_cast<unsigned>(mc["threads"].count_or(0));
    if (c.monte_carlo.paths < 2) mc["paths"].fail("need at least 2 paths");
    if (!(c.monte_carlo.confidence > 0.0 && c.monte_carlo.confidence < 1.0))
        mc["confidence"].fail("confidence must lie in (0, 1)");

    c.functionals = read_functionals(top["functionals"]);

    const auto h = top["harnack"];
    h.allow({"p", "drifts"});
    c.harnack.p = read_list(h["p"], {2.0});
    for (std::size_t i = 0; i < c.harnack.p.size(); ++i)
        if (!(c.harnack.p[i] > 1.0)) h["p"].fail("every p must be > 1");
    if (h["drifts"].defined()) {
        const auto ds = h["drifts"];
        if (!ds.is_sequence()) ds.fail("expected a list of drifts");
        for (std::size_t i = 0; i < ds.size(); ++i) c.harnack.drifts.push_back(read_drift(ds.at(i)));
    }

    const auto sf = top["strong_feller"];
    sf.allow({"deltas", "direction"});
    c.strong_feller.deltas = read_list(sf["deltas"], c.strong_feller.deltas);
    for (double d : c.strong_feller.deltas)
        if (!(d >= 0.0)) sf["deltas"].fail("deltas must be >= 0");
    c.strong_feller.direction.value = {1.0};
    if (sf["direction"].defined()) c.strong_feller.direction = read_segment(sf["direction"]);

    const auto st = top["stationary"];
    st.allow({"moment_eps", "lambda_target", "trend_confidence", "checkpoint_spacing", "burn_in", "spacing",
              "samples", "chains", "identity_dts", "identity_paths", "hyperbounded"});
    auto& s = c.stationary;
    s.moment_eps = st["moment_eps"].number_or(0.1);
    if (st["lambda_target"].defined()) s.lambda_target = st["lambda_target"].number();
    s.trend_confidence = st["trend_confidence"].number_or(0.95);
    s.checkpoint_spacing = st["checkpoint_spacing"].defined() ? st["checkpoint_spacing"].exact() : exact_ratio(c.r.num, c.r.den);
    s.spacing = st["spacing"].defined() ? st["spacing"].exact() : exact_ratio(c.r.num, c.r.den);
    s.burn_in = st["burn_in"].defined() ? st["burn_in"].exact() : exact_ratio(static_cast<i128>(10) * c.r.num, c.r.den);
    s.samples = st["samples"].count_or(1000);
    s.chains = st["chains"].count_or(10);
    s.identity_paths = st["identity_paths"].count_or(20);
    if (st["identity_dts"].defined()) {
        const auto ids = st["identity_dts"];
        if (!ids.is_sequence()) ids.fail("expected a list of step sizes");
        for (std::size_t i = 0; i < ids.size(); ++i) {
            auto v = ids.at(i).exact();
            if (v.num <= 0 || !c.r.multiple_of(v)) ids.at(i).fail("step size must be positive and divide r");
            s.identity_dts.push_back(std::move(v));
        }
    }
    for (const char* key : {"checkpoint_spacing", "burn_in", "spacing"}) {
        const ExactValue& v = std::string_view(key) == "checkpoint_spacing" ? s.checkpoint_spacing
                              : std::string_view(key) == "burn_in"          ? s.burn_in
                                                                            : s.spacing;
        if (v.num < 0 || !v.multiple_of(c.dt)) st[key].fail("must be a nonnegative integer multiple of dt");
    }
    if (!(s.trend_confidence > 0.0 && s.trend_confidence < 1.0))
        st["trend_confidence"].fail("must lie in (0, 1)");
    if (st["hyperbounded"].defined()) {
        const auto hb = st["hyperbounded"];
        hb.allow({"horizon", "inner_paths", "samples"});
        HyperboundSection sec;
        sec.horizon = hb["horizon"].required().exact();
        if (!sec.horizon.multiple_of(c.dt) || sec.horizon.num <= 0)
            hb["horizon"].fail("horizon must be a positive integer multiple of dt");
        sec.inner_paths = hb["inner_paths"].count_or(200);
        sec.samples = hb["samples"].count_or(100);
        if (sec.inner_paths < 2) hb["inner_paths"].fail("need at least 2 paths");
        s.hyperbounded = sec;
    }

    const auto out = top["output"];
    out.allow({"dir"});
    if (out["dir"].defined()) c.output_dir = out["dir"].text();

    // Structural checks that need the assembled grid.
    const auto g = domain_guard(grid, [&] { return make_grid(c); });
    domain_guard(init["x"], [&] { return build_segment(c.x, g); });
    if (c.y) domain_guard(init["y"], [&] { return build_segment(*c.y, g); });
    if (sf["direction"].defined()) {
        const auto dseg = domain_guard(sf["direction"], [&] { return build_segment(c.strong_feller.direction, g); });
        if (!(sup_norm(dseg.view()) > 0.0)) sf["direction"].fail("direction must be nonzero");
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("--config", std::nullopt, "cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

namespace {

json numbers_json(const std::vector<double>& v) { return v.size() == 1 ? json(v[0]) : json(v); }

json drift_json(const DriftDescriptor& d) {
    json j;
    j["name"] = d.name;
    const auto& v = d.spec.dissipative;
    json dj;
    dj["kind"] = std::string(to_string(v.kind()));
    if (v.kind() == DissipativeKind::Linear) dj["lambda0"] = v.lambda0();
    j["dissipative"] = dj;
    const auto& m = d.spec.memory;
    json mj;
    mj["kind"] = std::string(to_string(m.kind()));
    if (m.kind() != MemoryKind::Zero) {
        mj["map"] = std::string(to_string(m.map()));
        mj[m.kind() == MemoryKind::Bounded ? "bound" : "amplitude"] = m.amplitude();
        mj["slope"] = m.slope();
    }
    j["memory"] = mj;
    return j;
}

json segment_json(const SegmentDescriptor& d) {
    json j;
    j["kind"] = d.kind;
    if (d.kind == "constant") {
        j["value"] = numbers_json(d.value);
    } else if (d.kind == "linear") {
        j["start"] = numbers_json(d.start);
        j["end"] = numbers_json(d.end);
    } else if (d.kind == "sine") {
        j["amplitude"] = numbers_json(d.amplitude);
        j["offset"] = numbers_json(d.offset);
        j["frequency"] = d.frequency;
        j["phase"] = d.phase;
    } else {
        j["rows"] = d.rows;
    }
    return j;
}

json functional_json(const FunctionalDescriptor& d) {
    json j;
    j["kind"] = d.kind;
    const auto* fk = find_functional_kind(d.kind);
    for (std::size_t i = 0; i < fk->params.size(); ++i) j[fk->params[i].first] = d.params[i];
    return j;
}

void emit(YAML::Emitter& out, const json& j) {
    switch (j.type()) {
        case json::value_t::object:
            out << YAML::BeginMap;
            for (const auto& [k, v] : j.items()) {
                out << YAML::Key << k << YAML::Value;
                emit(out, v);
            }
            out << YAML::EndMap;
            break;
        case json::value_t::array: {
            const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
            out << (flat ? YAML::Flow : YAML::Block) << YAML::BeginSeq;
            for (const auto& e : j) emit(out, e);
            out << YAML::EndSeq;
            break;
        }
        case json::value_t::number_float: out << format_double(j.get<double>()); break;
        case json::value_t::number_integer: out << j.get<std::int64_t>(); break;
        case json::value_t::number_unsigned: out << j.get<std::uint64_t>(); break;
        case json::value_t::boolean: out << j.get<bool>(); break;
        case json::value_t::string: out << j.get<std::string>(); break;
        default: out << YAML::Null; break;
    }
}

}  // namespace

json to_json(const ExperimentConfig& c) {
    json j;
    j["experiment"] = std::string(to_string(c.experiment));
    j["grid"] = {{"dt", c.dt.text}, {"r", c.r.text}, {"horizon", c.horizon.text}, {"dimension", c.dimension}};
    j["drift"] = drift_json(c.drift);
    j["initial"]["x"] = segment_json(c.x);
    if (c.y) j["initial"]["y"] = segment_json(*c.y);
    j["coupling"] = {{"epsilon", c.coupling.epsilon}, {"s", c.coupling.s ? c.coupling.s->text : "auto"}};
    j["monte_carlo"] = {
        {"paths", c.monte_carlo.paths}, {"seed", c.monte_carlo.seed}, {"confidence", c.monte_carlo.confidence}};
    json fs = json::array();
    for (const auto& f : c.functionals) fs.push_back(functional_json(f));
    j["functionals"] = fs;
    switch (c.experiment) {
        case ExperimentKind::Harnack: {
            j["harnack"]["p"] = c.harnack.p;
            if (!c.harnack.drifts.empty()) {
                json ds = json::array();
                for (const auto& d : c.harnack.drifts) ds.push_back(drift_json(d));
                j["harnack"]["drifts"] = ds;
            }
            break;
        }
        case ExperimentKind::StrongFeller:
            j["strong_feller"] = {{"deltas", c.strong_feller.deltas},
                                  {"direction", segment_json(c.strong_feller.direction)}};
            break;
        case ExperimentKind::Stationary: {
            const auto& s = c.stationary;
            json sj = {{"moment_eps", s.moment_eps},
                       {"trend_confidence", s.trend_confidence},
                       {"checkpoint_spacing", s.checkpoint_spacing.text},
                       {"burn_in", s.burn_in.text},
                       {"spacing", s.spacing.text},
                       {"samples", s.samples},
                       {"chains", s.chains},
                       {"identity_paths", s.identity_paths}};
            if (s.lambda_target) sj["lambda_target"] = *s.lambda_target;
            if (!s.identity_dts.empty()) {
                json ids = json::array();
                for (const auto& v : s.identity_dts) ids.push_back(v.text);
                sj["identity_dts"] = ids;
            }
            if (s.hyperbounded)
                sj["hyperbounded"] = {{"horizon", s.hyperbounded->horizon.text},
                                      {"inner_paths", s.hyperbounded->inner_paths},
                                      {"samples", s.hyperbounded->samples}};
            j["stationary"] = sj;
            break;
        }
        default: break;
    }
    return j;
}

std::string to_yaml(const ExperimentConfig& c) {
    YAML::Emitter out;
    emit(out, to_json(c));
    return std::string(out.c_str()) + "\n";
}

}  // namespace sfde::harness

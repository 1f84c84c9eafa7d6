#include "mirrorless/scenario.hpp"

#include "mirrorless/dynamics.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace mirrorless::cli {

namespace {

constexpr std::array kWorkflows{
    std::pair{Workflow::Populations, std::string_view("populations")},
    std::pair{Workflow::InversionScan, std::string_view("inversion-scan")},
    std::pair{Workflow::Spectrum, std::string_view("spectrum")},
    std::pair{Workflow::MinAbsorptionScan, std::string_view("min-absorption-scan")},
    std::pair{Workflow::Propagate, std::string_view("propagate")},
    std::pair{Workflow::OutputCurve, std::string_view("output-curve")},
};

constexpr std::array kFormats{std::pair{Format::Csv, std::string_view("csv")},
                              std::pair{Format::Json, std::string_view("json")}};

constexpr std::array kConventions{
    std::pair{levels::RabiConvention::ExcitedReduced, std::string_view("excited-reduced")},
    std::pair{levels::RabiConvention::GroundReduced, std::string_view("ground-reduced")},
};

constexpr std::array kPolarizations{
    std::pair{spectra::Polarization::Perpendicular, std::string_view("perpendicular")},
    std::pair{spectra::Polarization::Parallel, std::string_view("parallel")},
};

constexpr std::array kRoutes{
    std::pair{SpectrumRoute::Both, std::string_view("both")},
    std::pair{SpectrumRoute::Regression, std::string_view("regression")},
    std::pair{SpectrumRoute::WeakProbe, std::string_view("weak-probe")},
};

constexpr std::array kModes{
    std::pair{propagation::PropagationMode::ClosedForm, std::string_view("closed-form")},
    std::pair{propagation::PropagationMode::Numeric, std::string_view("numeric")},
    std::pair{propagation::PropagationMode::SelfConsistent, std::string_view("self-consistent")},
};

template <class E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E value)
{
    for (const auto& [v, s] : table)
        if (v == value)
            return s;
    return "?";
}

template <class E, std::size_t N>
E parse_enum(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view text,
             std::string_view key)
{
    std::string options;
    for (const auto& [v, s] : table) {
        if (s == text)
            return v;
        options += options.empty() ? "" : ", ";
        options += s;
    }
    throw ConfigError(std::string(key) + ": '" + std::string(text) + "' is not one of " + options);
}

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(std::string_view text, std::string_view key)
{
    text = trim(text);
    if (!text.empty() && text.front() == '+')
        text.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty() || !std::isfinite(v))
        throw ConfigError(std::string(key) + ": '" + std::string(text) + "' is not a finite number");
    return v;
}

int parse_int(std::string_view text, std::string_view key)
{
    text = trim(text);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
        throw ConfigError(std::string(key) + ": '" + std::string(text) + "' is not an integer");
    return v;
}

bool parse_bool(std::string_view text, std::string_view key)
{
    text = trim(text);
    if (text == "true")
        return true;
    if (text == "false")
        return false;
    throw ConfigError(std::string(key) + ": expected true or false");
}

std::string number(double v)
{
    std::array<char, 32> buf{};
    const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), r.ptr);
}

enum Use : unsigned {
    kPop = 1u << 0,
    kInv = 1u << 1,
    kSpec = 1u << 2,
    kMin = 1u << 3,
    kProp = 1u << 4,
    kCurve = 1u << 5,
    kAll = 0x3f,
};

unsigned bit(Workflow w) { return 1u << static_cast<unsigned>(w); }

struct KeySpec {
    std::string_view section;
    std::string_view key;
    unsigned used_by;
    unsigned required_by;
};

// S and omega_p in [fields] are handled separately (exactly one of them).
constexpr std::array kKeys{
    KeySpec{"", "workflow", kAll, kAll},
    KeySpec{"transition", "Fg", kAll, kAll},
    KeySpec{"transition", "Fe", kAll, kAll},
    KeySpec{"transition", "convention", kAll, 0},
    KeySpec{"fields", "S", kPop | kSpec, 0},
    KeySpec{"fields", "omega_p", kPop | kSpec, 0},
    KeySpec{"fields", "delta_p", kAll, 0},
    KeySpec{"fields", "omega_pr", kPop, 0},
    KeySpec{"fields", "polarization", kSpec, 0},
    KeySpec{"scan", "time", kPop, 0},
    KeySpec{"scan", "S", kInv, kInv},
    KeySpec{"scan", "omega_p", kMin, kMin},
    KeySpec{"scan", "delta", kSpec | kMin, kSpec | kMin},
    KeySpec{"scan", "pump_intensity", kCurve, kCurve},
    KeySpec{"cell", "length", kProp | kCurve, 0},
    KeySpec{"cell", "density", kProp | kCurve, 0},
    KeySpec{"cell", "gamma", kProp | kCurve, 0},
    KeySpec{"cell", "wavelength", kProp | kCurve, 0},
    KeySpec{"cell", "beam_radius", kProp | kCurve, 0},
    KeySpec{"cell", "solid_angle", kProp | kCurve, 0},
    KeySpec{"cell", "grid", kProp | kCurve, 0},
    KeySpec{"cell", "saturation_intensity", kProp | kCurve, 0},
    KeySpec{"cell", "pump_intensity", kProp, kProp},
    KeySpec{"cell", "probe_intensity", kProp, 0},
    KeySpec{"numerics", "tol", kPop | kSpec, 0},
    KeySpec{"numerics", "threshold_rtol", kInv, 0},
    KeySpec{"numerics", "decay_threshold", kSpec, 0},
    KeySpec{"numerics", "max_window", kSpec, 0},
    KeySpec{"numerics", "route", kSpec, 0},
    KeySpec{"numerics", "probe_ratio", kSpec | kMin, 0},
    KeySpec{"numerics", "harmonics", kSpec | kMin, 0},
    KeySpec{"numerics", "refine", kMin, 0},
    KeySpec{"numerics", "propagation", kProp | kCurve, 0},
    KeySpec{"output", "path", kAll, 0},
    KeySpec{"output", "format", kAll, 0},
};

constexpr std::array<std::string_view, 6> kSections{"transition", "fields", "scan", "cell", "numerics", "output"};

std::string qualified(std::string_view section, std::string_view key)
{
    return section.empty() ? std::string(key) : std::string(section) + "." + std::string(key);
}

using Entries = std::map<std::string, std::string>; // qualified key → raw value

Entries flatten(std::istream& in, std::string_view source)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string(source) + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    Entries out;
    for (const auto& [name, node] : tree) {
        const bool is_section = std::find(kSections.begin(), kSections.end(), name) != kSections.end();
        if (is_section && !node.data().empty())
            throw ConfigError(std::string(source) + ": '" + name + "' is a section name, not a key");
        if (!is_section) {
            if (!node.empty())
                throw ConfigError(std::string(source) + ": unknown section [" + name + "]");
            out.emplace(name, node.data());
            continue;
        }
        out.emplace("[" + name + "]", "");
        for (const auto& [key, leaf] : node)
            out.emplace(name + "." + key, leaf.data());
    }
    return out;
}

Grid make_grid(Grid::Kind kind, double a, double b, int n, std::string_view key)
{
    if (n < 1)
        throw ConfigError(std::string(key) + ": grid is empty");
    if (n > 1 && !(b > a))
        throw ConfigError(std::string(key) + ": grid must be increasing");
    Grid g;
    g.kind = kind;
    g.a = a;
    g.b = b;
    g.n = n;
    return g;
}

} // namespace

std::string_view to_string(Workflow w) { return name_of(kWorkflows, w); }
std::string_view to_string(Format f) { return name_of(kFormats, f); }

std::vector<double> Grid::values() const
{
    if (kind == Kind::List)
        return list;
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double x = n == 1 ? a : (i == n - 1 ? b : a + (b - a) * i / (n - 1));
        v[static_cast<std::size_t>(i)] = kind == Kind::Logspace ? std::pow(10.0, x) : x;
    }
    return v;
}

std::string Grid::to_string() const
{
    if (kind == Kind::List) {
        std::string s;
        for (double x : list)
            s += (s.empty() ? "" : ", ") + number(x);
        return s;
    }
    return std::string(kind == Kind::Linspace ? "linspace(" : "logspace(") + number(a) + ", " + number(b) + ", " +
           std::to_string(n) + ")";
}

Grid parse_grid(std::string_view text, std::string_view key)
{
    text = trim(text);
    if (text.size() >= 2 && text.front() == '[' && text.back() == ']')
        text = trim(text.substr(1, text.size() - 2));
    if (text.empty())
        throw ConfigError(std::string(key) + ": grid is empty");
    for (const auto& [prefix, kind] : {std::pair{std::string_view("linspace"), Grid::Kind::Linspace},
                                      std::pair{std::string_view("logspace"), Grid::Kind::Logspace}}) {
        if (!text.starts_with(prefix))
            continue;
        auto rest = trim(text.substr(prefix.size()));
        if (rest.size() < 2 || rest.front() != '(' || rest.back() != ')')
            throw ConfigError(std::string(key) + ": expected " + std::string(prefix) + "(start, stop, count)");
        rest = rest.substr(1, rest.size() - 2);
        std::vector<std::string_view> parts;
        for (std::size_t pos = 0;;) {
            const auto comma = rest.find(',', pos);
            parts.push_back(rest.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
            if (comma == std::string_view::npos)
                break;
            pos = comma + 1;
        }
        if (parts.size() != 3)
            throw ConfigError(std::string(key) + ": expected " + std::string(prefix) + "(start, stop, count)");
        return make_grid(kind, parse_double(parts[0], key), parse_double(parts[1], key), parse_int(parts[2], key),
                         key);
    }
    Grid g;
    for (std::size_t pos = 0;;) {
        const auto comma = text.find(',', pos);
        const auto item = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        g.list.push_back(parse_double(item, key));
        if (g.list.size() > 1 && !(g.list.back() > g.list[g.list.size() - 2]))
            throw ConfigError(std::string(key) + ": grid must be increasing");
        if (comma == std::string_view::npos)
            break;
        pos = comma + 1;
    }
    g.n = static_cast<int>(g.list.size());
    return g;
}

double ScenarioConfig::pump_rabi() const
{
    if (omega_p)
        return *omega_p;
    if (S)
        return dynamics::rabi_from_saturation(*S, delta_p);
    return 0.0;
}

bool ScenarioConfig::operator==(const ScenarioConfig& o) const
{
    auto same_cell = [](const std::optional<propagation::CellConfig>& a,
                        const std::optional<propagation::CellConfig>& b) {
        if (a.has_value() != b.has_value())
            return false;
        if (!a)
            return true;
        return a->length == b->length && a->density == b->density && a->gamma == b->gamma &&
               a->wavelength == b->wavelength && a->beam_radius == b->beam_radius &&
               a->solid_angle == b->solid_angle && a->grid == b->grid &&
               a->saturation_intensity == b->saturation_intensity;
    };
    return workflow == o.workflow && Fg == o.Fg && Fe == o.Fe && convention == o.convention && S == o.S &&
           omega_p == o.omega_p && delta_p == o.delta_p && omega_pr == o.omega_pr &&
           polarization == o.polarization && S_grid == o.S_grid && omega_p_grid == o.omega_p_grid &&
           delta_grid == o.delta_grid && time_grid == o.time_grid && intensity_grid == o.intensity_grid &&
           same_cell(cell, o.cell) && pump_intensity == o.pump_intensity && probe_intensity == o.probe_intensity &&
           numerics == o.numerics && output_path == o.output_path && format == o.format;
}

ScenarioConfig parse_config(std::istream& in, std::string_view source)
{
    const Entries raw = flatten(in, source);

    ScenarioConfig c;
    const auto wf = raw.find("workflow");
    if (wf == raw.end())
        throw ConfigError(std::string(source) + ": missing required key: workflow");
    c.workflow = parse_enum(kWorkflows, trim(wf->second), "workflow");
    const unsigned me = bit(c.workflow);
    const std::string wname(to_string(c.workflow));

    std::vector<std::string> problems;
    for (const auto& [name, value] : raw) {
        if (name.front() == '[')
            continue;
        const auto dot = name.find('.');
        const std::string_view section = dot == std::string::npos ? std::string_view() : std::string_view(name).substr(0, dot);
        const std::string_view key = dot == std::string::npos ? std::string_view(name) : std::string_view(name).substr(dot + 1);
        const auto known = std::find_if(kKeys.begin(), kKeys.end(),
                                       [&](const KeySpec& k) { return k.section == section && k.key == key; });
        if (known == kKeys.end())
            problems.push_back("unknown key '" + name + "'");
        else if (!(known->used_by & me))
            problems.push_back("key '" + name + "' is not used by workflow " + wname);
    }
    const bool has_cell = raw.contains("[cell]");
    if ((me & (kProp | kCurve)) && !has_cell)
        problems.push_back("missing required section [cell]");
    if (!(me & (kProp | kCurve)) && has_cell && problems.empty())
        problems.push_back("section [cell] (SI units) only applies to propagate and output-curve");

    std::vector<std::string> missing;
    for (const auto& k : kKeys)
        if ((k.required_by & me) && !raw.contains(qualified(k.section, k.key)))
            missing.push_back(qualified(k.section, k.key));
    if (me & (kPop | kSpec)) {
        const bool s = raw.contains("fields.S"), o = raw.contains("fields.omega_p");
        if (s && o)
            problems.push_back("fields.S and fields.omega_p both given; specify exactly one");
        else if (!s && !o)
            missing.push_back("fields.S or fields.omega_p");
    }
    if (!missing.empty()) {
        std::string m = "missing required keys:";
        for (const auto& k : missing)
            m += " " + k;
        problems.insert(problems.begin(), m);
    }
    if (!problems.empty()) {
        std::string msg = std::string(source) + ":";
        for (const auto& p : problems)
            msg += "\n  " + p;
        throw ConfigError(msg);
    }

    auto get = [&](std::string_view q) -> const std::string* {
        const auto it = raw.find(std::string(q));
        return it == raw.end() ? nullptr : &it->second;
    };
    auto real = [&](std::string_view q, double& out) {
        if (const auto* v = get(q))
            out = parse_double(*v, q);
    };
    auto grid = [&](std::string_view q, std::optional<Grid>& out) {
        if (const auto* v = get(q))
            out = parse_grid(*v, q);
    };

    try {
        c.Fg = angular::parse_angmom(std::string(trim(*get("transition.Fg"))));
        c.Fe = angular::parse_angmom(std::string(trim(*get("transition.Fe"))));
        angular::check_dipole_pair(c.Fg, c.Fe);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("transition: ") + e.what());
    }
    if (const auto* v = get("transition.convention"))
        c.convention = parse_enum(kConventions, trim(*v), "transition.convention");

    if (const auto* v = get("fields.S"))
        c.S = parse_double(*v, "fields.S");
    if (const auto* v = get("fields.omega_p"))
        c.omega_p = parse_double(*v, "fields.omega_p");
    real("fields.delta_p", c.delta_p);
    real("fields.omega_pr", c.omega_pr);
    if (const auto* v = get("fields.polarization"))
        c.polarization = parse_enum(kPolarizations, trim(*v), "fields.polarization");
    if ((c.S && *c.S < 0) || (c.omega_p && *c.omega_p < 0) || c.omega_pr < 0)
        throw ConfigError("fields: S, omega_p and omega_pr must be nonnegative");

    grid("scan.time", c.time_grid);
    grid("scan.S", c.S_grid);
    grid("scan.omega_p", c.omega_p_grid);
    grid("scan.delta", c.delta_grid);
    grid("scan.pump_intensity", c.intensity_grid);
    if (c.workflow == Workflow::Populations && !c.time_grid)
        c.time_grid = make_grid(Grid::Kind::Linspace, 0.0, 50.0, 501, "scan.time");
    auto lowest = [](const std::optional<Grid>& g) { return g ? g->values().front() : 1.0; };
    if (lowest(c.time_grid) < 0)
        throw ConfigError("scan.time: times must be nonnegative");
    if (lowest(c.S_grid) <= 0)
        throw ConfigError("scan.S: saturation parameters must be positive");
    if (lowest(c.omega_p_grid) <= 0)
        throw ConfigError("scan.omega_p: Rabi frequencies must be positive");
    if (lowest(c.intensity_grid) < 0)
        throw ConfigError("scan.pump_intensity: intensities must be nonnegative");

    if (has_cell && (me & (kProp | kCurve))) {
        propagation::CellConfig cell;
        real("cell.length", cell.length);
        real("cell.density", cell.density);
        real("cell.gamma", cell.gamma);
        real("cell.wavelength", cell.wavelength);
        real("cell.beam_radius", cell.beam_radius);
        real("cell.solid_angle", cell.solid_angle);
        real("cell.saturation_intensity", cell.saturation_intensity);
        if (const auto* v = get("cell.grid"))
            cell.grid = parse_int(*v, "cell.grid");
        cell.validate();
        c.cell = cell;
        real("cell.pump_intensity", c.pump_intensity);
        real("cell.probe_intensity", c.probe_intensity);
        if (c.pump_intensity < 0 || c.probe_intensity < 0)
            throw ConfigError("cell: entry intensities must be nonnegative");
    }

    Numerics& n = c.numerics;
    real("numerics.tol", n.tol);
    real("numerics.threshold_rtol", n.threshold_rtol);
    real("numerics.decay_threshold", n.decay_threshold);
    real("numerics.max_window", n.max_window);
    real("numerics.probe_ratio", n.probe_ratio);
    if (const auto* v = get("numerics.harmonics"))
        n.harmonics = parse_int(*v, "numerics.harmonics");
    if (const auto* v = get("numerics.refine"))
        n.refine = parse_bool(*v, "numerics.refine");
    if (const auto* v = get("numerics.route"))
        n.route = parse_enum(kRoutes, trim(*v), "numerics.route");
    if (const auto* v = get("numerics.propagation"))
        n.propagation = parse_enum(kModes, trim(*v), "numerics.propagation");
    for (const auto& [value, name] : {std::pair{n.tol, "tol"}, std::pair{n.threshold_rtol, "threshold_rtol"},
                                     std::pair{n.decay_threshold, "decay_threshold"},
                                     std::pair{n.max_window, "max_window"}, std::pair{n.probe_ratio, "probe_ratio"}})
        if (!(value > 0))
            throw ConfigError(std::string("numerics.") + name + " must be positive");
    if (n.harmonics < 1)
        throw ConfigError("numerics.harmonics must be at least 1");

    if (const auto* v = get("output.path"))
        c.output_path = std::string(trim(*v));
    if (const auto* v = get("output.format"))
        c.format = parse_enum(kFormats, trim(*v), "output.format");
    return c;
}

ScenarioConfig parse_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config file '" + path.string() + "'");
    return parse_config(in, path.string());
}

ScenarioConfig parse_config_string(std::string_view text)
{
    std::istringstream in{std::string(text)};
    return parse_config(in);
}

std::string serialize(const ScenarioConfig& c, bool include_output_path)
{
    const unsigned me = bit(c.workflow);
    std::ostringstream out;
    out << "workflow = " << to_string(c.workflow) << "\n";

    std::string current;
    auto put = [&](std::string_view section, std::string_view key, const std::string& value) {
        const auto known = std::find_if(kKeys.begin(), kKeys.end(),
                                       [&](const KeySpec& k) { return k.section == section && k.key == key; });
        if (known == kKeys.end() || !(known->used_by & me))
            return;
        if (current != section) {
            out << "\n[" << section << "]\n";
            current = std::string(section);
        }
        out << key << " = " << value << "\n";
    };

    put("transition", "Fg", angular::to_string(c.Fg));
    put("transition", "Fe", angular::to_string(c.Fe));
    put("transition", "convention", std::string(name_of(kConventions, c.convention)));

    if (c.S)
        put("fields", "S", number(*c.S));
    if (c.omega_p)
        put("fields", "omega_p", number(*c.omega_p));
    put("fields", "delta_p", number(c.delta_p));
    put("fields", "omega_pr", number(c.omega_pr));
    put("fields", "polarization", std::string(name_of(kPolarizations, c.polarization)));

    auto put_grid = [&](std::string_view key, const std::optional<Grid>& g) {
        if (g)
            put("scan", key, g->to_string());
    };
    put_grid("time", c.time_grid);
    put_grid("S", c.S_grid);
    put_grid("omega_p", c.omega_p_grid);
    put_grid("delta", c.delta_grid);
    put_grid("pump_intensity", c.intensity_grid);

    if (c.cell) {
        const auto& cell = *c.cell;
        put("cell", "length", number(cell.length));
        put("cell", "density", number(cell.density));
        put("cell", "gamma", number(cell.gamma));
        put("cell", "wavelength", number(cell.wavelength));
        put("cell", "beam_radius", number(cell.beam_radius));
        put("cell", "solid_angle", number(cell.solid_angle));
        put("cell", "grid", std::to_string(cell.grid));
        put("cell", "saturation_intensity", number(cell.saturation_intensity));
        put("cell", "pump_intensity", number(c.pump_intensity));
        put("cell", "probe_intensity", number(c.probe_intensity));
    }

    const Numerics& n = c.numerics;
    put("numerics", "tol", number(n.tol));
    put("numerics", "threshold_rtol", number(n.threshold_rtol));
    put("numerics", "decay_threshold", number(n.decay_threshold));
    put("numerics", "max_window", number(n.max_window));
    put("numerics", "route", std::string(name_of(kRoutes, n.route)));
    put("numerics", "probe_ratio", number(n.probe_ratio));
    put("numerics", "harmonics", std::to_string(n.harmonics));
    put("numerics", "refine", n.refine ? "true" : "false");
    put("numerics", "propagation", std::string(name_of(kModes, n.propagation)));

    if (include_output_path && !c.output_path.empty())
        put("output", "path", c.output_path);
    put("output", "format", std::string(to_string(c.format)));
    return out.str();
}

} // namespace mirrorless::cli

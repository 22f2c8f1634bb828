#pragma once

// JSON encodings of measure specs, classifications and limit laws, plus
// locale-free CSV number formatting.  Doubles are written in shortest
// round-trip form, so save(load(x)) reproduces x bit for bit.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "kale/errors.hpp"
#include "kale/generators.hpp"
#include "kale/geometry.hpp"
#include "kale/limits.hpp"
#include "kale/mean.hpp"
#include "kale/measure.hpp"

namespace kale::io {

using Json = nlohmann::json;

inline std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

namespace detail {

inline const Json& field(const Json& obj, const std::string& key, const std::string& where) {
    if (!obj.is_object()) throw InputError("'" + where + "' must be a JSON object");
    const auto it = obj.find(key);
    if (it == obj.end()) throw InputError("missing field '" + (where.empty() ? key : where + "." + key) + "'");
    return *it;
}

inline std::string path(const std::string& where, const std::string& key) {
    return where.empty() ? key : where + "." + key;
}

inline double number(const Json& obj, const std::string& key, const std::string& where) {
    const Json& v = field(obj, key, where);
    if (!v.is_number()) throw InputError("field '" + path(where, key) + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw InputError("field '" + path(where, key) + "' must be finite");
    return x;
}

inline double number_or(const Json& obj, const std::string& key, const std::string& where, double fallback) {
    if (!obj.contains(key)) return fallback;
    return number(obj, key, where);
}

inline std::int64_t integer(const Json& obj, const std::string& key, const std::string& where) {
    const Json& v = field(obj, key, where);
    if (!v.is_number_integer()) throw InputError("field '" + path(where, key) + "' must be an integer");
    return v.get<std::int64_t>();
}

inline std::string text(const Json& obj, const std::string& key, const std::string& where) {
    const Json& v = field(obj, key, where);
    if (!v.is_string()) throw InputError("field '" + path(where, key) + "' must be a string");
    return v.get<std::string>();
}

} // namespace detail

struct SpecAtom {
    double r = 0.0;
    double theta = 0.0;
    double w = 1.0;

    friend bool operator==(const SpecAtom&, const SpecAtom&) = default;
};

/// A measure as written in a spec file; `materialize` builds it.
struct MeasureSpec {
    double alpha = 0.0;
    std::vector<SpecAtom> atoms;  // used when generator is empty
    std::string generator;
    Json params = Json::object();

    friend bool operator==(const MeasureSpec& a, const MeasureSpec& b) {
        return a.alpha == b.alpha && a.atoms == b.atoms && a.generator == b.generator && a.params == b.params;
    }
};

inline const std::vector<std::string>& generator_names() {
    static const std::vector<std::string> names{"sector", "gaussian", "circle_arc_uniform", "heavy_tail",
                                                "spider_rays"};
    return names;
}

inline MeasureSpec spec_from_json(const Json& j) {
    if (!j.is_object()) throw InputError("measure spec must be a JSON object");
    MeasureSpec s;
    s.alpha = detail::number(j, "alpha", "");
    const bool has_atoms = j.contains("atoms");
    const bool has_gen = j.contains("generator");
    if (has_atoms == has_gen) throw InputError("measure spec needs exactly one of 'atoms' or 'generator'");
    if (has_atoms) {
        const Json& arr = j.at("atoms");
        if (!arr.is_array()) throw InputError("field 'atoms' must be an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string where = "atoms[" + std::to_string(i) + "]";
            s.atoms.push_back({detail::number(arr[i], "r", where), detail::number(arr[i], "theta", where),
                               detail::number(arr[i], "w", where)});
        }
    } else {
        s.generator = detail::text(j, "generator", "");
        if (j.contains("params")) {
            if (!j.at("params").is_object()) throw InputError("field 'params' must be an object");
            s.params = j.at("params");
        }
    }
    return s;
}

inline Json to_json(const MeasureSpec& s) {
    Json j;
    j["alpha"] = s.alpha;
    if (s.generator.empty()) {
        Json arr = Json::array();
        for (const SpecAtom& a : s.atoms) arr.push_back({{"r", a.r}, {"theta", a.theta}, {"w", a.w}});
        j["atoms"] = arr;
    } else {
        j["generator"] = s.generator;
        j["params"] = s.params;
    }
    return j;
}

inline Json parse_json_text(const std::string& text, const std::string& what) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw InputError("malformed JSON in " + what + ": " + e.what());
    }
}

inline std::string read_file(const std::string& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw InputError("cannot open '" + file + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline MeasureSpec load_spec(const std::string& file) { return spec_from_json(parse_json_text(read_file(file), file)); }

inline void write_file(const std::string& file, const std::string& content) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw InputError("cannot write '" + file + "'");
    out << content;
}

inline void save_spec(const std::string& file, const MeasureSpec& s) { write_file(file, to_json(s).dump(2) + "\n"); }

inline RadialLaw radial_law_from_json(const Json& j, const std::string& where) {
    const std::string kind = detail::text(j, "kind", where);
    RadialLaw law;
    if (kind == "point") {
        law = {RadialLaw::Kind::Point, detail::number(j, "r", where), 0.0};
    } else if (kind == "uniform") {
        law = {RadialLaw::Kind::Uniform, detail::number(j, "low", where), detail::number(j, "high", where)};
    } else if (kind == "exponential") {
        law = {RadialLaw::Kind::Exponential, detail::number(j, "rate", where), 0.0};
    } else {
        throw InputError("field '" + where + ".kind' must be point, uniform or exponential");
    }
    return law;
}

inline SampleableMeasure materialize(const MeasureSpec& s) {
    const ConeGeometry geom(s.alpha);
    if (s.generator.empty()) {
        if (s.atoms.empty()) throw InputError("field 'atoms' must not be empty");
        std::vector<Atom> atoms;
        for (std::size_t i = 0; i < s.atoms.size(); ++i) {
            const SpecAtom& a = s.atoms[i];
            const std::string where = "atoms[" + std::to_string(i) + "]";
            if (a.r < 0.0) throw InputError("field '" + where + ".r' must be >= 0");
            if (!(a.w > 0.0)) throw InputError("field '" + where + ".w' must be > 0");
            atoms.push_back({a.w, make_point(geom, a.r, a.theta)});
        }
        return SampleableMeasure(AtomicMeasure(geom, std::move(atoms)));
    }
    const Json& p = s.params;
    const std::string& g = s.generator;
    if (g == "sector") {
        return SampleableMeasure(sector_example(static_cast<int>(detail::integer(p, "k", "params")),
                                                detail::number_or(p, "theta_star", "params", 0.0), geom));
    }
    if (g == "gaussian") return SampleableMeasure(gaussian_example(detail::number(p, "t", "params"), geom));
    if (g == "circle_arc_uniform") {
        return SampleableMeasure(geom, CircleArcUniform{detail::number_or(p, "center", "params", 0.0)});
    }
    if (g == "heavy_tail") return SampleableMeasure(geom, HeavyTail{detail::number(p, "beta", "params")});
    if (g == "spider_rays") {
        const Json& legs = detail::field(p, "legs", "params");
        if (!legs.is_array()) throw InputError("field 'params.legs' must be an array");
        SpiderRays spider;
        for (std::size_t i = 0; i < legs.size(); ++i) {
            const std::string where = "params.legs[" + std::to_string(i) + "]";
            SpiderLeg leg;
            leg.theta = detail::number(legs[i], "theta", where);
            leg.weight = detail::number_or(legs[i], "weight", where, 1.0);
            leg.law = radial_law_from_json(detail::field(legs[i], "law", where), where + ".law");
            spider.legs.push_back(leg);
        }
        return SampleableMeasure(geom, std::move(spider));
    }
    throw InputError("field 'generator' names an unknown generator '" + g + "'");
}

/// Spec listing the atoms of an atomic measure.
inline MeasureSpec spec_of(const AtomicMeasure& mu) {
    MeasureSpec s;
    s.alpha = mu.geometry().alpha();
    for (const Atom& a : mu.atoms()) s.atoms.push_back({a.point.r, a.point.theta, a.weight});
    return s;
}

inline Json to_json(const CovarianceMatrix& s) { return Json::array({{s.s11, s.s12}, {s.s12, s.s22}}); }

inline CovarianceMatrix covariance_from_json(const Json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_array() || !j[1].is_array() || j[0].size() != 2 ||
        j[1].size() != 2) {
        throw InputError("field 'sigma' must be a 2x2 array");
    }
    for (const Json& row : j) {
        for (const Json& v : row) {
            if (!v.is_number()) throw InputError("field 'sigma' entries must be numbers");
        }
    }
    const double s12 = j[0][1].get<double>();
    if (j[1][0].get<double>() != s12) throw InputError("field 'sigma' must be symmetric");
    return {j[0][0].get<double>(), s12, j[1][1].get<double>()};
}

inline Json to_json(const LimitLaw& law) {
    Json j;
    j["type"] = law_tag(law);
    if (const auto* s = std::get_if<SectorGaussian>(&law)) {
        j["theta_star"] = s->theta_star;
        j["rho"] = s->rho;
        j["sigma"] = to_json(s->sigma);
    } else if (const auto* k = std::get_if<KappaGaussian>(&law)) {
        j["theta_star"] = k->theta_star;
        j["r_star"] = k->r_star;
        j["sigma"] = to_json(k->sigma);
        j["w_plus"] = k->w_plus;
        j["w_minus"] = k->w_minus;
    }
    return j;
}

inline LimitLaw law_from_json(const Json& j) {
    const std::string type = detail::text(j, "type", "");
    if (type == "dirac_origin") return DiracOrigin{};
    if (type == "sector_gaussian") {
        SectorGaussian s{detail::number(j, "theta_star", ""), detail::number(j, "rho", ""),
                         covariance_from_json(detail::field(j, "sigma", ""))};
        if (!(s.rho >= 0.0 && s.rho < kHalfPi)) throw InvalidRho(s.rho);
        return s;
    }
    if (type == "kappa_gaussian") {
        return KappaGaussian{detail::number(j, "theta_star", ""), detail::number(j, "r_star", ""),
                             covariance_from_json(detail::field(j, "sigma", "")), detail::number(j, "w_plus", ""),
                             detail::number(j, "w_minus", "")};
    }
    throw InputError("field 'type' must be dirac_origin, sector_gaussian or kappa_gaussian");
}

inline Json to_json(const MassDecomposition& m) {
    return {{"origin_mass", m.origin_mass}, {"edge_mass", m.edge_mass}, {"interior_mass", m.interior_mass}};
}

inline Json to_json(const KalePoint& p) { return {{"r", p.r}, {"theta", p.theta}}; }

inline Json to_json(const Classification& c) {
    Json j;
    j["variant"] = to_string(c.kind);
    j["max_m1"] = c.max_m1;
    j["tolerance_used"] = c.tolerance_used;
    j["nondegenerate"] = c.nondegenerate;
    j["all_mass_at_origin"] = c.all_mass_at_origin;
    if (c.kind != Stickiness::FullySticky) {
        j["theta_star"] = c.theta_star;
        j["A"] = c.a;
        j["B"] = c.b;
        j["width"] = c.width;
    }
    if (c.kind == Stickiness::NonSticky) j["r_star"] = c.r_star;
    return j;
}

/// Comma-separated row with shortest round-trip doubles.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) {
        for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
        out_ << '\n';
    }

    CsvWriter& cell(double x) { return raw(format_double(x)); }
    CsvWriter& cell(std::size_t x) { return raw(std::to_string(x)); }
    CsvWriter& cell(const std::string& s) { return raw(s); }
    CsvWriter& empty() { return raw(""); }
    void end_row() {
        out_ << '\n';
        first_ = true;
    }
    std::string str() const { return out_.str(); }

private:
    CsvWriter& raw(const std::string& s) {
        if (!first_) out_ << ',';
        out_ << s;
        first_ = false;
        return *this;
    }

    std::ostringstream out_;
    bool first_ = true;
};

} // namespace kale::io

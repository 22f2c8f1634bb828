// Command-line front end.  Exit codes: 0 success, 1 unexpected failure,
// 2 input error, 3 precondition violation.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kale/io.hpp"
#include "kale/kale.hpp"

namespace {

using kale::io::CsvWriter;
using kale::io::Json;

struct Options {
    std::string input;
    std::string generator;
    std::string params = "{}";
    std::optional<double> alpha;
    std::string nu_input;
    std::optional<std::uint64_t> seed;
    std::size_t n = 0;
    std::size_t reps = 0;
    unsigned jobs = 1;
    double eps_class = -1.0;
    double eps = 0.01;
    std::size_t grid = 0;
    std::size_t samples = 0;
    std::string out;
    std::string format = "json";
};

struct Output {
    Json report;
    CsvWriter table{{"value"}};
    bool has_table = false;
    std::map<std::string, std::string> extra_tables;  // suffix -> csv
};

kale::io::MeasureSpec resolve_spec(const Options& o, const std::string& input) {
    if (!input.empty()) {
        if (o.alpha) throw kale::InputError("--alpha applies to --generator; the input file carries alpha");
        return kale::io::load_spec(input);
    }
    if (o.generator.empty()) throw kale::InputError("a measure is required: pass --input or --generator");
    if (!o.alpha) throw kale::InputError("--generator needs --alpha");
    kale::io::MeasureSpec s;
    s.alpha = *o.alpha;
    s.generator = o.generator;
    const Json params = kale::io::parse_json_text(o.params, "--params");
    if (!params.is_object()) throw kale::InputError("--params must be a JSON object");
    s.params = params;
    return s;
}

std::uint64_t require_seed(const Options& o) {
    if (!o.seed) throw kale::InputError("--seed is required for stochastic commands");
    return *o.seed;
}

Json config_echo(const Options& o, const kale::io::MeasureSpec& spec) {
    Json c;
    c["measure"] = kale::io::to_json(spec);
    if (o.seed) c["seed"] = *o.seed;
    if (o.n) c["n"] = o.n;
    if (o.reps) c["reps"] = o.reps;
    return c;
}

Json mean_json(const kale::Classification& c) {
    const kale::KalePoint m = kale::mean_from(c);
    Json j = kale::io::to_json(m);
    j["is_origin"] = m.is_origin();
    return j;
}

void write_profile(Output& out, const kale::SampleableMeasure& mu, std::size_t grid) {
    out.table = CsvWriter({"theta", "m1", "m2"});
    out.has_table = true;
    const double alpha = mu.geometry().alpha();
    for (std::size_t g = 0; g < grid; ++g) {
        const double theta = alpha * static_cast<double>(g) / static_cast<double>(grid);
        const kale::FoldedMoment m = mu.folded_moment(theta);
        out.table.cell(theta).cell(m.m1).cell(m.m2).end_row();
    }
}

Output cmd_classify(const Options& o) {
    const auto spec = resolve_spec(o, o.input);
    const kale::SampleableMeasure mu = kale::io::materialize(spec);
    const kale::Classification c = kale::classify(mu, o.eps_class);
    Output out;
    out.report["measure"] = kale::io::to_json(spec);
    out.report["classification"] = kale::io::to_json(c);
    out.report["mean"] = mean_json(c);
    const std::size_t grid = o.grid ? o.grid : 720;
    out.report["profile_samples"] = grid;
    write_profile(out, mu, grid);
    return out;
}

Output cmd_moment_profile(const Options& o) {
    const auto spec = resolve_spec(o, o.input);
    const kale::SampleableMeasure mu = kale::io::materialize(spec);
    Output out;
    const std::size_t grid = o.grid ? o.grid : 1000;
    out.report["measure"] = kale::io::to_json(spec);
    out.report["grid"] = grid;
    out.report["first_radial_moment"] = mu.first_radial_moment();
    write_profile(out, mu, grid);
    return out;
}

Output cmd_mean(const Options& o) {
    const auto spec = resolve_spec(o, o.input);
    const kale::SampleableMeasure mu = kale::io::materialize(spec);
    const kale::Classification c = kale::classify(mu, o.eps_class);
    Output out;
    out.report["measure"] = kale::io::to_json(spec);
    out.report["mean"] = mean_json(c);
    out.report["variant"] = kale::to_string(c.kind);
    const kale::KalePoint m = kale::mean_from(c);
    out.table = CsvWriter({"r", "theta", "variant"});
    out.table.cell(m.r).cell(m.theta).cell(std::string(kale::to_string(c.kind))).end_row();
    out.has_table = true;
    return out;
}

/// Alternative origin mass printed for the sector example, kept for comparison.
std::optional<double> sector_example_closed_form(const kale::io::MeasureSpec& spec) {
    if (spec.generator != "sector") return std::nullopt;
    const auto k = static_cast<int>(spec.params.at("k").get<std::int64_t>());
    return 1.0 - (2.0 / k) * ((k + 2) / 4) - 1.0 / k;
}

Json law_report(const kale::SampleableMeasure& mu, const kale::LimitLaw& law) {
    Json j;
    j["law"] = kale::io::to_json(law);
    if (const auto* s = std::get_if<kale::SectorGaussian>(&law)) {
        j["mass_decomposition"] = kale::io::to_json(kale::mass_decomposition(*s));
        j["A"] = s->a(mu.geometry());
        j["B"] = s->interval(mu.geometry()).end(mu.geometry());
    } else if (const auto* k = std::get_if<kale::KappaGaussian>(&law)) {
        j["kappa"] = {{"positive_side", kale::kappa_value(*k, 1.0)}, {"negative_side", kale::kappa_value(*k, -1.0)}};
        if (mu.has_moment_surrogate()) {
            const kale::KappaGaussian alt = kale::squared_convention(mu.moment_surrogate(), *k);
            j["squared_radius_convention"] = {{"w_plus", alt.w_plus},
                                              {"w_minus", alt.w_minus},
                                              {"kappa_positive_side", kale::kappa_value(alt, 1.0)},
                                              {"kappa_negative_side", kale::kappa_value(alt, -1.0)}};
        }
    }
    return j;
}

Output cmd_limit_law(const Options& o) {
    const auto spec = resolve_spec(o, o.input);
    const kale::SampleableMeasure mu = kale::io::materialize(spec);
    const kale::Classification c = kale::classify(mu, o.eps_class);
    const kale::LimitLaw law = kale::limit_law(mu, c);
    Output out;
    out.report = law_report(mu, law);
    out.report["measure"] = kale::io::to_json(spec);
    out.report["classification"] = kale::io::to_json(c);
    if (const auto alt = sector_example_closed_form(spec)) out.report["example_closed_form_origin_mass"] = *alt;
    if (o.samples > 0) {
        kale::Rng rng = kale::RngSpec{require_seed(o)}.stream(0);
        out.table = CsvWriter({"r", "theta", "z1", "z2"});
        out.has_table = true;
        if (const auto* k = std::get_if<kale::KappaGaussian>(&law)) {
            for (const kale::PlanePoint& z : kale::sample_limit(*k, rng, o.samples)) {
                out.table.empty().empty().cell(z.z1).cell(z.z2).end_row();
            }
        } else {
            const std::vector<kale::KalePoint> pts =
                std::holds_alternative<kale::DiracOrigin>(law)
                    ? kale::sample_limit(kale::DiracOrigin{}, rng, o.samples)
                    : kale::sample_limit(std::get<kale::SectorGaussian>(law), mu.geometry(), rng, o.samples);
            for (const kale::KalePoint& p : pts) out.table.cell(p.r).cell(p.theta).empty().empty().end_row();
        }
    } else {
        out.table = CsvWriter({"type"});
        out.table.cell(std::string(kale::law_tag(law))).end_row();
        out.has_table = true;
    }
    return out;
}

Output cmd_probe(const Options& o) {
    const auto spec_mu = resolve_spec(o, o.input);
    if (o.nu_input.empty()) throw kale::InputError("probe needs --nu");
    const auto spec_nu = kale::io::load_spec(o.nu_input);
    const kale::SampleableMeasure mu = kale::io::materialize(spec_mu);
    const kale::SampleableMeasure nu = kale::io::materialize(spec_nu);
    if (!mu.has_moment_surrogate() || !nu.has_moment_surrogate()) {
        throw kale::PreconditionError("probe needs atomic measures");
    }
    const kale::ProbeResult r = kale::perturbation_probe(mu.moment_surrogate(), nu.moment_surrogate(), o.eps);
    Output out;
    const std::string verdict = r.verdict == kale::ProbeVerdict::Sticky ? "sticky" : "fluctuating";
    out.report["verdict"] = verdict;
    out.report["epsilon_used"] = r.epsilon_used;
    out.report["mean_before"] = kale::io::to_json(r.mean_before);
    out.report["mean_after"] = kale::io::to_json(r.mean_after);
    out.report["mu"] = kale::io::to_json(spec_mu);
    out.report["nu"] = kale::io::to_json(spec_nu);
    out.table = CsvWriter({"verdict", "epsilon", "before_r", "before_theta", "after_r", "after_theta"});
    out.table.cell(verdict).cell(r.epsilon_used).cell(r.mean_before.r).cell(r.mean_before.theta);
    out.table.cell(r.mean_after.r).cell(r.mean_after.theta).end_row();
    out.has_table = true;
    return out;
}

const std::vector<std::string> kReplicateColumns{"replicate", "N", "b_r", "b_theta", "rescaled_z1", "rescaled_z2",
                                                 "n_star"};

Output cmd_simulate_lln(const Options& o) {
    const auto spec = resolve_spec(o, o.input);
    const std::uint64_t seed = require_seed(o);
    if (o.n == 0 || o.reps == 0) throw kale::InputError("--n and --reps must be >= 1");
    const kale::SampleableMeasure mu = kale::io::materialize(spec);
    const auto reps = kale::simulate_lln(mu, o.n, o.reps, kale::RngSpec{seed}, o.jobs);
    Output out;
    out.report["config"] = config_echo(o, spec);
    out.report["classification"] = kale::io::to_json(kale::classify(mu, o.eps_class));
    out.table = CsvWriter(kReplicateColumns);
    out.has_table = true;
    std::map<std::size_t, std::size_t> hist;
    std::size_t censored = 0;
    std::vector<std::size_t> stuck_times;
    for (std::size_t r = 0; r < reps.size(); ++r) {
        const auto& rep = reps[r];
        out.table.cell(r).cell(o.n).cell(rep.final_barycenter.r).cell(rep.final_barycenter.theta).empty().empty();
        if (rep.sticking.n_star) {
            out.table.cell(*rep.sticking.n_star);
            ++hist[*rep.sticking.n_star];
            stuck_times.push_back(*rep.sticking.n_star);
        } else {
            out.table.empty();
            ++censored;
        }
        out.table.end_row();
    }
    CsvWriter h({"n_star", "count"});
    for (const auto& [n_star, count] : hist) h.cell(n_star).cell(count).end_row();
    h.cell(std::string("censored")).cell(censored).end_row();
    out.extra_tables["_hist"] = h.str();
    Json agg;
    agg["stuck_fraction"] = static_cast<double>(stuck_times.size()) / static_cast<double>(o.reps);
    agg["censored"] = censored;
    if (!stuck_times.empty()) {
        std::sort(stuck_times.begin(), stuck_times.end());
        agg["median_n_star_among_stuck"] = stuck_times[(stuck_times.size() - 1) / 2];
    }
    // Median over all replicates, censored ones counted as +infinity.
    if (2 * stuck_times.size() > o.reps) {
        agg["median_n_star"] = stuck_times[(o.reps - 1) / 2];
    } else {
        agg["median_n_star"] = nullptr;
    }
    out.report["aggregate"] = agg;
    return out;
}

Json sector_report_json(const kale::SectorCltReport& r) {
    Json j;
    j["origin_freq"] = r.origin_freq;
    j["edge_freq"] = r.edge_freq;
    j["interior_freq"] = r.interior_freq;
    j["analytic"] = kale::io::to_json(r.analytic);
    j["origin_se"] = r.origin_se;
    j["origin_z"] = r.origin_z;
    j["origin_within_3se"] = r.origin_within_3se;
    if (r.alternative_origin) {
        j["example_closed_form_origin_mass"] = *r.alternative_origin;
        j["example_closed_form_z"] = *r.alternative_z;
        const bool alt_ok = std::abs(*r.alternative_z) <= 3.0;
        j["supported_origin_mass"] = r.origin_within_3se == alt_ok ? Json(nullptr)
                                     : r.origin_within_3se      ? Json(r.analytic.origin_mass)
                                                                : Json(*r.alternative_origin);
    }
    j["edge_count"] = r.edge_count;
    j["edge_ks"] = r.edge_ks;
    j["edge_ks_critical_1pct"] = r.edge_ks_critical;
    j["edge_ks_pass"] = r.edge_ks_pass;
    return j;
}

Json kappa_report_json(const kale::KappaCltReport& r) {
    Json j;
    j["positive_side"] = {{"count", r.positive.count}, {"contraction", r.positive.factor}, {"se", r.positive.se}};
    j["negative_side"] = {{"count", r.negative.count}, {"contraction", r.negative.factor}, {"se", r.negative.se}};
    Json conv = Json::array();
    for (const auto& c : r.conventions) {
        conv.push_back({{"name", c.name},
                        {"w_plus", c.law.w_plus},
                        {"w_minus", c.law.w_minus},
                        {"predicted_positive", c.predicted_positive},
                        {"predicted_negative", c.predicted_negative},
                        {"within_3se", c.matches}});
    }
    j["conventions"] = conv;
    j["selected_convention"] = r.selected ? Json(r.conventions[*r.selected].name) : Json(nullptr);
    j["ks_z1"] = r.ks_z1;
    j["ks_z2"] = r.ks_z2;
    j["ks_critical_1pct"] = r.ks_critical;
    j["ks_z1_pass"] = r.ks_z1_pass;
    j["ks_z2_pass"] = r.ks_z2_pass;
    j["z1_mean"] = r.z1_mean;
    j["z1_mean_se"] = r.z1_mean_se;
    return j;
}

Output cmd_simulate_clt(const Options& o) {
    const auto spec = resolve_spec(o, o.input);
    const std::uint64_t seed = require_seed(o);
    if (o.n == 0 || o.reps == 0) throw kale::InputError("--n and --reps must be >= 1");
    const kale::SampleableMeasure mu = kale::io::materialize(spec);
    const kale::Classification c = kale::classify(mu, o.eps_class);
    const kale::LimitLaw law = kale::limit_law(mu, c);
    const kale::RngSpec rng_spec{seed};
    const kale::RescaledSample s = kale::rescaled_sample(mu, law, o.n, o.reps, rng_spec, o.jobs);

    Output out;
    out.report["config"] = config_echo(o, spec);
    out.report["classification"] = kale::io::to_json(c);
    out.report["limit"] = law_report(mu, law);
    out.report["mode"] = s.mode == kale::RescaleMode::KappaAdjusted ? "kappa_adjusted" : "sector_folded";
    if (const auto* sector = std::get_if<kale::SectorGaussian>(&law)) {
        out.report["comparison"] =
            sector_report_json(kale::analyze_sector_clt(s, *sector, mu.geometry(), sector_example_closed_form(spec)));
    } else if (const auto* k = std::get_if<kale::KappaGaussian>(&law)) {
        std::vector<kale::KappaConvention> conv{kale::make_convention("first_power", *k)};
        if (mu.has_moment_surrogate()) {
            conv.push_back(kale::make_convention("squared_radius", kale::squared_convention(mu.moment_surrogate(), *k)));
        }
        out.report["comparison"] = kappa_report_json(kale::analyze_kappa_clt(s, std::move(conv)));
    } else {
        std::size_t at_origin = 0;
        for (const auto& b : s.barycenters) at_origin += b.is_origin();
        out.report["comparison"] = {{"origin_freq", static_cast<double>(at_origin) / static_cast<double>(o.reps)}};
    }

    out.table = CsvWriter(kReplicateColumns);
    out.has_table = true;
    for (std::size_t r = 0; r < s.reps; ++r) {
        out.table.cell(r).cell(o.n).cell(s.barycenters[r].r).cell(s.barycenters[r].theta);
        out.table.cell(s.draws[r].z1).cell(s.draws[r].z2).empty().end_row();
    }

    // Limit-law draws use a stream index no replicate can reach.
    kale::Rng rng = rng_spec.stream(UINT64_MAX);
    const std::size_t count = o.samples ? o.samples : o.reps;
    CsvWriter lim({"z1", "z2"});
    if (const auto* k = std::get_if<kale::KappaGaussian>(&law)) {
        for (const auto& z : kale::sample_limit(*k, rng, count)) lim.cell(z.z1).cell(z.z2).end_row();
    } else if (const auto* sector = std::get_if<kale::SectorGaussian>(&law)) {
        for (const auto& p : kale::sample_limit(*sector, mu.geometry(), rng, count)) {
            const kale::PlanePoint z = kale::fold(mu.geometry(), sector->theta_star, p);
            lim.cell(z.z1).cell(z.z2).end_row();
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) lim.cell(0.0).cell(0.0).end_row();
    }
    out.extra_tables["_limit"] = lim.str();
    return out;
}

void emit(const Options& o, const Output& out) {
    if (o.out.empty()) {
        if (o.format == "csv") {
            std::cout << out.table.str();
        } else {
            std::cout << out.report.dump(2) << '\n';
        }
        return;
    }
    kale::io::write_file(o.out + ".json", out.report.dump(2) + "\n");
    if (out.has_table) kale::io::write_file(o.out + ".csv", out.table.str());
    for (const auto& [suffix, csv] : out.extra_tables) kale::io::write_file(o.out + suffix + ".csv", csv);
}

void add_measure_options(CLI::App* cmd, Options& o) {
    cmd->add_option("--input", o.input, "measure spec JSON file");
    cmd->add_option("--generator", o.generator, "built-in generator name");
    cmd->add_option("--params", o.params, "generator parameters as a JSON object");
    cmd->add_option("--alpha", o.alpha, "angle sum for --generator");
    cmd->add_option("--eps-class", o.eps_class, "classification tolerance (default 1e-9 max(1, rbar))");
    cmd->add_option("--out", o.out, "output prefix: writes PREFIX.json and PREFIX*.csv");
    cmd->add_option("--format", o.format, "stdout format when --out is absent")->check(CLI::IsMember({"json", "csv"}));
}

void add_sim_options(CLI::App* cmd, Options& o) {
    cmd->add_option("--seed", o.seed, "master seed (required)");
    cmd->add_option("--n", o.n, "sample size per replicate");
    cmd->add_option("--reps", o.reps, "number of replicates");
    cmd->add_option("--jobs", o.jobs, "worker threads; output does not depend on it")->check(CLI::Range(1u, 1024u));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Frechet means, stickiness and limit laws on the kale"};
    app.require_subcommand(1);
    Options o;

    auto* classify = app.add_subcommand("classify", "classify a measure and report its mean");
    add_measure_options(classify, o);
    classify->add_option("--grid", o.grid, "profile samples in the CSV table");

    auto* mean = app.add_subcommand("mean", "Frechet mean of a measure");
    add_measure_options(mean, o);

    auto* limit = app.add_subcommand("limit-law", "limit law of the rescaled barycenter");
    add_measure_options(limit, o);
    limit->add_option("--samples", o.samples, "draw this many limit samples into the CSV table");
    limit->add_option("--seed", o.seed, "seed for --samples");

    auto* lln = app.add_subcommand("simulate-lln", "barycenter trajectories and sticking times");
    add_measure_options(lln, o);
    add_sim_options(lln, o);

    auto* clt = app.add_subcommand("simulate-clt", "rescaled barycenters against the limit law");
    add_measure_options(clt, o);
    add_sim_options(clt, o);
    clt->add_option("--samples", o.samples, "limit-law samples to write (default: reps)");

    auto* probe = app.add_subcommand("probe", "perturbation probe of the mean");
    add_measure_options(probe, o);
    probe->add_option("--nu", o.nu_input, "perturbing measure spec JSON file")->required();
    probe->add_option("--eps", o.eps, "mixture weight in (0, 1)");

    auto* profile = app.add_subcommand("moment-profile", "folded first moments on a grid");
    add_measure_options(profile, o);
    profile->add_option("--grid", o.grid, "number of grid angles");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        Output out;
        if (*classify) out = cmd_classify(o);
        else if (*mean) out = cmd_mean(o);
        else if (*limit) out = cmd_limit_law(o);
        else if (*lln) out = cmd_simulate_lln(o);
        else if (*clt) out = cmd_simulate_clt(o);
        else if (*probe) out = cmd_probe(o);
        else out = cmd_moment_profile(o);
        emit(o, out);
    } catch (const kale::InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const Json::exception& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const kale::PreconditionError& e) {
        std::cerr << "precondition violated: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

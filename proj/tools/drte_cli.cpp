#include "drte/covariance.hpp"
#include "drte/data_model.hpp"
#include "drte/errors.hpp"
#include "drte/inference.hpp"
#include "drte/point_estimation.hpp"
#include "drte/radius_calibration.hpp"
#include "drte/robust_solver.hpp"
#include "drte/simulation.hpp"
#include "drte/variance_bounds.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#ifndef DRTE_VERSION
#define DRTE_VERSION "0.0.0"
#endif

using nlohmann::ordered_json;
using namespace drte;

namespace {

constexpr const char* kSchemaVersion = "1.0";

enum ExitCode : int { kOk = 0, kInputError = 2, kNumericalError = 3, kNoSecondStep = 4 };

/// Raised for flag combinations CLI11 cannot express.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileNotFound(path.string());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return hex.str();
}

// JSON has no infinity; non-finite values are written as null.
ordered_json num(double x) {
    if (!std::isfinite(x)) return nullptr;
    return x;
}

std::string fmt(double x, int prec = 6) {
    std::ostringstream os;
    os << std::setprecision(prec) << x;
    return os.str();
}

// Flags shared by the estimation commands.
struct ModelFlags {
    std::string data;
    std::string outcome_column = "y";
    std::string treatment_column = "t";
    double delta = 0.0;
    std::optional<double> p;
    std::optional<double> q;
    std::string bounds = "sharp";
    bool json = false;

    RobustConfig config() const {
        if (p) return RobustConfig::from_p(delta, *p);
        return RobustConfig(delta, q.value_or(2.0));
    }
};

void add_data_flags(CLI::App* cmd, ModelFlags& f, bool required) {
    auto* opt = cmd->add_option("--data", f.data, "CSV file with outcome and treatment columns");
    if (required) opt->required();
    opt->check(CLI::ExistingFile);
    cmd->add_option("--outcome-column", f.outcome_column, "outcome column name")->capture_default_str();
    cmd->add_option("--treatment-column", f.treatment_column, "0/1 treatment column name")
        ->capture_default_str();
}

void add_model_flags(CLI::App* cmd, ModelFlags& f, bool with_delta) {
    if (with_delta) {
        cmd->add_option("--delta", f.delta, "Wasserstein radius")
            ->check(CLI::NonNegativeNumber)
            ->capture_default_str();
    }
    auto* p = cmd->add_option("--p", f.p, "cost-norm order p in (1, inf]");
    auto* q = cmd->add_option("--q", f.q, "dual penalty order q >= 1 (default 2)");
    p->excludes(q);
    q->excludes(p);
    p->check(CLI::Validator(
        [](std::string& s) -> std::string {
            double v = 0.0;
            if (!CLI::detail::lexical_cast(s, v) || !(v > 1.0)) return "p must be in (1, inf]";
            return {};
        },
        "P>1"));
    q->check(CLI::Range(1.0, std::numeric_limits<double>::max()));
    cmd->add_option("--bounds", f.bounds, "variance bounds: sharp or neyman")
        ->check(CLI::IsMember({"sharp", "neyman"}))
        ->capture_default_str();
    cmd->add_flag("--json", f.json, "write JSON to stdout instead of a table");
}

ordered_json manifest(const std::string& command, const ordered_json& config,
                      const std::string& input) {
    ordered_json m;
    m["command"] = command;
    m["config"] = config;
    m["version"] = DRTE_VERSION;
    if (input.empty()) {
        m["input"] = nullptr;
        m["input_sha256"] = nullptr;
    } else {
        m["input"] = std::filesystem::path(input).filename().string();
        m["input_sha256"] = sha256_file(input);
    }
    return m;
}

ordered_json model_config(const ModelFlags& f, const RobustConfig& cfg) {
    ordered_json c;
    c["delta"] = cfg.delta();
    c["q"] = cfg.q();
    c["bounds"] = f.bounds;
    return c;
}

ordered_json bounds_json(const VarianceBounds& b) {
    return ordered_json{{"v_o", num(b.v_o)}, {"v_p", num(b.v_p)}};
}

ordered_json sigma_json(const SigmaMatrix& s) {
    ordered_json rows = ordered_json::array();
    for (int i = 0; i < 3; ++i) {
        ordered_json row = ordered_json::array();
        for (int j = 0; j < 3; ++j) row.push_back(num(s(i, j)));
        rows.push_back(row);
    }
    return ordered_json{{"order", {"v_p", "v_o", "tau_star"}},
                        {"method", std::string(to_string(s.method()))},
                        {"repaired", s.repaired()},
                        {"entries", rows}};
}

ordered_json interval_json(const IntervalEstimate& iv) {
    return ordered_json{{"method", std::string(to_string(iv.method))},
                        {"alpha", iv.alpha},
                        {"lower", num(iv.lower)},
                        {"upper", num(iv.upper)},
                        {"c_min", num(iv.diagnostics.c_min)},
                        {"c_max", num(iv.diagnostics.c_max)}};
}

void print_json(const ordered_json& j) { std::cout << j.dump(2) << "\n"; }

// ---------------------------------------------------------------- estimate

struct EstimateFlags : ModelFlags {
    bool allow_q1 = false;
};

int cmd_estimate(const EstimateFlags& f) {
    const RobustConfig cfg = f.config();
    if (cfg.q() <= 1.0 && !f.allow_q1) {
        throw UsageError("--q 1 (or --p inf) needs --allow-q1; inference is unavailable for q = 1");
    }
    const auto sample = load_sample(f.data, f.outcome_column, f.treatment_column);
    const BoundMethod method = parse_bound_method(f.bounds);
    const Analysis a = analyze(sample, cfg, method, {}, false);
    const VarianceBounds sharp = estimate_variance_bounds(sample, BoundMethod::Sharp);
    const VarianceBounds neyman = estimate_variance_bounds(sample, BoundMethod::Neyman);
    const double n = static_cast<double>(sample.n());

    std::vector<std::string> warnings = a.warnings;
    for (const auto& w : a.points.sigma.warnings()) warnings.push_back(w);

    if (f.json) {
        ordered_json j;
        j["schema_version"] = kSchemaVersion;
        j["status"] = "ok";
        j["manifest"] = manifest("estimate", model_config(f, cfg), f.data);
        j["n"] = sample.n();
        j["n1"] = sample.n1();
        j["n0"] = sample.n0();
        j["tau_star"] = num(a.bounds.tau_star);
        j["variance_bounds"] = {{"sharp", bounds_json(sharp)}, {"neyman", bounds_json(neyman)}};
        j["tau_p"] = num(a.bounds.tau_p);
        j["tau_o"] = num(a.bounds.tau_o);
        if (a.sds) {
            j["sd"] = {{"tau_p", num(a.sds->sd_p)},
                       {"tau_o", num(a.sds->sd_o)},
                       {"tau_star", num(a.points.sigma.sigma_tau())}};
            j["se"] = {{"tau_p", num(a.sds->sd_p / std::sqrt(n))},
                       {"tau_o", num(a.sds->sd_o / std::sqrt(n))},
                       {"tau_star", num(a.points.sigma.sigma_tau() / std::sqrt(n))}};
        } else {
            j["sd"] = nullptr;
            j["se"] = nullptr;
        }
        j["sigma"] = sigma_json(a.points.sigma);
        j["warnings"] = warnings;
        print_json(j);
        return kOk;
    }

    std::cout << "n = " << sample.n() << " (treated " << sample.n1() << ", control " << sample.n0()
              << ")\n";
    std::cout << "delta = " << fmt(cfg.delta()) << ", q = " << fmt(cfg.q()) << ", bounds = " << f.bounds
              << "\n\n";
    std::cout << "tau*          " << fmt(a.bounds.tau_star) << "\n";
    std::cout << "V sharp       [" << fmt(sharp.v_o) << ", " << fmt(sharp.v_p) << "]\n";
    std::cout << "V neyman      [" << fmt(neyman.v_o) << ", " << fmt(neyman.v_p) << "]\n";
    std::cout << "tau_p         " << fmt(a.bounds.tau_p);
    if (a.sds) std::cout << "   (asy. sd " << fmt(a.sds->sd_p) << ", se " << fmt(a.sds->sd_p / std::sqrt(n)) << ")";
    std::cout << "\ntau_o         " << fmt(a.bounds.tau_o);
    if (a.sds) std::cout << "   (asy. sd " << fmt(a.sds->sd_o) << ", se " << fmt(a.sds->sd_o / std::sqrt(n)) << ")";
    std::cout << "\n";
    for (const auto& w : warnings) std::cout << "warning: " << w << "\n";
    return kOk;
}

// ------------------------------------------------------------------- sweep

struct SweepFlags : ModelFlags {
    std::string deltas;
    std::optional<double> tau_star;
    std::optional<double> true_v;
    std::optional<double> v_o;
    std::optional<double> v_p;
    std::string output;
};

std::vector<double> parse_deltas(const std::string& spec) {
    std::vector<double> out;
    auto to_double = [&](const std::string& s) {
        double v = 0.0;
        if (!CLI::detail::lexical_cast(s, v)) throw UsageError("--deltas: cannot parse '" + s + "'");
        return v;
    };
    if (spec.find(':') != std::string::npos) {
        const auto parts = CLI::detail::split(spec, ':');
        if (parts.size() != 3) throw UsageError("--deltas: expected start:stop:step");
        const double a = to_double(parts[0]), b = to_double(parts[1]), step = to_double(parts[2]);
        if (!(step > 0.0) || b < a) throw UsageError("--deltas: need step > 0 and stop >= start");
        const auto count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
        for (std::size_t i = 0; i < count; ++i) out.push_back(a + static_cast<double>(i) * step);
    } else {
        for (const auto& s : CLI::detail::split(spec, ',')) {
            if (!CLI::detail::trim_copy(s).empty()) out.push_back(to_double(CLI::detail::trim_copy(s)));
        }
    }
    if (out.empty()) throw UsageError("--deltas: empty delta list");
    for (double d : out) {
        if (!(d >= 0.0)) throw UsageError("--deltas: radii must be nonnegative");
    }
    return out;
}

int cmd_sweep(const SweepFlags& f, bool delta_given) {
    std::vector<double> deltas;
    if (!f.deltas.empty()) {
        deltas = parse_deltas(f.deltas);
    } else if (delta_given) {
        deltas = {f.delta};
    } else {
        throw UsageError("sweep needs --deltas or --delta");
    }
    const double q = f.config().q();

    double tau_star = 0.0;
    VarianceBounds bounds;
    std::string mode;
    if (!f.data.empty()) {
        if (f.tau_star || f.v_o || f.v_p) {
            throw UsageError("--tau-star/--v-o/--v-p are for population mode and exclude --data");
        }
        const auto sample = load_sample(f.data, f.outcome_column, f.treatment_column);
        tau_star = estimate_ate_diff_means(sample);
        bounds = estimate_variance_bounds(sample, parse_bound_method(f.bounds));
        mode = "sample";
    } else {
        if (!f.tau_star) throw UsageError("sweep needs --data or --tau-star");
        if (f.v_o.has_value() != f.v_p.has_value()) throw UsageError("--v-o and --v-p go together");
        if (f.v_o) {
            bounds = {*f.v_o, *f.v_p};
        } else if (f.true_v) {
            bounds = {*f.true_v, *f.true_v};
        } else {
            throw UsageError("population mode needs --true-v or --v-o/--v-p");
        }
        if (!(bounds.v_o >= 0.0 && bounds.v_o <= bounds.v_p)) {
            throw UsageError("--v-o/--v-p: need 0 <= v_o <= v_p");
        }
        tau_star = *f.tau_star;
        mode = "population";
    }
    if (f.true_v && !(*f.true_v >= 0.0)) throw UsageError("--true-v must be nonnegative");

    const auto rows = sweep_delta(tau_star, bounds, q, deltas);
    std::vector<double> tau_dr;
    if (f.true_v) {
        for (double d : deltas) tau_dr.push_back(solve_minimax(tau_star, *f.true_v, RobustConfig(d, q)));
    }

    std::ostringstream csv;
    csv << std::setprecision(10) << "delta,tau_p,tau_o" << (f.true_v ? ",tau_dr" : "") << "\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        csv << rows[i].delta << "," << rows[i].tau_p << "," << rows[i].tau_o;
        if (f.true_v) csv << "," << tau_dr[i];
        csv << "\n";
    }

    if (!f.output.empty()) {
        std::ofstream out(f.output);
        if (!out) throw UsageError("--output: cannot write " + f.output);
        out << csv.str();
    }

    if (f.json) {
        ordered_json c{{"q", q}, {"mode", mode}, {"bounds", f.bounds}};
        if (f.true_v) c["true_v"] = *f.true_v;
        ordered_json j;
        j["schema_version"] = kSchemaVersion;
        j["status"] = "ok";
        j["manifest"] = manifest("sweep", c, f.data);
        j["tau_star"] = tau_star;
        j["variance_bounds"] = bounds_json(bounds);
        ordered_json arr = ordered_json::array();
        for (std::size_t i = 0; i < rows.size(); ++i) {
            ordered_json r{{"delta", rows[i].delta}, {"tau_p", rows[i].tau_p}, {"tau_o", rows[i].tau_o}};
            if (f.true_v) r["tau_dr"] = tau_dr[i];
            arr.push_back(r);
        }
        j["rows"] = arr;
        print_json(j);
    } else if (f.output.empty()) {
        std::cout << csv.str();
    }
    return kOk;
}

// ------------------------------------------------------------------- infer

struct InferFlags : ModelFlags {
    double alpha = 0.05;
    double beta = 0.045;
    std::size_t grid_points = 101;
};

int cmd_infer(const InferFlags& f) {
    const RobustConfig cfg = f.config();
    if (cfg.q() <= 1.0) throw UsageError("--q: inference requires q > 1 (p < inf)");
    if (!(f.beta >= 0.0 && f.beta < f.alpha)) throw UsageError("--beta: need 0 <= beta < alpha");
    const auto sample = load_sample(f.data, f.outcome_column, f.treatment_column);
    TwoStepOptions opt;
    opt.alpha = f.alpha;
    opt.beta = f.beta;
    opt.grid_points = f.grid_points;
    const Analysis a = analyze(sample, cfg, parse_bound_method(f.bounds), opt, true);
    const auto& ts = *a.two_step;
    const bool second = ts.interval.has_value();

    std::vector<std::string> warnings = a.warnings;
    for (const auto& w : a.points.sigma.warnings()) warnings.push_back(w);
    for (const auto& w : ts.diagnostics.warnings) warnings.push_back(w);

    if (f.json) {
        ordered_json c = model_config(f, cfg);
        c["alpha"] = f.alpha;
        c["beta"] = f.beta;
        c["grid_points"] = f.grid_points;
        ordered_json j;
        j["schema_version"] = kSchemaVersion;
        j["status"] = second ? "ok" : "no-second-step";
        j["manifest"] = manifest("infer", c, f.data);
        j["n"] = sample.n();
        j["tau_star"] = num(a.bounds.tau_star);
        j["variance_bounds"] = bounds_json(a.bounds.bounds);
        j["tau_p"] = num(a.bounds.tau_p);
        j["tau_o"] = num(a.bounds.tau_o);
        j["first_step"] = {{"beta", f.beta},
                           {"lower", num(ts.diagnostics.first_step_lower)},
                           {"upper", num(ts.diagnostics.first_step_upper)},
                           {"rejected_zero", ts.diagnostics.rejected_first_step}};
        j["im"] = a.im ? interval_json(*a.im) : ordered_json(nullptr);
        if (second) {
            ordered_json b = interval_json(*ts.interval);
            b["grid_points"] = ts.diagnostics.grid_points;
            j["im_bonferroni"] = b;
        } else {
            j["im_bonferroni"] = nullptr;
        }
        j["warnings"] = warnings;
        print_json(j);
    } else {
        std::cout << "tau* = " << fmt(a.bounds.tau_star) << ", tau_p = " << fmt(a.bounds.tau_p)
                  << ", tau_o = " << fmt(a.bounds.tau_o) << " (n = " << sample.n() << ")\n";
        std::cout << "first step (" << fmt(100 * (1 - f.beta), 4) << "% for tau*): ["
                  << fmt(ts.diagnostics.first_step_lower) << ", " << fmt(ts.diagnostics.first_step_upper)
                  << "]\n";
        if (a.im) {
            std::cout << "IM             [" << fmt(a.im->lower) << ", " << fmt(a.im->upper)
                      << "]  c_n = " << fmt(a.im->diagnostics.c_min) << "\n";
        }
        if (second) {
            const auto& iv = *ts.interval;
            std::cout << "IM-Bonferroni  [" << fmt(iv.lower) << ", " << fmt(iv.upper) << "]  c_n in ["
                      << fmt(iv.diagnostics.c_min) << ", " << fmt(iv.diagnostics.c_max) << "] over "
                      << ts.diagnostics.grid_points << " grid points\n";
        } else {
            std::cout << "treatment effect not distinguishable from zero at level beta = " << f.beta
                      << "; no second-step interval\n";
        }
        for (const auto& w : warnings) std::cout << "warning: " << w << "\n";
    }
    return second ? kOk : kNoSecondStep;
}

// ---------------------------------------------------------------- simulate

struct SimulateFlags {
    std::vector<int> cases;
    GaussianDGP dgp;
    double delta = 0.1;
    std::optional<double> p;
    std::optional<double> q;
    std::size_t n = 1000;
    std::size_t replications = 1000;
    std::uint64_t seed = 20240601;
    unsigned threads = 1;
    double alpha = 0.05;
    double beta = 0.045;
    std::size_t grid_points = 101;
    std::string bounds = "sharp";
    std::string output = "simulation";
    bool json = false;
};

ordered_json report_json(const SimulationReport& r) {
    const auto& d = r.dgp;
    return ordered_json{
        {"case", r.case_id == 0 ? ordered_json(nullptr) : ordered_json(r.case_id)},
        {"dgp",
         {{"mu1", d.mu1}, {"mu0", d.mu0}, {"sigma1", d.sigma1}, {"sigma0", d.sigma0}, {"rho", d.rho},
          {"e", d.e}, {"n", d.n}}},
        {"delta", r.config.delta()},
        {"q", r.config.q()},
        {"truth",
         {{"tau_star", r.truth.tau_star}, {"v_true", r.truth.v_true},
          {"v_o", r.truth.bounds.v_o}, {"v_p", r.truth.bounds.v_p}, {"tau_dr", r.truth.tau_dr},
          {"tau_p", r.truth.tau_p}, {"tau_o", r.truth.tau_o}}},
        {"replications", r.replications},
        {"two_step_replications", r.two_step_replications},
        {"coverage_im", num(r.coverage_im)},
        {"coverage_imbonf", num(r.coverage_imbonf)},
        {"coverage_im_all", num(r.coverage_im_all)},
        {"mean_im", {num(r.mean_im_lower), num(r.mean_im_upper)}},
        {"mean_imbonf", {num(r.mean_bonf_lower), num(r.mean_bonf_upper)}},
        {"length_ratio", num(r.length_ratio)},
        {"mean_length_ratio", num(r.mean_length_ratio)},
        {"nesting_violations", r.nesting_violations}};
}

int cmd_simulate(const SimulateFlags& f, bool dgp_given) {
    if (f.replications < 100) throw UsageError("--replications must be at least 100");
    if (!f.cases.empty() && dgp_given) throw UsageError("--case excludes the DGP flags");
    if (f.cases.empty() && !dgp_given) throw UsageError("simulate needs --case or DGP flags (--mu1 ...)");

    StudyOptions opt;
    opt.replications = f.replications;
    opt.alpha = f.alpha;
    opt.beta = f.beta;
    opt.grid_points = f.grid_points;
    opt.bounds = parse_bound_method(f.bounds);
    opt.seed = f.seed;
    opt.threads = f.threads;

    std::vector<SimulationReport> reports;
    if (!f.cases.empty()) {
        for (int id : f.cases) {
            const auto c = simulation_case(id, f.n);
            reports.push_back(run_coverage_study(c.dgp, c.config, opt, id));
        }
    } else {
        GaussianDGP dgp = f.dgp;
        dgp.n = f.n;
        dgp.validate();
        const RobustConfig cfg = f.p ? RobustConfig::from_p(f.delta, *f.p) : RobustConfig(f.delta, f.q.value_or(2.0));
        reports.push_back(run_coverage_study(dgp, cfg, opt, 0));
    }

    // Thread count does not change results, so it stays out of the manifest.
    ordered_json c{{"cases", f.cases},
                   {"n", f.n},
                   {"replications", f.replications},
                   {"alpha", f.alpha},
                   {"beta", f.beta},
                   {"grid_points", f.grid_points},
                   {"bounds", f.bounds},
                   {"seed", f.seed}};
    if (dgp_given) {
        c["dgp"] = {{"mu1", f.dgp.mu1}, {"mu0", f.dgp.mu0}, {"sigma1", f.dgp.sigma1},
                    {"sigma0", f.dgp.sigma0}, {"rho", f.dgp.rho}, {"e", f.dgp.e}};
        c["delta"] = reports.front().config.delta();
        c["q"] = reports.front().config.q();
    }
    const ordered_json m = manifest("simulate", c, "");

    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["status"] = "ok";
    j["manifest"] = m;
    j["reports"] = ordered_json::array();
    for (const auto& r : reports) j["reports"].push_back(report_json(r));

    std::ostringstream csv;
    csv << table_csv_header() << "\n";
    for (const auto& r : reports) csv << table_csv_row(r) << "\n";

    const std::string base = f.output;
    auto write = [](const std::string& path, const std::string& text) {
        std::ofstream out(path);
        if (!out) throw UsageError("--output: cannot write " + path);
        out << text;
    };
    write(base + ".json", j.dump(2) + "\n");
    write(base + ".csv", csv.str());
    write(base + ".manifest.json", m.dump(2) + "\n");

    if (f.json) {
        print_json(j);
    } else {
        std::cout << csv.str();
        std::cout << "wrote " << base << ".json, " << base << ".csv, " << base << ".manifest.json\n";
    }
    return kOk;
}

// --------------------------------------------------------------- benchmark

struct BenchmarkFlags {
    std::string data;
    std::string outcome_column = "y";
    std::string treatment_column = "t";
    std::string split = "median";
    std::string mask_column;
    std::size_t permutations = 200;
    std::uint64_t seed = 1;
    std::optional<double> tau;
    std::optional<double> delta;
    bool json = false;
};

int cmd_benchmark(const BenchmarkFlags& f) {
    SplitOptions opt;
    opt.kind = parse_split_kind(f.split);
    opt.permutations = f.permutations;
    opt.seed = f.seed;
    if (opt.kind == SplitKind::ProvidedMask) {
        if (f.mask_column.empty()) throw UsageError("--split mask needs --mask-column");
        opt.mask = load_binary_column(f.data, f.mask_column);
    } else if (!f.mask_column.empty()) {
        throw UsageError("--mask-column only applies to --split mask");
    }
    if (f.tau.has_value() != f.delta.has_value()) throw UsageError("--tau and --delta go together");

    const auto sample = load_sample(f.data, f.outcome_column, f.treatment_column);
    const RadiusBenchmark b = split_benchmark(sample, opt);
    std::optional<double> shift;
    if (f.tau) shift = shift_decomposition(*f.tau, *f.delta);

    if (f.json) {
        ordered_json c{{"split", f.split}, {"permutations", f.permutations}, {"seed", f.seed}};
        if (!f.mask_column.empty()) c["mask_column"] = f.mask_column;
        ordered_json j;
        j["schema_version"] = kSchemaVersion;
        j["status"] = "ok";
        j["manifest"] = manifest("benchmark", c, f.data);
        j["split"] = b.split_description;
        j["cells"] = {{"treated", {b.n1_a, b.n1_b}}, {"control", {b.n0_a, b.n0_b}}};
        j["w2_y1"] = b.w2_y1;
        j["w2_y0"] = b.w2_y0;
        j["joint_lower_bound"] = b.joint_lower_bound;
        j["permutation_null_95"] = f.permutations > 0 ? ordered_json(b.permutation_null_95) : ordered_json(nullptr);
        j["shift_component"] = shift ? ordered_json(*shift) : ordered_json(nullptr);
        print_json(j);
        return kOk;
    }
    std::cout << "split: " << b.split_description << "\n";
    std::cout << "cells: treated " << b.n1_a << "/" << b.n1_b << ", control " << b.n0_a << "/" << b.n0_b << "\n";
    std::cout << "W2(Y(1))            " << fmt(b.w2_y1) << "\n";
    std::cout << "W2(Y(0))            " << fmt(b.w2_y0) << "\n";
    std::cout << "joint lower bound   " << fmt(b.joint_lower_bound) << "\n";
    if (f.permutations > 0) {
        std::cout << "permutation 95%     " << fmt(b.permutation_null_95) << " (" << f.permutations
                  << " relabellings)\n";
    }
    if (shift) std::cout << "shift component     " << fmt(*shift) << "\n";
    return kOk;
}

int report_error(const std::string& kind, const std::string& msg, int code, bool json) {
    if (json) {
        ordered_json j{{"schema_version", kSchemaVersion}, {"status", "error"}, {"error", kind}, {"message", msg}};
        print_json(j);
    }
    std::cerr << "error: " << msg << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributionally robust prediction of treatment effects"};
    app.set_version_flag("--version", DRTE_VERSION);
    app.require_subcommand(1);

    EstimateFlags est;
    auto* c_est = app.add_subcommand("estimate", "bounds, minimax predictors and asymptotic SDs");
    add_data_flags(c_est, est, true);
    add_model_flags(c_est, est, true);
    c_est->add_flag("--allow-q1", est.allow_q1, "accept q = 1 for point estimates");

    SweepFlags sw;
    auto* c_sw = app.add_subcommand("sweep", "minimax predictors along a grid of radii");
    add_data_flags(c_sw, sw, false);
    add_model_flags(c_sw, sw, true);
    c_sw->add_option("--deltas", sw.deltas, "radii as start:stop:step or a comma list");
    c_sw->add_option("--tau-star", sw.tau_star, "population ATE (population mode)");
    c_sw->add_option("--true-v", sw.true_v, "true Var(Y(1)-Y(0)); adds a tau_dr column");
    c_sw->add_option("--v-o", sw.v_o, "lower variance bound (population mode)");
    c_sw->add_option("--v-p", sw.v_p, "upper variance bound (population mode)");
    c_sw->add_option("--output", sw.output, "also write the CSV here");

    InferFlags inf;
    auto* c_inf = app.add_subcommand("infer", "IM and two-step Bonferroni intervals");
    add_data_flags(c_inf, inf, true);
    add_model_flags(c_inf, inf, true);
    c_inf->add_option("--alpha", inf.alpha, "overall level")->check(CLI::Range(1e-6, 0.5))->capture_default_str();
    c_inf->add_option("--beta", inf.beta, "first-step level")->check(CLI::Range(0.0, 0.5))->capture_default_str();
    c_inf->add_option("--grid-points", inf.grid_points, "first-step grid size (>= 25)")
        ->check(CLI::Range(25, 100000))
        ->capture_default_str();

    SimulateFlags sim;
    auto* c_sim = app.add_subcommand("simulate", "Monte Carlo coverage study");
    c_sim->add_option("--case", sim.cases, "preset case(s) 1..6, e.g. --case 1,3")
        ->delimiter(',')
        ->check(CLI::Range(1, 6));
    std::vector<CLI::Option*> dgp_opts{
        c_sim->add_option("--mu1", sim.dgp.mu1, "treated mean"),
        c_sim->add_option("--mu0", sim.dgp.mu0, "control mean"),
        c_sim->add_option("--sigma1", sim.dgp.sigma1, "treated SD"),
        c_sim->add_option("--sigma0", sim.dgp.sigma0, "control SD"),
        c_sim->add_option("--rho", sim.dgp.rho, "correlation of Y(1) and Y(0)"),
        c_sim->add_option("--e", sim.dgp.e, "treatment probability"),
        c_sim->add_option("--delta", sim.delta, "radius (custom DGP)")->check(CLI::NonNegativeNumber),
    };
    auto* sp = c_sim->add_option("--p", sim.p, "cost-norm order (custom DGP)");
    auto* sq = c_sim->add_option("--q", sim.q, "dual penalty order (custom DGP)");
    sp->excludes(sq);
    sq->excludes(sp);
    dgp_opts.push_back(sp);
    dgp_opts.push_back(sq);
    c_sim->add_option("--n", sim.n, "sample size per replication")->check(CLI::Range(30, 100000000))->capture_default_str();
    c_sim->add_option("--replications", sim.replications, "replications (>= 100)")->capture_default_str();
    c_sim->add_option("--seed", sim.seed, "master seed")->capture_default_str();
    c_sim->add_option("--threads", sim.threads, "worker threads")->check(CLI::Range(1u, 1024u))->capture_default_str();
    c_sim->add_option("--alpha", sim.alpha, "overall level")->capture_default_str();
    c_sim->add_option("--beta", sim.beta, "first-step level")->capture_default_str();
    c_sim->add_option("--grid-points", sim.grid_points, "first-step grid size")->capture_default_str();
    c_sim->add_option("--bounds", sim.bounds, "sharp or neyman")
        ->check(CLI::IsMember({"sharp", "neyman"}))
        ->capture_default_str();
    c_sim->add_option("--output", sim.output, "output prefix for .json/.csv/.manifest.json")->capture_default_str();
    c_sim->add_flag("--json", sim.json, "print the JSON report to stdout");

    BenchmarkFlags bm;
    auto* c_bm = app.add_subcommand("benchmark", "Wasserstein distance between two cells of the sample");
    c_bm->add_option("--data", bm.data, "CSV file")->required()->check(CLI::ExistingFile);
    c_bm->add_option("--outcome-column", bm.outcome_column, "outcome column name")->capture_default_str();
    c_bm->add_option("--treatment-column", bm.treatment_column, "treatment column name")->capture_default_str();
    c_bm->add_option("--split", bm.split, "median, halves or mask")
        ->check(CLI::IsMember({"median", "halves", "mask"}))
        ->capture_default_str();
    c_bm->add_option("--mask-column", bm.mask_column, "0/1 column giving cell membership");
    c_bm->add_option("--permutations", bm.permutations, "relabellings for the null")->capture_default_str();
    c_bm->add_option("--seed", bm.seed, "permutation seed")->capture_default_str();
    c_bm->add_option("--tau", bm.tau, "effect for the shift decomposition (q = 2)");
    c_bm->add_option("--delta", bm.delta, "radius for the shift decomposition")->check(CLI::NonNegativeNumber);
    c_bm->add_flag("--json", bm.json, "write JSON to stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInputError;
    }

    bool json = false;
    try {
        if (c_est->parsed()) {
            json = est.json;
            return cmd_estimate(est);
        }
        if (c_sw->parsed()) {
            json = sw.json;
            return cmd_sweep(sw, c_sw->count("--delta") > 0);
        }
        if (c_inf->parsed()) {
            json = inf.json;
            return cmd_infer(inf);
        }
        if (c_sim->parsed()) {
            json = sim.json;
            bool dgp_given = false;
            for (auto* o : dgp_opts) dgp_given = dgp_given || o->count() > 0;
            return cmd_simulate(sim, dgp_given);
        }
        if (c_bm->parsed()) {
            json = bm.json;
            return cmd_benchmark(bm);
        }
    } catch (const UsageError& e) {
        return report_error("usage", e.what(), kInputError, json);
    } catch (const FileNotFound& e) {
        return report_error("file-not-found", e.what(), kInputError, json);
    } catch (const ParseError& e) {
        return report_error("parse", e.what(), kInputError, json);
    } catch (const ValidationError& e) {
        return report_error("validation", e.what(), kInputError, json);
    } catch (const InsufficientData& e) {
        return report_error("insufficient-data", e.what(), kInputError, json);
    } catch (const UnsupportedConfig& e) {
        return report_error("unsupported-config", e.what(), kInputError, json);
    } catch (const DomainError& e) {
        return report_error("domain", e.what(), kInputError, json);
    } catch (const DegenerateSample& e) {
        return report_error("degenerate-sample", e.what(), kNumericalError, json);
    } catch (const Error& e) {
        return report_error("numerical", e.what(), kNumericalError, json);
    } catch (const std::exception& e) {
        return report_error("internal", e.what(), kNumericalError, json);
    }
    return kInputError;
}

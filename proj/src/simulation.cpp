#include "drte/simulation.hpp"

#include "drte/errors.hpp"
#include "drte/rng.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace drte {

void GaussianDGP::validate() const {
    if (!(sigma1 > 0.0) || !(sigma0 > 0.0)) throw DomainError("outcome SDs must be positive");
    if (!(std::fabs(rho) <= 1.0)) throw DomainError("rho must lie in [-1, 1]");
    if (!(e > 0.0 && e < 1.0)) throw DomainError("assignment probability must lie in (0, 1)");
    if (n < 2) throw DomainError("sample size must be at least 2");
    if (!std::isfinite(mu1) || !std::isfinite(mu0)) throw DomainError("means must be finite");
}

SimulationCase simulation_case(int id, std::size_t n) {
    SimulationCase c;
    c.id = id;
    double s1 = 2.0, s0 = 1.0, m1 = 1.0, m0 = 0.2;
    switch (id) {
        case 1: break;
        case 2: c.c = 1.0; break;
        case 3: s1 = 0.02; s0 = 0.01; c.c = 1.0; break;
        case 4: s1 = 20.0; s0 = 10.0; m1 = 0.1; m0 = 0.02; break;
        case 5: c.p = 1.5; break;
        case 6: c.p = 3.0; break;
        default: throw DomainError("simulation case must be 1..6, got " + std::to_string(id));
    }
    c.dgp = GaussianDGP{m1 * s1, m0 * s0, s1, s0, 0.7, 0.3, n};
    c.config = RobustConfig::from_p(c.c * s0, c.p);
    return c;
}

PopulationTruth population_truth(const GaussianDGP& dgp, const RobustConfig& config) {
    dgp.validate();
    PopulationTruth t;
    t.tau_star = dgp.mu1 - dgp.mu0;
    t.v_true = dgp.sigma1 * dgp.sigma1 + dgp.sigma0 * dgp.sigma0 -
               2.0 * dgp.rho * dgp.sigma1 * dgp.sigma0;
    t.bounds = neyman_bounds(dgp.sigma1 * dgp.sigma1, dgp.sigma0 * dgp.sigma0);
    t.bounds.method = BoundMethod::Sharp;
    t.tau_dr = solve_minimax(t.tau_star, t.v_true, config);
    t.tau_p = solve_minimax(t.tau_star, t.bounds.v_p, config);
    t.tau_o = solve_minimax(t.tau_star, t.bounds.v_o, config);
    return t;
}

namespace {

bool draw_into(const GaussianDGP& dgp, std::uint64_t seed, PotentialOutcomes& po) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::bernoulli_distribution treat(dgp.e);
    const double c = std::sqrt(std::max(0.0, 1.0 - dgp.rho * dgp.rho));
    po.y1.resize(dgp.n);
    po.y0.resize(dgp.n);
    po.t.resize(dgp.n);
    std::size_t n1 = 0;
    for (std::size_t i = 0; i < dgp.n; ++i) {
        const double z1 = z(rng);
        const double z0 = dgp.rho * z1 + c * z(rng);
        po.y1[i] = dgp.mu1 + dgp.sigma1 * z1;
        po.y0[i] = dgp.mu0 + dgp.sigma0 * z0;
        po.t[i] = treat(rng) ? 1 : 0;
        n1 += po.t[i];
    }
    return n1 > 0 && n1 < dgp.n;
}

}  // namespace

PotentialOutcomes draw_potential_outcomes(const GaussianDGP& dgp, std::uint64_t seed) {
    dgp.validate();
    PotentialOutcomes po;
    if (!draw_into(dgp, seed, po) && !draw_into(dgp, splitmix64(seed), po)) {
        throw DegenerateSample("an arm was empty in two consecutive draws");
    }
    return po;
}

ExperimentalSample draw_sample(const GaussianDGP& dgp, std::uint64_t seed) {
    PotentialOutcomes po = draw_potential_outcomes(dgp, seed);
    std::vector<double> y(po.t.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = po.t[i] ? po.y1[i] : po.y0[i];
    return ExperimentalSample(std::move(y), std::move(po.t));
}

SimulationReport run_coverage_study(const GaussianDGP& dgp, const RobustConfig& config,
                                    const StudyOptions& opt, int case_id) {
    dgp.validate();
    if (opt.replications < 100) throw DomainError("a coverage study needs at least 100 replications");
    if (!(config.q() > 1.0)) throw UnsupportedConfig("coverage studies require q > 1");

    SimulationReport rep;
    rep.case_id = case_id;
    rep.dgp = dgp;
    rep.config = config;
    rep.options = opt;
    rep.truth = population_truth(dgp, config);
    rep.neyman_population = neyman_bounds(dgp.sigma1 * dgp.sigma1, dgp.sigma0 * dgp.sigma0);
    rep.replications = opt.replications;
    rep.outcomes.resize(opt.replications);

    const TwoStepOptions two{opt.alpha, opt.beta, opt.grid_points};
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&] {
        for (std::size_t r = next++; r < opt.replications; r = next++) {
            try {
                const ExperimentalSample s = draw_sample(dgp, derive_seed(opt.seed, r));
                const PointEstimates est = estimate_points(s, opt.bounds);
                const BoundEstimates b = solve_bounds(est.tau_star, est.bounds, config);
                const IntervalEstimate im = plain_im_interval(est, b, opt.alpha);
                const TwoStepResult ts = two_step_interval(est, config, two);
                ReplicationOutcome& o = rep.outcomes[r];
                o.tau_star_hat = est.tau_star;
                o.im_lower = im.lower;
                o.im_upper = im.upper;
                o.has_two_step = ts.interval.has_value();
                if (o.has_two_step) {
                    o.bonf_lower = ts.interval->lower;
                    o.bonf_upper = ts.interval->upper;
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = opt.replications;
            }
        }
    };
    const unsigned threads = std::max(1u, opt.threads);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    const double target = rep.truth.tau_dr;
    std::size_t im_all = 0, im_cov = 0, bonf_cov = 0, k = 0;
    double im_lo = 0, im_hi = 0, bf_lo = 0, bf_hi = 0, ratio_sum = 0;
    for (const auto& o : rep.outcomes) {
        const bool im_covers = o.im_lower <= target && target <= o.im_upper;
        im_all += im_covers ? 1 : 0;
        if (!o.has_two_step) continue;
        ++k;
        im_cov += im_covers ? 1 : 0;
        bonf_cov += (o.bonf_lower <= target && target <= o.bonf_upper) ? 1 : 0;
        im_lo += o.im_lower;
        im_hi += o.im_upper;
        bf_lo += o.bonf_lower;
        bf_hi += o.bonf_upper;
        ratio_sum += (o.bonf_upper - o.bonf_lower) / (o.im_upper - o.im_lower);
        if (o.bonf_lower > o.im_lower || o.bonf_upper < o.im_upper) ++rep.nesting_violations;
    }
    rep.two_step_replications = k;
    rep.coverage_im_all = static_cast<double>(im_all) / static_cast<double>(opt.replications);
    if (k > 0) {
        const double kd = static_cast<double>(k);
        rep.coverage_im = static_cast<double>(im_cov) / kd;
        rep.coverage_imbonf = static_cast<double>(bonf_cov) / kd;
        rep.mean_im_lower = im_lo / kd;
        rep.mean_im_upper = im_hi / kd;
        rep.mean_bonf_lower = bf_lo / kd;
        rep.mean_bonf_upper = bf_hi / kd;
        rep.length_ratio = (bf_hi - bf_lo) / (im_hi - im_lo);
        rep.mean_length_ratio = ratio_sum / kd;
    }
    return rep;
}

std::string table_csv_header() {
    return "case,tau_dr,coverage_im,coverage_imbonf,ci_lo,ci_hi,bonf_lo,bonf_hi,length_ratio";
}

std::string table_csv_row(const SimulationReport& r) {
    std::ostringstream out;
    out << std::setprecision(10) << r.case_id << ',' << r.truth.tau_dr << ',' << r.coverage_im << ','
        << r.coverage_imbonf << ',' << r.mean_im_lower << ',' << r.mean_im_upper << ','
        << r.mean_bonf_lower << ',' << r.mean_bonf_upper << ',' << r.length_ratio;
    return out.str();
}

}  // namespace drte

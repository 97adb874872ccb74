// experiments.hpp - the command-line experiments as library calls:
// defaults, key validation and one ResultTable per run.

#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "qfdr/config.hpp"
#include "qfdr/exact_dynamics.hpp"
#include "qfdr/geometry.hpp"
#include "qfdr/models.hpp"
#include "qfdr/results.hpp"
#include "qfdr/slow_driving.hpp"

namespace qfdr {

struct ExperimentSpec {
    std::string name;
    std::vector<std::pair<std::string, std::string>> defaults;  // key, default ("" = optional, no default)
};

inline const std::vector<ExperimentSpec>& experiment_specs() {
    static const std::vector<ExperimentSpec> specs = {
        {"fdr-verify",
         {{"protocol", "quantum"}, {"protocol_file", ""}, {"generator", "qubit-boson"}, {"beta", "1"}, {"gamma", "1"},
          {"tau_list", "20,40,80,160"}, {"steps", "1500"}, {"r_start", "1"}, {"slow_grid", "0"}}},
        {"oscillator-metrics",
         {{"omega", "1"}, {"gamma", "1"}, {"beta_list", ""}, {"beta_min", "0.1"}, {"beta_max", "5"},
          {"beta_points", "25"}, {"numeric", "true"}, {"max_truncation", "800"}}},
        {"geodesic",
         {{"alpha", "0.5"}, {"beta", "1"}, {"gamma", "1"}, {"omega0", "0.1"}, {"omega_tau", "10"}, {"tau", "1"},
          {"samples", "201"}, {"perturbations", "0"}, {"perturbation_amplitude", "0.02"}, {"perturbation_modes", "4"}}},
        {"pareto",
         {{"model", "oscillator"}, {"beta_list", "2,1,0.7,0.6,0.5,0.4,0.3"}, {"omega_ref", "1"}, {"omega0", "0.1"},
          {"omega_tau", "10"}, {"gamma", "1"}, {"tau", "1"}, {"alpha_list", ""}, {"alpha_points", "41"}}},
        {"quench",
         {{"n_list", "8,16,32,64"}, {"coupling", "0.5"}, {"beta", "1"}, {"bath_omega", "0.7"}, {"interaction", "xx"},
          {"h0_x", "0"}, {"h0_z", "1"}, {"h1_x", "1"}, {"h1_z", "2"}, {"continuum_grid", "257"}}},
        {"oracle-tpm",
         {{"model", "chain"}, {"sites", "3"}, {"dim", "8"}, {"beta", "1"}, {"tau", "2"}, {"hx0", "0.2"}, {"hx1", "1"},
          {"hz", "0.5"}, {"coupling_j", "1"}, {"steps", "0"}}},
    };
    return specs;
}

inline const ExperimentSpec& experiment_spec(const std::string& name) {
    for (const auto& s : experiment_specs())
        if (s.name == name) return s;
    throw ValidationError("command", "unknown experiment '" + name + "'");
}

// Fills defaults and rejects unknown keys.
inline void prepare_config(const std::string& name, Config& cfg) {
    const ExperimentSpec& spec = experiment_spec(name);
    std::set<std::string> allowed;
    for (const auto& [k, v] : spec.defaults) {
        allowed.insert(k);
        if (!v.empty()) cfg.set_default(k, v);
    }
    cfg.restrict_to(allowed);
}

namespace detail {

inline double positive_int(const Config& c, const std::string& key, long min_value) {
    const long v = c.integer(key);
    if (v < min_value) throw ValidationError(key, "must be >= " + std::to_string(min_value));
    return static_cast<double>(v);
}

inline bool flag(const Config& c, const std::string& key) {
    return c.choice(key, {"true", "false"}) == "true";
}

// Real or complex square matrix from a flat row-major list.
inline HermitianMatrix matrix_from_config(const Config& c, const std::string& key) {
    const std::vector<double> re = c.numbers(key);
    const auto d = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(re.size()))));
    if (d < 1 || static_cast<std::size_t>(d * d) != re.size()) throw ValidationError(key, "entry count is not a square");
    std::vector<double> im(re.size(), 0.0);
    if (c.has(key + "_imag")) {
        im = c.numbers(key + "_imag");
        if (im.size() != re.size()) throw ValidationError(key + "_imag", "size differs from " + key);
    }
    Matrix m(d, d);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) m(i, j) = cplx(re[i * d + j], im[i * d + j]);
    if (max_abs(m - m.adjoint()) > 1e-12) throw ValidationError(key, "matrix is not Hermitian");
    return HermitianMatrix::symmetrized(m);
}

inline Matrix site_operator(const Matrix& op, int site, int sites) {
    Matrix out = identity(1);
    for (int i = 0; i < sites; ++i) out = kron(out, i == site ? op : identity(2));
    return out;
}

inline double residual_exponent(const std::vector<double>& x, const std::vector<double>& residual) {
    if (x.size() < 2) return 0.0;
    return -quad::loglog_slope(x, residual);
}

} // namespace detail

// --------------------------- fdr-verify ------------------------------------

struct FdrProtocol {
    std::function<ProtocolPath(double)> path;   // tau -> path
    GeneratorConstructor generator;
};

inline FdrProtocol fdr_protocol(const Config& c) {
    const double beta = c.positive("beta");
    const double gamma = c.positive("gamma");
    const std::string kind = c.choice("protocol", {"classical", "quantum", "file"});
    const std::string gen = c.choice("generator", {"qubit-boson", "thermalizer"});
    FdrProtocol p;
    if (gen == "qubit-boson") {
        p.generator = [beta, gamma](const HermitianMatrix& h) { return qubit_boson_generator(h, beta, gamma); };
    } else {
        p.generator = [beta, gamma](const HermitianMatrix& h) { return perfect_thermalizer(h, beta, gamma); };
    }
    if (kind == "file") {
        if (!c.has("protocol_file")) throw ValidationError("protocol_file", "required when protocol = file");
        const Config f = Config::load(c.text("protocol_file"));
        f.restrict_to({"h0", "h0_imag", "h1", "h1_imag"});
        const HermitianMatrix h0 = detail::matrix_from_config(f, "h0");
        const HermitianMatrix h1 = detail::matrix_from_config(f, "h1");
        if (h0.dim() != h1.dim()) throw ValidationError("h1", "dimension differs from h0");
        if (gen == "qubit-boson" && h0.dim() != 2) throw ValidationError("generator", "qubit-boson needs d = 2");
        p.path = [h0, h1, beta](double tau) {
            return ProtocolPath::from_unit(
                tau, beta, [h0, h1](double s) { return h0 * (1.0 - s) + h1 * s; },
                [h0, h1](double) { return h1 - h0; });
        };
        return p;
    }
    QubitSphericalProtocol proto = kind == "classical" ? qubit_protocol_classical(1.0, beta, gamma, c.positive("r_start"))
                                                       : qubit_protocol_quantum(1.0, beta, gamma);
    p.path = [proto](double tau) {
        QubitSphericalProtocol q = proto;
        q.tau = tau;
        return q.path();
    };
    return p;
}

struct FdrRow {
    double tau = 0.0;
    WorkStatistics exact, slow;
};

inline FdrRow fdr_point(const FdrProtocol& p, double tau, int steps, std::size_t slow_grid) {
    const ProtocolPath path = p.path(tau);
    const GeneratorFamily family = make_family(path, p.generator);
    const DensityMatrix rho0 = gibbs_state(path.initial_hamiltonian(), path.beta());
    const TrajectorySolution traj = evolve(family, rho0, tau, steps);
    return FdrRow{tau, exact_statistics(traj, path), fdr_report(path, family, slow_grid)};
}

inline ResultTable run_fdr_verify(const Config& c) {
    std::vector<double> taus = c.numbers("tau_list");
    if (taus.empty()) throw ValidationError("tau_list", "must not be empty");
    for (double t : taus)
        if (!(t > 0.0)) throw ValidationError("tau_list", "entries must be > 0");
    std::sort(taus.begin(), taus.end());
    const int steps = static_cast<int>(detail::positive_int(c, "steps", 8));
    const auto slow_grid = static_cast<std::size_t>(detail::positive_int(c, "slow_grid", 0));
    if (slow_grid != 0 && slow_grid < 3) throw ValidationError("slow_grid", "must be 0 (adaptive) or >= 3");
    const FdrProtocol p = fdr_protocol(c);
    const double beta = c.positive("beta");

    ResultTable t({"tau", "wdiss_exact", "half_beta_var_exact", "wdiss_slow", "half_beta_var_slow", "q_w_slow"});
    std::vector<double> res_w, res_v;
    for (double tau : taus) {
        const FdrRow r = fdr_point(p, tau, steps, slow_grid);
        t.add_row({tau, r.exact.w_diss, 0.5 * beta * r.exact.sigma2, r.slow.w_diss, 0.5 * beta * r.slow.sigma2,
                   r.slow.q_w});
        res_w.push_back(r.exact.w_diss - r.slow.w_diss);
        res_v.push_back(0.5 * beta * (r.exact.sigma2 - r.slow.sigma2));
        for (const auto& w : r.exact.warnings) t.add_note("warning_tau_" + format_number(tau), w);
    }
    if (taus.size() >= 2) {
        t.add_summary("wdiss_residual_exponent", detail::residual_exponent(taus, res_w));
        t.add_summary("half_beta_var_residual_exponent", detail::residual_exponent(taus, res_v));
    }
    const auto& last = t.rows().back();
    t.add_summary("last_exact_gap", last[2] - last[1]);
    t.add_summary("last_q_w_slow", last[5]);
    return t;
}

// --------------------------- oscillator-metrics ----------------------------

inline ResultTable run_oscillator_metrics(const Config& c) {
    OscillatorModel m;
    const double omega = c.positive("omega");
    m.gamma_rate = c.positive("gamma");
    m.omega_ref = omega;
    std::vector<double> betas;
    if (c.has("beta_list")) {
        betas = c.numbers("beta_list");
    } else {
        const double lo = c.positive("beta_min"), hi = c.positive("beta_max");
        const auto n = static_cast<int>(detail::positive_int(c, "beta_points", 1));
        if (hi < lo) throw ValidationError("beta_max", "must be >= beta_min");
        for (int i = 0; i < n; ++i)
            betas.push_back(n == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
    }
    if (betas.empty()) throw ValidationError("beta_list", "must not be empty");
    for (double b : betas)
        if (!(b > 0.0)) throw ValidationError("beta_list", "entries must be > 0");
    std::sort(betas.begin(), betas.end());
    const bool numeric = detail::flag(c, "numeric");
    const auto cap = static_cast<Index>(detail::positive_int(c, "max_truncation", 2));

    std::vector<std::string> cols = {"beta", "Lambda", "xi", "Lambda_minus_xi"};
    if (numeric) {
        for (const char* s : {"Lambda_numeric", "xi_numeric", "Lambda_minus_xi_numeric", "rel_err_Lambda", "rel_err_xi",
                              "rel_err_Lambda_minus_xi"})
            cols.emplace_back(s);
        for (double b : betas) {
            OscillatorModel probe = m;
            probe.beta = b;
            const Index d = oscillator_truncation(probe, omega);
            if (static_cast<Index>(std::ceil(1.25 * static_cast<double>(d))) > cap) {
                throw ValidationError("beta_list", "beta*omega = " + format_number(b * omega) +
                                                       " needs truncation " + std::to_string(d) + " (limit " +
                                                       std::to_string(cap) + "); raise max_truncation or set numeric = false");
            }
        }
    }
    std::vector<std::vector<double>> rows(betas.size());
    parallel_for(betas.size(), [&](std::size_t i) {
        OscillatorModel mi = m;
        mi.beta = betas[i];
        const ScalarMetrics cf = oscillator_metrics_closed_form(mi, omega);
        const double skew = oscillator_skew_closed_form(mi, omega);
        std::vector<double> row = {betas[i], cf.fluctuation, cf.dissipation, skew};
        if (numeric) {
            const ScalarMetrics nm = oscillator_metrics_numeric(mi, omega);
            const double nskew = nm.fluctuation - nm.dissipation;
            row.insert(row.end(), {nm.fluctuation, nm.dissipation, nskew,
                                   std::abs(nm.fluctuation - cf.fluctuation) / std::abs(cf.fluctuation),
                                   std::abs(nm.dissipation - cf.dissipation) / std::abs(cf.dissipation),
                                   std::abs(nskew - skew) / std::abs(skew)});
        }
        rows[i] = std::move(row);
    });
    ResultTable t(cols);
    double worst = 0.0;
    for (auto& r : rows) {
        if (numeric) worst = std::max({worst, r[7], r[8]});
        t.add_row(std::move(r));
    }
    if (numeric) t.add_summary("max_rel_err", worst);
    OscillatorModel lo = m, hi = m;
    lo.beta = betas.front();
    hi.beta = betas.back();
    t.add_summary("skew_ratio_at_beta_min", oscillator_skew_closed_form(lo, omega) /
                                                oscillator_metrics_closed_form(lo, omega).fluctuation);
    t.add_summary("xi_over_low_temperature_limit_at_beta_max",
                  oscillator_metrics_closed_form(hi, omega).dissipation * 2.0 * m.gamma_rate * omega);
    return t;
}

// --------------------------- geodesic --------------------------------------

inline OscillatorModel oscillator_from_config(const Config& c) {
    OscillatorModel m;
    m.beta = c.positive("beta");
    m.gamma_rate = c.positive("gamma");
    m.omega0 = c.positive("omega0");
    m.omega_tau = c.positive("omega_tau");
    return m;
}

// Random endpoint-pinned perturbation whose amplitude is `amplitude` times
// the endpoint span; frequencies stay positive along the geodesic.
inline PinnedPerturbation random_pinned_perturbation(std::mt19937_64& rng, const GeodesicSolution& g, double amplitude,
                                                     int modes) {
    std::normal_distribution<double> normal(0.0, 1.0);
    PinnedPerturbation p;
    p.tau = g.tau;
    const double span = std::abs(g.lambda.back() - g.lambda.front());
    const double floor = *std::min_element(g.lambda.begin(), g.lambda.end());
    for (int k = 0; k < modes; ++k) p.coefficients.push_back(amplitude * span * normal(rng) / (k + 1));
    double peak = 0.0;
    for (std::size_t i = 0; i < 513; ++i) peak = std::max(peak, std::abs(p.value(g.tau * static_cast<double>(i) / 512.0)));
    if (peak > 0.5 * floor)
        for (double& ck : p.coefficients) ck *= 0.5 * floor / peak;
    return p;
}

struct PerturbationCheck {
    double geodesic_cost = 0.0;
    double min_relative_excess = 0.0;  // min over samples of (C_pert - C_geo) / C_geo
};

inline PerturbationCheck perturbation_check(const GeodesicSolution& g, const MetricPair1D& metrics, int samples,
                                            double amplitude, int modes, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<PinnedPerturbation> perts;
    for (int i = 0; i < samples; ++i) perts.push_back(random_pinned_perturbation(rng, g, amplitude, modes));
    PerturbationCheck out;
    out.geodesic_cost = cost_of_path(g, metrics).c_alpha;
    std::vector<double> excess(perts.size());
    parallel_for(perts.size(), [&](std::size_t i) {
        excess[i] = (perturbed_cost(g, metrics, perts[i]).c_alpha - out.geodesic_cost) / out.geodesic_cost;
    });
    out.min_relative_excess = excess.empty() ? 0.0 : *std::min_element(excess.begin(), excess.end());
    return out;
}

inline ResultTable run_geodesic(const Config& c, std::uint64_t seed) {
    const OscillatorModel m = oscillator_from_config(c);
    const double alpha = c.number("alpha");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("alpha", "must lie in [0, 1]");
    const double tau = c.positive("tau");
    const auto samples = static_cast<std::size_t>(detail::positive_int(c, "samples", 2));
    const auto nperts = static_cast<int>(detail::positive_int(c, "perturbations", 0));
    const double amp = c.positive("perturbation_amplitude");
    const auto modes = static_cast<int>(detail::positive_int(c, "perturbation_modes", 1));

    const MetricPair1D metrics = oscillator_metric_pair(m);
    const GeodesicSolution g = optimal_velocity_1d(metrics, alpha, m.omega0, m.omega_tau, tau, samples);
    ResultTable t({"t", "omega", "omega_dot", "g_alpha"});
    for (std::size_t k = 0; k < g.times.size(); ++k)
        t.add_row({g.times[k], g.lambda[k], g.velocity[k], metrics(g.lambda[k]).alpha(alpha)});
    t.add_summary("length", g.length);
    t.add_summary("cost", g.cost);
    t.add_summary("sigma_tilde2", g.sigma_tilde2);
    t.add_summary("wdiss", g.w_diss);
    t.add_summary("el_residual", g.el_residual);
    t.add_summary("implicit_residual", oscillator_geodesic_residual(m, g));
    if (nperts > 0) {
        const PerturbationCheck pc = perturbation_check(g, metrics, nperts, amp, modes, seed);
        t.add_summary("geodesic_cost_quadrature", pc.geodesic_cost);
        t.add_summary("min_perturbation_excess", pc.min_relative_excess);
    }
    return t;
}

// --------------------------- pareto ----------------------------------------

// Largest perpendicular distance (sigma~^2 - W) / sqrt(2) of a front from the diagonal.
inline double diagonal_distance(const std::vector<ParetoPoint>& front) {
    double d = 0.0;
    for (const auto& p : front) d = std::max(d, (p.sigma_tilde2 - p.w_diss) / std::sqrt(2.0));
    return d;
}

inline MetricPair1D pareto_metrics(const std::string& model, double beta, double gamma) {
    if (model == "oscillator") {
        OscillatorModel m;
        m.beta = beta;
        m.gamma_rate = gamma;
        return oscillator_metric_pair(m);
    }
    // H = lambda sz: commuting chart, Lambda = xi.
    ControlChart chart{HermitianMatrix::zero(2), {HermitianMatrix::symmetrized(Matrix(pauli::z()))}, beta,
                       [beta, gamma](const HermitianMatrix& h) { return perfect_thermalizer(h, beta, gamma); }};
    return metric_pair_1d(chart);
}

inline ResultTable run_pareto(const Config& c) {
    const std::string model = c.choice("model", {"oscillator", "qubit-z"});
    std::vector<double> betas = c.numbers("beta_list");
    if (betas.empty()) throw ValidationError("beta_list", "must not be empty");
    for (double b : betas)
        if (!(b > 0.0)) throw ValidationError("beta_list", "entries must be > 0");
    std::sort(betas.begin(), betas.end(), std::greater<>());
    const double wref = c.positive("omega_ref");
    const double l0 = c.positive("omega0") * wref, l1 = c.positive("omega_tau") * wref;
    const double gamma = c.positive("gamma"), tau = c.positive("tau");
    std::vector<double> alphas;
    if (c.has("alpha_list")) {
        alphas = c.numbers("alpha_list");
        if (alphas.empty()) throw ValidationError("alpha_list", "must not be empty");
        for (double a : alphas)
            if (!(a >= 0.0 && a <= 1.0)) throw ValidationError("alpha_list", "entries must lie in [0, 1]");
        std::sort(alphas.begin(), alphas.end());
    } else {
        alphas = default_alpha_grid(static_cast<std::size_t>(detail::positive_int(c, "alpha_points", 1)));
    }

    ResultTable t({"beta", "alpha", "sigma_tilde2", "wdiss"});
    std::vector<double> distance;
    for (double b : betas) {
        // beta is quoted in units of 1 / omega_ref
        const double beta = b / wref;
        const auto front = pareto_front(pareto_metrics(model, beta, gamma), l0, l1, tau, alphas);
        for (const auto& p : front) {
            if (!p.ok) throw SingularityError("pareto: beta " + format_number(b) + ", alpha " + format_number(p.alpha) + ": " + p.error);
            t.add_row({b, p.alpha, p.sigma_tilde2, p.w_diss});
        }
        distance.push_back(diagonal_distance(front));
        t.add_summary("diagonal_distance_beta_" + format_number(b), distance.back());
    }
    bool monotone = true;
    for (std::size_t i = 1; i < distance.size(); ++i) monotone = monotone && distance[i] <= distance[i - 1];
    t.add_note("distance_monotone_in_beta", monotone ? "true" : "false");
    return t;
}

// --------------------------- quench ----------------------------------------

inline QuenchSequence quench_from_config(const Config& c) {
    const auto sx = HermitianMatrix::symmetrized(Matrix(pauli::x()));
    const auto sz = HermitianMatrix::symmetrized(Matrix(pauli::z()));
    const HermitianMatrix h0 = sx * c.number("h0_x") + sz * c.number("h0_z");
    const HermitianMatrix h1 = sx * c.number("h1_x") + sz * c.number("h1_z");
    const HermitianMatrix bath = sz * c.positive("bath_omega");
    const std::string kind = c.choice("interaction", {"xx", "zz", "xz"});
    const Matrix a = kind == "zz" ? Matrix(pauli::z()) : Matrix(pauli::x());
    const Matrix b = kind == "xx" ? Matrix(pauli::x()) : Matrix(pauli::z());
    const double g = c.number("coupling");
    if (g < 0.0) throw ValidationError("coupling", "must be >= 0");
    return linear_quench(h0, h1, bath, HermitianMatrix::symmetrized(kron(a, b)), g, c.positive("beta"), 2);
}

inline ResultTable run_quench(const Config& c) {
    std::vector<long> ns = c.integers("n_list");
    if (ns.empty()) throw ValidationError("n_list", "must not be empty");
    for (long n : ns)
        if (n < 2) throw ValidationError("n_list", "entries must be >= 2");
    std::sort(ns.begin(), ns.end());
    const auto grid = static_cast<std::size_t>(detail::positive_int(c, "continuum_grid", 3));
    const QuenchSequence q = quench_from_config(c);
    const QuenchConvergence conv = quench_continuum_check(q, std::vector<int>(ns.begin(), ns.end()), grid);

    ResultTable t({"N", "wdiss", "half_beta_var", "q_w_pred", "residual"});
    std::vector<double> xs, res, wres;
    double worst_order = -std::numeric_limits<double>::infinity(), worst_entropy = 0.0;
    for (const auto& r : conv.rows) {
        // N times the gap mismatch: decays like 1 / N
        const double residual = r.steps * r.residual;
        t.add_row({static_cast<double>(r.steps), r.w_diss, r.half_beta_var, r.q_w_pred, residual});
        xs.push_back(r.steps);
        res.push_back(residual);
        wres.push_back(r.steps * r.w_diss - conv.continuum.w_diss);
        worst_order = std::max(worst_order, r.w_diss - r.half_beta_var);
        worst_entropy = std::max(worst_entropy, std::abs(r.relative_entropy_w - r.w_diss));
    }
    t.add_summary("continuum_wdiss", conv.continuum.w_diss);
    t.add_summary("continuum_sigma2", conv.continuum.sigma2);
    t.add_summary("continuum_q_w", conv.continuum.q_w);
    t.add_summary("continuum_q_w_reduced_state", conv.continuum.q_w_reduced);
    t.add_summary("max_wdiss_minus_half_beta_var", worst_order);
    t.add_summary("max_relative_entropy_mismatch", worst_entropy);
    if (xs.size() >= 2) {
        t.add_summary("residual_exponent", detail::residual_exponent(xs, res));
        t.add_summary("n_wdiss_residual_exponent", detail::residual_exponent(xs, wres));
    }
    return t;
}

// --------------------------- oracle-tpm ------------------------------------

struct TpmModel {
    HamiltonianPath h;
    Index dim = 0;
};

inline TpmModel tpm_model_from_config(const Config& c, std::uint64_t seed) {
    const std::string model = c.choice("model", {"chain", "random"});
    const double tau = c.positive("tau");
    if (model == "chain") {
        const long sites = c.integer("sites");
        if (sites < 1) throw ValidationError("sites", "must be >= 1");
        if ((1L << std::min(sites, 20L)) > kMaxCompositeDim || sites > 20) {
            throw ValidationError("sites", "dimension 2^" + std::to_string(sites) + " exceeds limit " +
                                               std::to_string(kMaxCompositeDim));
        }
        const int n = static_cast<int>(sites);
        const double hx0 = c.number("hx0"), hx1 = c.number("hx1"), hz = c.number("hz"), j = c.number("coupling_j");
        Matrix x_sum = Matrix::Zero(1 << n, 1 << n), static_part = Matrix::Zero(1 << n, 1 << n);
        for (int i = 0; i < n; ++i) {
            x_sum += detail::site_operator(pauli::x(), i, n);
            static_part += hz * detail::site_operator(pauli::z(), i, n);
            if (i + 1 < n)
                static_part += j * detail::site_operator(pauli::z(), i, n) * detail::site_operator(pauli::z(), i + 1, n);
        }
        return TpmModel{[=](double t) {
                            const double hx = hx0 + (hx1 - hx0) * t / tau;
                            return HermitianMatrix::symmetrized(static_part + hx * x_sum);
                        },
                        Index{1} << n};
    }
    const long d = c.integer("dim");
    if (d < 1) throw ValidationError("dim", "must be >= 1");
    if (d > kMaxCompositeDim) {
        throw ValidationError("dim", "dimension " + std::to_string(d) + " exceeds limit " + std::to_string(kMaxCompositeDim));
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto random_h = [&]() {
        Matrix m(d, d);
        for (Index i = 0; i < d; ++i)
            for (Index k = 0; k < d; ++k) m(i, k) = cplx(normal(rng), normal(rng));
        return HermitianMatrix::symmetrized((m + m.adjoint()) / std::sqrt(4.0 * static_cast<double>(d)));
    };
    const HermitianMatrix h0 = random_h(), h1 = random_h();
    return TpmModel{[=](double t) { return h0 * (1.0 - t / tau) + h1 * (t / tau); }, d};
}

inline ResultTable run_oracle_tpm(const Config& c, std::uint64_t seed) {
    const TpmModel model = tpm_model_from_config(c, seed);
    const double beta = c.positive("beta"), tau = c.positive("tau");
    const auto steps = static_cast<int>(detail::positive_int(c, "steps", 0));
    const HermitianMatrix h0 = model.h(0.0), ht = model.h(tau);
    const DensityMatrix rho0 = gibbs_state(h0, beta);
    Matrix u;
    int used = steps;
    if (steps > 0) {
        u = unitary_propagator(model.h, tau, steps);
    } else {
        const ConvergedUnitary cu = converged_unitary(model.h, tau, rho0);
        u = cu.u;
        used = cu.steps;
    }
    const TPMDistribution dist = tpm_distribution(u, h0, ht, beta);
    const WorkMoments weak = weak_measurement_moments(u, h0, ht, rho0);

    ResultTable t({"w", "probability"});
    for (std::size_t i = 0; i < dist.support.size(); ++i) t.add_row({dist.support[i], dist.probabilities[i]});
    const double z_ratio = std::exp(log_partition_function(ht, beta) - log_partition_function(h0, beta));
    const double jar = dist.exponential_average(beta);
    t.add_summary("dim", static_cast<double>(model.dim));
    t.add_summary("steps", used);
    t.add_summary("unitarity_defect", max_abs(u.adjoint() * u - identity(u.rows())));
    t.add_summary("mean", dist.moment(1));
    t.add_summary("second_moment", dist.moment(2));
    t.add_summary("variance", dist.moment(2) - dist.moment(1) * dist.moment(1));
    t.add_summary("exp_average", jar);
    t.add_summary("z_ratio", z_ratio);
    t.add_summary("jarzynski_defect", std::abs(jar - z_ratio));
    t.add_summary("weak_mean", weak.mean);
    t.add_summary("weak_second_moment", weak.second);
    t.add_summary("moment_defect", std::max(std::abs(weak.mean - dist.moment(1)), std::abs(weak.second - dist.moment(2))));
    return t;
}

// --------------------------- dispatch --------------------------------------

inline ResultTable run_experiment(const std::string& name, const Config& c, std::uint64_t seed) {
    if (name == "fdr-verify") return run_fdr_verify(c);
    if (name == "oscillator-metrics") return run_oscillator_metrics(c);
    if (name == "geodesic") return run_geodesic(c, seed);
    if (name == "pareto") return run_pareto(c);
    if (name == "quench") return run_quench(c);
    if (name == "oracle-tpm") return run_oracle_tpm(c, seed);
    throw ValidationError("command", "unknown experiment '" + name + "'");
}

} // namespace qfdr

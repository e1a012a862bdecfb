#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lsv/asymptotics.hpp"
#include "lsv/numerics.hpp"
#include "lsv/pricing_oracle.hpp"

using namespace lsv;

namespace {

constexpr int kExitNumerical = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Common {
    std::string config;
    std::string out;
    bool reproducible = false;
};

// strike grid in log-moneyness: an explicit list or x-min/x-max/x-steps
struct Grid {
    std::vector<double> xs;
    double x_min = 0.04;
    double x_max = 0.2;
    int x_steps = 5;
    bool list_given = false;

    std::vector<double> points() const {
        if (list_given) return xs;
        std::vector<double> p;
        if (x_steps <= 0) return p;
        if (x_steps == 1) return {x_min};
        for (int i = 0; i < x_steps; ++i) p.push_back(x_min + (x_max - x_min) * i / (x_steps - 1));
        return p;
    }
};

struct McOptions {
    std::int64_t paths = 200000;
    int steps = 200;
    std::uint64_t seed = 1234567;
    bool antithetic = true;
    unsigned threads = 0;
};

class Output {
public:
    Output(std::string command, const Common& common) : command_(std::move(command)), common_(common) {}

    void param(const std::string& key, const std::string& value) { params_.emplace_back(key, value); }
    void note(const std::string& text) { notes_.push_back(text); }
    std::ostringstream& body() { return body_; }

    void write(const ModelSpec* model, double wall_time) const {
        std::ostringstream doc;
        doc << "# command: " << command_ << "\n";
        doc << "# version: " << LSV_VERSION << "\n";
        doc << "# output: " << (common_.out.empty() ? "stdout" : common_.out) << "\n";
        if (!common_.reproducible) doc << "# wall_time_s: " << num(wall_time) << "\n";
        for (const auto& [k, v] : params_) doc << "# param " << k << " = " << v << "\n";
        if (model) {
            std::istringstream cfg(model_to_config(*model));
            for (std::string line; std::getline(cfg, line);) {
                if (!line.empty()) doc << "# config: " << line << "\n";
            }
        }
        for (const auto& n : notes_) doc << "# note: " << n << "\n";
        doc << body_.str();
        if (common_.out.empty()) {
            std::cout << doc.str();
            std::cout.flush();
        } else {
            std::ofstream f(common_.out, std::ios::binary);
            if (!f) throw std::runtime_error("cannot open output file " + common_.out);
            f << doc.str();
            if (!f) throw std::runtime_error("failed writing " + common_.out);
        }
    }

private:
    std::string command_;
    const Common& common_;
    std::vector<std::pair<std::string, std::string>> params_;
    std::vector<std::string> notes_;
    std::ostringstream body_;
};

void add_common(CLI::App* sub, Common& c, bool needs_config = true) {
    auto* opt = sub->add_option("--config", c.config, "model config file");
    if (needs_config) opt->required();
    sub->add_option("--out", c.out, "output CSV path (default stdout)");
    sub->add_flag("--reproducible", c.reproducible, "omit wall time from the header");
}

void add_grid(CLI::App* sub, Grid& g) {
    sub->add_option("--x", g.xs, "log-moneyness list, comma separated")->delimiter(',');
    sub->add_option("--x-min", g.x_min, "grid start");
    sub->add_option("--x-max", g.x_max, "grid end");
    sub->add_option("--x-steps", g.x_steps, "grid points");
}

void add_mc(CLI::App* sub, McOptions& o) {
    sub->add_option("--paths", o.paths, "Monte Carlo paths (>= 10000)");
    sub->add_option("--steps", o.steps, "time steps (>= 16)");
    sub->add_option("--seed", o.seed, "RNG seed");
    sub->add_flag("--antithetic,!--no-antithetic", o.antithetic, "antithetic pairs (default on)");
    sub->add_option("--threads", o.threads, "worker threads (0 = all cores)");
}

MCConfig mc_config(const McOptions& o) {
    MCConfig c;
    c.paths = o.paths;
    c.steps = o.steps;
    c.seed = o.seed;
    c.antithetic = o.antithetic;
    c.threads = o.threads;
    return c;
}

void mc_params(Output& out, const McOptions& o) {
    out.param("paths", std::to_string(o.paths));
    out.param("steps", std::to_string(o.steps));
    out.param("seed", std::to_string(o.seed));
    out.param("antithetic", o.antithetic ? "true" : "false");
    out.param("kernel", simd::isa_name(simd::active_isa()));
}

std::vector<double> grid_points(const Grid& g, Output& out) {
    std::vector<double> pts;
    for (double x : g.points()) {
        if (std::abs(x) < 1e-6) {
            out.note("skipped x = " + num(x) + " (at the money)");
            continue;
        }
        pts.push_back(x);
    }
    if (pts.empty()) throw UsageError("empty strike grid");
    std::ostringstream s;
    for (std::size_t i = 0; i < pts.size(); ++i) s << (i ? "," : "") << num(pts[i]);
    out.param("x", s.str());
    return pts;
}

SmileMethod parse_method(const std::string& m) {
    if (m == "auto") return SmileMethod::automatic;
    if (m == "closed") return SmileMethod::closed_form;
    if (m == "generic") return SmileMethod::generic;
    throw UsageError("--method must be auto, closed or generic");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Small-time smile asymptotics for local-stochastic volatility models"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(LSV_VERSION));

    Common common;
    Grid grid;
    McOptions mco;
    double t = 0.1;
    double x1 = 0.2;
    int samples = 257;
    std::string method = "auto";
    std::optional<double> lambda_override;
    unsigned smile_threads = 0;
    AuditGrid agrid;

    auto* audit = app.add_subcommand("audit", "check the model assumptions on a grid");
    add_common(audit, common);
    audit->add_option("--x-lo", agrid.x_lo);
    audit->add_option("--x-hi", agrid.x_hi);
    audit->add_option("--y-lo", agrid.y_lo);
    audit->add_option("--y-hi", agrid.y_hi);

    auto* smile_cmd = app.add_subcommand("smile", "two-term implied volatility on a strike grid");
    add_common(smile_cmd, common);
    add_grid(smile_cmd, grid);
    smile_cmd->add_option("--t", t, "maturity")->required();
    smile_cmd->add_option("--lambda-override", lambda_override, "jump-to-default intensity");
    smile_cmd->add_option("--method", method, "auto, closed or generic");
    smile_cmd->add_option("--threads", smile_threads, "worker threads (0 = LSV_SMILE_THREADS or all cores)");

    auto* price = app.add_subcommand("price", "small-time call price asymptote");
    add_common(price, common);
    add_grid(price, grid);
    price->add_option("--t", t, "maturity")->required();
    price->add_option("--lambda-override", lambda_override, "jump-to-default intensity");

    auto* mc = app.add_subcommand("mc", "Monte Carlo call prices");
    add_common(mc, common);
    add_mc(mc, mco);
    mc->add_option("--t", t, "maturity")->required();
    mc->add_option("--strikes", grid.xs, "log-moneyness list, comma separated")->delimiter(',')->required();
    mc->add_option("--lambda-override", lambda_override, "jump-to-default intensity");

    auto* geodesic = app.add_subcommand("geodesic", "shortest path from the start point to the strike line");
    add_common(geodesic, common);
    geodesic->add_option("--x1", x1, "log-strike")->required();
    geodesic->add_option("--samples", samples, "points written along the path");

    auto* kernel = app.add_subcommand("kernel", "heat-kernel factors at one strike");
    add_common(kernel, common);
    kernel->add_option("--x1", x1, "log-strike")->required();

    auto* compare = app.add_subcommand("compare", "asymptotic smile against Monte Carlo");
    add_common(compare, common);
    add_grid(compare, grid);
    add_mc(compare, mco);
    compare->add_option("--t", t, "maturity")->required();
    compare->add_option("--lambda-override", lambda_override, "jump-to-default intensity");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }
    grid.list_given = !grid.xs.empty();

    try {
        const auto t0 = std::chrono::steady_clock::now();
        ModelSpec model = load_model(common.config);
        if (lambda_override) {
            model.lambda = *lambda_override;
            validate_model(model);
        }
        auto elapsed = [&] {
            return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        };

        if (audit->parsed()) {
            Output out("audit", common);
            const AuditReport r = audit_assumptions(model, agrid);
            out.param("x_range", num(agrid.x_lo) + ".." + num(agrid.x_hi));
            out.param("y_range", num(agrid.y_lo) + ".." + num(agrid.y_hi));
            out.param("v_max", num(r.v_max));
            out.param("vbar_limit_zero", num(r.vbar_limit_zero));
            out.param("vbar_limit_inf", num(r.vbar_limit_inf));
            out.body() << "check,status,witness\n";
            for (const auto& c : r.checks) {
                std::string w = c.witness;
                for (auto& ch : w) {
                    if (ch == '"') ch = '\'';
                }
                out.body() << c.name << "," << (!c.pass ? "fail" : c.warning ? "warn" : "pass") << ",\"" << w
                           << "\"\n";
            }
            out.write(&model, elapsed());
        } else if (smile_cmd->parsed()) {
            Output out("smile", common);
            const SmileMethod sm = parse_method(method);
            out.param("t", num(t));
            out.param("method", method);
            const auto xs = grid_points(grid, out);
            const auto pts = smile(model, xs, t, sm, smile_threads);
            out.body() << "x,sigma0,a,a_jump,sigma_t,sigma_t_jump,d,y1_star,A_SV,valid\n";
            for (const auto& p : pts) {
                out.body() << num(p.x) << "," << num(p.sigma0) << "," << num(p.a) << "," << num(p.a_jump) << ","
                           << num(p.sigma_t) << "," << num(p.sigma_t_jump) << "," << num(p.d) << ","
                           << num(p.y1_star) << "," << num(p.A_SV) << "," << (p.valid() ? 1 : 0) << "\n";
            }
            out.write(&model, elapsed());
        } else if (price->parsed()) {
            Output out("price", common);
            out.param("t", num(t));
            const auto xs = grid_points(grid, out);
            out.body() << "x,K,intrinsic,leading_term,A_SV,phi_star\n";
            for (double x : xs) {
                const CallAsymptote c = call_asymptote(model, std::exp(model.x0 + x), t);
                out.body() << num(x) << "," << num(c.K) << "," << num(c.intrinsic) << "," << num(c.leading_term)
                           << "," << num(c.A_SV) << "," << num(c.phi_star) << "\n";
            }
            out.write(&model, elapsed());
        } else if (mc->parsed()) {
            Output out("mc", common);
            out.param("t", num(t));
            mc_params(out, mco);
            const auto xs = grid_points(grid, out);
            std::vector<double> strikes;
            for (double x : xs) strikes.push_back(std::exp(model.x0 + x));
            const auto est = mc_prices(model, strikes, t, mc_config(mco));
            out.body() << "x,mc_price,stderr,mc_ivol\n";
            for (std::size_t i = 0; i < xs.size(); ++i) {
                out.body() << num(xs[i]) << "," << num(est[i].price) << "," << num(est[i].std_error) << ","
                           << num(est[i].implied_vol.value_or(std::nan(""))) << "\n";
            }
            out.write(&model, elapsed());
        } else if (geodesic->parsed()) {
            Output out("geodesic", common);
            if (samples < 2) throw UsageError("--samples must be >= 2");
            const LineGeodesic g = solve_line_geodesic(model, x1);
            out.param("x1", num(x1));
            out.param("d", num(g.d));
            out.param("y1_star", num(g.y1_star));
            out.param("K1", num(g.K1));
            const PathSample& s0 = g.path.front();
            const GeodesicPath path = integrate_geodesic(model, {s0.x, s0.y}, s0.vx, s0.vy, g.d, samples);
            out.body() << "s,x,y,kappa\n";
            for (const auto& s : path) {
                out.body() << num(s.s) << "," << num(s.x) << "," << num(s.y) << ","
                           << num(gauss_curvature(model, s.x, s.y)) << "\n";
            }
            out.write(&model, elapsed());
        } else if (kernel->parsed()) {
            Output out("kernel", common);
            const LineGeodesic g = solve_line_geodesic(model, x1);
            const KernelFactors k = kernel_factors(model, g);
            out.param("x1", num(x1));
            out.body() << "quantity,value\n";
            const std::pair<const char*, double> rows[] = {
                {"x1", x1},         {"y1_star", g.y1_star}, {"d", g.d},       {"u0", k.u0},
                {"A", k.A},         {"P", k.P},             {"psi", k.psi},   {"phi", k.phi},
                {"phi_second", k.phi_second}, {"sqrt_g", k.sqrt_g}};
            for (const auto& [name, v] : rows) out.body() << name << "," << num(v) << "\n";
            out.write(&model, elapsed());
        } else if (compare->parsed()) {
            Output out("compare", common);
            out.param("t", num(t));
            // with lambda = 0 the jump columns coincide with the diffusive ones
            out.param("correction", "a_jump");
            mc_params(out, mco);
            const auto xs = grid_points(grid, out);
            const auto pts = smile(model, xs, t);
            std::vector<double> strikes;
            for (double x : xs) strikes.push_back(std::exp(model.x0 + x));
            const auto est = mc_prices(model, strikes, t, mc_config(mco));
            out.body() << "x,sigma0,sigma_corrected,mc_ivol,mc_stderr,rel_err_corrected_vs_mc,a,a_mc_implied\n";
            for (std::size_t i = 0; i < xs.size(); ++i) {
                const double iv = est[i].implied_vol.value_or(std::nan(""));
                const double s0 = pts[i].sigma0;
                const double corrected = pts[i].sigma_t_jump;
                out.body() << num(xs[i]) << "," << num(s0) << "," << num(corrected) << "," << num(iv) << ","
                           << num(est[i].std_error) << "," << num((corrected - iv) / iv) << ","
                           << num(pts[i].a_jump) << "," << num((iv * iv - s0 * s0) / t) << "\n";
            }
            out.write(&model, elapsed());
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n" << app.help();
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return 0;
}

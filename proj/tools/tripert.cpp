// tripert: tails of the triangular 2x2 random-coefficient recursion.
//
//   tripert analyze MODEL            Cramer root, rho, s, K, assumption flags
//   tripert constants MODEL          Goldie constants of X2 and predicted limits
//   tripert simulate MODEL           stationary draws of (X1, X2, X1', X0)
//   tripert tail MODEL               importance-sampled tail curve of one target
//   tripert fit CURVE.csv            log-log regression of a curve
//   tripert verify MODEL|--plan P    full pipeline with PASS/FAIL verdict
//   tripert garch                    bivariate GARCH(1,1) volatility demo
//
// Exit codes: 0 pass, 1 tolerance failure, 2 model or assumption error,
// 3 numerical failure (non-convergence, singular fit, I/O).

#include "tripert/asymptotics.hpp"
#include "tripert/config.hpp"
#include "tripert/cramer.hpp"
#include "tripert/estimation.hpp"
#include "tripert/experiment.hpp"
#include "tripert/parallel.hpp"
#include "tripert/perpetuity.hpp"
#include "tripert/rng.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>

using namespace tripert;

namespace {

struct Globals {
    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::string out;
    bool quiet = false;
};

// Writes to --out when given, else stdout.
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw ConfigError("cannot write '" + path + "'");
        }
    }
    std::ostream& os() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

void print_flags(const CramerReport& r) {
    for (const auto& f : r.flags) {
        std::cerr << "  " << (f.passed ? "ok   " : (f.fatal ? "FAIL " : "warn ")) << f.name;
        if (!f.detail.empty()) std::cerr << ": " << f.detail;
        std::cerr << "\n";
    }
}

int classify(const std::exception& e) {
    if (is_model_error(e)) return 2;
    try {
        std::rethrow_if_nested(e);
    } catch (const std::exception& inner) {
        return classify(inner);
    } catch (...) {
    }
    return 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tail asymptotics of the triangular random-coefficient recursion"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "Master seed")->capture_default_str();
    app.add_option("--workers", g.workers, "Worker threads for replica-parallel stages")->capture_default_str();
    app.add_option("--out", g.out, "Output file (directory for verify and garch)");
    app.add_flag("--quiet", g.quiet, "Only print results, no progress or diagnostics");

    // analyze
    auto* analyze_cmd = app.add_subcommand("analyze", "Cramer root and spectral report");
    std::string model;
    std::optional<double> r_opt;
    analyze_cmd->add_option("model", model, "Model file")->required();
    analyze_cmd->add_option("--r", r_opt, "Moment order r for the y moment check");

    // constants
    auto* constants_cmd = app.add_subcommand("constants", "Goldie constants of X2 and predicted limits");
    std::size_t n_const = 1'000'000;
    bool csv = false;
    constants_cmd->add_option("model", model, "Model file")->required();
    constants_cmd->add_option("--n", n_const, "Replicas")->capture_default_str();
    constants_cmd->add_flag("--csv", csv, "CSV instead of text");

    // simulate
    auto* simulate_cmd = app.add_subcommand("simulate", "Stationary draws of the backward series");
    std::size_t n_sim = 10'000;
    double trunc_tol = 1e-12;
    simulate_cmd->add_option("model", model, "Model file")->required();
    simulate_cmd->add_option("--n", n_sim, "Draws")->capture_default_str();
    simulate_cmd->add_option("--tol", trunc_tol, "Truncation tolerance")->capture_default_str();

    // tail
    auto* tail_cmd = app.add_subcommand("tail", "Importance-sampled tail curve");
    std::string target_name = "x1";
    double tmin = 1e3, tmax = 1e10, D = 4.0;
    std::size_t points = 12, reps = 100'000;
    std::string side = "right";
    std::vector<double> v;
    tail_cmd->add_option("model", model, "Model file")->required();
    tail_cmd->add_option("--target", target_name, "x1 x2 x0 nt mt mprime mdprime ninf rt projection")
        ->capture_default_str();
    tail_cmd->add_option("--v", v, "Projection vector v1 v2")->expected(2);
    tail_cmd->add_option("--tmin", tmin)->capture_default_str();
    tail_cmd->add_option("--tmax", tmax)->capture_default_str();
    tail_cmd->add_option("--points", points)->capture_default_str();
    tail_cmd->add_option("--reps", reps, "Replicas per grid point")->capture_default_str();
    tail_cmd->add_option("--D", D, "Block window constant")->capture_default_str();
    tail_cmd->add_option("--side", side, "right or left")->check(CLI::IsMember({"right", "left"}))
        ->capture_default_str();

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "Fit log p = log C - alpha log t + alphatilde log log t");
    std::string curve_path;
    std::optional<double> alpha_fixed;
    fit_cmd->add_option("curve", curve_path, "Curve CSV (t,p_hat,se)")->required();
    fit_cmd->add_option("--alpha-fixed", alpha_fixed, "Fix alpha instead of fitting it");

    // verify and garch share the pipeline options.
    ExperimentPlan plan;
    std::string plan_path;
    std::vector<std::string> tols;
    auto pipeline_opts = [&](CLI::App* c) {
        c->add_option("--tmin", plan.tmin)->capture_default_str();
        c->add_option("--tmax", plan.tmax)->capture_default_str();
        c->add_option("--points", plan.points)->capture_default_str();
        c->add_option("--reps", plan.reps, "Replicas per grid point")->capture_default_str();
        c->add_option("--D", plan.D, "Block window constant")->capture_default_str();
        c->add_option("--goldie-samples", plan.goldie_samples)->capture_default_str();
        c->add_option("--tol", tols, "Tolerance override name=value (repeatable)");
        c->add_flag("--free-alpha", "Fit alpha instead of fixing it at the Cramer root");
        c->add_flag("--timestamp", plan.timestamp, "Add a generated= line to output files");
    };
    auto* verify_cmd = app.add_subcommand("verify", "Full pipeline with a PASS/FAIL verdict");
    verify_cmd->add_option("model", model, "Model file");
    verify_cmd->add_option("--plan", plan_path, "Plan file (overrides the model argument and options)");
    pipeline_opts(verify_cmd);

    auto* garch_cmd = app.add_subcommand("garch", "Bivariate GARCH(1,1) volatility demo");
    GarchParams gp;
    garch_cmd->add_option("--omega1", gp.omega1)->capture_default_str();
    garch_cmd->add_option("--omega2", gp.omega2)->capture_default_str();
    garch_cmd->add_option("--lambda", gp.lambda)->capture_default_str();
    garch_cmd->add_option("--beta", gp.beta_coef)->capture_default_str();
    garch_cmd->add_option("--coupling", gp.coupling)->capture_default_str();
    pipeline_opts(garch_cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        if (analyze_cmd->parsed()) {
            const ModelConfig cfg = load_model(model);
            const CramerReport rep = analyze(cfg.law, r_opt);
            Sink sink(g.out);
            sink.os() << kSchemaLine << "\n";
            write_cramer_kv(sink.os(), rep);
            if (!g.quiet) print_flags(rep);
            return 0;
        }
        if (constants_cmd->parsed()) {
            const ModelConfig cfg = load_model(model);
            const CramerReport cr = analyze(cfg.law);
            GoldieOptions o;
            o.n_samples = n_const;
            o.seed = derive_seed(g.seed, stream_tag("constants"), 0);
            o.workers = g.workers;
            const TailConstants c = goldie_constants(cfg.law, cr, o);
            const PredictionReport p = predicted_limits(cr, c);
            Sink sink(g.out);
            if (csv) {
                sink.os() << kSchemaLine << "\n";
                write_constants_csv(sink.os(), c);
            } else {
                sink.os() << "c+ " << format_number(c.c_plus) << " +- " << format_number(c.se_plus) << "\n"
                          << "c- " << format_number(c.c_minus) << " +- " << format_number(c.se_minus) << "\n"
                          << "regime " << to_string(p.regime) << ", alphatilde " << format_number(p.alphatilde)
                          << "\n"
                          << "X1 limits right " << format_number(p.limit_right) << ", left "
                          << format_number(p.limit_left) << "\n"
                          << "rho^+alphatilde form right " << format_number(p.literal_right) << ", left "
                          << format_number(p.literal_left) << "\n";
                if (!p.projection_note.empty()) sink.os() << p.projection_note << "\n";
            }
            if (!g.quiet) {
                for (const auto& w : c.warnings) std::cerr << "warning: " << w << "\n";
                for (const auto& w : p.warnings) std::cerr << "warning: " << w << "\n";
            }
            return 0;
        }
        if (simulate_cmd->parsed()) {
            const ModelConfig cfg = load_model(model);
            struct Rows {
                std::vector<StationaryPair> rows;
                void merge(const Rows& o) { rows.insert(rows.end(), o.rows.begin(), o.rows.end()); }
            };
            const std::uint64_t master = derive_seed(g.seed, stream_tag("simulate"), 0);
            const Rows all = parallel_reduce<Rows>(n_sim, g.workers, [&](std::size_t i, Rows& acc) {
                RandomStream rng = RandomStream::for_replica(master, stream_tag("replica"), i);
                acc.rows.push_back(simulate_stationary(cfg.law, trunc_tol, rng));
            });
            Sink sink(g.out);
            sink.os() << kSchemaLine << "\nx1,x2,x1_prime,x0,truncation_n\n";
            for (const auto& s : all.rows) {
                sink.os() << format_number(s.x1) << "," << format_number(s.x2) << "," << format_number(s.x1_prime)
                          << "," << format_number(s.x0) << "," << s.truncation_n << "\n";
            }
            return 0;
        }
        if (tail_cmd->parsed()) {
            const ModelConfig cfg = load_model(model);
            const CramerReport cr = analyze(cfg.law);
            IsOptions o;
            o.D = D;
            o.n_reps = reps;
            o.seed = derive_seed(g.seed, stream_tag("tail"), 0);
            o.workers = g.workers;
            o.target.kind = parse_target(target_name);
            if (o.target.kind == Target::projection) {
                if (v.size() != 2) throw ParameterError("--target projection needs --v v1 v2");
                o.target.v1 = v[0];
                o.target.v2 = v[1];
            }
            const CurvePair cp = tail_curves(cfg.law, cr, log_grid(tmin, tmax, points), o);
            TailCurve c = side == "right" ? cp.right : cp.left;
            c.target = target_name;
            if (g.out.empty()) {
                std::cout << kSchemaLine << "\nt,p_hat,se,ess\n";
                for (std::size_t i = 0; i < c.t_grid.size(); ++i) {
                    std::cout << format_number(c.t_grid[i]) << "," << format_number(c.p_hat[i]) << ","
                              << format_number(c.se[i]) << "," << format_number(c.ess[i]) << "\n";
                }
            } else {
                write_curve_csv(g.out, c);
            }
            if (!g.quiet) {
                for (const auto& p : cp.points) {
                    for (const auto& w : p.warnings) std::cerr << "warning: t=" << p.t << ": " << w << "\n";
                }
            }
            return 0;
        }
        if (fit_cmd->parsed()) {
            const TailCurve c = read_curve_csv(curve_path);
            const FitReport f = fit_exponents(c, alpha_fixed);
            Sink sink(g.out);
            sink.os() << kSchemaLine << "\n";
            write_fit_csv(sink.os(), f);
            if (!g.quiet) {
                for (const auto& w : f.warnings) std::cerr << "warning: " << w << "\n";
            }
            return 0;
        }

        const bool is_garch = garch_cmd->parsed();
        CLI::App* cmd = is_garch ? garch_cmd : verify_cmd;
        if (!plan_path.empty()) {
            plan = load_plan(plan_path);
        } else if (!is_garch) {
            if (model.empty()) throw ParameterError("verify needs a model file or --plan");
            plan.model_path = model;
        }
        if (cmd->count("--free-alpha") > 0) plan.fix_alpha = false;
        for (const auto& t : tols) {
            const auto eq = t.find('=');
            if (eq == std::string::npos) throw ParameterError("--tol expects name=value, got '" + t + "'");
            plan.tolerances[t.substr(0, eq)] = std::stod(t.substr(eq + 1));
        }
        if (app.count("--seed") > 0 || plan_path.empty()) plan.seed = g.seed;
        if (app.count("--workers") > 0 || plan_path.empty()) plan.workers = g.workers;
        if (!g.out.empty()) plan.output_dir = g.out;

        VerdictReport rep;
        if (is_garch) {
            const GarchReport gr = run_garch_demo(gp, plan);
            rep = gr.verdict;
            if (!g.quiet) print_verdict(std::cout, rep);
            std::cout << gr.interpretation;
        } else {
            rep = run_verify(plan);
            if (!g.quiet) print_verdict(std::cout, rep);
        }
        std::cout << (rep.passed() ? "PASS" : "FAIL") << "\n";
        return rep.passed() ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        try {
            std::rethrow_if_nested(e);
        } catch (const std::exception& inner) {
            std::cerr << "  caused by: " << inner.what() << "\n";
        }
        return classify(e);
    }
}

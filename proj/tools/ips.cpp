// ips: synthesize DN data, verify identities, probe a grid, compare with the annulus oracle.
//
// Exit codes: 0 success, 1 identity failure, 2 invalid scenario or configuration,
// 3 numerical failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "ips/errors.hpp"
#include "ips/identities.hpp"
#include "ips/indicator.hpp"
#include "ips/io.hpp"

using namespace ips;

namespace {

struct Overrides {
    std::string scenario;
    std::string out;
    std::string grid;
    std::string strategy;
    std::string orders;
    int threads = 0;
    long long seed = -1;
    bool score = false;
    bool print_config = false;
};

std::vector<int> parse_int_list(const std::string& s, const std::string& what) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const int v = std::stoi(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ConfigError(what + ": '" + item + "' is not an integer");
        }
    }
    if (out.empty()) throw ConfigError(what + " is empty");
    return out;
}

RunConfig make_config(const std::string& command, const Overrides& o) {
    RunConfig cfg = load_config(o.scenario);
    cfg.command = command;
    if (!o.out.empty()) cfg.out_dir = o.out;
    if (!o.grid.empty()) {
        const auto g = parse_int_list(o.grid, "--grid");
        if (g.size() != 2) throw ConfigError("--grid expects nx,ny");
        cfg.classify.grid.nx = g[0];
        cfg.classify.grid.ny = g[1];
    }
    if (!o.strategy.empty()) cfg.classify.strategy = needle_strategy_from_string(o.strategy);
    if (!o.orders.empty()) cfg.classify.probe.needle.orders = parse_int_list(o.orders, "--orders");
    if (o.seed >= 0) cfg.seed = cfg.suite.seed = std::uint64_t(o.seed);
    int threads = o.threads;
    if (threads <= 0)
        if (const char* env = std::getenv("IPS_THREADS")) threads = std::atoi(env);
    if (threads > 0) cfg.threads = threads;
    cfg.classify.threads = cfg.suite.threads = cfg.threads;
    cfg.validate();
    return cfg;
}

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string path_in(const RunConfig& cfg, const std::string& name) {
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

std::optional<DtNPair> load_dn(const RunConfig& cfg, bool required) {
    const std::string pd = path_in(cfg, "dnmap_D.json"), p0 = path_in(cfg, "dnmap_0.json");
    if (!std::filesystem::exists(pd) || !std::filesystem::exists(p0)) {
        if (required) throw ConfigError("DN files not found in " + cfg.out_dir + " (run synthesize first)");
        return std::nullopt;
    }
    DtNPair dn{read_dn(pd), read_dn(p0)};
    const std::string fp = scenario_fingerprint(cfg.scenario);
    if (dn.lambda_D.scenario_fingerprint != fp || dn.lambda_0.scenario_fingerprint != fp) {
        if (required) throw ConfigError("DN files in " + cfg.out_dir + " belong to a different scenario");
        std::cerr << "note: DN files in " << cfg.out_dir << " belong to a different scenario, assembling afresh\n";
        return std::nullopt;
    }
    return dn;
}

int cmd_synthesize(const RunConfig& cfg) {
    validate_scenario(cfg.scenario);
    const auto t0 = Clock::now();
    const DtNPair dn = assemble_dn(cfg.scenario, cfg.J, cfg.mfs);
    write_dn(path_in(cfg, "dnmap_D.json"), dn.lambda_D);
    write_dn(path_in(cfg, "dnmap_0.json"), dn.lambda_0);
    write_text(path_in(cfg, "fingerprint.txt"), scenario_fingerprint(cfg.scenario) + "\n");
    std::printf("wrote %s and %s (fingerprint %s)\n", path_in(cfg, "dnmap_D.json").c_str(),
                path_in(cfg, "dnmap_0.json").c_str(), dn.lambda_D.scenario_fingerprint.c_str());
    std::printf("symmetry residual: lambda_D %.3e, lambda_0 %.3e\n", dn_symmetry_residual(dn.lambda_D.matrix),
                dn_symmetry_residual(dn.lambda_0.matrix));
    std::printf("boundary residual: max %.3e, mean %.3e\n", dn.lambda_D.residual_stats.max,
                dn.lambda_D.residual_stats.mean);
    std::fprintf(stderr, "synthesize: %.2f s\n", since(t0));
    return 0;
}

int cmd_verify(const RunConfig& cfg) {
    validate_scenario(cfg.scenario);
    const auto t0 = Clock::now();
    const std::optional<DtNPair> dn = load_dn(cfg, false);
    const Context ctx = dn ? Context::with_dn(cfg.scenario, *dn, cfg.mfs) : Context::build(cfg.scenario, cfg.J, cfg.mfs);
    const double t_setup = since(t0);
    const auto t1 = Clock::now();
    const SuiteResult res = run_identity_suite(ctx, cfg.suite);
    const double t_suite = since(t1);
    write_text(path_in(cfg, "report.json"), identity_reports_json(res));
    const std::string table = summary_table(res);
    write_text(path_in(cfg, "summary.txt"), table);
    write_text(path_in(cfg, "timing.json"), timing_json({{"setup_s", t_setup}, {"suite_s", t_suite}}));
    std::cout << table;
    std::cout << (dn ? "DN data: " + cfg.out_dir : std::string("DN data: assembled in memory")) << "\n";
    if (!res.pass()) {
        std::cout << "FAILED:";
        for (const auto& id : res.failing()) std::cout << " " << id;
        std::cout << "\n";
        return 1;
    }
    std::cout << "all identities pass\n";
    return 0;
}

int cmd_probe(const RunConfig& cfg, bool score) {
    const auto t0 = Clock::now();
    const DtNPair dn = *load_dn(cfg, true);
    // Only the outer curve and the DN matrices enter the probe.
    const Context ctx = Context::blind_from(cfg.scenario, dn, cfg.mfs);
    const IndicatorField field = classify_field(ctx, cfg.classify);
    const double t_sweep = since(t0);
    std::optional<FieldScore> fs;
    if (score) fs = score_field(field, cfg.scenario);
    write_text(path_in(cfg, "indicator_field.csv"), field_to_csv(field));
    write_text(path_in(cfg, "report.json"),
               probe_report_json(field, cfg.classify, fs, dn.lambda_D.scenario_fingerprint));
    std::vector<std::pair<std::string, double>> timing{{"sweep_s", t_sweep}};

    if (cfg.needle) {
        const auto t1 = Clock::now();
        const Needle nd = cfg.needle->build(cfg.scenario.domain);
        const NeedleParams np = cfg.classify.probe.needle.resolved(cfg.scenario);
        const NeedleFitter fitter(ctx.domain(), ctx.k(), nd, np, ctx.free_model.get());
        std::vector<NeedleFunction> members;
        std::printf("needle tip (%.6g, %.6g):", nd.tip().x(), nd.tip().y());
        for (int n : np.orders) {
            members.push_back(fitter.fit(n));
            std::printf(" n=%d %.10g", n, indicator_term(ctx, members.back()));
        }
        std::printf("\n");
        write_text(path_in(cfg, "needle_sequence.json"), needle_dump_json(members));
        timing.push_back({"needle_s", since(t1)});
    }
    write_text(path_in(cfg, "timing.json"), timing_json(timing));

    int counts[4] = {0, 0, 0, 0};
    for (const auto& p : field.points) ++counts[int(p.label)];
    std::printf("%zu points: neumann-near %d, dirichlet-near %d, background %d, unresolved %d\n", field.points.size(),
                counts[0], counts[1], counts[2], counts[3]);
    std::printf("median |I| %.6g, T %.6g, B %.6g\n", field.median_abs, field.T, field.B);
    if (fs) {
        std::printf("neumann-near   precision %.3f recall %.3f (%d/%d)\n", fs->neumann.precision(), fs->neumann.recall(),
                    fs->neumann.correct, fs->neumann.truth);
        std::printf("dirichlet-near precision %.3f recall %.3f (%d/%d)\n", fs->dirichlet.precision(),
                    fs->dirichlet.recall(), fs->dirichlet.correct, fs->dirichlet.truth);
        std::printf("background     precision %.3f recall %.3f, obstacle labels among far points: %d/%d\n",
                    fs->background.precision(), fs->background.recall(), fs->far_obstacle_labels, fs->far_points);
    }
    std::fprintf(stderr, "probe: %.2f s\n", since(t0));
    return 0;
}

int cmd_oracle(const RunConfig& cfg) {
    const Scenario& sc = cfg.scenario;
    const Curve& d = sc.domain;
    if (d.kind() != CurveKind::Circle || d.params()[0] != 1.0 || sc.obstacles.size() != 1 ||
        sc.obstacles[0].curve.kind() != CurveKind::Circle || (sc.obstacles[0].curve.center() - d.center()).norm() > 0)
        throw ConfigError("oracle supports only a unit disk with one concentric circular obstacle");
    const double rho = sc.obstacles[0].curve.params()[0];
    const BC bc = sc.obstacles[0].bc;
    const int modes = std::min(cfg.J, 24);
    // Fail on resonance before the expensive assembly.
    for (int n = 0; n <= modes; ++n) {
        annulus_oracle(rho, bc, sc.k, n);
        disk_oracle(sc.k, n);
    }
    validate_scenario(sc);
    const DtNPair dn = assemble_dn(sc, cfg.J, cfg.mfs);
    std::printf("annulus rho=%g, %s, k=%g\n", rho, to_string(bc).c_str(), sc.k);
    std::printf("%4s %20s %20s %10s %20s %20s %10s\n", "mode", "oracle_D", "assembled_D", "err_D", "oracle_0",
                "assembled_0", "err_0");
    double worst = 0.0;
    for (int n = 0; n <= modes; ++n) {
        const int i = n == 0 ? 0 : 2 * n - 1;
        const double norm = n == 0 ? 2 * std::numbers::pi : std::numbers::pi;
        const double oD = annulus_oracle(rho, bc, sc.k, n), o0 = disk_oracle(sc.k, n);
        const double aD = dn.lambda_D.matrix(i, i) / norm, a0 = dn.lambda_0.matrix(i, i) / norm;
        auto err = [](double o, double a) { return o == 0.0 ? std::abs(a) : std::abs(a - o) / std::abs(o); };
        worst = std::max({worst, err(oD, aD), err(o0, a0)});
        std::printf("%4d %20.10f %20.10f %10.2e %20.10f %20.10f %10.2e\n", n, oD, aD, err(oD, aD), o0, a0, err(o0, a0));
    }
    std::printf("max error %.3e (relative; absolute where the oracle is 0)\n", worst);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Probe and singular-sources indicators for mixed obstacles"};
    app.require_subcommand(1);
    Overrides o;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--scenario", o.scenario, "scenario file (TOML)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--grid", o.grid, "probe grid as nx,ny");
        sub->add_option("--needle-strategy", o.strategy, "radial | fan");
        sub->add_option("--orders", o.orders, "needle orders, e.g. 5,10,20,30");
        sub->add_option("--threads", o.threads, "worker threads (fallback: IPS_THREADS)");
        sub->add_option("--seed", o.seed, "seed for random probe points");
        sub->add_flag("--print-config", o.print_config, "print the resolved configuration and exit");
    };
    CLI::App* syn = app.add_subcommand("synthesize", "assemble and write both DN matrices");
    CLI::App* ver = app.add_subcommand("verify", "run the identity suite");
    CLI::App* prb = app.add_subcommand("probe", "indicator sweep over a grid from DN data only");
    CLI::App* orc = app.add_subcommand("oracle", "annulus DN eigenvalues against the assembled diagonal");
    for (CLI::App* s : {syn, ver, prb, orc}) add_common(s);
    prb->add_flag("--score", o.score, "score labels against the scenario geometry");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        const RunConfig cfg = make_config(sub->get_name(), o);
        if (o.print_config) {
            std::cout << print_config(cfg);
            return 0;
        }
        if (sub == syn) return cmd_synthesize(cfg);
        if (sub == ver) return cmd_verify(cfg);
        if (sub == prb) return cmd_probe(cfg, o.score);
        return cmd_oracle(cfg);
    } catch (const InvalidScenarioError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

// krummp command line tool.
//
//   krummp synth    --config cfg.json --k 3 --trial 0 --out dir
//   krummp estimate --model dir/model.json --config cfg.json
//   krummp estimate --windows dir/windows.json
//   krummp bench    --config cfg.json --out dir [--format csv|json]
//   krummp bounds   --config cfg.json --k 2
//
// Exit status: 0 success, 1 configuration error, 2 stage failure in estimate.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "krummp/krummp.hpp"

namespace fs = std::filesystem;
using namespace krummp;
using io::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitStage = 2;

struct CommonOptions
{
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> noise_sigma;
    std::optional<double> c_mult;
    std::string out;
    std::string format = "json";
};

void add_common(CLI::App* cmd, CommonOptions& o)
{
    cmd->add_option("--config", o.config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--noise-sigma", o.noise_sigma, "per-component noise standard deviation");
    cmd->add_option("--c-mult", o.c_mult, "sampling offset multiplier C");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--format", o.format, "output format")->check(CLI::IsMember({"csv", "json"}));
}

ExperimentConfig load_config(const CommonOptions& o)
{
    ExperimentConfig c = o.config_path.empty() ? ExperimentConfig{} : io::config_from_json(io::read_json_file(o.config_path));
    if (o.seed)
        c.seed = *o.seed;
    if (o.c_mult)
        c.c_mult = *o.c_mult;
    if (o.noise_sigma)
        c.noise = *o.noise_sigma > 0.0 ? NoiseSpec::gaussian(*o.noise_sigma, c.noise.seed) : NoiseSpec::none();
    c.validate();
    return c;
}

fs::path output_dir(const CommonOptions& o)
{
    fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
    fs::create_directories(dir);
    return dir;
}

int cmd_synth(const CommonOptions& o, int k, int trial)
{
    const auto config = load_config(o);
    auto rng = instance_stream(config, trial);
    const auto model = generate_instance(config, k, rng);

    std::vector<FourierWindow> windows;
    for (const auto& p : config.plans(k))
        windows.push_back(sample_window(model, p.offset, p.half_width, trial_noise(config, trial), p.group_index));
    const RecordedSource recorded(model.scales(), std::move(windows));

    if (o.out.empty()) {
        std::cout << io::model_to_json(model).dump(2) << '\n';
        return kExitOk;
    }
    const auto dir = output_dir(o);
    io::write_text_file(dir / "model.json", io::model_to_json(model).dump(2) + "\n");
    io::write_text_file(dir / "windows.json", io::windows_to_json(k, recorded).dump(2) + "\n");
    std::cerr << fmt::format("wrote {} and {}\n", (dir / "model.json").string(), (dir / "windows.json").string());
    return kExitOk;
}

int cmd_estimate(const CommonOptions& o, const std::string& model_path, const std::string& windows_path,
                 std::optional<int> k_flag)
{
    const auto config = load_config(o);
    UnmixReport report;
    if (!model_path.empty()) {
        const auto model = io::model_from_json(io::read_json_file(model_path));
        const int k = k_flag.value_or(static_cast<int>(model.k()));
        std::vector<double> sep;
        for (const auto& g : model.groups())
            sep.push_back(std::min(config.delta, g.min_separation()));
        const auto plans = choose_plans(model.scales(), sep, k, config.eps_last, config.c_mult, config.m_pad);
        report = run_krummp(model, plans, k, config.noise);
    } else {
        const auto doc = io::windows_from_json(io::read_json_file(windows_path));
        const int k = k_flag.value_or(doc.k);
        // The recorded windows fix (s_l, m_l); epsilon follows the usual cascade.
        std::vector<StagePlan> plans;
        const auto& ws = doc.source.windows();
        double eps = config.eps_last;
        plans.resize(ws.size());
        for (std::size_t i = ws.size(); i-- > 0;) {
            plans[i] = StagePlan{static_cast<int>(i + 1), eps, ws[i].half_width, ws[i].offset, std::nullopt};
            eps *= eps;
        }
        report = run_krummp(doc.source, plans, k);
    }

    const std::string text = io::report_to_json(report).dump(2) + "\n";
    if (o.out.empty())
        std::cout << text;
    else
        io::write_text_file(output_dir(o) / "estimates.json", text);
    if (report.partial()) {
        std::cerr << fmt::format("stage {} failed: {}\n", report.failure->stage, report.failure->message);
        return kExitStage;
    }
    return kExitOk;
}

int cmd_bench(const CommonOptions& o, unsigned threads)
{
    const auto config = load_config(o);
    const auto result = run_experiment(config, threads);
    const auto dir = output_dir(o);
    io::emit_results(result, dir / "results.csv", io::OutputFormat::csv);
    io::emit_results(result, dir / "summary.json", io::OutputFormat::json);

    if (o.format == "json") {
        std::cout << io::summary_to_json(result)["per_group_success_rates"].dump(2) << '\n';
    } else {
        std::cout << "k,group,trials,d_max_success,d_avg_success\n";
        for (const auto& s : result.summary)
            std::cout << fmt::format("{},{},{},{:.4f},{:.4f}\n", s.k, s.group, s.trials, s.d_max_success,
                                     s.d_avg_success);
    }
    return kExitOk;
}

int cmd_bounds(const CommonOptions& o, int k, bool noisy)
{
    const auto config = load_config(o);
    theory::BoundContext ctx;
    ctx.u_max = config.u_max;
    ctx.u_min = config.u_min;
    ctx.k = k;
    ctx.l_total = config.l_total;
    ctx.scales = config.scales();
    ctx.separations.assign(static_cast<std::size_t>(config.l_total), config.delta);
    ctx.c = config.bound_c;
    ctx.c_tilde = config.bound_c_tilde;
    ctx.validate();

    const auto plans = theory::annotate_plans(ctx, config.plans(k), noisy);
    const auto rows = theory::epsilon_cascade_check(ctx, plans, noisy);

    if (o.format == "json") {
        json plan_json = json::array();
        for (const auto& p : plans)
            plan_json.push_back(io::plan_to_json(p));
        json thresholds = json::array();
        for (const auto& p : plans)
            thresholds.push_back(theory::stage_noise_threshold(ctx, p.group_index, p.epsilon));
        json out{{"k", k},
                 {"noisy", noisy},
                 {"plans", plan_json},
                 {"stage_noise_thresholds", thresholds},
                 {"conditions", io::conditions_to_json(rows)}};
        std::cout << out.dump(2) << '\n';
    } else {
        std::cout << "condition,group,satisfied,lhs,rhs\n";
        for (const auto& r : rows)
            std::cout << fmt::format("\"{}\",{},{},{:.6g},{:.6g}\n", r.condition, r.group, r.satisfied ? 1 : 0,
                                     r.lhs, r.rhs);
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Recover spike groups from Fourier samples of Gaussian-blurred mixtures"};
    app.require_subcommand(1);

    CommonOptions common;

    auto* synth = app.add_subcommand("synth", "draw a random instance and write model.json / windows.json");
    add_common(synth, common);
    int synth_k = 2, synth_trial = 0;
    synth->add_option("--k", synth_k, "spikes per group")->check(CLI::PositiveNumber);
    synth->add_option("--trial", synth_trial, "trial id of the instance stream")->check(CLI::NonNegativeNumber);

    auto* estimate = app.add_subcommand("estimate", "run KrUMMP on a model or a window file");
    add_common(estimate, common);
    std::string model_path, windows_path;
    std::optional<int> est_k;
    auto* model_opt = estimate->add_option("--model", model_path, "model file")->check(CLI::ExistingFile);
    auto* windows_opt = estimate->add_option("--windows", windows_path, "window file")->check(CLI::ExistingFile);
    model_opt->excludes(windows_opt);
    estimate->add_option("--k", est_k, "spikes per group (defaults to the file)")->check(CLI::PositiveNumber);

    auto* bench = app.add_subcommand("bench", "run the Monte Carlo experiment, write results.csv and summary.json");
    add_common(bench, common);
    unsigned threads = 0;
    bench->add_option("--threads", threads, "worker threads (0 = all cores)");

    auto* bounds = app.add_subcommand("bounds", "evaluate the recovery conditions for a config");
    add_common(bounds, common);
    int bounds_k = 2;
    bool noisy = false;
    bounds->add_option("--k", bounds_k, "spikes per group")->check(CLI::PositiveNumber);
    bounds->add_flag("--noisy", noisy, "use the constants of the noisy guarantee");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*synth)
            return cmd_synth(common, synth_k, synth_trial);
        if (*estimate) {
            if (model_path.empty() && windows_path.empty()) {
                std::cerr << "estimate: one of --model or --windows is required\n";
                return kExitConfig;
            }
            return cmd_estimate(common, model_path, windows_path, est_k);
        }
        if (*bench)
            return cmd_bench(common, threads);
        if (*bounds)
            return cmd_bounds(common, bounds_k, noisy);
    } catch (const InvalidArgument& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const Infeasible& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitOk;
}

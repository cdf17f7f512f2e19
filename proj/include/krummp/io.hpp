#pragma once

///
/// \file io.hpp
///
/// JSON documents exchanged by the command line tool:
///
///   model     {"groups": [{"mu": .., "spikes": [{"t": .., "re": .., "im": ..}]}]}
///   windows   {"k": K, "stages": [{"mu": .., "offset": .., "half_width": ..,
///                                  "samples": [{"re": .., "im": ..}]}]}
///   config    ExperimentConfig fields, all optional (defaults are the
///             L = 4 experiment)
///

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "krummp/bench.hpp"
#include "krummp/error.hpp"
#include "krummp/signal.hpp"
#include "krummp/theory.hpp"
#include "krummp/unmix.hpp"

namespace krummp::io {

using nlohmann::json;

inline json to_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

inline json model_to_json(const MixtureModel& model)
{
    json groups = json::array();
    for (const auto& g : model.groups()) {
        json spikes = json::array();
        for (std::size_t j = 0; j < g.size(); ++j)
            spikes.push_back({{"t", g.locations()[j]},
                              {"re", g.amplitudes()[j].real()},
                              {"im", g.amplitudes()[j].imag()}});
        groups.push_back({{"mu", g.scale()}, {"spikes", spikes}});
    }
    return json{{"groups", groups}};
}

inline MixtureModel model_from_json(const json& doc)
{
    try {
        std::vector<SpikeGroup> groups;
        for (const auto& g : doc.at("groups")) {
            std::vector<double> t;
            std::vector<cplx> u;
            for (const auto& s : g.at("spikes")) {
                t.push_back(s.at("t").get<double>());
                u.emplace_back(s.at("re").get<double>(), s.value("im", 0.0));
            }
            groups.emplace_back(std::move(t), std::move(u), g.at("mu").get<double>());
        }
        return MixtureModel(std::move(groups));
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("model document: ") + e.what());
    }
}

inline json windows_to_json(int k, const RecordedSource& src)
{
    json stages = json::array();
    const auto mu = src.scales();
    for (std::size_t l = 0; l < mu.size(); ++l) {
        const auto& w = src.windows()[l];
        json samples = json::array();
        for (cplx z : w.samples)
            samples.push_back(to_json(z));
        stages.push_back({{"mu", mu[l]}, {"offset", w.offset}, {"half_width", w.half_width}, {"samples", samples}});
    }
    return json{{"k", k}, {"stages", stages}};
}

struct WindowDocument
{
    int k = 0;
    RecordedSource source;
};

inline WindowDocument windows_from_json(const json& doc)
{
    try {
        std::vector<double> mu;
        std::vector<FourierWindow> windows;
        for (const auto& s : doc.at("stages")) {
            mu.push_back(s.at("mu").get<double>());
            std::vector<cplx> values;
            for (const auto& z : s.at("samples"))
                values.emplace_back(z.at("re").get<double>(), z.value("im", 0.0));
            windows.emplace_back(s.at("offset").get<std::int64_t>(), s.at("half_width").get<int>(),
                                 std::move(values));
        }
        return {doc.at("k").get<int>(), RecordedSource(std::move(mu), std::move(windows))};
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("window document: ") + e.what());
    }
}

inline json config_to_json(const ExperimentConfig& c)
{
    return json{{"l_total", c.l_total},
                {"k_values", c.k_values},
                {"mu_last", c.mu_last},
                {"mu_ratio", c.mu_ratio},
                {"delta", c.delta},
                {"m_pad", c.m_pad},
                {"eps_last", c.eps_last},
                {"c_mult", c.c_mult},
                {"trials", c.trials},
                {"noise_sigma", c.noise.sigma},
                {"noise_seed", c.noise.seed},
                {"u_min", c.u_min},
                {"u_max", c.u_max},
                {"seed", c.seed},
                {"bound_c", c.bound_c},
                {"bound_c_tilde", c.bound_c_tilde}};
}

inline ExperimentConfig config_from_json(const json& doc)
{
    ExperimentConfig c;
    try {
        c.l_total = doc.value("l_total", c.l_total);
        c.k_values = doc.value("k_values", c.k_values);
        c.mu_last = doc.value("mu_last", c.mu_last);
        c.mu_ratio = doc.value("mu_ratio", c.mu_ratio);
        c.delta = doc.value("delta", c.delta);
        c.m_pad = doc.value("m_pad", c.m_pad);
        c.eps_last = doc.value("eps_last", c.eps_last);
        c.c_mult = doc.value("c_mult", c.c_mult);
        c.trials = doc.value("trials", c.trials);
        c.u_min = doc.value("u_min", c.u_min);
        c.u_max = doc.value("u_max", c.u_max);
        c.seed = doc.value("seed", c.seed);
        c.bound_c = doc.value("bound_c", c.bound_c);
        c.bound_c_tilde = doc.value("bound_c_tilde", c.bound_c_tilde);
        const double sigma = doc.value("noise_sigma", 0.0);
        const std::uint64_t noise_seed = doc.value("noise_seed", std::uint64_t{0});
        c.noise = sigma > 0.0 ? NoiseSpec::gaussian(sigma, noise_seed) : NoiseSpec::none();
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("config document: ") + e.what());
    }
    c.validate();
    return c;
}

inline json estimate_to_json(const SpikeEstimate& e)
{
    json spikes = json::array();
    for (std::size_t j = 0; j < e.size(); ++j)
        spikes.push_back({{"t", e.locations[j]}, {"re", e.amplitudes[j].real()}, {"im", e.amplitudes[j].imag()}});
    return json{{"group", e.group_index},
                {"spikes", spikes},
                {"sigma_k_of_h0", e.diagnostics.sigma_k_of_h0},
                {"residual_norm", e.diagnostics.residual_norm}};
}

inline json plan_to_json(const StagePlan& p)
{
    json j{{"group", p.group_index}, {"epsilon", p.epsilon}, {"half_width", p.half_width}, {"offset", p.offset}};
    if (p.bounds) {
        j["E_l"] = p.bounds->error_envelope;
        j["S_l"] = p.bounds->offset_lower;
        j["D_l"] = p.bounds->d ? json(*p.bounds->d) : json(nullptr);
        j["F_l"] = p.bounds->f ? json(*p.bounds->f) : json(nullptr);
    }
    return j;
}

inline json report_to_json(const UnmixReport& r)
{
    json estimates = json::array();
    for (const auto& e : r.estimates)
        estimates.push_back(estimate_to_json(e));
    json plans = json::array();
    for (const auto& p : r.plans)
        plans.push_back(plan_to_json(p));
    json diag = json::array();
    for (const auto& d : r.diagnostics)
        diag.push_back({{"max_deconvolved_magnitude", d.max_deconvolved_magnitude},
                        {"deflation_residual", d.deflation_residual}});
    json out{{"estimates", estimates}, {"plans", plans}, {"diagnostics", diag}, {"partial", r.partial()}};
    if (r.failure) {
        out["failure"] = {{"stage", r.failure->stage}, {"message", r.failure->message}};
        if (r.failure->frequency)
            out["failure"]["frequency"] = *r.failure->frequency;
    }
    return out;
}

inline json summary_to_json(const ExperimentResult& result)
{
    json rates = json::array();
    for (const auto& s : result.summary)
        rates.push_back({{"k", s.k},
                         {"group", s.group},
                         {"trials", s.trials},
                         {"d_max_success", s.d_max_success},
                         {"d_avg_success", s.d_avg_success}});
    return json{{"config_echo", config_to_json(result.config)}, {"per_group_success_rates", rates}};
}

inline json conditions_to_json(const std::vector<theory::ConditionRow>& rows)
{
    json out = json::array();
    for (const auto& r : rows)
        out.push_back({{"condition", r.condition},
                       {"group", r.group},
                       {"satisfied", r.satisfied},
                       {"lhs", r.lhs},
                       {"rhs", r.rhs}});
    return out;
}

inline json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw InvalidArgument("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InvalidArgument(path.string() + ": " + e.what());
    }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out)
        throw Error("write failed for " + path.string());
}

enum class OutputFormat { csv, json };

///
/// Writes the per-(trial, group) CSV (format csv) or the JSON summary
/// (format json) to `path`.
///
inline void emit_results(const ExperimentResult& result, const std::filesystem::path& path,
                         OutputFormat format)
{
    if (result.records.empty())
        throw InvalidArgument("emit_results: no records");
    if (format == OutputFormat::csv) {
        std::ostringstream os;
        write_csv(os, result.records);
        write_text_file(path, os.str());
    } else {
        write_text_file(path, summary_to_json(result).dump(2) + "\n");
    }
}

} // namespace krummp::io

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chanest/errors.hpp"
#include "chanest/harness.hpp"

namespace {

struct Flags {
    std::string config;
    std::uint64_t seed = 0;
    std::string out;
    int trials = 0;
    int realizations = 0;
    bool svg = false;

    CLI::Option* config_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* out_opt = nullptr;
    CLI::Option* trials_opt = nullptr;
    CLI::Option* realizations_opt = nullptr;
    CLI::Option* svg_opt = nullptr;
};

void attach_flags(CLI::App* cmd, Flags& f) {
    f.config_opt = cmd->add_option("--config", f.config, "Key-value config file layered over the defaults");
    f.seed_opt = cmd->add_option("--seed", f.seed, "Master RNG seed");
    f.out_opt = cmd->add_option("--out", f.out, "Output CSV path");
    f.trials_opt = cmd->add_option("--trials", f.trials, "Noise trials per cell");
    f.realizations_opt = cmd->add_option("--realizations", f.realizations, "Channel realizations");
    f.svg_opt = cmd->add_flag("--svg", f.svg, "Also render an SVG chart next to the CSV");
}

chanest::ExperimentConfig resolve(const std::string& command, const Flags& f) {
    chanest::ExperimentConfig cfg = chanest::default_config(command);
    if (f.config_opt->count() > 0) chanest::apply_config_file(cfg, f.config);
    if (f.seed_opt->count() > 0) cfg.seed = f.seed;
    if (f.out_opt->count() > 0) cfg.out_path = f.out;
    if (f.trials_opt->count() > 0) cfg.trials = f.trials;
    if (f.realizations_opt->count() > 0) cfg.realizations = f.realizations;
    if (f.svg_opt->count() > 0) cfg.svg = true;
    return cfg;
}

std::string svg_path_for(const std::string& csv_path) {
    const auto dot = csv_path.rfind('.');
    const auto slash = csv_path.find_last_of("/\\");
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return csv_path + ".svg";
    return csv_path.substr(0, dot) + ".svg";
}

void emit(const std::vector<chanest::TradeoffRecord>& records, const chanest::ExperimentConfig& cfg,
          const std::string& y_column) {
    chanest::write_csv(records, cfg.out_path);
    std::cout << "wrote " << records.size() << " records to " << cfg.out_path << '\n';
    if (cfg.svg) {
        const std::string path = svg_path_for(cfg.out_path);
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write output file: " + path);
        out << chanest::render_svg(records, y_column);
        std::cout << "wrote chart to " << path << '\n';
    }
}

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 8);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

const char* error_kind(const std::exception& e) {
    if (dynamic_cast<const chanest::underdetermined_design_error*>(&e)) return "underdetermined_design";
    if (dynamic_cast<const chanest::snr_too_low_error*>(&e)) return "snr_too_low";
    if (dynamic_cast<const chanest::insufficient_dimensions_error*>(&e)) return "insufficient_dimensions";
    if (dynamic_cast<const chanest::rank_deficient_error*>(&e)) return "rank_deficient";
    if (dynamic_cast<const chanest::singular_covariance_error*>(&e)) return "singular_covariance";
    if (dynamic_cast<const chanest::condition_violated_error*>(&e)) return "condition_violated";
    if (dynamic_cast<const chanest::no_valid_noise_error*>(&e)) return "no_valid_noise";
    if (dynamic_cast<const chanest::out_of_validity_error*>(&e)) return "out_of_validity";
    if (dynamic_cast<const chanest::estimation_failed_error*>(&e)) return "estimation_failed";
    if (dynamic_cast<const std::invalid_argument*>(&e)) return "invalid_argument";
    return "runtime_error";
}

int fail(const std::string& kind, const std::string& message) {
    std::cerr << "{\"error\":\"" << json_escape(kind) << "\",\"message\":\"" << json_escape(message)
              << "\"}" << std::endl;
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Channel-estimation tradeoff experiments"};
    app.require_subcommand(1);

    Flags fig1_flags, fig2_flags, fig3_flags, sweep_flags, vb_flags;
    CLI::App* fig1 = app.add_subcommand("fig1", "Oracle vs OMP rMSE over p for several pSNRs");
    CLI::App* fig2 = app.add_subcommand("fig2", "Oracle vs optimal LMMSE over p for several N_t");
    CLI::App* fig3 = app.add_subcommand("fig3", "Relative capacity over p for several pSNRs");
    CLI::App* sweep = app.add_subcommand("sweep", "Cartesian sweep over estimators, N_t, p and pSNR");
    CLI::App* vb = app.add_subcommand("validate-bounds", "Check the analytic bounds on random instances");
    attach_flags(fig1, fig1_flags);
    attach_flags(fig2, fig2_flags);
    attach_flags(fig3, fig3_flags);
    attach_flags(sweep, sweep_flags);
    attach_flags(vb, vb_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what());
    }

    try {
        if (fig1->parsed()) {
            const auto cfg = resolve("fig1", fig1_flags);
            emit(chanest::run_fig1(cfg), cfg, "rmse");
        } else if (fig2->parsed()) {
            const auto cfg = resolve("fig2", fig2_flags);
            emit(chanest::run_fig2(cfg), cfg, "rmse");
        } else if (fig3->parsed()) {
            const auto cfg = resolve("fig3", fig3_flags);
            emit(chanest::run_fig3(cfg), cfg, "rel_capacity");
        } else if (sweep->parsed()) {
            const auto cfg = resolve("sweep", sweep_flags);
            emit(chanest::run_sweep(cfg), cfg, "rmse");
        } else if (vb->parsed()) {
            const auto cfg = resolve("validate-bounds", vb_flags);
            const chanest::BoundsReport report = chanest::validate_bounds(cfg.seed, std::cout);
            if (!report.ok()) return fail("bounds_violated", "one or more bound suites failed");
            std::cout << "all bound suites passed\n";
        }
    } catch (const std::exception& e) {
        return fail(error_kind(e), e.what());
    }
    return 0;
}

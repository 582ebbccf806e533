#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace chanest {

// Protocol parameters for one experiment run. Defaults come from
// default_config(command); a config file and then CLI flags are layered on
// top (flags win). Config keys are flat with dotted sections:
//
//   seed = 1                       trials = 200
//   out = fig1.csv                 realizations = 20
//   svg = false
//   scenario.frequency_hz = 28e9   scenario.tx_antennas = 64
//   scenario.n_r = 1               scenario.symbol_energy = 1
//   scenario.paths_min = 50        scenario.paths_max = 100
//   scenario.clusters = 6          scenario.angular_spread_deg = 2
//   scenario.gain_decay = 0.6      scenario.unevenness = 2
//   sweep.estimators = oracle, omp
//   sweep.p = 1..24                sweep.psnr_db = 0, 10, 20, 30
//
// Integer lists accept both comma items and inclusive "a..b" ranges.
struct ExperimentConfig {
    double frequency_hz = 28.0e9;
    std::vector<int> tx_antennas = {64};  // square planar array sizes
    int n_r = 1;
    double symbol_energy = 1.0;
    int paths_min = 50;
    int paths_max = 100;
    int clusters = 6;
    double angular_spread_deg = 2.0;
    double gain_decay = 0.6;
    double unevenness = 2.0;  // covariance spectrum shape for lmmse-opt rows

    std::vector<std::string> estimators;  // ls-opt | lmmse-opt | oracle | omp
    std::vector<int> p_values;
    std::vector<double> psnr_db;

    int trials = 200;
    int realizations = 20;
    std::uint64_t seed = 1;
    std::string out_path;
    bool svg = false;

    void validate() const;
};

// Per-command defaults; command is one of fig1, fig2, fig3, sweep,
// validate-bounds.
ExperimentConfig default_config(const std::string& command);

// Applies "key = value" lines onto cfg. '#' starts a comment; unknown keys
// are rejected.
void apply_config_file(ExperimentConfig& cfg, const std::string& path);
void apply_config_text(ExperimentConfig& cfg, const std::string& text);

// One CSV row: an estimator evaluated at one (p, pSNR) cell. Analytic rows
// carry realizations = trials = 0; rows averaged over channels but free of
// noise trials carry trials = 0. rel_capacity is NaN when the capacity
// bound does not apply (rmse > 1).
struct TradeoffRecord {
    std::string estimator;
    int p;
    double psnr_db;
    double rmse;
    double bias;
    double variance;
    double rel_capacity;
    int realizations;
    int trials;
};

// Generic engine: Cartesian product of estimators x tx_antennas x p x
// pSNR. The fig commands are thin wrappers with their protocol defaults
// validated.
std::vector<TradeoffRecord> run_experiment(const ExperimentConfig& cfg);

std::vector<TradeoffRecord> run_fig1(const ExperimentConfig& cfg);   // oracle vs OMP over p
std::vector<TradeoffRecord> run_fig2(const ExperimentConfig& cfg);   // oracle vs LMMSE over N_t
std::vector<TradeoffRecord> run_fig3(const ExperimentConfig& cfg);   // relative capacity over p
std::vector<TradeoffRecord> run_sweep(const ExperimentConfig& cfg);  // user-selected estimators

// CSV schema: estimator,p,psnr_db,rmse,bias,variance,rel_capacity,
// realizations,trials. Values printed with %.12g, NaN as "nan"; rows
// sorted by (estimator, p, psnr_db).
std::string render_csv(const std::vector<TradeoffRecord>& records);
void write_csv(const std::vector<TradeoffRecord>& records, const std::string& path);

// Minimal line-chart rendering of the records; y_column is "rmse"
// (log scale) or "rel_capacity" (linear). One series per
// (estimator, psnr_db) pair.
std::string render_svg(const std::vector<TradeoffRecord>& records, const std::string& y_column);

// Numeric checks of the analytic inequalities on randomized instances.
struct BoundsReport {
    int lemma_total = 0;
    int lemma_pass = 0;        // bound >= sqrt(1 - |<e(v),e(u)>|^2)
    int appendix_a_pass = 0;   // 1 - |<.,.>|^2 <= 4 pi^2 (1/N) sum((a.g)/lambda)^2
    int bias_total = 0;
    int bias_pass_omp = 0;     // triangle bound >= OMP-measured projection bias
    int bias_pass_any = 0;     // ... or >= the center-assignment strategy bias
    int quad_le_triangle = 0;  // quadratic bound <= triangle bound
    int capacity_total = 0;
    int capacity_pass = 0;     // measured loss <= closed-form ceiling
    int correlation_pass = 0;  // corr^2 >= 1 - rmse (2 - rmse)

    bool ok() const;
};

// Runs all suites (500 lemma triples, 200 clustered channels, 10^4
// capacity pairs), logging one line per suite.
BoundsReport validate_bounds(std::uint64_t seed, std::ostream& log);

}  // namespace chanest

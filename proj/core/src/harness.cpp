#include "chanest/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "chanest/analysis.hpp"
#include "chanest/channel.hpp"
#include "chanest/errors.hpp"
#include "chanest/estimation.hpp"
#include "chanest/geometry.hpp"
#include "chanest/observation.hpp"
#include "chanest/random.hpp"

namespace chanest {

namespace {

constexpr double kSpeedOfLight = 299792458.0;
constexpr double kPi = std::numbers::pi;

// Seed-stream tags; streams are keyed by semantic values (realization
// index, antenna count, pSNR in milli-dB, trial index) so that any sweep
// covering the same cell reproduces it bit-for-bit.
constexpr std::uint64_t kCountTag = 0x636f756e;  // path-count draw
constexpr std::uint64_t kChanTag = 0x6368616e;   // path generator
constexpr std::uint64_t kNoiseTag = 0x6e6f6973;  // per-trial noise
constexpr std::uint64_t kLemmaTag = 0x6c656d61;
constexpr std::uint64_t kBiasTag = 0x62696173;
constexpr std::uint64_t kCapTag = 0x63617061;

std::uint64_t psnr_milli_db(double db) {
    return static_cast<std::uint64_t>(static_cast<std::int64_t>(std::llround(db * 1000.0)));
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_double(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("config value for '" + key + "' is not a number: " + s);
}

long long parse_ll(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(s, &pos);
        if (pos == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("config value for '" + key + "' is not an integer: " + s);
}

std::uint64_t parse_u64(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const auto v = std::stoull(s, &pos);
        if (pos == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("config value for '" + key + "' is not an unsigned integer: " + s);
}

bool parse_bool(const std::string& s, const std::string& key) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw std::invalid_argument("config value for '" + key + "' is not a boolean: " + s);
}

// Comma list of integers; "a..b" items expand to the inclusive range.
std::vector<int> parse_int_list(const std::string& s, const std::string& key) {
    std::vector<int> out;
    for (const auto& item : split_list(s)) {
        const auto dots = item.find("..");
        if (dots == std::string::npos) {
            out.push_back(static_cast<int>(parse_ll(item, key)));
            continue;
        }
        const long long a = parse_ll(trim(item.substr(0, dots)), key);
        const long long b = parse_ll(trim(item.substr(dots + 2)), key);
        if (a > b) throw std::invalid_argument("config range for '" + key + "' is reversed: " + item);
        for (long long v = a; v <= b; ++v) out.push_back(static_cast<int>(v));
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& s, const std::string& key) {
    std::vector<double> out;
    for (const auto& item : split_list(s)) out.push_back(parse_double(item, key));
    return out;
}

enum class EstimatorKind { ls, lmmse, oracle, omp };

EstimatorKind parse_estimator(const std::string& name) {
    if (name == "ls-opt") return EstimatorKind::ls;
    if (name == "lmmse-opt") return EstimatorKind::lmmse;
    if (name == "oracle") return EstimatorKind::oracle;
    if (name == "omp") return EstimatorKind::omp;
    throw std::invalid_argument("unknown estimator: " + name +
                                " (expected ls-opt, lmmse-opt, oracle or omp)");
}

int exact_square_side(int n) {
    const int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
    if (r * r != n) throw std::invalid_argument("antenna count " + std::to_string(n) +
                                                " is not a perfect square (square planar arrays)");
    return r;
}

void parallel_for(int n, const std::function<void(int)>& fn) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const int workers = std::min<int>(static_cast<int>(hw), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

double rel_capacity_or_nan(double rmse, double psnr_linear) {
    if (rmse >= 0.0 && rmse <= 1.0) return relative_capacity_from_rmse(rmse, psnr_linear);
    return std::numeric_limits<double>::quiet_NaN();
}

// Analytic LMMSE row under the optimal design for the two-level spectrum:
// rmse from the closed form; the bias/variance split from the per-mode
// error (valid only while the prescribed design is PSD, i.e. high enough
// SNR; outside that regime the split is undefined and reported as NaN).
struct AnalyticLmmse {
    double rmse;
    double bias;
    double variance;
};

AnalyticLmmse lmmse_row(int d, int n_c, int n_s, double unevenness, double psnr_linear, double p_e) {
    AnalyticLmmse out;
    out.rmse = 1.0 / (psnr_linear * n_c * n_s / (static_cast<double>(d) * d) + unevenness);
    const Eigen::VectorXd lam = two_level_spectrum(d, unevenness);  // trace = d
    const double sigma2 = p_e * d / psnr_linear;                    // E[pSNR] = P_e Tr[R] / sigma^2
    const double alpha = p_e * n_c * n_s / d + sigma2 * lam.cwiseInverse().sum() / d;
    if (alpha - sigma2 / lam.minCoeff() < 0.0) {
        out.bias = out.variance = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    double bias = 0.0;
    double variance = 0.0;
    for (int i = 0; i < d; ++i) {
        bias += sigma2 * sigma2 / (lam(i) * alpha * alpha);
        variance += (alpha - sigma2 / lam(i)) * sigma2 / (alpha * alpha);
    }
    out.bias = bias / d;  // relative to E||h||^2 = Tr[R] = d
    out.variance = variance / d;
    return out;
}

struct RealizationStats {
    std::vector<double> oracle_bias;                  // [p index]
    std::vector<std::vector<double>> omp_rmse;        // [psnr index][p index]
    std::vector<std::vector<double>> omp_bias;
    std::vector<std::vector<double>> omp_variance;
};

}  // namespace

void ExperimentConfig::validate() const {
    if (!(frequency_hz > 0.0)) throw std::invalid_argument("carrier frequency must be positive");
    if (!(symbol_energy > 0.0)) throw std::invalid_argument("symbol energy must be positive");
    if (tx_antennas.empty()) throw std::invalid_argument("transmit antenna list is empty");
    for (int n : tx_antennas) {
        if (n < 1) throw std::invalid_argument("transmit antenna count must be >= 1");
        exact_square_side(n);
    }
    if (n_r < 1) throw std::invalid_argument("receive antenna count must be >= 1");
    if (paths_min < 1 || paths_max < paths_min)
        throw std::invalid_argument("path count range must satisfy 1 <= min <= max");
    if (clusters < 1 || clusters > paths_min)
        throw std::invalid_argument("cluster count must be in [1, paths_min]");
    if (!(angular_spread_deg > 0.0)) throw std::invalid_argument("angular spread must be positive");
    if (!(gain_decay > 0.0)) throw std::invalid_argument("gain decay must be positive");
    if (!(unevenness >= 1.0)) throw std::invalid_argument("unevenness ratio is always >= 1");
    if (estimators.empty()) throw std::invalid_argument("estimator list is empty");
    for (const auto& e : estimators) parse_estimator(e);
    if (p_values.empty()) throw std::invalid_argument("p range is empty");
    for (int p : p_values)
        if (p < 1) throw std::invalid_argument("p values must be >= 1");
    if (psnr_db.empty()) throw std::invalid_argument("pSNR list is empty");
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (realizations < 1) throw std::invalid_argument("realizations must be >= 1");
}

ExperimentConfig default_config(const std::string& command) {
    ExperimentConfig cfg;
    cfg.p_values.resize(24);
    for (int p = 1; p <= 24; ++p) cfg.p_values[static_cast<size_t>(p - 1)] = p;
    cfg.psnr_db = {0.0, 10.0, 20.0, 30.0};
    if (command == "fig1") {
        cfg.estimators = {"oracle", "omp"};
        cfg.out_path = "fig1.csv";
    } else if (command == "fig2") {
        cfg.estimators = {"oracle", "lmmse-opt"};
        cfg.tx_antennas = {16, 64, 256};
        cfg.psnr_db = {30.0};
        cfg.out_path = "fig2.csv";
    } else if (command == "fig3") {
        cfg.estimators = {"oracle"};
        cfg.psnr_db = {10.0, 20.0, 30.0};
        cfg.out_path = "fig3.csv";
    } else if (command == "sweep") {
        cfg.estimators = {"ls-opt", "lmmse-opt", "oracle", "omp"};
        cfg.out_path = "sweep.csv";
    } else if (command == "validate-bounds") {
        cfg.estimators = {"oracle"};
        cfg.out_path = "";
    } else {
        throw std::invalid_argument("unknown command: " + command);
    }
    return cfg;
}

void apply_config_text(ExperimentConfig& cfg, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("config line without '=': " + line);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "seed") cfg.seed = parse_u64(value, key);
        else if (key == "trials") cfg.trials = static_cast<int>(parse_ll(value, key));
        else if (key == "realizations") cfg.realizations = static_cast<int>(parse_ll(value, key));
        else if (key == "out") cfg.out_path = value;
        else if (key == "svg") cfg.svg = parse_bool(value, key);
        else if (key == "scenario.frequency_hz") cfg.frequency_hz = parse_double(value, key);
        else if (key == "scenario.tx_antennas") cfg.tx_antennas = parse_int_list(value, key);
        else if (key == "scenario.n_r") cfg.n_r = static_cast<int>(parse_ll(value, key));
        else if (key == "scenario.symbol_energy") cfg.symbol_energy = parse_double(value, key);
        else if (key == "scenario.paths_min") cfg.paths_min = static_cast<int>(parse_ll(value, key));
        else if (key == "scenario.paths_max") cfg.paths_max = static_cast<int>(parse_ll(value, key));
        else if (key == "scenario.clusters") cfg.clusters = static_cast<int>(parse_ll(value, key));
        else if (key == "scenario.angular_spread_deg") cfg.angular_spread_deg = parse_double(value, key);
        else if (key == "scenario.gain_decay") cfg.gain_decay = parse_double(value, key);
        else if (key == "scenario.unevenness") cfg.unevenness = parse_double(value, key);
        else if (key == "sweep.estimators") cfg.estimators = split_list(value);
        else if (key == "sweep.p") cfg.p_values = parse_int_list(value, key);
        else if (key == "sweep.psnr_db") cfg.psnr_db = parse_double_list(value, key);
        else throw std::invalid_argument("unknown config key: " + key);
    }
}

void apply_config_file(ExperimentConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    apply_config_text(cfg, buf.str());
}

std::vector<TradeoffRecord> run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const double lambda = kSpeedOfLight / cfg.frequency_hz;
    const double p_e = cfg.symbol_energy;
    const int p_max = *std::max_element(cfg.p_values.begin(), cfg.p_values.end());
    const int n_psnr = static_cast<int>(cfg.psnr_db.size());
    const int n_p = static_cast<int>(cfg.p_values.size());

    bool want_ls = false, want_lmmse = false, want_oracle = false, want_omp = false;
    for (const auto& name : cfg.estimators) {
        switch (parse_estimator(name)) {
            case EstimatorKind::ls: want_ls = true; break;
            case EstimatorKind::lmmse: want_lmmse = true; break;
            case EstimatorKind::oracle: want_oracle = true; break;
            case EstimatorKind::omp: want_omp = true; break;
        }
    }

    const AntennaArray rx = make_ula(cfg.n_r, lambda / 2.0, lambda);
    const bool single_side = cfg.n_r == 1;

    std::vector<TradeoffRecord> records;
    records.reserve(cfg.estimators.size() * cfg.tx_antennas.size() * static_cast<size_t>(n_p) *
                    static_cast<size_t>(n_psnr));

    for (const int nt : cfg.tx_antennas) {
        const std::string suffix = "/nt=" + std::to_string(nt);
        const int side = exact_square_side(nt);
        const AntennaArray tx = make_upa(side, side, lambda / 2.0, lambda);
        const int d = cfg.n_r * nt;

        if (want_ls) {
            for (const int p : cfg.p_values)
                for (const double db : cfg.psnr_db) {
                    const double lin = db_to_linear(db);
                    const double rmse = ls_opt_rmse(cfg.n_r, nt, cfg.n_r, nt, lin);
                    records.push_back({"ls-opt" + suffix, p, db, rmse, 0.0, rmse,
                                       rel_capacity_or_nan(rmse, lin), 0, 0});
                }
        }
        if (want_lmmse) {
            for (const double db : cfg.psnr_db) {
                const double lin = db_to_linear(db);
                const AnalyticLmmse row = lmmse_row(d, cfg.n_r, nt, cfg.unevenness, lin, p_e);
                for (const int p : cfg.p_values)
                    records.push_back({"lmmse-opt" + suffix, p, db, row.rmse, row.bias, row.variance,
                                       rel_capacity_or_nan(row.rmse, lin), 0, 0});
            }
        }

        if (!want_oracle && !want_omp) continue;

        const Dictionary dict = build_dictionary(tx, rx, GridSpec{});
        std::unique_ptr<ObservationSetup> setup;
        std::unique_ptr<OmpSolver> sensed;
        if (want_omp) {
            setup = std::make_unique<ObservationSetup>(build_ls_optimal(nt, cfg.n_r, nt, cfg.n_r, p_e));
            sensed = std::make_unique<OmpSolver>(dict, setup->M());
        }
        std::unique_ptr<OmpSolver> identity;
        if (want_oracle) identity = std::make_unique<OmpSolver>(dict);

        std::vector<RealizationStats> results(static_cast<size_t>(cfg.realizations));
        parallel_for(cfg.realizations, [&](int r) {
            RealizationStats& out = results[static_cast<size_t>(r)];
            auto count_rng = make_rng(derive_seed(cfg.seed, {kCountTag, static_cast<std::uint64_t>(r)}));
            PathGenConfig pg;
            pg.total_paths =
                std::uniform_int_distribution<int>(cfg.paths_min, cfg.paths_max)(count_rng);
            pg.clusters = cfg.clusters;
            pg.angular_spread = cfg.angular_spread_deg * kPi / 180.0;
            pg.gain_decay = cfg.gain_decay;
            pg.seed = derive_seed(cfg.seed, {kChanTag, static_cast<std::uint64_t>(r)});
            const PhysicalChannel channel(generate_paths(pg), tx, rx);
            const Eigen::VectorXcd h = channel.h();
            const double hn = h.squaredNorm();

            if (want_oracle) {
                const SparseEstimate proj = identity->solve(h, p_max);
                out.oracle_bias.resize(static_cast<size_t>(n_p));
                for (int pi = 0; pi < n_p; ++pi) {
                    const int p = cfg.p_values[static_cast<size_t>(pi)];
                    double resid = std::sqrt(hn);
                    if (!proj.residual_history.empty()) {
                        const size_t idx =
                            std::min<size_t>(static_cast<size_t>(p), proj.residual_history.size()) - 1;
                        resid = proj.residual_history[idx];
                    }
                    out.oracle_bias[static_cast<size_t>(pi)] = resid * resid / hn;
                }
            }

            if (want_omp) {
                out.omp_rmse.assign(static_cast<size_t>(n_psnr), std::vector<double>(n_p, 0.0));
                out.omp_bias = out.omp_rmse;
                out.omp_variance = out.omp_rmse;
                for (int q = 0; q < n_psnr; ++q) {
                    const double db = cfg.psnr_db[static_cast<size_t>(q)];
                    const double lin = db_to_linear(db);
                    const ObservationSetup noisy =
                        setup->with_noise(solve_noise_for_psnr(channel, p_e, lin));
                    std::vector<double> err(static_cast<size_t>(n_p), 0.0);
                    std::vector<double> sq(static_cast<size_t>(n_p), 0.0);
                    std::vector<Eigen::VectorXcd> mean(static_cast<size_t>(n_p),
                                                       Eigen::VectorXcd::Zero(h.size()));
                    for (int t = 0; t < cfg.trials; ++t) {
                        auto rng = make_rng(derive_seed(
                            cfg.seed, {kNoiseTag, static_cast<std::uint64_t>(nt),
                                       static_cast<std::uint64_t>(r), psnr_milli_db(db),
                                       static_cast<std::uint64_t>(t)}));
                        const Eigen::VectorXcd y = observe(noisy, h, rng);
                        const std::vector<SparseEstimate> seq = sensed->solve_sequence(y, p_max);
                        for (int pi = 0; pi < n_p; ++pi) {
                            const int p = cfg.p_values[static_cast<size_t>(pi)];
                            const Eigen::VectorXcd& hhat = seq[static_cast<size_t>(p - 1)].hhat;
                            err[static_cast<size_t>(pi)] += (h - hhat).squaredNorm();
                            sq[static_cast<size_t>(pi)] += hhat.squaredNorm();
                            mean[static_cast<size_t>(pi)] += hhat;
                        }
                    }
                    for (int pi = 0; pi < n_p; ++pi) {
                        const double t = cfg.trials;
                        const Eigen::VectorXcd avg = mean[static_cast<size_t>(pi)] / t;
                        out.omp_rmse[static_cast<size_t>(q)][static_cast<size_t>(pi)] =
                            err[static_cast<size_t>(pi)] / t / hn;
                        out.omp_bias[static_cast<size_t>(q)][static_cast<size_t>(pi)] =
                            (h - avg).squaredNorm() / hn;
                        out.omp_variance[static_cast<size_t>(q)][static_cast<size_t>(pi)] =
                            (sq[static_cast<size_t>(pi)] / t - avg.squaredNorm()) / hn;
                    }
                }
            }
        });

        if (want_oracle) {
            for (int pi = 0; pi < n_p; ++pi) {
                const int p = cfg.p_values[static_cast<size_t>(pi)];
                double bias = 0.0;
                for (const auto& res : results) bias += res.oracle_bias[static_cast<size_t>(pi)];
                bias /= cfg.realizations;
                for (const double db : cfg.psnr_db) {
                    const double lin = db_to_linear(db);
                    const double variance = variance_lower_bound(p, lin, single_side || nt == 1);
                    const double rmse = bias + variance;
                    records.push_back({"oracle" + suffix, p, db, rmse, bias, variance,
                                       rel_capacity_or_nan(rmse, lin), cfg.realizations, 0});
                }
            }
        }
        if (want_omp) {
            for (int pi = 0; pi < n_p; ++pi) {
                const int p = cfg.p_values[static_cast<size_t>(pi)];
                for (int q = 0; q < n_psnr; ++q) {
                    const double db = cfg.psnr_db[static_cast<size_t>(q)];
                    double rmse = 0.0, bias = 0.0, variance = 0.0;
                    for (const auto& res : results) {
                        rmse += res.omp_rmse[static_cast<size_t>(q)][static_cast<size_t>(pi)];
                        bias += res.omp_bias[static_cast<size_t>(q)][static_cast<size_t>(pi)];
                        variance += res.omp_variance[static_cast<size_t>(q)][static_cast<size_t>(pi)];
                    }
                    rmse /= cfg.realizations;
                    bias /= cfg.realizations;
                    variance /= cfg.realizations;
                    records.push_back({"omp" + suffix, p, db, rmse, bias, variance,
                                       rel_capacity_or_nan(rmse, db_to_linear(db)), cfg.realizations,
                                       cfg.trials});
                }
            }
        }
    }

    std::sort(records.begin(), records.end(), [](const TradeoffRecord& a, const TradeoffRecord& b) {
        return std::tie(a.estimator, a.p, a.psnr_db) < std::tie(b.estimator, b.p, b.psnr_db);
    });
    return records;
}

std::vector<TradeoffRecord> run_fig1(const ExperimentConfig& cfg) {
    if (cfg.n_r != 1) throw std::invalid_argument("fig1 requires a single-antenna receiver");
    return run_experiment(cfg);
}

std::vector<TradeoffRecord> run_fig2(const ExperimentConfig& cfg) { return run_experiment(cfg); }

std::vector<TradeoffRecord> run_fig3(const ExperimentConfig& cfg) {
    if (cfg.n_r != 1) throw std::invalid_argument("fig3 requires a single-antenna receiver");
    return run_experiment(cfg);
}

std::vector<TradeoffRecord> run_sweep(const ExperimentConfig& cfg) { return run_experiment(cfg); }

namespace {

std::string format_value(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace

std::string render_csv(const std::vector<TradeoffRecord>& records) {
    std::string out = "estimator,p,psnr_db,rmse,bias,variance,rel_capacity,realizations,trials\n";
    for (const auto& r : records) {
        out += r.estimator;
        out += ',' + std::to_string(r.p);
        out += ',' + format_value(r.psnr_db);
        out += ',' + format_value(r.rmse);
        out += ',' + format_value(r.bias);
        out += ',' + format_value(r.variance);
        out += ',' + format_value(r.rel_capacity);
        out += ',' + std::to_string(r.realizations);
        out += ',' + std::to_string(r.trials);
        out += '\n';
    }
    return out;
}

void write_csv(const std::vector<TradeoffRecord>& records, const std::string& path) {
    if (path.empty()) throw std::invalid_argument("output path is empty");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write output file: " + path);
    out << render_csv(records);
    if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                          "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};

}  // namespace

std::string render_svg(const std::vector<TradeoffRecord>& records, const std::string& y_column) {
    const bool capacity = y_column == "rel_capacity";
    if (!capacity && y_column != "rmse")
        throw std::invalid_argument("unsupported plot column: " + y_column);

    struct Series {
        std::string label;
        std::vector<std::pair<double, double>> points;  // (p, y)
    };
    std::vector<Series> series;
    for (const auto& r : records) {
        const double y = capacity ? r.rel_capacity : r.rmse;
        if (std::isnan(y) || (!capacity && y <= 0.0)) continue;
        std::ostringstream key;
        key << r.estimator << " @ " << format_value(r.psnr_db) << " dB";
        auto it = std::find_if(series.begin(), series.end(),
                               [&](const Series& s) { return s.label == key.str(); });
        if (it == series.end()) {
            series.push_back({key.str(), {}});
            it = std::prev(series.end());
        }
        it->points.emplace_back(r.p, y);
    }
    for (auto& s : series)
        std::sort(s.points.begin(), s.points.end());

    const double width = 960, height = 540;
    const double left = 70, right = width - 250, top = 30, bottom = height - 50;
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    if (series.empty()) {
        svg << "<text x=\"40\" y=\"60\" font-family=\"sans-serif\">no plottable rows</text>\n</svg>\n";
        return svg.str();
    }

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (xmax <= xmin) xmax = xmin + 1;
    auto ylo = capacity ? std::max(0.0, ymin - 0.05) : std::log10(ymin);
    auto yhi = capacity ? std::min(1.0, ymax + 0.05) : std::log10(ymax);
    if (!capacity) {
        ylo = std::floor(ylo);
        yhi = std::ceil(yhi);
    }
    if (yhi <= ylo) yhi = ylo + 1;

    auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * (right - left); };
    auto sy = [&](double y) {
        const double v = capacity ? y : std::log10(y);
        return bottom - (v - ylo) / (yhi - ylo) * (bottom - top);
    };

    svg << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\"" << bottom
        << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << bottom
        << "\" stroke=\"black\"/>\n";
    const int xticks = std::min<int>(8, static_cast<int>(xmax - xmin));
    for (int i = 0; i <= xticks; ++i) {
        const double x = xmin + (xmax - xmin) * i / std::max(1, xticks);
        svg << "<line x1=\"" << sx(x) << "\" y1=\"" << bottom << "\" x2=\"" << sx(x) << "\" y2=\""
            << bottom + 5 << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << sx(x) << "\" y=\"" << bottom + 20
            << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">"
            << format_value(std::round(x)) << "</text>\n";
    }
    const int yticks = capacity ? 5 : static_cast<int>(yhi - ylo);
    for (int i = 0; i <= yticks; ++i) {
        const double v = ylo + (yhi - ylo) * i / std::max(1, yticks);
        const double y = capacity ? v : std::pow(10.0, v);
        svg << "<line x1=\"" << left - 5 << "\" y1=\"" << sy(y) << "\" x2=\"" << right << "\" y2=\""
            << sy(y) << "\" stroke=\"#dddddd\"/>\n"
            << "<text x=\"" << left - 8 << "\" y=\"" << sy(y) + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">"
            << format_value(capacity ? v : std::pow(10.0, v)) << "</text>\n";
    }
    svg << "<text x=\"" << (left + right) / 2 << "\" y=\"" << height - 12
        << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">p</text>\n"
        << "<text x=\"18\" y=\"" << (top + bottom) / 2
        << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << (top + bottom) / 2 << ")\">" << y_column << "</text>\n";

    for (size_t si = 0; si < series.size(); ++si) {
        const char* color = kPalette[si % (sizeof kPalette / sizeof kPalette[0])];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : series[si].points) svg << sx(x) << ',' << sy(y) << ' ';
        svg << "\"/>\n";
        for (const auto& [x, y] : series[si].points)
            svg << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"2.5\" fill=\"" << color
                << "\"/>\n";
        const double ly = top + 18.0 * static_cast<double>(si);
        svg << "<line x1=\"" << right + 10 << "\" y1=\"" << ly << "\" x2=\"" << right + 34 << "\" y2=\""
            << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << right + 40 << "\" y=\"" << ly + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << series[si].label << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

bool BoundsReport::ok() const {
    return lemma_total > 0 && lemma_pass == lemma_total && appendix_a_pass == lemma_total &&
           bias_total > 0 && bias_pass_any == bias_total && 100 * bias_pass_omp >= 99 * bias_total &&
           quad_le_triangle == bias_total && capacity_total > 0 && capacity_pass == capacity_total &&
           correlation_pass == capacity_total;
}

BoundsReport validate_bounds(std::uint64_t seed, std::ostream& log) {
    BoundsReport report;

    {  // Lemma 1 and the Appendix A inequality on random (array, u, v).
        auto rng = make_rng(derive_seed(seed, {kLemmaTag}));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        report.lemma_total = 500;
        for (int i = 0; i < report.lemma_total; ++i) {
            const double lambda = 1.0;
            const double spacing = (0.3 + 0.4 * unit(rng)) * lambda;
            AntennaArray array = [&]() {
                if (i % 2 == 0)
                    return make_ula(2 + static_cast<int>(unit(rng) * 14), spacing, lambda);
                const int rows = 2 + static_cast<int>(unit(rng) * 5);
                const int cols = 2 + static_cast<int>(unit(rng) * 5);
                return make_upa(rows, cols, spacing, lambda);
            }();
            const Direction u(-kPi + 2 * kPi * unit(rng), -kPi / 2 + kPi * unit(rng));
            double scale = lemma1_threshold(array) * unit(rng);
            Direction v = u;
            for (;;) {
                const double daz = scale * (2 * unit(rng) - 1);
                const double del = scale * (2 * unit(rng) - 1);
                const Direction cand(u.azimuth() + daz,
                                     std::clamp(u.elevation() + del, -kPi / 2, kPi / 2));
                if (lemma1_condition(array, u, cand)) {
                    v = cand;
                    break;
                }
                scale *= 0.5;
            }
            const Eigen::Vector3d g = u.unit_vector() - v.unit_vector();
            // 1 - |<e(v), e(u)>|^2 through pairwise phase differences,
            // N^2 (1 - |z|^2) = sum_{m<k} 4 sin^2(pi (a_m - a_k) . g / lambda);
            // the direct inner-product form cancels catastrophically when
            // the directions nearly coincide.
            const auto& pos = array.positions();
            double one_minus_coh2 = 0.0;
            for (size_t m = 0; m < pos.size(); ++m)
                for (size_t k = m + 1; k < pos.size(); ++k) {
                    const double s = std::sin(kPi * (pos[m] - pos[k]).dot(g) / array.wavelength());
                    one_minus_coh2 += 4.0 * s * s;
                }
            one_minus_coh2 /= static_cast<double>(array.size()) * array.size();
            const double lhs = std::sqrt(one_minus_coh2);
            const double bound = lemma1_bound(array, u, v);
            if (bound + 1e-12 >= lhs) ++report.lemma_pass;
            double quad = 0.0;
            for (const auto& a : array.positions()) {
                const double proj = a.dot(g) / array.wavelength();
                quad += proj * proj;
            }
            const double rhs_a = 4.0 * kPi * kPi * quad / array.size();
            if (one_minus_coh2 <= rhs_a + 1e-12) ++report.appendix_a_pass;
        }
        log << "lemma1 bound: " << report.lemma_pass << '/' << report.lemma_total << '\n';
        log << "appendix-a inequality: " << report.appendix_a_pass << '/' << report.lemma_total
            << '\n';
    }

    {  // Bias bounds on clustered single-antenna-side channels.
        const double lambda = 1.0;
        const AntennaArray tx = make_upa(8, 8, lambda / 2.0, lambda);
        const AntennaArray rx = make_ula(1, lambda / 2.0, lambda);
        const Dictionary base = build_dictionary(tx, rx, GridSpec{});
        const AngularSector sector{-kPi / 3, kPi / 3, -kPi / 6, kPi / 6};
        auto pick_rng = make_rng(derive_seed(seed, {kBiasTag}));
        std::uniform_int_distribution<int> cluster_count(3, 8);
        std::uniform_int_distribution<int> path_count(30, 80);
        report.bias_total = 200;
        int omp_shortfalls = 0;
        for (int i = 0; i < report.bias_total; ++i) {
            std::vector<Path> paths;
            RegionAssignment assignment;
            int p = 0;
            for (int attempt = 0;; ++attempt) {
                if (attempt >= 50)
                    throw estimation_failed_error("could not draw an instance satisfying the lemma gap");
                PathGenConfig pg;
                pg.clusters = cluster_count(pick_rng);
                pg.total_paths = std::max(pg.clusters, path_count(pick_rng));
                pg.seed = derive_seed(seed, {kBiasTag, static_cast<std::uint64_t>(i),
                                             static_cast<std::uint64_t>(attempt)});
                paths = generate_paths(pg);
                p = pg.clusters;
                assignment = nearest_center_assignment(paths, p, sector, PathEnd::departure);
                bool all_ok = true;
                for (size_t j = 0; j < paths.size() && all_ok; ++j)
                    all_ok = lemma1_condition(
                        tx, paths[j].departure(),
                        assignment.centers[static_cast<size_t>(assignment.labels[j])]);
                if (all_ok) break;
            }
            const BiasBound triangle = bias_upper_bound(paths, assignment, tx, PathEnd::departure);
            const BiasBound quadratic = bias_bound_quadratic(paths, assignment, tx, PathEnd::departure);
            if (quadratic.bound_norm <= triangle.bound_norm * (1 + 1e-12) + 1e-15)
                ++report.quad_le_triangle;

            const PhysicalChannel channel(paths, tx, rx);
            const Eigen::VectorXcd h = channel.h();
            std::vector<std::pair<Direction, Direction>> extra;
            extra.reserve(assignment.centers.size());
            for (const auto& c : assignment.centers) extra.emplace_back(c, Direction(0.0, 0.0));
            const Dictionary dict = base.with_extra_directions(extra);
            const SparseEstimate est = OmpSolver(dict).solve(h, p);

            // Constructive fallback from the bound's own argument: keep each
            // path's energy on its region's center atom.
            Eigen::VectorXcd strategy = Eigen::VectorXcd::Zero(h.size());
            for (size_t k = 0; k < assignment.centers.size(); ++k) {
                const Eigen::VectorXcd fk =
                    steering_vector(tx, assignment.centers[k]).conjugate();
                std::complex<double> coef = 0.0;
                for (int j : assignment.regions[k]) {
                    const Eigen::VectorXcd fj =
                        steering_vector(tx, paths[static_cast<size_t>(j)].departure()).conjugate();
                    coef += paths[static_cast<size_t>(j)].complex_gain() * fk.dot(fj);
                }
                strategy += coef * fk;
            }
            const double strategy_resid = (h - strategy).norm();
            const double tol = 1e-9 * std::max(1.0, triangle.bound_norm);
            const bool omp_ok = triangle.bound_norm + tol >= est.residual_norm;
            const bool any_ok =
                triangle.bound_norm + tol >= std::min(est.residual_norm, strategy_resid);
            if (omp_ok) ++report.bias_pass_omp;
            else ++omp_shortfalls;
            if (any_ok) ++report.bias_pass_any;
        }
        log << "bias bound vs omp projection: " << report.bias_pass_omp << '/' << report.bias_total
            << " (" << omp_shortfalls << " omp shortfalls)\n";
        log << "bias bound vs best measured: " << report.bias_pass_any << '/' << report.bias_total
            << '\n';
        log << "quadratic <= triangle: " << report.quad_le_triangle << '/' << report.bias_total
            << '\n';
    }

    {  // Capacity loss bound and the Appendix C correlation inequality.
        auto rng = make_rng(derive_seed(seed, {kCapTag}));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        report.capacity_total = 10000;
        const int dim = 32;
        for (int i = 0; i < report.capacity_total; ++i) {
            const Eigen::VectorXcd h = complex_gaussian_vector(rng, dim);
            Eigen::VectorXcd e = complex_gaussian_vector(rng, dim);
            const double target = unit(rng);
            e *= std::sqrt(target) * h.norm() / e.norm();
            const Eigen::VectorXcd hhat = h + e;
            const double rmse = std::min(1.0, (h - hhat).squaredNorm() / h.squaredNorm());
            const double psnr = std::pow(10.0, 4.0 * unit(rng));
            const CapacityLoss loss = capacity_loss(h, hhat, psnr);
            if (loss.loss <= capacity_loss_bound(rmse, psnr) + 1e-9) ++report.capacity_pass;
            const double corr2 =
                std::norm(h.dot(hhat)) / (h.squaredNorm() * hhat.squaredNorm());
            if (corr2 + 1e-12 >= 1.0 - rmse * (2.0 - rmse)) ++report.correlation_pass;
        }
        log << "capacity loss bound: " << report.capacity_pass << '/' << report.capacity_total
            << '\n';
        log << "correlation bound: " << report.correlation_pass << '/' << report.capacity_total
            << '\n';
    }

    return report;
}

}  // namespace chanest

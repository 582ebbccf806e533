#include "chanest/channel.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "chanest/errors.hpp"
#include "chanest/random.hpp"

namespace chanest {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_phase(double phi) {
    double w = std::fmod(phi, 2.0 * kPi);
    if (w < 0.0) w += 2.0 * kPi;
    return w;
}

// Reflect an elevation excursion back into [-pi/2, pi/2].
double reflect_elevation(double el) {
    while (el > kPi / 2 || el < -kPi / 2) {
        if (el > kPi / 2) el = kPi - el;
        if (el < -kPi / 2) el = -kPi - el;
    }
    return el;
}

}  // namespace

Path::Path(double gain, double phase, Direction departure, Direction arrival)
    : gain_(gain), phase_(wrap_phase(phase)), dep_(departure), arr_(arrival) {
    if (!(gain >= 0.0) || !std::isfinite(gain)) throw std::invalid_argument("path gain must be >= 0");
    if (!std::isfinite(phase)) throw std::invalid_argument("path phase must be finite");
}

std::vector<Path> generate_paths(const PathGenConfig& cfg) {
    if (cfg.total_paths < 1) throw std::invalid_argument("total_paths must be >= 1");
    if (cfg.clusters < 1 || cfg.clusters > cfg.total_paths)
        throw std::invalid_argument("clusters must lie in [1, total_paths]");
    if (!(cfg.angular_spread >= 0.0)) throw std::invalid_argument("angular_spread must be >= 0");
    if (!(cfg.gain_decay > 0.0) || cfg.gain_decay > 1.0) throw std::invalid_argument("gain_decay must be in (0, 1]");

    auto rng = make_rng(derive_seed(cfg.seed, {0x70617468u}));
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    struct Center {
        double dod_az, dod_el, doa_az, doa_el;
    };
    std::vector<Center> centers(static_cast<size_t>(cfg.clusters));
    for (auto& c : centers) {
        c.dod_az = cfg.departure_sector.az_min + unif(rng) * (cfg.departure_sector.az_max - cfg.departure_sector.az_min);
        c.dod_el = cfg.departure_sector.el_min + unif(rng) * (cfg.departure_sector.el_max - cfg.departure_sector.el_min);
        c.doa_az = cfg.arrival_sector.az_min + unif(rng) * (cfg.arrival_sector.az_max - cfg.arrival_sector.az_min);
        c.doa_el = cfg.arrival_sector.el_min + unif(rng) * (cfg.arrival_sector.el_max - cfg.arrival_sector.el_min);
    }

    // Split paths across clusters as evenly as possible, extras to the front.
    std::vector<int> counts(static_cast<size_t>(cfg.clusters), cfg.total_paths / cfg.clusters);
    for (int k = 0; k < cfg.total_paths % cfg.clusters; ++k) counts[static_cast<size_t>(k)]++;

    std::normal_distribution<double> offs(0.0, cfg.angular_spread);
    std::vector<Path> paths;
    paths.reserve(static_cast<size_t>(cfg.total_paths));
    double total_power = 0.0;
    std::vector<double> gains;
    gains.reserve(static_cast<size_t>(cfg.total_paths));
    for (int k = 0; k < cfg.clusters; ++k) {
        const auto& c = centers[static_cast<size_t>(k)];
        const int nk = counts[static_cast<size_t>(k)];
        const double w = std::pow(cfg.gain_decay, k) / std::max(1, nk);
        for (int i = 0; i < nk; ++i) {
            const double dod_az = std::remainder(c.dod_az + (cfg.angular_spread > 0 ? offs(rng) : 0.0), 2.0 * kPi);
            const double dod_el = reflect_elevation(c.dod_el + (cfg.angular_spread > 0 ? offs(rng) : 0.0));
            const double doa_az = std::remainder(c.doa_az + (cfg.angular_spread > 0 ? offs(rng) : 0.0), 2.0 * kPi);
            const double doa_el = reflect_elevation(c.doa_el + (cfg.angular_spread > 0 ? offs(rng) : 0.0));
            const double phase = unif(rng) * 2.0 * kPi;
            const double rho = std::sqrt(w);
            gains.push_back(rho);
            total_power += rho * rho;
            paths.emplace_back(rho, phase, Direction(dod_az, dod_el), Direction(doa_az, doa_el));
        }
    }

    // Normalize to unit total path power.
    const double scale = 1.0 / std::sqrt(total_power);
    std::vector<Path> out;
    out.reserve(paths.size());
    for (const auto& p : paths) out.emplace_back(p.gain() * scale, p.phase(), p.departure(), p.arrival());
    return out;
}

PhysicalChannel::PhysicalChannel(std::vector<Path> paths, AntennaArray tx, AntennaArray rx)
    : paths_(std::move(paths)), tx_(std::move(tx)), rx_(std::move(rx)) {
    if (paths_.empty()) throw std::invalid_argument("channel needs at least one path");
    H_ = Eigen::MatrixXcd::Zero(rx_.size(), tx_.size());
    for (const auto& p : paths_) {
        const Eigen::VectorXcd er = steering_vector(rx_, p.arrival());
        const Eigen::VectorXcd et = steering_vector(tx_, p.departure());
        H_.noalias() += p.complex_gain() * er * et.adjoint();
    }
}

Eigen::VectorXcd PhysicalChannel::h() const {
    return Eigen::Map<const Eigen::VectorXcd>(H_.data(), H_.size());
}

PhysicalChannel synthesize_channel(std::vector<Path> paths, const AntennaArray& tx, const AntennaArray& rx) {
    return PhysicalChannel(std::move(paths), tx, rx);
}

double psnr(const PhysicalChannel& channel, double symbol_energy, double noise_power) {
    if (!(symbol_energy > 0.0)) throw std::invalid_argument("symbol energy must be positive");
    if (!(noise_power > 0.0)) throw std::invalid_argument("noise power must be positive");
    return symbol_energy * channel.H().squaredNorm() / noise_power;
}

double psnr_db(const PhysicalChannel& channel, double symbol_energy, double noise_power) {
    return 10.0 * std::log10(psnr(channel, symbol_energy, noise_power));
}

double snr_no_precoding(const PhysicalChannel& channel, double symbol_energy, double noise_power) {
    return psnr(channel, symbol_energy, noise_power) / channel.n_t();
}

double solve_noise_for_psnr(const PhysicalChannel& channel, double symbol_energy, double target_psnr) {
    if (!(symbol_energy > 0.0)) throw std::invalid_argument("symbol energy must be positive");
    if (!(target_psnr > 0.0)) throw std::invalid_argument("target pSNR must be positive");
    const double energy = channel.H().squaredNorm();
    if (energy <= 0.0) throw no_valid_noise_error("channel has zero energy, no noise power achieves the target pSNR");
    return symbol_energy * energy / target_psnr;
}

void save_paths_jsonl(const std::vector<Path>& paths, std::ostream& out) {
    for (const auto& p : paths) {
        nlohmann::json j{{"gain", p.gain()},
                         {"phase", p.phase()},
                         {"dod_az", p.departure().azimuth()},
                         {"dod_el", p.departure().elevation()},
                         {"doa_az", p.arrival().azimuth()},
                         {"doa_el", p.arrival().elevation()}};
        out << j.dump() << '\n';
    }
}

void save_paths_jsonl(const std::vector<Path>& paths, const std::string& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot open " + file + " for writing");
    save_paths_jsonl(paths, out);
}

std::vector<Path> load_paths_jsonl(std::istream& in) {
    std::vector<Path> paths;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        paths.emplace_back(j.at("gain").get<double>(), j.at("phase").get<double>(),
                           Direction(j.at("dod_az").get<double>(), j.at("dod_el").get<double>()),
                           Direction(j.at("doa_az").get<double>(), j.at("doa_el").get<double>()));
    }
    return paths;
}

std::vector<Path> load_paths_jsonl(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file);
    return load_paths_jsonl(in);
}

}  // namespace chanest

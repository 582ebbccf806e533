#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chanest/geometry.hpp"

namespace chanest {

// One propagation path: complex gain rho * exp(i*phi) with a direction of
// departure (transmit side) and arrival (receive side).
class Path {
public:
    Path(double gain, double phase, Direction departure, Direction arrival);

    double gain() const { return gain_; }
    double phase() const { return phase_; }
    const Direction& departure() const { return dep_; }
    const Direction& arrival() const { return arr_; }
    std::complex<double> complex_gain() const { return std::polar(gain_, phase_); }

private:
    double gain_;   // rho >= 0
    double phase_;  // phi in [0, 2*pi)
    Direction dep_;
    Direction arr_;
};

// Clustered multipath generator settings. Cluster centers are drawn
// uniformly over the sector; per-path offsets are wrapped Gaussians with
// the given spread; cluster powers decay geometrically; phases are uniform.
struct PathGenConfig {
    int total_paths = 60;
    int clusters = 6;
    double angular_spread = 2.0 * M_PI / 180.0;  // radians, per coordinate
    double gain_decay = 0.6;                     // cluster k carries weight decay^k
    AngularSector departure_sector{-M_PI / 3, M_PI / 3, -M_PI / 6, M_PI / 6};
    AngularSector arrival_sector{-M_PI / 3, M_PI / 3, -M_PI / 6, M_PI / 6};
    std::uint64_t seed = 0;
};

std::vector<Path> generate_paths(const PathGenConfig& cfg);

// Narrowband channel H = sum_i c_i e_rx(arrival_i) e_tx(departure_i)^H and
// its column-major vectorization h.
class PhysicalChannel {
public:
    PhysicalChannel(std::vector<Path> paths, AntennaArray tx, AntennaArray rx);

    const std::vector<Path>& paths() const { return paths_; }
    const AntennaArray& tx() const { return tx_; }
    const AntennaArray& rx() const { return rx_; }
    const Eigen::MatrixXcd& H() const { return H_; }
    Eigen::VectorXcd h() const;
    int n_t() const { return tx_.size(); }
    int n_r() const { return rx_.size(); }

private:
    std::vector<Path> paths_;
    AntennaArray tx_;
    AntennaArray rx_;
    Eigen::MatrixXcd H_;
};

PhysicalChannel synthesize_channel(std::vector<Path> paths, const AntennaArray& tx, const AntennaArray& rx);

// Post-combining SNR definition pSNR = P_e ||H||_F^2 / sigma^2.
double psnr(const PhysicalChannel& channel, double symbol_energy, double noise_power);
double psnr_db(const PhysicalChannel& channel, double symbol_energy, double noise_power);

// SNR of an isotropic (non-precoded) transmission, pSNR / N_t.
double snr_no_precoding(const PhysicalChannel& channel, double symbol_energy, double noise_power);

// Noise power that achieves the requested pSNR (linear) at the given
// per-symbol energy.
double solve_noise_for_psnr(const PhysicalChannel& channel, double symbol_energy, double target_psnr);

// JSON-lines serialization: one path object per line with keys
// gain, phase, dod_az, dod_el, doa_az, doa_el (angles in radians).
void save_paths_jsonl(const std::vector<Path>& paths, std::ostream& out);
void save_paths_jsonl(const std::vector<Path>& paths, const std::string& file);
std::vector<Path> load_paths_jsonl(std::istream& in);
std::vector<Path> load_paths_jsonl(const std::string& file);

}  // namespace chanest

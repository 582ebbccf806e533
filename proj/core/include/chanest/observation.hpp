#pragma once

#include <optional>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "chanest/channel.hpp"
#include "chanest/geometry.hpp"

namespace chanest {

// Pilot observation plan: training matrix X (one column per pilot symbol,
// each of energy P_e), analog combiner W with orthonormal columns, and the
// stacked operator M = X^T kron W^H acting on h = vec(H). Immutable; the
// with_* methods return modified copies.
class ObservationSetup {
public:
    ObservationSetup(Eigen::MatrixXcd X, Eigen::MatrixXcd W, double symbol_energy, double noise_power = 0.0,
                     std::optional<int> rf_budget = std::nullopt);

    const Eigen::MatrixXcd& X() const { return X_; }
    const Eigen::MatrixXcd& W() const { return W_; }
    const Eigen::MatrixXcd& M() const { return M_; }
    double symbol_energy() const { return symbol_energy_; }
    double noise_power() const { return noise_power_; }
    std::optional<int> rf_budget() const { return rf_budget_; }

    int n_t() const { return static_cast<int>(X_.rows()); }
    int n_s() const { return static_cast<int>(X_.cols()); }
    int n_r() const { return static_cast<int>(W_.rows()); }
    int n_c() const { return static_cast<int>(W_.cols()); }

    ObservationSetup with_noise(double noise_power) const;
    ObservationSetup with_rf_budget(int n_rf) const;

    // Rank-limited factorization X = V Z with rank(X) <= rf budget columns.
    std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> hybrid_factorization() const;

    // Re-checks all construction invariants (column energies, W^H W = Id,
    // M consistency, rank budget). Throws on violation.
    void validate() const;

private:
    Eigen::MatrixXcd X_;
    Eigen::MatrixXcd W_;
    Eigen::MatrixXcd M_;
    double symbol_energy_;
    double noise_power_;
    std::optional<int> rf_budget_;
};

// y = M h + n with n circularly-symmetric Gaussian of per-entry power
// noise_power.
Eigen::VectorXcd observe(const ObservationSetup& setup, const Eigen::VectorXcd& h, std::mt19937_64& rng);
Eigen::VectorXcd observe(const ObservationSetup& setup, const PhysicalChannel& channel, std::mt19937_64& rng);

// Training that minimizes the LS error under the per-symbol energy budget:
// M^H M = P_e (N_c N_s / (N_r N_t)) Id. Requires N_s >= N_t and N_c = N_r
// pilots/combiners (fewer combiners leave receive dimensions unobserved).
ObservationSetup build_ls_optimal(int n_t, int n_r, int n_s, int n_c, double symbol_energy);

// Training that minimizes the LMMSE error for channels with covariance R:
// M^H M = (P_e N_c N_s / D + sigma^2 Tr[R^-1] / D) Id - sigma^2 R^-1,
// D = N_r N_t. Valid (PSD target) only above a noise threshold, else
// snr_too_low_error. n_r splits D into receive/transmit factors.
ObservationSetup build_lmmse_optimal(const Eigen::MatrixXcd& R, int n_r, int n_s, int n_c, double symbol_energy,
                                     double noise_power);

// Observation whose ranges contain the steering vectors and their angular
// derivatives at each virtual direction (transmit side in im(X), receive
// side in im(W)), which is what the oracle variance expression assumes.
// Pairs are (departure, arrival).
ObservationSetup build_oracle_observation(const std::vector<std::pair<Direction, Direction>>& virtual_dirs,
                                          const AntennaArray& tx, const AntennaArray& rx, int n_s, int n_c,
                                          double symbol_energy);

}  // namespace chanest

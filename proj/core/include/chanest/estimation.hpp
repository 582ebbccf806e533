#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "chanest/geometry.hpp"
#include "chanest/observation.hpp"

namespace chanest {

// Angular grid for the sparse-recovery dictionary. step == 0 picks the
// widest step whose adjacent-atom coherence at the sector center still
// reaches coherence_target (finer than the array resolution).
struct GridSpec {
    AngularSector sector{-M_PI / 3, M_PI / 3, -M_PI / 6, M_PI / 6};
    double step = 0.0;
    double coherence_target = 0.97;
};

// Grid of candidate direction pairs and their unit-norm atoms
// conj(e_tx(v_t)) kron e_rx(v_r) in vec(H) space. A single-antenna side
// contributes one trivial grid point, so the atom count degenerates to the
// other side's grid size. Atom k pairs tx point k / |rx grid| with rx point
// k % |rx grid|; extra injected directions follow the grid block.
class Dictionary {
public:
    Dictionary(AntennaArray tx, AntennaArray rx, std::vector<Direction> tx_grid, std::vector<Direction> rx_grid);

    const AntennaArray& tx() const { return tx_; }
    const AntennaArray& rx() const { return rx_; }
    const std::vector<Direction>& tx_grid() const { return tx_grid_; }
    const std::vector<Direction>& rx_grid() const { return rx_grid_; }
    const Eigen::MatrixXcd& atoms() const { return atoms_; }
    int size() const { return static_cast<int>(atoms_.cols()); }
    std::pair<Direction, Direction> atom_direction(int k) const;

    // Returns a dictionary with the given (departure, arrival) pairs
    // appended as additional atoms.
    Dictionary with_extra_directions(const std::vector<std::pair<Direction, Direction>>& dirs) const;

private:
    AntennaArray tx_;
    AntennaArray rx_;
    std::vector<Direction> tx_grid_;
    std::vector<Direction> rx_grid_;
    std::vector<std::pair<Direction, Direction>> extra_;
    Eigen::MatrixXcd atoms_;

    void rebuild();
};

// Widest grid step meeting the coherence target for this array over the
// sector (evaluated at the sector center, azimuth and elevation separately).
double auto_grid_step(const AntennaArray& array, const AngularSector& sector, double coherence_target);

Dictionary build_dictionary(const AntennaArray& tx, const AntennaArray& rx, const GridSpec& grid);

// Sparse estimate returned by matching pursuit: selected atoms, their
// jointly refit coefficients, the reconstructed channel vector, and the
// residual norm after each iteration (in the observation domain).
struct SparseEstimate {
    std::vector<int> atom_indices;
    std::vector<std::pair<Direction, Direction>> directions;  // (departure, arrival)
    Eigen::VectorXcd coefficients;
    Eigen::VectorXcd hhat;
    double residual_norm = 0.0;
    std::vector<double> residual_history;
    int n_t = 0;
    int n_r = 0;

    int p() const { return static_cast<int>(atom_indices.size()); }
    std::string to_json() const;
};

// Real parameter vector (gain, phase, angles) of a sparse estimate:
// 6 per path in the full MIMO case, 4 when one side is single-antenna.
std::vector<double> param_vector(const SparseEstimate& est);

// Greedy orthogonal matching pursuit through a fixed sensing operator.
// Precomputes A * atoms once; solve() can then run per observation.
// Selection maximizes |<residual, column>| / ||column||, ties resolved to
// the lowest atom index; coefficients are jointly refit every iteration.
class OmpSolver {
public:
    explicit OmpSolver(const Dictionary& dict);               // A = identity
    OmpSolver(const Dictionary& dict, const Eigen::MatrixXcd& A);

    SparseEstimate solve(const Eigen::VectorXcd& y, int p) const;

    // Estimates for every order 1..p_max from one greedy pass; element p-1
    // is bit-identical to solve(y, p). If the residual hits zero before
    // p_max atoms, the last estimate repeats up to p_max.
    std::vector<SparseEstimate> solve_sequence(const Eigen::VectorXcd& y, int p_max) const;

private:
    const Dictionary* dict_;
    Eigen::MatrixXcd sensed_;      // empty when A is the identity
    Eigen::VectorXd col_norms_;

    const Eigen::MatrixXcd& columns() const;
};

SparseEstimate omp_estimate(const Dictionary& dict, const Eigen::MatrixXcd& A, const Eigen::VectorXcd& y, int p);

// OMP approximation of the projection of h onto the p-path model set.
SparseEstimate project_onto_model(const Dictionary& dict, const Eigen::VectorXcd& h, int p);

// Relative squared projection residual ||h - proj||^2 / ||h||^2.
double projection_bias(const Dictionary& dict, const Eigen::VectorXcd& h, int p);

struct OracleRmse {
    double bias;
    double variance;
    double rmse;
};

// Bias-variance split of the oracle estimator: projection bias measured by
// OMP plus the efficient-estimator variance floor (3p/pSNR, or 2p/pSNR when
// one side is single-antenna).
OracleRmse oracle_rmse(const Dictionary& dict, const Eigen::VectorXcd& h, int p, double psnr_linear);

struct LsEstimate {
    Eigen::VectorXcd hhat;
    double condition_number;  // spectral condition of M^H M
};

// Least squares through a precomputed SVD of M. Rejects condition numbers
// of M^H M above 1e12.
class LsSolver {
public:
    explicit LsSolver(const ObservationSetup& setup);
    Eigen::VectorXcd solve(const Eigen::VectorXcd& y) const;
    double condition_number() const { return condition_; }

private:
    Eigen::MatrixXcd pinv_;
    double condition_;
};

LsEstimate ls_estimate(const ObservationSetup& setup, const Eigen::VectorXcd& y);

// Bayesian linear estimator h_hat = R M^H (M R M^H + sigma^2 I)^-1 y with
// the innovation inverse precomputed.
class LmmseSolver {
public:
    LmmseSolver(const ObservationSetup& setup, const Eigen::MatrixXcd& R);
    Eigen::VectorXcd solve(const Eigen::VectorXcd& y) const;

private:
    Eigen::MatrixXcd gain_;
};

Eigen::VectorXcd lmmse_estimate(const ObservationSetup& setup, const Eigen::MatrixXcd& R, const Eigen::VectorXcd& y);

}  // namespace chanest

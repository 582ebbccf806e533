#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "chanest/channel.hpp"
#include "chanest/geometry.hpp"
#include "chanest/observation.hpp"

namespace chanest {

// Channel covariance with cached eigenstructure, trace and trace-inverse.
// The unevenness ratio Tr[R^-1] Tr[R] / dim^2 is 1 exactly for white
// covariances and grows with spectral spread.
class CovarianceSpec {
public:
    explicit CovarianceSpec(Eigen::MatrixXcd R);

    const Eigen::MatrixXcd& R() const { return R_; }
    int dim() const { return static_cast<int>(R_.rows()); }
    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
    double trace() const { return trace_; }
    bool singular() const { return singular_; }
    double trace_inverse() const;  // throws singular_covariance_error when singular
    double unevenness() const;

    // Draws h ~ CN(0, R).
    Eigen::VectorXcd sample(std::mt19937_64& rng) const;

private:
    Eigen::MatrixXcd R_;
    Eigen::MatrixXcd eigenvectors_;
    Eigen::VectorXd eigenvalues_;
    double trace_;
    bool singular_;
};

// Two-level eigenvalue profile (floor(dim/2) equal large values, the rest
// at 1) scaled to trace = dim, with the level ratio solved so that the
// unevenness ratio hits the target.
Eigen::VectorXd two_level_spectrum(int dim, double unevenness);

// Unit-trace-per-dimension covariance with a two-level spectrum tuned so
// that the unevenness ratio hits the target, rotated by a seeded random
// unitary basis.
CovarianceSpec make_covariance_with_unevenness(int dim, double target, std::uint64_t seed);

using Estimator = std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>;

struct RmseStats {
    double rmse;
    double bias;
    double variance;
    int failed_trials;
};

// Monte-Carlo relative MSE of an estimator at a fixed channel, decomposed
// into squared bias of the sample mean and sample variance (the three
// satisfy rmse = bias + variance exactly for sample moments). Noise is
// drawn per trial from an independent stream; summation order is fixed.
// More than 1% failing trials aborts with estimation_failed_error.
RmseStats rmse_empirical(const Estimator& estimator, const ObservationSetup& setup, const PhysicalChannel& channel,
                         int trials, std::uint64_t seed);
RmseStats rmse_empirical(const Estimator& estimator, const ObservationSetup& setup, const Eigen::VectorXcd& h,
                         int trials, std::uint64_t seed);

// Closed-form relative MSE of LS under the optimal training:
// (N_r N_t / pSNR) * (N_r N_t / (N_c N_s)).
double ls_opt_rmse(int n_r, int n_t, int n_c, int n_s, double psnr_linear);

// Closed-form relative MSE of LMMSE under the optimal training:
// 1 / (E[pSNR] N_c N_s / D^2 + Tr[R^-1] Tr[R] / D^2), D = dim(R).
double lmmse_opt_rmse(const CovarianceSpec& cov, int n_c, int n_s, double expected_psnr);

// Efficient-estimator variance floor 3p/pSNR, or 2p/pSNR when one side of
// the link has a single antenna.
double variance_lower_bound(int p, double psnr_linear, bool single_antenna_side);

// Largest direction gap for which the collinearity bound below is valid:
// min_n 1 / (sqrt(2) pi ||a_n / lambda||) (infinite for a single element).
double lemma1_threshold(const AntennaArray& array);
bool lemma1_condition(const AntennaArray& array, const Direction& u, const Direction& v);

// Bound on sqrt(1 - |<e(v), e(u)>|^2):
// 2 pi ||u - v|| sqrt((1/N) sum ||a_n/lambda||^2 cos^2(a_n, u - v)).
// Throws condition_violated_error outside the validity gap.
double lemma1_bound(const AntennaArray& array, const Direction& u, const Direction& v);

// Partition of paths into p angular regions, one center each.
struct RegionAssignment {
    std::vector<Direction> centers;
    std::vector<int> labels;                // per path: index into centers
    std::vector<std::vector<int>> regions;  // per center: path indices

    double max_gap(const std::vector<Direction>& dirs) const;
    double mean_gap(const std::vector<Direction>& dirs) const;
    void validate(int n_paths) const;
};

enum class PathEnd { departure, arrival };

// Spherical k-means: p centers seeded on a Fibonacci-style spread over the
// sector, nearest-center assignment, centers moved to normalized mean
// directions, iterated to convergence. Deterministic; returns the best
// iterate by maximum gap. Empty regions are re-seeded on the worst path,
// so p >= #paths ends with every path in its own zero-gap region.
RegionAssignment nearest_center_assignment(const std::vector<Direction>& dirs, int p, const AngularSector& sector);
RegionAssignment nearest_center_assignment(const std::vector<Path>& paths, int p, const AngularSector& sector,
                                           PathEnd end = PathEnd::departure);

// Assignments for p = 1..p_max where level p+1 starts from the converged
// level-p centers plus one center on the worst-gap path. Max gap is
// non-increasing along the sequence.
std::vector<RegionAssignment> assignment_sequence(const std::vector<Direction>& dirs, int p_max,
                                                  const AngularSector& sector);

struct BiasBound {
    double bound_norm;          // bound on || h - E[h_hat] ||
    double normalized_squared;  // (bound_norm / ||h||)^2, comparable to a relative bias
};

// Per-path triangle bound: sum over regions and member paths of
// 2 pi |c_i| ||u_i - v_k|| sqrt((1/N) sum_n ||a_n/lambda||^2 cos^2(...)).
// Every (path, center) pair must satisfy the collinearity gap condition.
// array/end select the multi-antenna side the bound is evaluated on; the
// other side is assumed single-antenna.
BiasBound bias_upper_bound(const std::vector<Path>& paths, const RegionAssignment& assignment,
                           const AntennaArray& array, PathEnd end = PathEnd::departure);

// Per-region quadratic refinement sqrt(c^H Q c) with
// q_ij = e_i^H e_j - (e_i^H e_v)(e_v^H e_j); never exceeds the triangle
// bound above. Same preconditions.
BiasBound bias_bound_quadratic(const std::vector<Path>& paths, const RegionAssignment& assignment,
                               const AntennaArray& array, PathEnd end = PathEnd::departure);

// Water-filling power allocation over parallel channels with gains g_i:
// p_i = max(0, mu - 1/g_i), water level found by bisection so sum p_i = P.
std::vector<double> water_fill(const std::vector<double>& gains, double total_power);

// Shannon capacity (bits/channel use) of H under total power P_e and the
// optimal precoder from the SVD of H.
double capacity_optimal(const PhysicalChannel& channel, double symbol_energy, double noise_power);
double capacity_optimal(const Eigen::MatrixXcd& H, double symbol_energy, double noise_power);

struct CapacityLoss {
    double c_opt;      // log2(1 + pSNR)
    double loss;       // c_opt - log2(1 + corr^2 pSNR)
    double relative;   // achieved / optimal capacity
};

// Capacity lost by beamforming on h_hat instead of h (single-antenna
// receiver form, corr = |<h, h_hat>| / (||h|| ||h_hat||)).
CapacityLoss capacity_loss(const Eigen::VectorXcd& h, const Eigen::VectorXcd& hhat, double psnr_linear);

// Closed-form ceiling on the capacity loss given a relative MSE (valid for
// rmse <= 1): c_opt - log2(1 + pSNR (1 - rmse (2 - rmse))).
double capacity_loss_bound(double rmse, double psnr_linear);

// log2(1 + pSNR (1 - rmse (2 - rmse))) / log2(1 + pSNR).
double relative_capacity_from_rmse(double rmse, double psnr_linear);

}  // namespace chanest

#include "chanest/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "chanest/errors.hpp"
#include "chanest/random.hpp"

namespace chanest {

namespace {

constexpr double kPi = std::numbers::pi;

// Steering column under the vec(H) convention for the multi-antenna side:
// conjugated on the transmit side, plain on the receive side.
Eigen::VectorXcd side_vector(const AntennaArray& array, const Direction& d, PathEnd end) {
    Eigen::VectorXcd e = steering_vector(array, d);
    if (end == PathEnd::departure) return e.conjugate();
    return e;
}

const Direction& path_direction(const Path& p, PathEnd end) {
    return end == PathEnd::departure ? p.departure() : p.arrival();
}

}  // namespace

CovarianceSpec::CovarianceSpec(Eigen::MatrixXcd R) : R_(std::move(R)) {
    if (R_.rows() != R_.cols() || R_.rows() < 1) throw std::invalid_argument("R must be square");
    const double scale = std::max(1.0, R_.cwiseAbs().maxCoeff());
    if ((R_ - R_.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("R must be Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(R_);
    if (eig.info() != Eigen::Success) throw std::runtime_error("eigendecomposition of R failed");
    eigenvalues_ = eig.eigenvalues();
    eigenvectors_ = eig.eigenvectors();
    const double lmax = eigenvalues_(eigenvalues_.size() - 1);
    if (eigenvalues_(0) < -1e-12 * std::max(lmax, 1.0))
        throw std::invalid_argument("R must be positive semidefinite");
    eigenvalues_ = eigenvalues_.cwiseMax(0.0);
    trace_ = eigenvalues_.sum();
    singular_ = eigenvalues_(0) <= 1e-12 * std::max(lmax, 0.0);
}

double CovarianceSpec::trace_inverse() const {
    if (singular_) throw singular_covariance_error("R is singular, Tr[R^-1] does not exist");
    return eigenvalues_.cwiseInverse().sum();
}

double CovarianceSpec::unevenness() const {
    const double d = dim();
    return trace_inverse() * trace_ / (d * d);
}

Eigen::VectorXcd CovarianceSpec::sample(std::mt19937_64& rng) const {
    const Eigen::VectorXcd z = complex_gaussian_vector(rng, dim());
    return eigenvectors_ * eigenvalues_.cwiseSqrt().asDiagonal() * z;
}

Eigen::VectorXd two_level_spectrum(int dim, double target) {
    if (dim < 2) throw std::invalid_argument("need dim >= 2 to shape the spectrum");
    if (!(target >= 1.0)) throw std::invalid_argument("unevenness ratio is always >= 1");
    const int m = dim / 2;
    auto ratio = [&](double x) {
        return (m * x + (dim - m)) * (m / x + (dim - m)) / (static_cast<double>(dim) * dim);
    };
    double lo = 1.0, hi = 1.0;
    while (ratio(hi) < target) {
        hi *= 2.0;
        if (hi > 1e15) throw std::invalid_argument("unevenness target out of reach for this dimension");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (ratio(mid) < target ? lo : hi) = mid;
    }
    const double x = 0.5 * (lo + hi);
    Eigen::VectorXd lam(dim);
    for (int i = 0; i < dim; ++i) lam(i) = i < m ? x : 1.0;
    lam *= dim / lam.sum();
    return lam;
}

CovarianceSpec make_covariance_with_unevenness(int dim, double target, std::uint64_t seed) {
    const Eigen::VectorXd lam = two_level_spectrum(dim, target);

    // Seeded Haar-ish basis from the QR of a complex Gaussian matrix.
    auto rng = make_rng(derive_seed(seed, {0x636f76u}));
    Eigen::MatrixXcd g(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) g(i, j) = complex_gaussian(rng);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(dim, dim);
    Eigen::MatrixXcd r = q * lam.asDiagonal() * q.adjoint();
    r = 0.5 * (r + r.adjoint().eval());
    return CovarianceSpec(std::move(r));
}

RmseStats rmse_empirical(const Estimator& estimator, const ObservationSetup& setup, const Eigen::VectorXcd& h,
                         int trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("need at least one trial");
    const double hn = h.squaredNorm();
    if (hn <= 0.0) throw std::invalid_argument("zero channel has no relative MSE");

    double err_sum = 0.0;
    double sq_sum = 0.0;
    Eigen::VectorXcd mean_acc = Eigen::VectorXcd::Zero(h.size());
    int failed = 0;
    int ok = 0;
    for (int t = 0; t < trials; ++t) {
        auto rng = make_rng(derive_seed(seed, {0x74726961u, static_cast<std::uint64_t>(t)}));
        const Eigen::VectorXcd y = observe(setup, h, rng);
        Eigen::VectorXcd hhat;
        try {
            hhat = estimator(y);
        } catch (const std::exception&) {
            ++failed;
            continue;
        }
        if (hhat.size() != h.size()) {
            ++failed;
            continue;
        }
        err_sum += (h - hhat).squaredNorm();
        sq_sum += hhat.squaredNorm();
        mean_acc += hhat;
        ++ok;
    }
    if (failed * 100 > trials)
        throw estimation_failed_error("more than 1% of Monte-Carlo trials failed");
    if (ok == 0) throw estimation_failed_error("no successful trials");

    const Eigen::VectorXcd mean = mean_acc / ok;
    RmseStats stats;
    stats.rmse = err_sum / ok / hn;
    stats.bias = (h - mean).squaredNorm() / hn;
    stats.variance = std::max(0.0, (sq_sum / ok - mean.squaredNorm()) / hn);
    stats.failed_trials = failed;
    return stats;
}

RmseStats rmse_empirical(const Estimator& estimator, const ObservationSetup& setup, const PhysicalChannel& channel,
                         int trials, std::uint64_t seed) {
    return rmse_empirical(estimator, setup, channel.h(), trials, seed);
}

double ls_opt_rmse(int n_r, int n_t, int n_c, int n_s, double psnr_linear) {
    if (n_r < 1 || n_t < 1 || n_c < 1 || n_s < 1) throw std::invalid_argument("dimensions must be >= 1");
    if (!(psnr_linear > 0.0)) throw std::invalid_argument("pSNR must be positive");
    const double d = static_cast<double>(n_r) * n_t;
    return (d / psnr_linear) * (d / (static_cast<double>(n_c) * n_s));
}

double lmmse_opt_rmse(const CovarianceSpec& cov, int n_c, int n_s, double expected_psnr) {
    if (n_c < 1 || n_s < 1) throw std::invalid_argument("dimensions must be >= 1");
    if (!(expected_psnr > 0.0)) throw std::invalid_argument("pSNR must be positive");
    const double d = cov.dim();
    const double unevenness = cov.trace_inverse() * cov.trace() / (d * d);
    return 1.0 / (expected_psnr * n_c * n_s / (d * d) + unevenness);
}

double variance_lower_bound(int p, double psnr_linear, bool single_antenna_side) {
    if (p < 1) throw std::invalid_argument("p must be >= 1");
    if (!(psnr_linear > 0.0)) throw std::invalid_argument("pSNR must be positive");
    return (single_antenna_side ? 2.0 : 3.0) * p / psnr_linear;
}

double lemma1_threshold(const AntennaArray& array) {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& a : array.positions()) {
        const double r = a.norm() / array.wavelength();
        if (r > 0.0) worst = std::min(worst, 1.0 / (std::sqrt(2.0) * kPi * r));
    }
    return worst;
}

bool lemma1_condition(const AntennaArray& array, const Direction& u, const Direction& v) {
    return direction_gap(u, v) < lemma1_threshold(array);
}

double lemma1_bound(const AntennaArray& array, const Direction& u, const Direction& v) {
    if (!lemma1_condition(array, u, v))
        throw condition_violated_error("direction gap exceeds the bound validity radius", -1, -1);
    const Eigen::Vector3d g = u.unit_vector() - v.unit_vector();
    if (g.norm() == 0.0) return 0.0;
    double acc = 0.0;
    for (const auto& a : array.positions()) {
        const double proj = a.dot(g) / array.wavelength();
        acc += proj * proj;
    }
    return 2.0 * kPi * std::sqrt(acc / array.size());
}

double RegionAssignment::max_gap(const std::vector<Direction>& dirs) const {
    double worst = 0.0;
    for (size_t i = 0; i < dirs.size(); ++i)
        worst = std::max(worst, direction_gap(dirs[i], centers[static_cast<size_t>(labels[i])]));
    return worst;
}

double RegionAssignment::mean_gap(const std::vector<Direction>& dirs) const {
    if (dirs.empty()) return 0.0;
    double acc = 0.0;
    for (size_t i = 0; i < dirs.size(); ++i) acc += direction_gap(dirs[i], centers[static_cast<size_t>(labels[i])]);
    return acc / static_cast<double>(dirs.size());
}

void RegionAssignment::validate(int n_paths) const {
    if (static_cast<int>(labels.size()) != n_paths) throw std::invalid_argument("label count mismatch");
    std::vector<int> seen(static_cast<size_t>(n_paths), 0);
    int covered = 0;
    for (size_t k = 0; k < regions.size(); ++k)
        for (int i : regions[k]) {
            if (i < 0 || i >= n_paths || seen[static_cast<size_t>(i)]++)
                throw std::invalid_argument("regions are not a disjoint cover");
            if (labels[static_cast<size_t>(i)] != static_cast<int>(k))
                throw std::invalid_argument("labels and regions disagree");
            ++covered;
        }
    if (covered != n_paths) throw std::invalid_argument("regions do not cover all paths");
}

namespace {

std::vector<Direction> fibonacci_centers(int p, const AngularSector& sector) {
    const double golden = 0.6180339887498949;
    std::vector<Direction> centers;
    centers.reserve(static_cast<size_t>(p));
    const double smin = std::sin(sector.el_min);
    const double smax = std::sin(sector.el_max);
    for (int k = 0; k < p; ++k) {
        const double t = (k + 0.5) / p;
        const double z = smin + t * (smax - smin);
        const double el = std::asin(std::clamp(z, -1.0, 1.0));
        const double frac = std::fmod((k + 0.5) * golden, 1.0);
        const double az = sector.az_min + frac * (sector.az_max - sector.az_min);
        centers.emplace_back(az, el);
    }
    return centers;
}

RegionAssignment lloyd_iterate(const std::vector<Direction>& dirs, std::vector<Direction> centers) {
    const int n = static_cast<int>(dirs.size());
    const int p = static_cast<int>(centers.size());
    std::vector<Eigen::Vector3d> units(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) units[static_cast<size_t>(i)] = dirs[static_cast<size_t>(i)].unit_vector();

    auto assign = [&](const std::vector<Direction>& cs) {
        std::vector<int> labels(static_cast<size_t>(n), 0);
        std::vector<Eigen::Vector3d> cu(cs.size());
        for (size_t k = 0; k < cs.size(); ++k) cu[k] = cs[k].unit_vector();
        for (int i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            int arg = 0;
            for (int k = 0; k < p; ++k) {
                const double d2 = (units[static_cast<size_t>(i)] - cu[static_cast<size_t>(k)]).squaredNorm();
                if (d2 < best) {
                    best = d2;
                    arg = k;
                }
            }
            labels[static_cast<size_t>(i)] = arg;
        }
        return labels;
    };

    auto gap_of = [&](const std::vector<Direction>& cs, const std::vector<int>& labels) {
        double worst = 0.0;
        for (int i = 0; i < n; ++i)
            worst = std::max(worst,
                             (units[static_cast<size_t>(i)] - cs[static_cast<size_t>(labels[static_cast<size_t>(i)])].unit_vector()).norm());
        return worst;
    };

    std::vector<int> labels = assign(centers);
    std::vector<Direction> best_centers = centers;
    std::vector<int> best_labels = labels;
    double best_gap = gap_of(centers, labels);

    for (int iter = 0; iter < 200; ++iter) {
        // Centroid update.
        std::vector<Eigen::Vector3d> acc(static_cast<size_t>(p), Eigen::Vector3d::Zero());
        std::vector<int> count(static_cast<size_t>(p), 0);
        for (int i = 0; i < n; ++i) {
            acc[static_cast<size_t>(labels[static_cast<size_t>(i)])] += units[static_cast<size_t>(i)];
            count[static_cast<size_t>(labels[static_cast<size_t>(i)])]++;
        }
        std::vector<Direction> next = centers;
        for (int k = 0; k < p; ++k) {
            if (count[static_cast<size_t>(k)] > 0 && acc[static_cast<size_t>(k)].norm() > 1e-12)
                next[static_cast<size_t>(k)] = Direction::from_unit_vector(acc[static_cast<size_t>(k)]);
        }
        // Re-seed the lowest-index empty region on the worst-gap path.
        int empty = -1;
        for (int k = 0; k < p; ++k)
            if (count[static_cast<size_t>(k)] == 0) {
                empty = k;
                break;
            }
        bool reseeded = false;
        if (empty >= 0) {
            int worst_path = 0;
            double worst = -1.0;
            for (int i = 0; i < n; ++i) {
                const double d =
                    (units[static_cast<size_t>(i)] - next[static_cast<size_t>(labels[static_cast<size_t>(i)])].unit_vector()).norm();
                if (d > worst) {
                    worst = d;
                    worst_path = i;
                }
            }
            if (worst > 0.0) {
                next[static_cast<size_t>(empty)] = dirs[static_cast<size_t>(worst_path)];
                reseeded = true;
            }
        }

        std::vector<int> next_labels = assign(next);
        const double gap = gap_of(next, next_labels);
        if (gap < best_gap) {
            best_gap = gap;
            best_centers = next;
            best_labels = next_labels;
        }
        const bool converged = !reseeded && next_labels == labels;
        centers = std::move(next);
        labels = std::move(next_labels);
        if (converged) break;
    }

    RegionAssignment out;
    out.centers = std::move(best_centers);
    out.labels = std::move(best_labels);
    out.regions.assign(static_cast<size_t>(p), {});
    for (int i = 0; i < n; ++i) out.regions[static_cast<size_t>(out.labels[static_cast<size_t>(i)])].push_back(i);
    return out;
}

}  // namespace

RegionAssignment nearest_center_assignment(const std::vector<Direction>& dirs, int p, const AngularSector& sector) {
    if (dirs.empty()) throw std::invalid_argument("need at least one path");
    if (p < 1) throw std::invalid_argument("p must be >= 1");
    if (p == 1) {
        // One region: the k-means fixed point is the normalized mean.
        Eigen::Vector3d acc = Eigen::Vector3d::Zero();
        for (const auto& d : dirs) acc += d.unit_vector();
        RegionAssignment out;
        out.centers.push_back(acc.norm() > 1e-12 ? Direction::from_unit_vector(acc) : dirs.front());
        out.labels.assign(dirs.size(), 0);
        out.regions.assign(1, {});
        for (size_t i = 0; i < dirs.size(); ++i) out.regions[0].push_back(static_cast<int>(i));
        return out;
    }
    return lloyd_iterate(dirs, fibonacci_centers(p, sector));
}

RegionAssignment nearest_center_assignment(const std::vector<Path>& paths, int p, const AngularSector& sector,
                                           PathEnd end) {
    std::vector<Direction> dirs;
    dirs.reserve(paths.size());
    for (const auto& path : paths) dirs.push_back(path_direction(path, end));
    return nearest_center_assignment(dirs, p, sector);
}

std::vector<RegionAssignment> assignment_sequence(const std::vector<Direction>& dirs, int p_max,
                                                  const AngularSector& sector) {
    if (p_max < 1) throw std::invalid_argument("p_max must be >= 1");
    std::vector<RegionAssignment> out;
    out.reserve(static_cast<size_t>(p_max));
    out.push_back(nearest_center_assignment(dirs, 1, sector));
    for (int p = 2; p <= p_max; ++p) {
        const RegionAssignment& prev = out.back();
        // New center on the worst-gap path: the initial configuration
        // already has max gap <= previous level, and the best-iterate rule
        // keeps it that way.
        int worst_path = 0;
        double worst = -1.0;
        for (size_t i = 0; i < dirs.size(); ++i) {
            const double d = direction_gap(dirs[i], prev.centers[static_cast<size_t>(prev.labels[i])]);
            if (d > worst) {
                worst = d;
                worst_path = static_cast<int>(i);
            }
        }
        std::vector<Direction> centers = prev.centers;
        centers.push_back(dirs[static_cast<size_t>(worst_path)]);
        out.push_back(lloyd_iterate(dirs, std::move(centers)));
    }
    return out;
}

BiasBound bias_upper_bound(const std::vector<Path>& paths, const RegionAssignment& assignment,
                           const AntennaArray& array, PathEnd end) {
    assignment.validate(static_cast<int>(paths.size()));
    double bound = 0.0;
    Eigen::VectorXcd h = Eigen::VectorXcd::Zero(array.size());
    for (size_t i = 0; i < paths.size(); ++i) {
        const Direction& u = path_direction(paths[i], end);
        const Direction& v = assignment.centers[static_cast<size_t>(assignment.labels[i])];
        if (!lemma1_condition(array, u, v))
            throw condition_violated_error("path-to-center gap exceeds the bound validity radius",
                                           static_cast<int>(i), assignment.labels[i]);
        bound += paths[i].gain() * lemma1_bound(array, u, v);
        h += paths[i].complex_gain() * side_vector(array, u, end);
    }
    const double hn = h.norm();
    if (hn <= 0.0) throw std::invalid_argument("zero channel has no relative bias");
    return {bound, (bound / hn) * (bound / hn)};
}

BiasBound bias_bound_quadratic(const std::vector<Path>& paths, const RegionAssignment& assignment,
                               const AntennaArray& array, PathEnd end) {
    assignment.validate(static_cast<int>(paths.size()));
    Eigen::VectorXcd h = Eigen::VectorXcd::Zero(array.size());
    for (size_t i = 0; i < paths.size(); ++i) {
        const Direction& u = path_direction(paths[i], end);
        const Direction& v = assignment.centers[static_cast<size_t>(assignment.labels[i])];
        if (!lemma1_condition(array, u, v))
            throw condition_violated_error("path-to-center gap exceeds the bound validity radius",
                                           static_cast<int>(i), assignment.labels[i]);
        h += paths[i].complex_gain() * side_vector(array, u, end);
    }
    double bound = 0.0;
    for (size_t k = 0; k < assignment.regions.size(); ++k) {
        const auto& members = assignment.regions[k];
        if (members.empty()) continue;
        const Eigen::VectorXcd ev = side_vector(array, assignment.centers[k], end);
        Eigen::MatrixXcd e(array.size(), members.size());
        Eigen::VectorXcd c(members.size());
        for (size_t j = 0; j < members.size(); ++j) {
            const auto& path = paths[static_cast<size_t>(members[j])];
            e.col(static_cast<Eigen::Index>(j)) = side_vector(array, path_direction(path, end), end);
            c(static_cast<Eigen::Index>(j)) = path.complex_gain();
        }
        const Eigen::VectorXcd s = e.adjoint() * ev;  // s_i = e_i^H e_v
        const Eigen::MatrixXcd q = e.adjoint() * e - s * s.adjoint();
        const double val = std::real(c.dot(q * c));
        bound += std::sqrt(std::max(0.0, val));
    }
    const double hn = h.norm();
    if (hn <= 0.0) throw std::invalid_argument("zero channel has no relative bias");
    return {bound, (bound / hn) * (bound / hn)};
}

std::vector<double> water_fill(const std::vector<double>& gains, double total_power) {
    if (gains.empty()) throw std::invalid_argument("need at least one mode");
    if (!(total_power > 0.0)) throw std::invalid_argument("power budget must be positive");
    double inv_max = 0.0;
    for (double g : gains) {
        if (!(g > 0.0)) throw std::invalid_argument("gains must be positive");
        inv_max = std::max(inv_max, 1.0 / g);
    }
    auto filled = [&](double level) {
        double acc = 0.0;
        for (double g : gains) acc += std::max(0.0, level - 1.0 / g);
        return acc;
    };
    double lo = 0.0, hi = inv_max + total_power;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (filled(mid) < total_power ? lo : hi) = mid;
    }
    const double level = 0.5 * (lo + hi);
    std::vector<double> alloc(gains.size());
    for (size_t i = 0; i < gains.size(); ++i) alloc[i] = std::max(0.0, level - 1.0 / gains[i]);
    return alloc;
}

double capacity_optimal(const Eigen::MatrixXcd& H, double symbol_energy, double noise_power) {
    if (!(symbol_energy > 0.0)) throw std::invalid_argument("power budget must be positive");
    if (!(noise_power > 0.0)) throw std::invalid_argument("noise power must be positive");
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(H);
    const auto& s = svd.singularValues();
    std::vector<double> gains;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        const double g = s(i) * s(i) / noise_power;
        if (s(i) > 1e-14 * s(0) && g > 0.0) gains.push_back(g);
    }
    if (gains.empty()) return 0.0;
    const std::vector<double> alloc = water_fill(gains, symbol_energy);
    double cap = 0.0;
    for (size_t i = 0; i < gains.size(); ++i) cap += std::log2(1.0 + alloc[i] * gains[i]);
    return cap;
}

double capacity_optimal(const PhysicalChannel& channel, double symbol_energy, double noise_power) {
    return capacity_optimal(channel.H(), symbol_energy, noise_power);
}

CapacityLoss capacity_loss(const Eigen::VectorXcd& h, const Eigen::VectorXcd& hhat, double psnr_linear) {
    if (!(psnr_linear > 0.0)) throw std::invalid_argument("pSNR must be positive");
    const double hn = h.squaredNorm();
    if (hn <= 0.0) throw std::invalid_argument("zero channel has no capacity loss");
    if (hhat.size() != h.size()) throw std::invalid_argument("estimate length does not match the channel");
    const double en = hhat.squaredNorm();
    double corr2 = 0.0;
    if (en > 0.0) corr2 = std::norm(h.dot(hhat)) / (hn * en);
    corr2 = std::min(corr2, 1.0);
    CapacityLoss out;
    out.c_opt = std::log2(1.0 + psnr_linear);
    const double achieved = std::log2(1.0 + corr2 * psnr_linear);
    out.loss = out.c_opt - achieved;
    out.relative = achieved / out.c_opt;
    return out;
}

double capacity_loss_bound(double rmse, double psnr_linear) {
    if (!(psnr_linear > 0.0)) throw std::invalid_argument("pSNR must be positive");
    if (rmse < 0.0 || rmse > 1.0)
        throw out_of_validity_error("capacity loss bound is only valid for rMSE in [0, 1]");
    const double q = 1.0 - rmse * (2.0 - rmse);
    return std::log2(1.0 + psnr_linear) - std::log2(1.0 + psnr_linear * q);
}

double relative_capacity_from_rmse(double rmse, double psnr_linear) {
    if (!(psnr_linear > 0.0)) throw std::invalid_argument("pSNR must be positive");
    if (rmse < 0.0 || rmse > 1.0)
        throw out_of_validity_error("capacity loss bound is only valid for rMSE in [0, 1]");
    const double q = 1.0 - rmse * (2.0 - rmse);
    return std::log2(1.0 + psnr_linear * q) / std::log2(1.0 + psnr_linear);
}

}  // namespace chanest

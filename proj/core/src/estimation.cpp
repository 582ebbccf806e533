#include "chanest/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "chanest/errors.hpp"

namespace chanest {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> linspace_by_step(double lo, double hi, double step) {
    if (hi < lo) throw std::invalid_argument("empty angular range");
    const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> v(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = lo + i * step;
    return v;
}

std::vector<Direction> sector_grid(const AngularSector& sector, double step) {
    std::vector<Direction> grid;
    const auto az = linspace_by_step(sector.az_min, sector.az_max, step);
    const auto el = linspace_by_step(sector.el_min, sector.el_max, step);
    grid.reserve(az.size() * el.size());
    for (double a : az)
        for (double e : el) grid.emplace_back(a, e);
    return grid;
}

double steering_coherence(const AntennaArray& array, const Direction& a, const Direction& b) {
    return std::abs(steering_vector(array, a).dot(steering_vector(array, b)));
}

}  // namespace

double auto_grid_step(const AntennaArray& array, const AngularSector& sector, double coherence_target) {
    if (!(coherence_target > 0.0) || coherence_target >= 1.0)
        throw std::invalid_argument("coherence target must lie in (0, 1)");
    const double caz = 0.5 * (sector.az_min + sector.az_max);
    const double cel = 0.5 * (sector.el_min + sector.el_max);
    const Direction center(caz, cel);
    auto coh_at = [&](double delta) {
        const Direction daz(caz + delta, cel);
        const double el_shift = std::min(cel + delta, kPi / 2);
        const Direction del(caz, el_shift);
        return std::min(steering_coherence(array, center, daz), steering_coherence(array, center, del));
    };
    // March out of the main lobe, then bisect the first crossing.
    double lo = 5e-4;
    if (coh_at(lo) < coherence_target) return lo;
    double hi = lo;
    while (hi < 0.5 && coh_at(hi) >= coherence_target) {
        lo = hi;
        hi *= 1.25;
    }
    if (hi >= 0.5) return 0.5;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (coh_at(mid) >= coherence_target)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

Dictionary::Dictionary(AntennaArray tx, AntennaArray rx, std::vector<Direction> tx_grid, std::vector<Direction> rx_grid)
    : tx_(std::move(tx)), rx_(std::move(rx)), tx_grid_(std::move(tx_grid)), rx_grid_(std::move(rx_grid)) {
    if (tx_grid_.empty() || rx_grid_.empty()) throw std::invalid_argument("dictionary grids must be non-empty");
    rebuild();
}

void Dictionary::rebuild() {
    const int gt = static_cast<int>(tx_grid_.size());
    const int gr = static_cast<int>(rx_grid_.size());
    const int n = tx_.size() * rx_.size();
    atoms_.resize(n, gt * gr + static_cast<int>(extra_.size()));
    Eigen::MatrixXcd et(tx_.size(), gt), er(rx_.size(), gr);
    for (int i = 0; i < gt; ++i) et.col(i) = steering_vector(tx_, tx_grid_[static_cast<size_t>(i)]).conjugate();
    for (int j = 0; j < gr; ++j) er.col(j) = steering_vector(rx_, rx_grid_[static_cast<size_t>(j)]);
    for (int i = 0; i < gt; ++i)
        for (int j = 0; j < gr; ++j) {
            // vec(H) layout: entry (jt * N_r + jr) = conj(e_t)_jt * (e_r)_jr
            Eigen::Map<Eigen::MatrixXcd> atom(atoms_.col(i * gr + j).data(), rx_.size(), tx_.size());
            atom = er.col(j) * et.col(i).transpose();
        }
    int c = gt * gr;
    for (const auto& [dep, arr] : extra_) {
        Eigen::Map<Eigen::MatrixXcd> atom(atoms_.col(c++).data(), rx_.size(), tx_.size());
        atom = steering_vector(rx_, arr) * steering_vector(tx_, dep).conjugate().transpose();
    }
}

std::pair<Direction, Direction> Dictionary::atom_direction(int k) const {
    const int grid_atoms = static_cast<int>(tx_grid_.size() * rx_grid_.size());
    if (k < 0 || k >= size()) throw std::invalid_argument("atom index out of range");
    if (k < grid_atoms) {
        const int gr = static_cast<int>(rx_grid_.size());
        return {tx_grid_[static_cast<size_t>(k / gr)], rx_grid_[static_cast<size_t>(k % gr)]};
    }
    return extra_[static_cast<size_t>(k - grid_atoms)];
}

Dictionary Dictionary::with_extra_directions(const std::vector<std::pair<Direction, Direction>>& dirs) const {
    Dictionary d = *this;
    d.extra_.insert(d.extra_.end(), dirs.begin(), dirs.end());
    d.rebuild();
    return d;
}

Dictionary build_dictionary(const AntennaArray& tx, const AntennaArray& rx, const GridSpec& grid) {
    auto side_grid = [&](const AntennaArray& array) -> std::vector<Direction> {
        if (array.size() == 1)
            return {Direction(0.5 * (grid.sector.az_min + grid.sector.az_max),
                              0.5 * (grid.sector.el_min + grid.sector.el_max))};
        const double step =
            grid.step > 0.0 ? grid.step : auto_grid_step(array, grid.sector, grid.coherence_target);
        return sector_grid(grid.sector, step);
    };
    return Dictionary(tx, rx, side_grid(tx), side_grid(rx));
}

OmpSolver::OmpSolver(const Dictionary& dict) : dict_(&dict) {
    col_norms_ = dict.atoms().colwise().norm().transpose();
}

OmpSolver::OmpSolver(const Dictionary& dict, const Eigen::MatrixXcd& A) : dict_(&dict) {
    if (A.cols() != dict.atoms().rows()) throw std::invalid_argument("operator width does not match atom length");
    sensed_ = A * dict.atoms();
    col_norms_ = sensed_.colwise().norm().transpose();
}

const Eigen::MatrixXcd& OmpSolver::columns() const { return sensed_.size() > 0 ? sensed_ : dict_->atoms(); }

SparseEstimate OmpSolver::solve(const Eigen::VectorXcd& y, int p) const {
    return solve_sequence(y, p).back();
}

std::vector<SparseEstimate> OmpSolver::solve_sequence(const Eigen::VectorXcd& y, int p_max) const {
    const Eigen::MatrixXcd& B = columns();
    const int g = static_cast<int>(B.cols());
    if (p_max < 1) throw std::invalid_argument("p must be >= 1");
    if (p_max > g) throw std::invalid_argument("p exceeds the dictionary atom count");
    if (y.size() != B.rows()) throw std::invalid_argument("observation length does not match the operator");

    std::vector<int> selected;
    selected.reserve(static_cast<size_t>(p_max));
    std::vector<char> used(static_cast<size_t>(g), 0);
    Eigen::VectorXcd r = y;
    Eigen::VectorXcd d;
    std::vector<double> history;
    history.reserve(static_cast<size_t>(p_max));

    auto snapshot = [&]() {
        SparseEstimate est;
        est.atom_indices = selected;
        est.coefficients = d;
        est.residual_history = history;
        est.residual_norm = history.empty() ? y.norm() : history.back();
        est.n_t = dict_->tx().size();
        est.n_r = dict_->rx().size();
        est.hhat = Eigen::VectorXcd::Zero(dict_->atoms().rows());
        for (size_t j = 0; j < selected.size(); ++j)
            est.hhat += d(static_cast<Eigen::Index>(j)) * dict_->atoms().col(selected[j]);
        est.directions.reserve(selected.size());
        for (int k : selected) est.directions.push_back(dict_->atom_direction(k));
        return est;
    };

    std::vector<SparseEstimate> out;
    out.reserve(static_cast<size_t>(p_max));
    for (int it = 0; it < p_max; ++it) {
        const Eigen::VectorXcd corr = B.adjoint() * r;
        int best = -1;
        double best_score = 0.0;
        for (int k = 0; k < g; ++k) {
            if (used[static_cast<size_t>(k)] || col_norms_(k) <= 0.0) continue;
            const double score = std::abs(corr(k)) / col_norms_(k);
            if (score > best_score) {
                best_score = score;
                best = k;
            }
        }
        if (best < 0 || best_score <= 0.0) break;
        used[static_cast<size_t>(best)] = 1;
        selected.push_back(best);
        Eigen::MatrixXcd bs(B.rows(), selected.size());
        for (size_t j = 0; j < selected.size(); ++j) bs.col(static_cast<Eigen::Index>(j)) = B.col(selected[j]);
        d = bs.colPivHouseholderQr().solve(y);
        r = y - bs * d;
        history.push_back(r.norm());
        out.push_back(snapshot());
    }
    if (out.empty()) out.push_back(snapshot());
    while (static_cast<int>(out.size()) < p_max) out.push_back(out.back());
    return out;
}

SparseEstimate omp_estimate(const Dictionary& dict, const Eigen::MatrixXcd& A, const Eigen::VectorXcd& y, int p) {
    return OmpSolver(dict, A).solve(y, p);
}

SparseEstimate project_onto_model(const Dictionary& dict, const Eigen::VectorXcd& h, int p) {
    return OmpSolver(dict).solve(h, p);
}

double projection_bias(const Dictionary& dict, const Eigen::VectorXcd& h, int p) {
    const double hn = h.squaredNorm();
    if (hn <= 0.0) throw std::invalid_argument("zero channel has no relative bias");
    const SparseEstimate est = project_onto_model(dict, h, p);
    return est.residual_norm * est.residual_norm / hn;
}

OracleRmse oracle_rmse(const Dictionary& dict, const Eigen::VectorXcd& h, int p, double psnr_linear) {
    if (!(psnr_linear > 0.0)) throw std::invalid_argument("pSNR must be positive");
    const bool single = dict.tx().size() == 1 || dict.rx().size() == 1;
    OracleRmse out;
    out.bias = projection_bias(dict, h, p);
    out.variance = (single ? 2.0 : 3.0) * p / psnr_linear;
    out.rmse = out.bias + out.variance;
    return out;
}

std::string SparseEstimate::to_json() const {
    nlohmann::json paths = nlohmann::json::array();
    for (int i = 0; i < p(); ++i) {
        const auto c = coefficients(i);
        double phase = std::arg(c);
        if (phase < 0.0) phase += 2.0 * kPi;
        paths.push_back({{"gain", std::abs(c)},
                         {"phase", phase},
                         {"coeff", {{"re", c.real()}, {"im", c.imag()}}},
                         {"dod_az_deg", directions[static_cast<size_t>(i)].first.azimuth() * 180.0 / kPi},
                         {"dod_el_deg", directions[static_cast<size_t>(i)].first.elevation() * 180.0 / kPi},
                         {"doa_az_deg", directions[static_cast<size_t>(i)].second.azimuth() * 180.0 / kPi},
                         {"doa_el_deg", directions[static_cast<size_t>(i)].second.elevation() * 180.0 / kPi}});
    }
    const nlohmann::json j{{"p", p()}, {"residual_norm", residual_norm}, {"paths", paths}};
    return j.dump();
}

std::vector<double> param_vector(const SparseEstimate& est) {
    std::vector<double> v;
    const bool tx_single = est.n_t == 1;
    const bool rx_single = est.n_r == 1;
    v.reserve(static_cast<size_t>(est.p()) * ((tx_single || rx_single) ? 4 : 6));
    for (int i = 0; i < est.p(); ++i) {
        const auto c = est.coefficients(i);
        double phase = std::arg(c);
        if (phase < 0.0) phase += 2.0 * kPi;
        v.push_back(std::abs(c));
        v.push_back(phase);
        const auto& [dep, arr] = est.directions[static_cast<size_t>(i)];
        if (!tx_single) {
            v.push_back(dep.azimuth());
            v.push_back(dep.elevation());
        }
        if (!rx_single) {
            v.push_back(arr.azimuth());
            v.push_back(arr.elevation());
        }
    }
    return v;
}

LsSolver::LsSolver(const ObservationSetup& setup) {
    const Eigen::MatrixXcd& m = setup.M();
    if (m.rows() < m.cols())
        throw rank_deficient_error("fewer observations than unknowns, M^H M is singular");
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    const double smin = s(s.size() - 1);
    if (smin <= 0.0) throw rank_deficient_error("M^H M is singular");
    condition_ = (s(0) / smin) * (s(0) / smin);
    if (condition_ > 1e12) throw rank_deficient_error("M^H M condition number exceeds 1e12");
    pinv_ = svd.matrixV() * s.cwiseInverse().asDiagonal() * svd.matrixU().adjoint();
}

Eigen::VectorXcd LsSolver::solve(const Eigen::VectorXcd& y) const {
    if (y.size() != pinv_.cols()) throw std::invalid_argument("observation length does not match the setup");
    return pinv_ * y;
}

LsEstimate ls_estimate(const ObservationSetup& setup, const Eigen::VectorXcd& y) {
    LsSolver solver(setup);
    return {solver.solve(y), solver.condition_number()};
}

LmmseSolver::LmmseSolver(const ObservationSetup& setup, const Eigen::MatrixXcd& R) {
    const Eigen::MatrixXcd& m = setup.M();
    if (R.rows() != m.cols() || R.cols() != m.cols())
        throw std::invalid_argument("covariance dimension does not match the setup");
    if ((R - R.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, R.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("R must be Hermitian");
    const Eigen::MatrixXcd innov = m * R * m.adjoint() + setup.noise_power() * Eigen::MatrixXcd::Identity(m.rows(), m.rows());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(innov);
    if (eig.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
    const Eigen::VectorXd lam = eig.eigenvalues();
    const double lmax = lam(lam.size() - 1);
    if (lam(0) <= 1e-12 * std::max(lmax, 0.0) || lam(0) <= 0.0)
        throw rank_deficient_error("innovation covariance is singular (R singular and no noise)");
    gain_ = R * m.adjoint() * (eig.eigenvectors() * lam.cwiseInverse().asDiagonal() * eig.eigenvectors().adjoint());
}

Eigen::VectorXcd LmmseSolver::solve(const Eigen::VectorXcd& y) const {
    if (y.size() != gain_.cols()) throw std::invalid_argument("observation length does not match the setup");
    return gain_ * y;
}

Eigen::VectorXcd lmmse_estimate(const ObservationSetup& setup, const Eigen::MatrixXcd& R, const Eigen::VectorXcd& y) {
    return LmmseSolver(setup, R).solve(y);
}

}  // namespace chanest

#include "chanest/observation.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <unsupported/Eigen/KroneckerProduct>

#include "chanest/errors.hpp"
#include "chanest/random.hpp"

namespace chanest {

namespace {

constexpr double kPi = std::numbers::pi;

// Rows k = 0..rows-1 of the N-point DFT matrix, entries exp(-2 pi i k l / N).
// Unit-modulus entries; rows are orthogonal with squared norm N.
Eigen::MatrixXcd dft_rows(int rows, int n) {
    Eigen::MatrixXcd S(rows, n);
    for (int k = 0; k < rows; ++k)
        for (int l = 0; l < n; ++l) S(k, l) = std::polar(1.0, -2.0 * kPi * k * l / n);
    return S;
}

// X = B * sqrt(P_e / r) * dft_rows(r, n_s): column space im(B), constant
// column energy P_e, X X^H = (P_e n_s / r) B B^H. B must have orthonormal
// columns.
Eigen::MatrixXcd spread_over_symbols(const Eigen::MatrixXcd& B, int n_s, double symbol_energy) {
    const int r = static_cast<int>(B.cols());
    return B * (std::sqrt(symbol_energy / r) * dft_rows(r, n_s));
}

}  // namespace

ObservationSetup::ObservationSetup(Eigen::MatrixXcd X, Eigen::MatrixXcd W, double symbol_energy, double noise_power,
                                   std::optional<int> rf_budget)
    : X_(std::move(X)), W_(std::move(W)), symbol_energy_(symbol_energy), noise_power_(noise_power),
      rf_budget_(rf_budget) {
    if (X_.size() == 0 || W_.size() == 0) throw std::invalid_argument("X and W must be non-empty");
    if (!(symbol_energy_ > 0.0)) throw std::invalid_argument("symbol energy must be positive");
    if (noise_power_ < 0.0) throw std::invalid_argument("noise power must be >= 0");
    M_ = Eigen::kroneckerProduct(X_.transpose(), W_.adjoint()).eval();
    validate();
}

void ObservationSetup::validate() const {
    const double pe = symbol_energy_;
    for (int i = 0; i < n_s(); ++i) {
        if (std::abs(X_.col(i).squaredNorm() - pe) > 1e-9 * pe)
            throw std::invalid_argument("pilot column energy differs from the symbol energy budget");
    }
    if (std::abs(X_.squaredNorm() - n_s() * pe) > 1e-9 * n_s() * pe)
        throw std::invalid_argument("training energy differs from N_s * P_e");
    const Eigen::MatrixXcd gram = W_.adjoint() * W_;
    if ((gram - Eigen::MatrixXcd::Identity(n_c(), n_c())).cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument("combiner columns are not orthonormal");
    const Eigen::MatrixXcd m = Eigen::kroneckerProduct(X_.transpose(), W_.adjoint());
    if ((m - M_).cwiseAbs().maxCoeff() > 1e-12) throw std::invalid_argument("M does not match X^T kron W^H");
    if (rf_budget_) {
        if (*rf_budget_ < 1) throw std::invalid_argument("RF chain budget must be >= 1");
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(X_);
        const auto& s = svd.singularValues();
        int rank = 0;
        for (Eigen::Index i = 0; i < s.size(); ++i)
            if (s(i) > 1e-10 * s(0)) ++rank;
        if (rank > *rf_budget_)
            throw rank_deficient_error("training matrix rank exceeds the RF chain budget");
    }
}

ObservationSetup ObservationSetup::with_noise(double noise_power) const {
    return ObservationSetup(X_, W_, symbol_energy_, noise_power, rf_budget_);
}

ObservationSetup ObservationSetup::with_rf_budget(int n_rf) const {
    return ObservationSetup(X_, W_, symbol_energy_, noise_power_, n_rf);
}

std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> ObservationSetup::hybrid_factorization() const {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(X_, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > 1e-10 * s(0)) ++rank;
    const int r = rf_budget_.value_or(rank);
    const Eigen::MatrixXcd V = svd.matrixU().leftCols(r);
    const Eigen::MatrixXcd Z = s.head(r).asDiagonal() * svd.matrixV().leftCols(r).adjoint();
    if ((X_ - V * Z).norm() > 1e-8 * X_.norm())
        throw rank_deficient_error("training matrix does not admit a factorization within the RF chain budget");
    return {V, Z};
}

Eigen::VectorXcd observe(const ObservationSetup& setup, const Eigen::VectorXcd& h, std::mt19937_64& rng) {
    if (h.size() != setup.M().cols()) throw std::invalid_argument("channel dimension does not match the setup");
    Eigen::VectorXcd y = setup.M() * h;
    if (setup.noise_power() > 0.0)
        y += std::sqrt(setup.noise_power()) * complex_gaussian_vector(rng, y.size());
    return y;
}

Eigen::VectorXcd observe(const ObservationSetup& setup, const PhysicalChannel& channel, std::mt19937_64& rng) {
    return observe(setup, channel.h(), rng);
}

ObservationSetup build_ls_optimal(int n_t, int n_r, int n_s, int n_c, double symbol_energy) {
    if (n_t < 1 || n_r < 1 || n_s < 1 || n_c < 1) throw std::invalid_argument("dimensions must be >= 1");
    if (n_c > n_r) throw std::invalid_argument("cannot have more combiners than receive antennas");
    if (n_s < n_t)
        throw underdetermined_design_error("least squares needs at least N_t pilot symbols");
    if (n_c < n_r)
        throw underdetermined_design_error(
            "least squares needs N_c = N_r combiners; fewer leave receive dimensions unobserved");
    const Eigen::MatrixXcd X = std::sqrt(symbol_energy / n_t) * dft_rows(n_t, n_s);
    const Eigen::MatrixXcd W = Eigen::MatrixXcd::Identity(n_r, n_c);
    return ObservationSetup(std::move(X), std::move(W), symbol_energy);
}

ObservationSetup build_lmmse_optimal(const Eigen::MatrixXcd& R, int n_r, int n_s, int n_c, double symbol_energy,
                                     double noise_power) {
    const int d = static_cast<int>(R.rows());
    if (R.cols() != d || d < 1) throw std::invalid_argument("R must be square");
    if (n_r < 1 || d % n_r != 0) throw std::invalid_argument("N_r must divide dim(R)");
    const int n_t = d / n_r;
    if (n_c > n_r) throw std::invalid_argument("cannot have more combiners than receive antennas");
    if (!(noise_power > 0.0)) throw std::invalid_argument("noise power must be positive");
    if (n_s < n_t) throw underdetermined_design_error("optimal training needs at least N_t pilot symbols");
    if (n_c < n_r)
        throw underdetermined_design_error("optimal training needs N_c = N_r combiners");
    if ((R - R.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, R.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("R must be Hermitian");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(R);
    if (eig.info() != Eigen::Success) throw std::runtime_error("eigendecomposition of R failed");
    const Eigen::VectorXd lam = eig.eigenvalues();
    if (lam(0) <= 1e-12 * lam(d - 1) || lam(0) <= 0.0)
        throw singular_covariance_error("R is singular, Tr[R^-1] does not exist");

    const double tr_inv = lam.cwiseInverse().sum();
    const double alpha = symbol_energy * n_c * n_s / d + noise_power * tr_inv / d;
    Eigen::VectorXd target = alpha - noise_power * lam.cwiseInverse().array();
    const double worst = target.minCoeff();
    if (worst < -1e-12 * std::abs(alpha))
        throw snr_too_low_error("noise too strong for the closed-form optimal training (indefinite target)");
    target = target.cwiseMax(0.0);

    // Target Gram T = U diag(target) U^H must factor as A kron Id over the
    // receive dimension, since M^H M = (X X^H)* kron (W W^H) and W is unitary.
    const Eigen::MatrixXcd T =
        eig.eigenvectors() * target.asDiagonal() * eig.eigenvectors().adjoint();
    Eigen::MatrixXcd A(n_t, n_t);
    if (n_r == 1) {
        A = T;
    } else {
        A.setZero();
        for (int i = 0; i < n_t; ++i)
            for (int j = 0; j < n_t; ++j) {
                std::complex<double> acc = 0.0;
                for (int m = 0; m < n_r; ++m) acc += T(i * n_r + m, j * n_r + m);
                A(i, j) = acc / static_cast<double>(n_r);
            }
        const Eigen::MatrixXcd recon = Eigen::kroneckerProduct(A, Eigen::MatrixXcd::Identity(n_r, n_r));
        if ((recon - T).cwiseAbs().maxCoeff() > 1e-8 * std::max(1.0, T.cwiseAbs().maxCoeff()))
            throw rank_deficient_error(
                "optimal training target is not a Kronecker product over the receive dimension; "
                "not realizable with a single combiner stage");
    }

    // X X^H must equal conj(A) = A^T. Diagonalize and spread over DFT columns;
    // the diagonal Gram in that basis makes every pilot column energy equal.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eiga(A);
    const Eigen::VectorXd ta = eiga.eigenvalues().cwiseMax(0.0);
    const Eigen::MatrixXcd B = eiga.eigenvectors().conjugate();
    const Eigen::MatrixXcd scaled = B * ta.cwiseSqrt().asDiagonal();
    const Eigen::MatrixXcd X = scaled * (dft_rows(n_t, n_s) / std::sqrt(static_cast<double>(n_s)));
    const Eigen::MatrixXcd W = Eigen::MatrixXcd::Identity(n_r, n_c);
    return ObservationSetup(X, W, symbol_energy, noise_power);
}

ObservationSetup build_oracle_observation(const std::vector<std::pair<Direction, Direction>>& virtual_dirs,
                                          const AntennaArray& tx, const AntennaArray& rx, int n_s, int n_c,
                                          double symbol_energy) {
    const int p = static_cast<int>(virtual_dirs.size());
    if (p < 1) throw std::invalid_argument("need at least one virtual direction");
    if (n_s < 1 || n_c < 1) throw std::invalid_argument("dimensions must be >= 1");
    if (n_c > rx.size()) throw std::invalid_argument("cannot have more combiners than receive antennas");
    if (tx.size() > 1 && 3 * p > std::min(n_s, tx.size()))
        throw insufficient_dimensions_error("transmit side cannot span 3p vectors: need 3p <= min(N_s, N_t)");
    if (rx.size() > 1 && 3 * p > n_c)
        throw insufficient_dimensions_error("receive side cannot span 3p vectors: need 3p <= N_c");

    auto span_basis = [](const AntennaArray& array, const std::vector<Direction>& dirs) {
        const int n = array.size();
        Eigen::MatrixXcd cols(n, 3 * static_cast<int>(dirs.size()));
        int c = 0;
        for (const auto& d : dirs) {
            cols.col(c++) = steering_vector(array, d);
            const auto [daz, del] = steering_derivatives(array, d);
            cols.col(c++) = daz;
            cols.col(c++) = del;
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(cols);
        qr.setThreshold(1e-10);
        const int rank = static_cast<int>(qr.rank());
        const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(n, rank);
        return q;
    };

    std::vector<Direction> tx_dirs, rx_dirs;
    tx_dirs.reserve(virtual_dirs.size());
    rx_dirs.reserve(virtual_dirs.size());
    for (const auto& [dep, arr] : virtual_dirs) {
        tx_dirs.push_back(dep);
        rx_dirs.push_back(arr);
    }

    const Eigen::MatrixXcd bt = span_basis(tx, tx_dirs);
    const Eigen::MatrixXcd X = spread_over_symbols(bt, n_s, symbol_energy);

    Eigen::MatrixXcd W;
    if (rx.size() == 1) {
        W = Eigen::MatrixXcd::Ones(1, 1);
    } else {
        const Eigen::MatrixXcd br = span_basis(rx, rx_dirs);
        if (static_cast<int>(br.cols()) > n_c)
            throw insufficient_dimensions_error("receive span exceeds the combiner budget");
        // Extend the receive-span basis to n_c orthonormal columns.
        Eigen::MatrixXcd ext(rx.size(), br.cols() + rx.size());
        ext << br, Eigen::MatrixXcd::Identity(rx.size(), rx.size());
        Eigen::HouseholderQR<Eigen::MatrixXcd> qr(ext);
        const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(rx.size(), n_c);
        W = q;
    }
    return ObservationSetup(X, W, symbol_energy);
}

}  // namespace chanest

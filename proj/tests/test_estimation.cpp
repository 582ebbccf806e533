#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include <chanest/analysis.hpp>
#include <chanest/errors.hpp>
#include <chanest/estimation.hpp>
#include <chanest/random.hpp>

using namespace chanest;
using doctest::Approx;

namespace {

Dictionary small_tx_dictionary() {
    const auto tx = make_upa(4, 4, 1.0, 2.0);
    const auto rx = make_ula(1, 1.0, 2.0);
    GridSpec grid;
    grid.step = 0.35;
    return build_dictionary(tx, rx, grid);
}

bool same_estimate(const SparseEstimate& a, const SparseEstimate& b) {
    if (a.atom_indices != b.atom_indices) return false;
    if (a.residual_norm != b.residual_norm) return false;
    if (a.residual_history != b.residual_history) return false;
    if (a.coefficients.size() != b.coefficients.size()) return false;
    for (Eigen::Index i = 0; i < a.coefficients.size(); ++i)
        if (a.coefficients(i) != b.coefficients(i)) return false;
    for (Eigen::Index i = 0; i < a.hhat.size(); ++i)
        if (a.hhat(i) != b.hhat(i)) return false;
    return true;
}

}  // namespace

TEST_SUITE("estimation") {

TEST_CASE("dictionary atoms are unit norm and indexed by direction pair") {
    const auto dict = small_tx_dictionary();
    REQUIRE(dict.size() > 10);
    for (int k = 0; k < dict.size(); k += 7) CHECK(dict.atoms().col(k).norm() == Approx(1.0).epsilon(1e-12));

    // Single-antenna receive side degenerates to the transmit grid.
    CHECK(dict.size() == static_cast<int>(dict.tx_grid().size()));
    const auto [dep, arr] = dict.atom_direction(3);
    CHECK(dep.azimuth() == dict.tx_grid()[3].azimuth());

    // Atoms are conjugated transmit steering vectors.
    const Eigen::VectorXcd expect = steering_vector(dict.tx(), dep).conjugate();
    CHECK((dict.atoms().col(3) - expect).norm() < 1e-12);

    CHECK_THROWS_AS(dict.atom_direction(dict.size()), std::invalid_argument);
}

TEST_CASE("extra directions are appended after the grid block") {
    const auto dict = small_tx_dictionary();
    const Direction dep(0.123, -0.05);
    const auto extended = dict.with_extra_directions({{dep, Direction(0, 0)}});
    CHECK(extended.size() == dict.size() + 1);
    const Eigen::VectorXcd expect = steering_vector(dict.tx(), dep).conjugate();
    CHECK((extended.atoms().col(dict.size()) - expect).norm() < 1e-12);
}

TEST_CASE("auto grid step meets the coherence target at the sector center") {
    const auto tx = make_upa(8, 8, 1.0, 2.0);
    const AngularSector sector{-M_PI / 3, M_PI / 3, -M_PI / 6, M_PI / 6};
    const double step = auto_grid_step(tx, sector, 0.97);
    REQUIRE(step > 0.0);
    const Direction c(0.0, 0.0);
    const Direction c_az(step, 0.0);
    const double coh = std::abs(steering_vector(tx, c).dot(steering_vector(tx, c_az)));
    CHECK(coh >= 0.96);
    CHECK(coh < 1.0);
}

TEST_CASE("omp recovers an exact on-grid two-path mixture") {
    const auto dict = small_tx_dictionary();
    const int i = 2;
    const int j = dict.size() - 3;
    REQUIRE(std::abs(dict.atoms().col(i).dot(dict.atoms().col(j))) < 0.5);

    const Eigen::VectorXcd y =
        2.0 * dict.atoms().col(i) + std::complex<double>(0.0, 0.5) * dict.atoms().col(j);
    const OmpSolver solver(dict);
    const auto est = solver.solve(y, 2);
    REQUIRE(est.p() == 2);
    CHECK(((est.atom_indices[0] == i && est.atom_indices[1] == j) ||
           (est.atom_indices[0] == j && est.atom_indices[1] == i)));
    CHECK(est.residual_norm < 1e-10);
    CHECK((est.hhat - y).norm() < 1e-10);
}

TEST_CASE("omp residuals are non-increasing and orthogonal to the selection") {
    const auto dict = small_tx_dictionary();
    auto rng = make_rng(123);
    const Eigen::VectorXcd y = complex_gaussian_vector(rng, dict.atoms().rows());
    const OmpSolver solver(dict);
    const auto est = solver.solve(y, 5);
    REQUIRE(est.residual_history.size() == 5);
    for (size_t t = 1; t < est.residual_history.size(); ++t)
        CHECK(est.residual_history[t] <= est.residual_history[t - 1] + 1e-12);
    CHECK(est.residual_norm == est.residual_history.back());

    const Eigen::VectorXcd r = y - est.hhat;
    for (int k : est.atom_indices) CHECK(std::abs(r.dot(dict.atoms().col(k))) < 1e-10);
}

TEST_CASE("solve_sequence prefixes are identical to individual solves") {
    const auto dict = small_tx_dictionary();
    auto rng = make_rng(321);
    const Eigen::VectorXcd y = complex_gaussian_vector(rng, dict.atoms().rows());
    const OmpSolver solver(dict);
    const auto seq = solver.solve_sequence(y, 5);
    REQUIRE(seq.size() == 5);
    for (int p = 1; p <= 5; ++p) CHECK(same_estimate(seq[static_cast<size_t>(p - 1)], solver.solve(y, p)));
}

TEST_CASE("omp competes with the exhaustive two-atom search") {
    const auto dict = small_tx_dictionary();
    auto rng = make_rng(77);
    // Two off-grid departures inside the sector plus mild noise.
    const Eigen::VectorXcd y = std::polar(1.0, 0.4) * steering_vector(dict.tx(), Direction(0.21, 0.04)).conjugate() +
                               std::polar(0.7, 2.0) * steering_vector(dict.tx(), Direction(-0.47, -0.11)).conjugate() +
                               0.01 * complex_gaussian_vector(rng, dict.atoms().rows());

    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < dict.size(); ++i) {
        for (int j = i + 1; j < dict.size(); ++j) {
            Eigen::MatrixXcd B(dict.atoms().rows(), 2);
            B.col(0) = dict.atoms().col(i);
            B.col(1) = dict.atoms().col(j);
            const Eigen::VectorXcd d = B.colPivHouseholderQr().solve(y);
            best = std::min(best, (y - B * d).norm());
        }
    }
    const auto est = OmpSolver(dict).solve(y, 2);
    CHECK(est.residual_norm <= 1.1 * best + 1e-12);
}

TEST_CASE("omp through a sensing operator accounts for column gains") {
    const auto dict = small_tx_dictionary();
    const auto setup = build_ls_optimal(16, 1, 16, 1, 3.0);
    const OmpSolver solver(dict, setup.M());
    const Eigen::VectorXcd h = dict.atoms().col(4);
    const Eigen::VectorXcd y = setup.M() * h;
    const auto est = solver.solve(y, 1);
    CHECK(est.atom_indices[0] == 4);
    CHECK((est.hhat - h).norm() < 1e-10);
    CHECK_THROWS_AS(OmpSolver(dict, Eigen::MatrixXcd::Identity(3, 3)), std::invalid_argument);
}

TEST_CASE("omp rejects impossible orders") {
    const auto dict = small_tx_dictionary();
    const Eigen::VectorXcd y = dict.atoms().col(0);
    const OmpSolver solver(dict);
    CHECK_THROWS_AS(solver.solve(y, 0), std::invalid_argument);
    CHECK_THROWS_AS(solver.solve(y, dict.size() + 1), std::invalid_argument);
    CHECK_THROWS_AS(solver.solve(Eigen::VectorXcd::Ones(3), 1), std::invalid_argument);
}

TEST_CASE("projection bias vanishes on the model set") {
    const auto dict = small_tx_dictionary();
    const Eigen::VectorXcd h = 1.7 * dict.atoms().col(5);
    CHECK(projection_bias(dict, h, 1) < 1e-20);
    CHECK(projection_bias(dict, h, 3) < 1e-20);

    auto rng = make_rng(9);
    const Eigen::VectorXcd g = complex_gaussian_vector(rng, dict.atoms().rows());
    const double b1 = projection_bias(dict, g, 1);
    const double b4 = projection_bias(dict, g, 4);
    CHECK(b1 >= b4);
    CHECK(b4 >= 0.0);
}

TEST_CASE("oracle error splits into projection bias plus the variance floor") {
    const auto dict = small_tx_dictionary();
    const Eigen::VectorXcd h = dict.atoms().col(5);
    const auto r = oracle_rmse(dict, h, 2, 100.0);
    CHECK(r.variance == 2.0 * 2 / 100.0);
    CHECK(r.variance == variance_lower_bound(2, 100.0, true));
    CHECK(r.rmse == r.bias + r.variance);
    CHECK(r.bias < 1e-20);

    // Both sides multi-antenna: 3 real parameters per path direction pair.
    const auto tx = make_upa(3, 3, 1.0, 2.0);
    const auto rx = make_upa(2, 2, 1.0, 2.0);
    GridSpec grid;
    grid.step = 0.5;
    const auto full = build_dictionary(tx, rx, grid);
    const auto r2 = oracle_rmse(full, full.atoms().col(0), 2, 100.0);
    CHECK(r2.variance == 3.0 * 2 / 100.0);
    CHECK(r2.variance == variance_lower_bound(2, 100.0, false));
}

TEST_CASE("parameter count per path depends on the array sides") {
    const auto dict = small_tx_dictionary();
    const auto est = OmpSolver(dict).solve(dict.atoms().col(2), 2);
    CHECK(param_vector(est).size() == 8);  // gain, phase, az, el per path

    const auto tx = make_upa(3, 3, 1.0, 2.0);
    const auto rx = make_upa(2, 2, 1.0, 2.0);
    GridSpec grid;
    grid.step = 0.5;
    const auto full = build_dictionary(tx, rx, grid);
    const auto est2 = OmpSolver(full).solve(full.atoms().col(1), 2);
    CHECK(param_vector(est2).size() == 12);
}

TEST_CASE("least squares inverts the optimal design exactly without noise") {
    const auto setup = build_ls_optimal(8, 1, 8, 1, 1.0);
    const LsSolver solver(setup);
    CHECK(solver.condition_number() == Approx(1.0).epsilon(1e-9));
    auto rng = make_rng(55);
    const Eigen::VectorXcd h = complex_gaussian_vector(rng, 8);
    CHECK((solver.solve(setup.M() * h) - h).norm() < 1e-10);

    const auto est = ls_estimate(setup, setup.M() * h);
    CHECK((est.hhat - h).norm() < 1e-10);
    CHECK(est.condition_number == solver.condition_number());
}

TEST_CASE("least squares refuses underdetermined observations") {
    Eigen::MatrixXcd X(2, 1);
    X << 1.0, 0.0;
    const Eigen::MatrixXcd W = Eigen::MatrixXcd::Ones(1, 1);
    const ObservationSetup setup(X, W, 1.0);  // one observation, two unknowns
    CHECK_THROWS_AS(LsSolver{setup}, rank_deficient_error);
}

TEST_CASE("scalar lmmse shrinks toward zero") {
    // gain = r sqrt(P) / (P r + sigma^2) with r = 2, P = 1, sigma^2 = 0.5.
    const Eigen::MatrixXcd X = Eigen::MatrixXcd::Ones(1, 1);
    const Eigen::MatrixXcd W = Eigen::MatrixXcd::Ones(1, 1);
    const auto setup = ObservationSetup(X, W, 1.0).with_noise(0.5);
    Eigen::MatrixXcd R = Eigen::MatrixXcd::Ones(1, 1);
    R(0, 0) = 2.0;
    const LmmseSolver solver(setup, R);
    Eigen::VectorXcd y(1);
    y(0) = 1.0;
    CHECK(std::abs(solver.solve(y)(0) - 0.8) < 1e-12);
    CHECK((lmmse_estimate(setup, R, y) - solver.solve(y)).norm() == 0.0);
}

TEST_CASE("lmmse validates its covariance") {
    const auto setup = build_ls_optimal(2, 1, 2, 1, 1.0).with_noise(0.1);
    Eigen::MatrixXcd bad = Eigen::MatrixXcd::Zero(2, 2);
    bad(0, 1) = 1.0;
    CHECK_THROWS_AS(LmmseSolver(setup, bad), std::invalid_argument);

    const Eigen::MatrixXcd wrong_dim = Eigen::MatrixXcd::Identity(3, 3);
    CHECK_THROWS_AS(LmmseSolver(setup, wrong_dim), std::invalid_argument);

    // Singular prior with no noise leaves the innovation singular.
    const auto noiseless = build_ls_optimal(2, 1, 2, 1, 1.0);
    const Eigen::MatrixXcd singular = Eigen::MatrixXcd::Ones(2, 2);
    CHECK_THROWS_AS(LmmseSolver(noiseless, singular), rank_deficient_error);
}

}  // TEST_SUITE

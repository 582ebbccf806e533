#include <doctest.h>

#include <cmath>
#include <complex>

#include <chanest/geometry.hpp>

using namespace chanest;
using doctest::Approx;

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::VectorXcd fd_azimuth(const AntennaArray& a, const Direction& d, double h) {
    const Eigen::VectorXcd plus = steering_vector(a, Direction(d.azimuth() + h, d.elevation()));
    const Eigen::VectorXcd minus = steering_vector(a, Direction(d.azimuth() - h, d.elevation()));
    return (plus - minus) / (2.0 * h);
}

Eigen::VectorXcd fd_elevation(const AntennaArray& a, const Direction& d, double h) {
    const Eigen::VectorXcd plus = steering_vector(a, Direction(d.azimuth(), d.elevation() + h));
    const Eigen::VectorXcd minus = steering_vector(a, Direction(d.azimuth(), d.elevation() - h));
    return (plus - minus) / (2.0 * h);
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("directions hit the coordinate axes") {
    CHECK(Direction(0, 0).unit_vector().isApprox(Eigen::Vector3d(1, 0, 0), 1e-14));
    CHECK(Direction(kPi / 2, 0).unit_vector().isApprox(Eigen::Vector3d(0, 1, 0), 1e-14));
    CHECK(Direction(0.3, kPi / 2).unit_vector().isApprox(Eigen::Vector3d(0, 0, 1), 1e-12));
}

TEST_CASE("direction round trips through its unit vector") {
    for (double az : {-2.8, -0.9, 0.0, 1.3, 3.0}) {
        for (double el : {-1.2, -0.4, 0.0, 0.7, 1.5}) {
            const Direction d(az, el);
            const Direction back = Direction::from_unit_vector(d.unit_vector());
            CHECK(back.azimuth() == Approx(d.azimuth()).epsilon(1e-12));
            CHECK(back.elevation() == Approx(d.elevation()).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(Direction(0.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(Direction::from_unit_vector(Eigen::Vector3d::Zero()), std::invalid_argument);
}

TEST_CASE("direction gap is the chordal distance") {
    const Direction a(0, 0), b(kPi / 2, 0);
    CHECK(direction_gap(a, b) == Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(direction_gap(a, a) == 0.0);
}

TEST_CASE("sector bounds are inclusive") {
    const AngularSector s{-1.0, 1.0, -0.5, 0.5};
    CHECK(s.contains(Direction(1.0, 0.5)));
    CHECK(s.contains(Direction(-1.0, -0.5)));
    CHECK(!s.contains(Direction(1.001, 0.0)));
    CHECK(!s.contains(Direction(0.0, 0.501)));
}

TEST_CASE("positions are re-referenced to the centroid") {
    const AntennaArray a({Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 0)}, 2.0);
    CHECK(a.positions()[0].isApprox(Eigen::Vector3d(-0.5, 0, 0), 1e-15));
    CHECK(a.positions()[1].isApprox(Eigen::Vector3d(0.5, 0, 0), 1e-15));

    const auto upa = make_upa(3, 5, 0.7, 2.0);
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (const auto& p : upa.positions()) sum += p;
    CHECK(sum.norm() < 1e-12);
}

TEST_CASE("ula and upa lattices") {
    const auto ula = make_ula(3, 1.0, 2.0);
    REQUIRE(ula.size() == 3);
    CHECK(ula.positions()[0].isApprox(Eigen::Vector3d(-1, 0, 0), 1e-15));
    CHECK(ula.positions()[1].norm() < 1e-15);
    CHECK(ula.positions()[2].isApprox(Eigen::Vector3d(1, 0, 0), 1e-15));

    const auto upa = make_upa(2, 2, 1.0, 2.0);
    REQUIRE(upa.size() == 4);
    CHECK(upa.positions()[0].isApprox(Eigen::Vector3d(-0.5, -0.5, 0), 1e-15));

    CHECK_THROWS_AS(make_ula(0, 1.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(make_ula(2, -1.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(make_upa(2, 2, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("two-element steering at endfire") {
    // lambda/2 spacing puts the elements at +-lambda/4, so the phases are +-pi/2.
    const auto arr = make_ula(2, 1.0, 2.0);
    const Eigen::VectorXcd s = steering_vector(arr, Direction(0, 0));
    CHECK(std::abs(s(0) - std::complex<double>(0, M_SQRT1_2)) < 1e-14);
    CHECK(std::abs(s(1) - std::complex<double>(0, -M_SQRT1_2)) < 1e-14);
}

TEST_CASE("steering vectors are unit norm") {
    const auto upa = make_upa(8, 8, 1.0, 2.0);
    CHECK(steering_vector(upa, Direction(0.37, -0.21)).norm() == Approx(1.0).epsilon(1e-12));
    CHECK(steering_vector(upa, Direction(-1.1, 0.5)).norm() == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("analytic derivatives match central differences") {
    const auto upa = make_upa(8, 8, 1.0, 2.0);
    const Direction d(0.37, -0.21);
    const auto [daz, del] = steering_derivatives(upa, d);
    const double h = 1e-6;
    CHECK((daz - fd_azimuth(upa, d, h)).norm() / daz.norm() < 1e-6);
    CHECK((del - fd_elevation(upa, d, h)).norm() / del.norm() < 1e-6);

    const auto ula = make_ula(5, 0.8, 2.1);
    const Direction d2(-0.9, 0.3);
    const auto [daz2, del2] = steering_derivatives(ula, d2);
    CHECK((daz2 - fd_azimuth(ula, d2, h)).norm() / daz2.norm() < 1e-6);
    CHECK((del2 - fd_elevation(ula, d2, h)).norm() / del2.norm() < 1e-6);
}

TEST_CASE("broadside azimuth derivative is purely imaginary") {
    const auto arr = make_ula(2, 1.0, 2.0);
    const auto [daz, del] = steering_derivatives(arr, Direction(kPi / 2, 0));
    CHECK(std::abs(daz(0).real()) < 1e-14);
    CHECK(std::abs(daz(1).real()) < 1e-14);
    CHECK(daz(0).imag() == Approx(-daz(1).imag()).epsilon(1e-12));
    CHECK(std::abs(daz(0).imag()) > 0.1);
}

TEST_CASE("dispersion constant") {
    // Two elements at +-lambda/4: kappa = sqrt(mean(1/16)) = 1/4.
    CHECK(kappa(make_ula(2, 1.0, 2.0)) == Approx(0.25).epsilon(1e-14));

    // 8x8 half-wavelength grid: mean ||a/lambda||^2 = 2.625 by direct summation.
    const auto upa = make_upa(8, 8, 1.0, 2.0);
    double acc = 0.0;
    for (const auto& p : upa.positions()) acc += p.squaredNorm() / (2.0 * 2.0);
    acc /= upa.size();
    CHECK(acc == Approx(2.625).epsilon(1e-13));
    CHECK(kappa(upa) == Approx(std::sqrt(2.625)).epsilon(1e-13));
}

}  // TEST_SUITE

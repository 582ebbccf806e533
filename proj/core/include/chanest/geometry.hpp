#pragma once

#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace chanest {

// Propagation direction in spherical convention:
//   u = (cos el * cos az, cos el * sin az, sin el)
// azimuth in [-pi, pi), elevation in [-pi/2, pi/2].
class Direction {
public:
    Direction(double azimuth_rad, double elevation_rad);

    double azimuth() const { return az_; }
    double elevation() const { return el_; }
    Eigen::Vector3d unit_vector() const;

    static Direction from_unit_vector(const Eigen::Vector3d& u);

private:
    double az_;
    double el_;
};

// Euclidean gap between the unit vectors of two directions.
double direction_gap(const Direction& a, const Direction& b);

// Rectangular angular sector (radians). Bounds are inclusive.
struct AngularSector {
    double az_min;
    double az_max;
    double el_min;
    double el_max;

    bool contains(const Direction& d) const;
};

// Antenna array: element positions in meters plus the carrier wavelength.
// Positions are re-referenced to their centroid on construction, so the
// phase center is always the array center and sum(positions) == 0.
class AntennaArray {
public:
    AntennaArray(std::vector<Eigen::Vector3d> positions_m, double wavelength_m);

    const std::vector<Eigen::Vector3d>& positions() const { return pos_; }
    double wavelength() const { return lambda_; }
    int size() const { return static_cast<int>(pos_.size()); }

private:
    std::vector<Eigen::Vector3d> pos_;
    double lambda_;
};

// Uniform linear array along the first axis, centered on the origin.
AntennaArray make_ula(int n, double spacing_m, double wavelength_m);

// Uniform planar array in the plane of the first two axes, centered.
// Element (r, c) sits at (r - (rows-1)/2, c - (cols-1)/2) * spacing.
AntennaArray make_upa(int rows, int cols, double spacing_m, double wavelength_m);

// Unit-norm steering vector, entry j = (1/sqrt(N)) exp(-i 2 pi / lambda * a_j . u).
Eigen::VectorXcd steering_vector(const AntennaArray& array, const Direction& dir);

// Analytic partial derivatives of the steering vector w.r.t. azimuth and
// elevation, returned in that order.
std::pair<Eigen::VectorXcd, Eigen::VectorXcd> steering_derivatives(const AntennaArray& array,
                                                                   const Direction& dir);

// Dispersion constant kappa(A) = sqrt((1/N) sum ||a_n / lambda||^2).
// Grows with aperture; a half-wavelength 8x8 planar array gives ~1.62.
double kappa(const AntennaArray& array);

}  // namespace chanest

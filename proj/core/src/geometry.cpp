#include "chanest/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace chanest {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_azimuth(double az) {
    if (!std::isfinite(az)) throw std::invalid_argument("azimuth must be finite");
    double w = std::remainder(az, 2.0 * kPi);  // (-pi, pi]
    if (w >= kPi) w = -kPi;
    return w;
}

}  // namespace

Direction::Direction(double azimuth_rad, double elevation_rad) : az_(wrap_azimuth(azimuth_rad)), el_(elevation_rad) {
    if (!std::isfinite(elevation_rad) || elevation_rad < -kPi / 2 - 1e-12 || elevation_rad > kPi / 2 + 1e-12)
        throw std::invalid_argument("elevation must lie in [-pi/2, pi/2]");
    if (el_ < -kPi / 2) el_ = -kPi / 2;
    if (el_ > kPi / 2) el_ = kPi / 2;
}

Eigen::Vector3d Direction::unit_vector() const {
    const double ce = std::cos(el_);
    return {ce * std::cos(az_), ce * std::sin(az_), std::sin(el_)};
}

Direction Direction::from_unit_vector(const Eigen::Vector3d& u) {
    const double n = u.norm();
    if (n < 1e-300) throw std::invalid_argument("zero vector has no direction");
    const Eigen::Vector3d v = u / n;
    const double el = std::asin(std::clamp(v.z(), -1.0, 1.0));
    double az = 0.0;
    if (std::abs(v.x()) > 0.0 || std::abs(v.y()) > 0.0) az = std::atan2(v.y(), v.x());
    return Direction(az, el);
}

double direction_gap(const Direction& a, const Direction& b) {
    return (a.unit_vector() - b.unit_vector()).norm();
}

bool AngularSector::contains(const Direction& d) const {
    return d.azimuth() >= az_min - 1e-12 && d.azimuth() <= az_max + 1e-12 && d.elevation() >= el_min - 1e-12 &&
           d.elevation() <= el_max + 1e-12;
}

AntennaArray::AntennaArray(std::vector<Eigen::Vector3d> positions_m, double wavelength_m)
    : pos_(std::move(positions_m)), lambda_(wavelength_m) {
    if (pos_.empty()) throw std::invalid_argument("array needs at least one element");
    if (!(lambda_ > 0.0) || !std::isfinite(lambda_)) throw std::invalid_argument("wavelength must be positive");
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (const auto& p : pos_) {
        if (!p.allFinite()) throw std::invalid_argument("element positions must be finite");
        centroid += p;
    }
    centroid /= static_cast<double>(pos_.size());
    for (auto& p : pos_) p -= centroid;
}

AntennaArray make_ula(int n, double spacing_m, double wavelength_m) {
    if (n < 1) throw std::invalid_argument("element count must be >= 1");
    if (!(spacing_m > 0.0)) throw std::invalid_argument("spacing must be positive");
    std::vector<Eigen::Vector3d> pos(static_cast<size_t>(n));
    const double mid = 0.5 * (n - 1);
    for (int i = 0; i < n; ++i) pos[static_cast<size_t>(i)] = {(i - mid) * spacing_m, 0.0, 0.0};
    return AntennaArray(std::move(pos), wavelength_m);
}

AntennaArray make_upa(int rows, int cols, double spacing_m, double wavelength_m) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("grid dimensions must be >= 1");
    if (!(spacing_m > 0.0)) throw std::invalid_argument("spacing must be positive");
    std::vector<Eigen::Vector3d> pos;
    pos.reserve(static_cast<size_t>(rows) * static_cast<size_t>(cols));
    const double rm = 0.5 * (rows - 1);
    const double cm = 0.5 * (cols - 1);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) pos.emplace_back((r - rm) * spacing_m, (c - cm) * spacing_m, 0.0);
    return AntennaArray(std::move(pos), wavelength_m);
}

Eigen::VectorXcd steering_vector(const AntennaArray& array, const Direction& dir) {
    const int n = array.size();
    const Eigen::Vector3d u = dir.unit_vector();
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    const double k = 2.0 * kPi / array.wavelength();
    Eigen::VectorXcd e(n);
    for (int j = 0; j < n; ++j) {
        const double phase = -k * array.positions()[static_cast<size_t>(j)].dot(u);
        e(j) = std::polar(scale, phase);
    }
    return e;
}

std::pair<Eigen::VectorXcd, Eigen::VectorXcd> steering_derivatives(const AntennaArray& array, const Direction& dir) {
    const int n = array.size();
    const double az = dir.azimuth();
    const double el = dir.elevation();
    const Eigen::Vector3d du_daz(-std::cos(el) * std::sin(az), std::cos(el) * std::cos(az), 0.0);
    const Eigen::Vector3d du_del(-std::sin(el) * std::cos(az), -std::sin(el) * std::sin(az), std::cos(el));
    const Eigen::VectorXcd e = steering_vector(array, dir);
    const double k = 2.0 * kPi / array.wavelength();
    Eigen::VectorXcd de_daz(n), de_del(n);
    const std::complex<double> mi(0.0, -1.0);
    for (int j = 0; j < n; ++j) {
        const auto& a = array.positions()[static_cast<size_t>(j)];
        de_daz(j) = e(j) * mi * k * a.dot(du_daz);
        de_del(j) = e(j) * mi * k * a.dot(du_del);
    }
    return {de_daz, de_del};
}

double kappa(const AntennaArray& array) {
    double acc = 0.0;
    for (const auto& a : array.positions()) acc += a.squaredNorm();
    const double lam = array.wavelength();
    return std::sqrt(acc / (static_cast<double>(array.size()) * lam * lam));
}

}  // namespace chanest

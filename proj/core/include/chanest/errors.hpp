#pragma once

#include <stdexcept>
#include <string>

namespace chanest {

// Design cannot identify the channel: too few pilots/combiners for the
// requested dimensions (rank(M) < N_r*N_t).
class underdetermined_design_error : public std::runtime_error {
public:
    explicit underdetermined_design_error(const std::string& what) : std::runtime_error(what) {}
};

// Closed-form optimal training target is indefinite at this noise level.
class snr_too_low_error : public std::runtime_error {
public:
    explicit snr_too_low_error(const std::string& what) : std::runtime_error(what) {}
};

// Observation budget cannot span the requested subspaces (3p > N_s, N_t or N_c).
class insufficient_dimensions_error : public std::runtime_error {
public:
    explicit insufficient_dimensions_error(const std::string& what) : std::runtime_error(what) {}
};

// A linear system that must be solvable is singular or too ill-conditioned.
class rank_deficient_error : public std::runtime_error {
public:
    explicit rank_deficient_error(const std::string& what) : std::runtime_error(what) {}
};

// Covariance matrix is singular where its inverse is required.
class singular_covariance_error : public std::runtime_error {
public:
    explicit singular_covariance_error(const std::string& what) : std::runtime_error(what) {}
};

// Collinearity bound evaluated outside its validity region.
class condition_violated_error : public std::runtime_error {
public:
    condition_violated_error(const std::string& what, int path_index, int region_index)
        : std::runtime_error(what), path(path_index), region(region_index) {}
    int path;    // offending path index, -1 if not applicable
    int region;  // offending region/center index, -1 if not applicable
};

// No finite noise power achieves the requested pSNR (zero channel).
class no_valid_noise_error : public std::runtime_error {
public:
    explicit no_valid_noise_error(const std::string& what) : std::runtime_error(what) {}
};

// Expression used outside its validity range (e.g. capacity bound at rMSE > 1).
class out_of_validity_error : public std::runtime_error {
public:
    explicit out_of_validity_error(const std::string& what) : std::runtime_error(what) {}
};

// Too many Monte-Carlo trials failed to produce an estimate.
class estimation_failed_error : public std::runtime_error {
public:
    explicit estimation_failed_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace chanest

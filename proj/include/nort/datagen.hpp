#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "nort/factored.hpp"
#include "nort/sparse_tensor.hpp"

namespace nort {

// CP ground truth: sum_{i=1}^{r} weights_i * (a_i^1 o ... o a_i^M).
struct CpFactors {
    Shape shape;
    Eigen::VectorXd weights;     // r
    std::vector<RowMat> factors; // per mode: I^d x r

    index_t rank() const { return weights.size(); }
    double element(const MultiIndex& idx) const;
    DenseTensor densify() const;
};

struct SyntheticSpec {
    Shape shape;
    index_t rank = 5;        // r_g <= min dims
    double noise_sigma = 0;  // additive N(0, sigma^2) on observed values
    std::optional<index_t> n_obs; // default: (I_min / r) * sum_i I^i * ln(I^pi)
    std::uint64_t seed = 0;
    bool noisy_heldout = false; // held-out values carry noise too
    int smooth_mode1_passes = 0; // moving-average smoothing of mode-1 factors
};

index_t default_obs_count(const Shape& shape, index_t rank);

struct SyntheticData {
    CpFactors ground_truth;
    SparseTensorCoo observed;
};

// Factors and weights sampled i.i.d. standard normal; observation support
// sampled uniformly without replacement. Deterministic given the seed.
SyntheticData synth_lowrank(const SyntheticSpec& spec);

// Same, but no observation falls on the listed mode-1 slices (1-based).
SyntheticData synth_lowrank_excluding_slices(const SyntheticSpec& spec,
                                             const std::vector<index_t>& hidden_mode1_slices);

// Held-out entries on cells outside `observed`, valued from the ground
// truth (plus noise when sigma > 0). max_entries caps the count by uniform
// subsampling; nullopt keeps every unobserved cell.
SparseTensorCoo heldout_from_truth(const CpFactors& truth, const SparseTensorCoo& observed, double sigma,
                                   std::optional<index_t> max_entries, std::uint64_t seed);

struct Split {
    SparseTensorCoo train;
    SparseTensorCoo validation;
    SparseTensorCoo test; // may be empty (two-way splits)
};

// Disjoint partition with exact counts: floor per fraction, remainder to the
// last part. fractions has 2 or 3 entries summing to <= 1.
Split split(const SparseTensorCoo& obs, const std::vector<double>& fractions, std::uint64_t seed);

// Each entry independently selected with probability `fraction` gets
// uniform(0,1) * magnitude_scale * max|value| added.
SparseTensorCoo add_outliers(const SparseTensorCoo& obs, double fraction, double magnitude_scale,
                             std::uint64_t seed);

// G = D - A with D_ii = sum_j A_ij; symmetric, rows sum to zero, PSD.
Eigen::MatrixXd laplacian_from_affinity(const Eigen::MatrixXd& a);

// Affinity s(i,j) = exp(-2 b_ij) from a distance matrix.
Eigen::MatrixXd affinity_from_distances(const Eigen::MatrixXd& b);

// Great-circle distance in kilometers from (lat, lon) pairs in degrees.
double haversine_km(double lat1_deg, double lon1_deg, double lat2_deg, double lon2_deg);

// Dense matrix text format: "matrix <rows> <cols>" header, one row per line.
Eigen::MatrixXd matrix_read(const std::string& path);
void matrix_write(const Eigen::MatrixXd& m, const std::string& path);

// CP factor text files ("cpfactors" header).
void cp_write(const CpFactors& f, const std::string& path);
CpFactors cp_read(const std::string& path);

} // namespace nort

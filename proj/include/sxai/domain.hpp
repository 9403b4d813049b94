#ifndef SXAI_DOMAIN_HPP
#define SXAI_DOMAIN_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sxai {

// Per-feature z-scoring; constant features pass through with sigma = 1.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> std_dev;          // 1.0 substituted where sigma == 0
    std::vector<bool> constant_feature;

    std::size_t dim() const { return mean.size(); }
    std::vector<double> transform(std::span<const double> x) const;
};

Standardizer fit_standardizer(std::span<const double> X, std::size_t d);

// PCA by cyclic Jacobi eigendecomposition of the covariance matrix.
struct PcaModel {
    std::vector<double> components;  // d_reduced x d, row-major, orthonormal rows
    std::vector<double> explained_variance_ratio;  // descending, length d_reduced
    std::size_t d = 0;
    std::size_t d_reduced = 0;

    std::vector<double> project(std::span<const double> x) const;
};

PcaModel fit_pca(std::span<const double> X, std::size_t n, std::size_t d,
                 double variance_target = 0.95, std::size_t max_dims = 10);

// Symmetric eigendecomposition helper (cyclic Jacobi; eigenvalues descending).
void jacobi_eigh(std::vector<double> A, std::size_t d, std::vector<double>& eigenvalues,
                 std::vector<double>& eigenvectors /* d x d, rows are vectors */);

// q in conv{x_1..x_n}? Phase-1 simplex feasibility with Bland's rule on
// unit-range-scaled coordinates; boundary points count as inside.
bool hull_membership(std::span<const double> train_proj, std::size_t n, std::size_t d,
                     std::span<const double> q, double eps = 1e-7);

// 95th percentile (linear interpolation) of each training point's mean
// distance to its k nearest other training points.
double knn_threshold(std::span<const double> train_proj, std::size_t n, std::size_t d,
                     std::size_t k);

double knn_mean_distance(std::span<const double> train_proj, std::size_t n, std::size_t d,
                         std::span<const double> q, std::size_t k);

enum class DomainLevel { In, Borderline, Out };
std::string to_string(DomainLevel level);

struct DomainVerdict {
    bool in_hull = false;
    double knn_distance = 0;
    bool knn_exceeded = false;
    double leverage = 0;
    bool leverage_exceeded = false;
    DomainLevel level = DomainLevel::Borderline;
};

struct DomainConfig {
    double variance_target = 0.95;
    std::size_t max_dims = 10;
    std::size_t knn_k = 5;
    double hull_eps = 1e-7;
};

struct DomainModel {
    Standardizer standardizer;
    PcaModel pca;
    std::vector<double> projections;  // n x d_reduced
    std::size_t n = 0;
    DomainConfig config;
    double knn_thresh = 0;
    double leverage_thresh = 0;       // 3 (d_reduced + 1) / n
    std::vector<double> gram_inverse; // (d_reduced+1)^2, ridge-regularized

    double leverage_of(std::span<const double> proj) const;  // intercept added here
    DomainVerdict check(std::span<const double> q_raw) const;
};

DomainModel fit_domain_model(std::span<const double> X, std::size_t n, std::size_t d,
                             const DomainConfig& config = {});

// Serialization: `path` holds the model tensors back to back in the dataio
// tensor format; `path`.json carries the scalars.
void save_domain_model(const std::string& path, const DomainModel& model);
DomainModel load_domain_model(const std::string& path);

}  // namespace sxai

#endif

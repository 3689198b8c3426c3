#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cplda/rng.hpp"
#include "cplda/tensor.hpp"

namespace cplda {

/// Settings of the randomized composite PCA warm start.
struct InitConfig {
    std::size_t rank = 1;
    std::vector<std::size_t> split; ///< row modes of the matricization; empty picks automatically
    double c0 = 0.1;                ///< eigengap constant, 0 < c0 < 1
    std::size_t projections = 0;    ///< L; 0 means max(100, 2·d_proj)
    double nu = 0.5;                ///< overlap pruning threshold, 0 < nu < 1
    std::uint64_t seed = 0;

    void validate() const;
    /// L after resolving the automatic default for a projection mode of size d.
    std::size_t resolved_projections(std::size_t projection_dim) const;
};

enum class InitBranch { cpca, randomized };

/// Consecutive singular-value indices and how their bases were obtained.
struct InitGroup {
    std::vector<std::size_t> indices;
    InitBranch branch = InitBranch::cpca;
};

struct WarmStart {
    std::vector<Eigen::MatrixXd> factors; ///< d_m x R, unit columns
    Eigen::VectorXd singular_values;      ///< leading R singular values of mat_S(B̂)
    std::vector<std::size_t> split;       ///< S actually used
    std::vector<InitGroup> groups;
};

/// Mode subset S maximizing min(d_S, d / d_S); ties go to the lexicographically
/// smallest sorted subset. A nonempty `requested` set is validated and returned.
std::vector<std::size_t> choose_split(std::span<const std::size_t> dims,
                                      std::span<const std::size_t> requested = {});

struct GapGroup {
    std::vector<std::size_t> indices; ///< 0-based, contiguous
    bool separated = false;           ///< passes the eigengap test (always a singleton)
};

/// Index r is separated when min(|λ_r - λ_{r-1}|, |λ_r - λ_{r+1}|) > c0 · λ_R with
/// λ_0 = ∞ and λ_{R+1} = 0. Consecutive non-separated indices form maximal groups.
std::vector<GapGroup> eigengap_groups(const Eigen::VectorXd& lambda, double c0);

/// Per-mode leading vectors of a vectorized rank-one tensor on the modes
/// `side_dims` (colexicographic). A single-mode side returns the normalized vector.
std::vector<Eigen::VectorXd> cpca_extract(const Eigen::VectorXd& v, std::span<const std::size_t> side_dims);

/// Randomized projection of `xi` along `projection_mode` followed by greedy
/// selection with overlap pruning. Returns s tuples, each holding one unit vector
/// per mode. Throws PoolExhaustedError if pruning leaves fewer than s tuples.
std::vector<std::vector<Eigen::VectorXd>> randomized_projection(const DenseTensor& xi, std::size_t s,
                                                                const InitConfig& cfg, Rng& rng);

/// Mode used for the random projections: mode 0 unless it is degenerate, in
/// which case the largest remaining mode.
std::size_t projection_mode(std::span<const std::size_t> dims);

/// Warm start for the refinement: SVD of mat_S(B̂), CPCA on separated indices,
/// randomized projection on clustered groups.
WarmStart rcpca(const DenseTensor& b_hat, const InitConfig& cfg, Rng& rng);

} // namespace cplda

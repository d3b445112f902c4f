#pragma once

#include <Eigen/Dense>

#include "eitsurf/boundary_grid.hpp"
#include "eitsurf/dn_operator.hpp"

namespace eit {

enum class Verdict { NoHoles, HolesGrounded, HolesIsolated };

const char* to_string(Verdict v);

struct Classification {
    Verdict verdict = Verdict::NoHoles;
    int kernel_dim = 0;        // near-kernel count of I + (Lambda J)^2
    double lambda1_norm = 0;   // ||Lambda 1|| / ||1|| in boundary quadrature
    double sigma_max = 0;      // largest singular value of the compressed operator
    int n_modes = 0;
    double tol_kernel = 0;
    double tol_const = 0;
};

/// Compression of I + (Lambda J)^2 onto the zero-mean Fourier subspace
/// spanned by modes 1..n_modes (dimension 2 n_modes), orthonormalized in
/// the quadrature inner product. J acts through the mean projection.
Eigen::MatrixXd kernel_operator_compressed(const DNOperator& op,
                                           const BoundaryCalculus& calc, int n_modes);

/// Number of singular values of the compressed operator below
/// tol * max(1, sigma_max). The max(1,.) floor keeps the threshold
/// meaningful when the operator itself is numerically zero (the hole-free
/// case, where every direction is near-kernel).
int kernel_dimension(const DNOperator& op, const BoundaryCalculus& calc, int n_modes,
                     double tol);

/// Step 1 trichotomy from (matrix, quadrature) data alone.
///
/// NoHoles requires the whole compressed operator to vanish at tolerance
/// (kernel count = 2 n_modes) together with Lambda 1 = 0; an almost-full
/// kernel or contradictory measurements raise IndeterminateError.
Classification classify(const DNOperator& op, const BoundaryCalculus& calc, int n_modes,
                        double tol_kernel, double tol_const);

/// Relative two-grid estimate of the discretization error of the compressed
/// kernel operator; 10x this is the recommended tol_kernel.
double kernel_error_estimate(const DNOperator& fine, const BoundaryCalculus& fine_calc,
                             const DNOperator& coarse, const BoundaryCalculus& coarse_calc,
                             int n_modes);

/// Total boundary length from the eigenvalue growth rate: the double
/// eigenvalue branches behave as (2 pi / length) j with a geometrically
/// decaying correction, removed by Aitken extrapolation over the top pairs.
double recover_boundary_length(const Eigen::VectorXd& ascending_eigenvalues, int k);

} // namespace eit

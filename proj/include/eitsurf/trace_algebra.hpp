#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "eitsurf/boundary_grid.hpp"
#include "eitsurf/dn_operator.hpp"
#include "eitsurf/fem.hpp"

namespace eit {

/// Element of the trace algebra on Gamma0, stored as the unique pair of
/// hermitian parts: eta = w1 + i w2 with w1, w2 traces of holomorphic
/// functions real on the inner boundary. The decomposition is structural;
/// it is never re-derived from the pointwise values.
struct TraceAlgebraElement {
    std::shared_ptr<const BoundaryGrid> grid;
    Eigen::VectorXcd w1;
    Eigen::VectorXcd w2;
    DNFlavor flavor = DNFlavor::Grounded;
    double residual1 = 0.0;  // criterion residual of w1 at creation/verification
    double residual2 = 0.0;

    int size() const { return static_cast<int>(w1.size()); }
    Eigen::VectorXcd eta() const { return w1 + std::complex<double>(0, 1) * w2; }
    Eigen::VectorXcd eta_star() const { return w1 - std::complex<double>(0, 1) * w2; }
};

struct GroundedResidual {
    double mean_flux = 0.0;      // integral of Lambda f over Gamma0
    double residual_norm = 0.0;  // +infinity when the mean prefilter rejects f
};

/// Lemma-1 residual: 2 Lambda(f J Lambda f) - d/ds[(J Lambda f)^2 - f^2]
/// in the quadrature L2 norm after projection onto the first eval_modes
/// Fourier modes (the identity holds for smooth functions; the projection
/// keeps spectral differentiation from amplifying nodal FEM noise).
/// A nonzero-mean flux means J Lambda f has no single-valued
/// antiderivative; such f are rejected by the prefilter with an infinite
/// residual marker.
GroundedResidual residual_grounded(const DNOperator& op, const BoundaryCalculus& calc,
                                   const Eigen::VectorXd& f, double tol_mean = 1e-3,
                                   int eval_modes = 16);

struct IsolatedResidual {
    double c_h = 0.0;
    double residual_norm = 0.0;
    bool no_solution = false;  // degenerate direction with a nonzero left side
};

/// Lemma-2 residual: the equation is affine in c_h, so the reported c_h is
/// the closed-form least-squares minimizer along (d/ds + Lambda J Lambda) h,
/// fitted and measured on the first eval_modes Fourier modes.
IsolatedResidual residual_isolated(const DNOperator& op, const BoundaryCalculus& calc,
                                   const Eigen::VectorXd& h, int eval_modes = 16);

/// Relative membership residual of a candidate hermitian trace (criterion
/// on the extracted generator plus the reconstruction defect), scale-free.
double verify_hermitian(const DNOperator& op, const BoundaryCalculus& calc,
                        const Eigen::VectorXcd& candidate);

/// Hermitian element from a generator that passed its criterion:
/// grounded: eta = J Lambda f - i f + c; isolated: eta = h + i(J Lambda h + c_h) H_h
/// with H_h = 0 for constants. Throws CriterionError above criterion_tol.
TraceAlgebraElement make_element(const DNOperator& op, const BoundaryCalculus& calc,
                                 const Eigen::VectorXd& generator, double constant,
                                 double criterion_tol);

/// Full element w1 + i w2 from two hermitian generators (complex constants
/// arise as c1 + i c2 through the two constant parts).
TraceAlgebraElement make_full_element(const DNOperator& op, const BoundaryCalculus& calc,
                                      const Eigen::VectorXd& gen1, double c1,
                                      const Eigen::VectorXd& gen2, double c2,
                                      double criterion_tol);

/// Algebra product (w1 w3 - w2 w4) + i (w1 w4 + w2 w3); both new hermitian
/// parts are re-verified, failure above 10x tolerance is a closure error.
TraceAlgebraElement product(const TraceAlgebraElement& a, const TraceAlgebraElement& b,
                            const DNOperator& op, const BoundaryCalculus& calc,
                            double criterion_tol);

/// (w1 + i w2)* = w1 - i w2.
TraceAlgebraElement involution(const TraceAlgebraElement& a);

/// max{ sup |eta|, sup |eta*| } over Gamma0.
double triple_norm(const TraceAlgebraElement& a);

struct AdmissibleBasis {
    std::vector<Eigen::VectorXd> traces;
    bool complete = true;  // blind search may return fewer than requested
};

/// Validation mode: the admissible traces are the kernel of the linear
/// hole-period functionals, computed with the FEM period oracle on the
/// first candidate Fourier modes.
AdmissibleBasis admissible_basis_validation(const HarmonicSolver& solver,
                                            const DNOperator& op,
                                            const BoundaryCalculus& calc, int count,
                                            double criterion_tol);

struct BlindSearchConfig {
    int seed_modes = 0;        // 0: use `count` mode pairs
    int max_iterations = 50;
    double step_tol = 1e-10;
    double damping = 0.5;
};

/// Blind mode: damped Gauss-Newton on the criterion residual from Fourier
/// mode seeds, keeping converged, mutually independent unit-norm traces.
AdmissibleBasis admissible_basis_blind(const DNOperator& op, const BoundaryCalculus& calc,
                                       int count, double criterion_tol,
                                       const BlindSearchConfig& cfg = {});

} // namespace eit

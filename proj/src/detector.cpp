#include "eitsurf/detector.hpp"
#include "eitsurf/errors.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace eit {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::NoHoles: return "NoHoles";
        case Verdict::HolesGrounded: return "HolesGrounded";
        case Verdict::HolesIsolated: return "HolesIsolated";
    }
    return "?";
}

Eigen::MatrixXd kernel_operator_compressed(const DNOperator& op,
                                           const BoundaryCalculus& calc, int n_modes) {
    const BoundaryGrid& g = *op.grid;
    const int n = g.size();
    if (n_modes < 4) throw Error("kernel operator needs n_modes >= 4");
    if (4 * n_modes + 2 > n)
        throw Error("n_modes exceeds the resolvable grid frequencies");

    const double w = kTwoPi / g.length;
    const int dim = 2 * n_modes;
    Eigen::MatrixXd V(n, dim);
    for (int k = 1; k <= n_modes; ++k)
        for (int i = 0; i < n; ++i) {
            V(i, 2 * k - 2) = std::cos(w * k * g.s[i]);
            V(i, 2 * k - 1) = std::sin(w * k * g.s[i]);
        }
    // Quadrature-orthonormal basis of the mode subspace (Cholesky of the Gram):
    // B = V R^{-1} with gram = R^T R.
    Eigen::MatrixXd gram = V.transpose() * g.weights.asDiagonal() * V;
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success)
        throw Error("Fourier mode basis is numerically dependent on this grid");
    Eigen::MatrixXd R = llt.matrixU();
    Eigen::MatrixXd B = R.transpose()
                            .triangularView<Eigen::Lower>()
                            .solve(V.transpose())
                            .transpose();

    Eigen::MatrixXd TB(n, dim);
    for (int j = 0; j < dim; ++j) {
        Eigen::VectorXd q = B.col(j);
        Eigen::VectorXd t = op.apply(calc.integrate_projected(q));
        t = op.apply(calc.integrate_projected(t));
        TB.col(j) = q + t;
    }
    return B.transpose() * g.weights.asDiagonal() * TB;
}

namespace {

Eigen::VectorXd kernel_singular_values(const DNOperator& op, const BoundaryCalculus& calc,
                                       int n_modes) {
    Eigen::MatrixXd M = kernel_operator_compressed(op, calc, n_modes);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    return svd.singularValues();
}

} // namespace

int kernel_dimension(const DNOperator& op, const BoundaryCalculus& calc, int n_modes,
                     double tol) {
    Eigen::VectorXd sv = kernel_singular_values(op, calc, n_modes);
    double thr = tol * std::max(1.0, sv.size() ? sv[0] : 0.0);
    int count = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv[i] < thr) ++count;
    return count;
}

Classification classify(const DNOperator& op, const BoundaryCalculus& calc, int n_modes,
                        double tol_kernel, double tol_const) {
    Eigen::VectorXd sv = kernel_singular_values(op, calc, n_modes);
    const int dim = 2 * n_modes;
    double smax = sv.size() ? sv[0] : 0.0;

    Eigen::VectorXd one = Eigen::VectorXd::Ones(op.size());
    double l1 = op.grid->norm(op.apply(one)) / op.grid->norm(one);

    Classification c;
    c.n_modes = n_modes;
    c.tol_kernel = tol_kernel;
    c.tol_const = tol_const;
    c.sigma_max = smax;
    c.lambda1_norm = l1;

    if (!(tol_kernel > 0))
        throw IndeterminateError(
            "non-positive kernel tolerance cannot separate zero from noise", 0, l1);

    double thr = tol_kernel * std::max(1.0, smax);
    int count = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv[i] < thr) ++count;
    c.kernel_dim = count;

    if (count == dim) {
        if (l1 > tol_const)
            throw IndeterminateError(
                "full near-kernel (hole-free signature) but Lambda 1 != 0", count, l1);
        c.verdict = Verdict::NoHoles;
    } else if (count >= dim - 2) {
        throw IndeterminateError("near-kernel covers almost the whole mode subspace",
                                 count, l1);
    } else {
        c.verdict = (l1 > tol_const) ? Verdict::HolesGrounded : Verdict::HolesIsolated;
    }
    return c;
}

double kernel_error_estimate(const DNOperator& fine, const BoundaryCalculus& fine_calc,
                             const DNOperator& coarse, const BoundaryCalculus& coarse_calc,
                             int n_modes) {
    Eigen::MatrixXd Mf = kernel_operator_compressed(fine, fine_calc, n_modes);
    Eigen::MatrixXd Mc = kernel_operator_compressed(coarse, coarse_calc, n_modes);
    Eigen::JacobiSVD<Eigen::MatrixXd> sdiff(Mf - Mc);
    Eigen::JacobiSVD<Eigen::MatrixXd> sfine(Mf);
    double smax = sfine.singularValues().size() ? sfine.singularValues()[0] : 0.0;
    // Richardson: for a second-order method the fine-grid error is about a
    // third of the two-grid difference (which the coarse grid dominates).
    return sdiff.singularValues()[0] / (3.0 * std::max(1.0, smax));
}

double recover_boundary_length(const Eigen::VectorXd& eigs, int k) {
    if (k < 8 || k > eigs.size()) throw Error("recover_boundary_length: need k >= 8 eigenvalues");
    for (int i = 1; i < k; ++i)
        if (eigs[i] < eigs[i - 1] - 1e-12 * std::abs(eigs[i - 1]))
            throw Error("eigenvalue sequence is not ascending");

    // Group the double eigenvalues into pairs; singletons (the n=0 branch,
    // or a pair cut off by k) are skipped.
    const double pair_tol = 0.05;
    std::vector<double> pairs;
    int i = 0;
    while (i < k) {
        if (i + 1 < k &&
            std::abs(eigs[i + 1] - eigs[i]) <= pair_tol * std::max(std::abs(eigs[i]), 0.1)) {
            pairs.push_back(0.5 * (eigs[i] + eigs[i + 1]));
            i += 2;
        } else {
            i += 1;
        }
    }
    const int P = static_cast<int>(pairs.size());
    if (P < 2) throw Error("could not identify enough eigenvalue pairs");
    std::vector<double> a(P);
    for (int j = 0; j < P; ++j) a[j] = pairs[j] / (j + 1);
    // The slope estimates approach the limit from one side (coth from
    // above, tanh from below); a sign change in the tail means garbage.
    for (int j = 2; j < P; ++j)
        if ((a[j] - a[j - 1]) * (a[j - 1] - a[j - 2]) < -pair_tol * pair_tol * a[j] * a[j])
            throw Error("eigenvalue pair trend is not monotone");

    // slope = lim a_j; the correction decays geometrically, so one Aitken
    // step on the last three slope estimates removes it.
    double slope = a[P - 1];
    if (P >= 3) {
        double d1 = a[P - 2] - a[P - 3];
        double d2 = a[P - 1] - a[P - 2];
        double denom = d2 - d1;
        if (std::abs(denom) > 1e-14 * std::abs(a[P - 1])) {
            double extrap = a[P - 1] - d2 * d2 / denom;
            if (extrap > 0.1 * a[P - 1]) slope = extrap;
        }
    }
    if (!(slope > 0)) throw Error("non-positive eigenvalue slope");
    return kTwoPi / slope;
}

} // namespace eit

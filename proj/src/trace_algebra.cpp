#include "eitsurf/trace_algebra.hpp"
#include "eitsurf/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace eit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigen::VectorXcd apply_c(const DNOperator& op, const Eigen::VectorXcd& x) {
    Eigen::VectorXd re = op.apply(x.real());
    Eigen::VectorXd im = op.apply(x.imag());
    return re + std::complex<double>(0, 1) * im;
}

Eigen::VectorXcd integrate_c(const BoundaryCalculus& calc, const Eigen::VectorXcd& x) {
    return calc.integrate_projected(x.real()) +
           std::complex<double>(0, 1) * calc.integrate_projected(x.imag());
}

void check_same_grid(const TraceAlgebraElement& a, const TraceAlgebraElement& b) {
    if (a.grid != b.grid && (a.size() != b.size() || a.grid->length != b.grid->length))
        throw Error("trace algebra: elements live on different boundary grids");
}

double wnorm_c(const BoundaryGrid& g, const Eigen::VectorXcd& v) {
    return std::sqrt(v.cwiseAbs2().dot(g.weights));
}

} // namespace

GroundedResidual residual_grounded(const DNOperator& op, const BoundaryCalculus& calc,
                                   const Eigen::VectorXd& f, double tol_mean,
                                   int eval_modes) {
    if (op.flavor != DNFlavor::Grounded)
        throw Error("residual_grounded expects a grounded DN operator");
    const BoundaryGrid& g = *op.grid;
    Eigen::VectorXd Lf = op.apply(f);
    GroundedResidual out;
    out.mean_flux = g.integral(Lf);
    double bound = tol_mean * g.norm(Lf) * std::sqrt(g.length);
    if (std::abs(out.mean_flux) > bound) {
        out.residual_norm = kInf;
        return out;
    }
    Eigen::VectorXd JLf = calc.integrate_projected(Lf);
    Eigen::VectorXd R = 2.0 * op.apply(f.cwiseProduct(JLf)) -
                        calc.derivative(JLf.cwiseAbs2() - f.cwiseAbs2());
    out.residual_norm = g.norm(calc.lowpass(R, eval_modes));
    return out;
}

IsolatedResidual residual_isolated(const DNOperator& op, const BoundaryCalculus& calc,
                                   const Eigen::VectorXd& h, int eval_modes) {
    if (op.flavor != DNFlavor::Isolated)
        throw Error("residual_isolated expects an isolated DN operator");
    const BoundaryGrid& g = *op.grid;
    Eigen::VectorXd Lh = op.apply(h);
    Eigen::VectorXd JLh = calc.integrate_projected(Lh);
    Eigen::VectorXd dh = calc.derivative(h);

    Eigen::VectorXd lhs = 0.5 * op.apply(h.cwiseAbs2() - JLh.cwiseAbs2()) -
                          h.cwiseProduct(Lh) - JLh.cwiseProduct(dh);
    Eigen::VectorXd dir = dh + op.apply(calc.integrate_projected(Lh));
    lhs = calc.lowpass(lhs, eval_modes);
    dir = calc.lowpass(dir, eval_modes);

    IsolatedResidual out;
    double dn = g.norm(dir);
    double hosc = g.norm(h - Eigen::VectorXd::Constant(h.size(), g.mean(h)));
    if (dn < 1e-10 * std::max(1.0, hosc)) {
        out.c_h = 0.0;
        out.residual_norm = g.norm(lhs);
        out.no_solution = out.residual_norm > 1e-8 * std::max(1.0, hosc * hosc);
        return out;
    }
    out.c_h = lhs.dot(g.weights.cwiseProduct(dir)) / (dn * dn);
    out.residual_norm = g.norm(lhs - out.c_h * dir);
    return out;
}

double verify_hermitian(const DNOperator& op, const BoundaryCalculus& calc,
                        const Eigen::VectorXcd& candidate) {
    const BoundaryGrid& g = *op.grid;
    Eigen::VectorXd re = candidate.real();
    Eigen::VectorXd im = candidate.imag();
    double scale = std::max(1.0, wnorm_c(g, candidate));

    if (op.flavor == DNFlavor::Grounded) {
        // eta = J Lambda f + c - i f.
        Eigen::VectorXd f = -im;
        double fn = g.norm(f);
        if (fn < 1e-12 * scale) {
            // Constant element: the real part must be constant.
            double c = g.mean(re);
            return g.norm(re - Eigen::VectorXd::Constant(re.size(), c)) / scale;
        }
        Eigen::VectorXd fu = f / fn;
        GroundedResidual r = residual_grounded(op, calc, fu);
        if (std::isinf(r.residual_norm)) return kInf;
        Eigen::VectorXd JLf = calc.integrate_projected(op.apply(fu));
        Eigen::VectorXd reu = re / fn;
        double c = g.mean(reu - JLf);
        double rec = g.norm(reu - JLf - Eigen::VectorXd::Constant(re.size(), c));
        return std::max(r.residual_norm, rec);
    }

    // Isolated: eta = h + i (J Lambda h + c_h) H_h.
    Eigen::VectorXd h = re;
    double hosc = g.norm(h - Eigen::VectorXd::Constant(h.size(), g.mean(h)));
    if (hosc < 1e-12 * scale) {
        return g.norm(im) / scale;  // H_const = 0: no imaginary part allowed
    }
    Eigen::VectorXd hu = h / hosc;
    IsolatedResidual r = residual_isolated(op, calc, hu);
    if (r.no_solution) return kInf;
    Eigen::VectorXd JLh = calc.integrate_projected(op.apply(hu));
    Eigen::VectorXd imu = im / hosc;
    double ch = g.integral(imu - JLh) / g.length;
    double rec = g.norm(imu - JLh - Eigen::VectorXd::Constant(im.size(), ch));
    return std::max(r.residual_norm, rec);
}

TraceAlgebraElement make_element(const DNOperator& op, const BoundaryCalculus& calc,
                                 const Eigen::VectorXd& generator, double constant,
                                 double criterion_tol) {
    const BoundaryGrid& g = *op.grid;
    const std::complex<double> i1(0, 1);
    TraceAlgebraElement el;
    el.grid = op.grid;
    el.flavor = op.flavor;
    el.w2 = Eigen::VectorXcd::Zero(g.size());
    el.residual2 = 0.0;

    double gn = g.norm(generator);
    if (op.flavor == DNFlavor::Grounded) {
        if (gn > 1e-14) {
            GroundedResidual r = residual_grounded(op, calc, generator / gn);
            if (std::isinf(r.residual_norm) || r.residual_norm > criterion_tol)
                throw CriterionError("generator fails the grounded criterion (residual " +
                                     std::to_string(r.residual_norm) + ")");
            el.residual1 = r.residual_norm;
        }
        Eigen::VectorXd JLf = calc.integrate_projected(op.apply(generator));
        el.w1 = (JLf.array() + constant).matrix() - i1 * generator;
    } else {
        Eigen::VectorXd h = generator.array() + constant;
        double hosc = g.norm(h - Eigen::VectorXd::Constant(h.size(), g.mean(h)));
        if (hosc < 1e-12 * std::max(1.0, g.norm(h))) {
            el.w1 = h.cast<std::complex<double>>();  // H_const = 0
            el.residual1 = 0.0;
        } else {
            IsolatedResidual r = residual_isolated(op, calc, h / hosc);
            if (r.no_solution || r.residual_norm > criterion_tol)
                throw CriterionError("generator fails the isolated criterion (residual " +
                                     std::to_string(r.residual_norm) + ")");
            el.residual1 = r.residual_norm;
            IsolatedResidual rfull = residual_isolated(op, calc, h);
            Eigen::VectorXd JLh = calc.integrate_projected(op.apply(h));
            el.w1 = h + i1 * (JLh.array() + rfull.c_h).matrix();
        }
    }
    return el;
}

TraceAlgebraElement make_full_element(const DNOperator& op, const BoundaryCalculus& calc,
                                      const Eigen::VectorXd& gen1, double c1,
                                      const Eigen::VectorXd& gen2, double c2,
                                      double criterion_tol) {
    TraceAlgebraElement a = make_element(op, calc, gen1, c1, criterion_tol);
    TraceAlgebraElement b = make_element(op, calc, gen2, c2, criterion_tol);
    a.w2 = b.w1;
    a.residual2 = b.residual1;
    return a;
}

TraceAlgebraElement product(const TraceAlgebraElement& a, const TraceAlgebraElement& b,
                            const DNOperator& op, const BoundaryCalculus& calc,
                            double criterion_tol) {
    check_same_grid(a, b);
    TraceAlgebraElement out;
    out.grid = a.grid;
    out.flavor = a.flavor;
    out.w1 = a.w1.cwiseProduct(b.w1) - a.w2.cwiseProduct(b.w2);
    out.w2 = a.w1.cwiseProduct(b.w2) + a.w2.cwiseProduct(b.w1);
    out.residual1 = verify_hermitian(op, calc, out.w1);
    out.residual2 = verify_hermitian(op, calc, out.w2);
    if (!(out.residual1 <= 10.0 * criterion_tol) || !(out.residual2 <= 10.0 * criterion_tol))
        throw CriterionError("algebra-closure violation: product parts fail re-verification (" +
                             std::to_string(out.residual1) + ", " +
                             std::to_string(out.residual2) + ")");
    return out;
}

TraceAlgebraElement involution(const TraceAlgebraElement& a) {
    TraceAlgebraElement out = a;
    out.w2 = -a.w2;
    return out;
}

double triple_norm(const TraceAlgebraElement& a) {
    double n1 = a.eta().cwiseAbs().maxCoeff();
    double n2 = a.eta_star().cwiseAbs().maxCoeff();
    return std::max(n1, n2);
}

// ---------------------------------------------------------------------------
// Admissible-trace search.

namespace {

// Candidate Fourier modes sampled at the boundary nodes (unit quadrature norm).
std::vector<Eigen::VectorXd> mode_candidates(const BoundaryGrid& g, int pairs) {
    std::vector<Eigen::VectorXd> out;
    const double w = kTwoPi / g.length;
    for (int k = 1; k <= pairs; ++k) {
        Eigen::VectorXd c(g.size()), s(g.size());
        for (int i = 0; i < g.size(); ++i) {
            c[i] = std::cos(w * k * g.s[i]);
            s[i] = std::sin(w * k * g.s[i]);
        }
        out.push_back(c / g.norm(c));
        out.push_back(s / g.norm(s));
    }
    return out;
}

bool independent_of(const std::vector<Eigen::VectorXd>& accepted, const BoundaryGrid& g,
                    Eigen::VectorXd f) {
    for (const auto& a : accepted) {
        double proj = f.dot(g.weights.cwiseProduct(a)) / (g.norm(a) * g.norm(a));
        f -= proj * a;
    }
    return g.norm(f) > 0.3;
}

} // namespace

AdmissibleBasis admissible_basis_validation(const HarmonicSolver& solver,
                                            const DNOperator& op,
                                            const BoundaryCalculus& calc, int count,
                                            double criterion_tol) {
    const BoundaryGrid& g = *op.grid;
    const int m = solver.mesh().num_holes();
    const int pairs = std::max(count, count / 2 + m + 1);
    auto cand = mode_candidates(g, pairs);
    AdmissibleBasis out;

    if (op.flavor == DNFlavor::Isolated) {
        // Single-valued conjugates are automatic for isolated holes; the
        // criterion itself filters the candidates.
        for (const auto& f : cand) {
            if (static_cast<int>(out.traces.size()) >= count) break;
            IsolatedResidual r = residual_isolated(op, calc, f);
            if (!r.no_solution && r.residual_norm <= criterion_tol &&
                independent_of(out.traces, g, f))
                out.traces.push_back(f);
        }
        out.complete = static_cast<int>(out.traces.size()) == count;
        return out;
    }

    // Grounded: kernel of the linear hole-period functionals, via the FEM
    // period oracle on the candidate modes.
    const int nc = static_cast<int>(cand.size());
    Eigen::MatrixXd P(m, nc);
    for (int c = 0; c < nc; ++c) {
        ScalarField u = solver.solve_grounded(cand[c]);
        P.col(c) = solver.hole_periods(u);
    }
    // Flux scale: the grounded operator always carries flux on constants.
    Eigen::VectorXd one = Eigen::VectorXd::Ones(g.size());
    double flux_scale = std::abs(g.integral(op.apply(one)));
    double thresh = 0.02 * std::max(flux_scale, 1e-12);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(P, Eigen::ComputeFullV);
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()[i] > thresh) ++rank;
    Eigen::MatrixXd Vr = svd.matrixV().leftCols(rank);  // row space of P

    for (int c = 0; c < nc; ++c) {
        if (static_cast<int>(out.traces.size()) >= count) break;
        // Project the mode coefficients onto the period kernel.
        Eigen::VectorXd e = Eigen::VectorXd::Unit(nc, c);
        Eigen::VectorXd k = e - Vr * (Vr.transpose() * e);
        if (k.norm() < 0.5) continue;  // mode mostly carries period
        Eigen::VectorXd f = Eigen::VectorXd::Zero(g.size());
        for (int j = 0; j < nc; ++j) f += k[j] * cand[j];
        f /= g.norm(f);
        GroundedResidual r = residual_grounded(op, calc, f);
        if (std::isinf(r.residual_norm) || r.residual_norm > criterion_tol) continue;
        if (independent_of(out.traces, g, f)) out.traces.push_back(f);
    }
    out.complete = static_cast<int>(out.traces.size()) == count;
    return out;
}

// ---------------------------------------------------------------------------
// Blind Gauss-Newton search on the criterion residual.

namespace {

struct BlindProblem {
    const DNOperator& op;
    const BoundaryCalculus& calc;
    const std::vector<Eigen::VectorXd>& modes;

    Eigen::VectorXd field(const Eigen::VectorXd& a) const {
        Eigen::VectorXd f = Eigen::VectorXd::Zero(op.grid->size());
        for (size_t j = 0; j < modes.size(); ++j) f += a[j] * modes[j];
        return f;
    }
};

// Residual and exact Jacobian of the grounded criterion (plus the linear
// mean-flux penalty) with respect to the mode coefficients.
void grounded_residual_jacobian(const BlindProblem& p, const Eigen::VectorXd& a,
                                Eigen::VectorXd& R, Eigen::MatrixXd* Jac) {
    const BoundaryGrid& g = *p.op.grid;
    const int n = g.size();
    const int dim = static_cast<int>(p.modes.size());
    Eigen::VectorXd f = p.field(a);
    Eigen::VectorXd Lf = p.op.apply(f);
    Eigen::VectorXd JLf = p.calc.integrate_projected(Lf);

    R.resize(n + 1);
    R.head(n) = p.calc.lowpass(2.0 * p.op.apply(f.cwiseProduct(JLf)) -
                                   p.calc.derivative(JLf.cwiseAbs2() - f.cwiseAbs2()),
                               16);
    R[n] = g.integral(Lf);

    if (!Jac) return;
    Jac->resize(n + 1, dim);
    for (int k = 0; k < dim; ++k) {
        const Eigen::VectorXd& d = p.modes[k];
        Eigen::VectorXd JLd = p.calc.integrate_projected(p.op.apply(d));
        Eigen::VectorXd col =
            2.0 * p.op.apply(d.cwiseProduct(JLf) + f.cwiseProduct(JLd)) -
            p.calc.derivative(2.0 * (JLf.cwiseProduct(JLd) - f.cwiseProduct(d)));
        Jac->col(k).head(n) = p.calc.lowpass(col, 16);
        (*Jac)(n, k) = g.integral(p.op.apply(d));
    }
}

// Isolated flavor: variables (a, c); residual LHS(f) - c D(f).
void isolated_residual_jacobian(const BlindProblem& p, const Eigen::VectorXd& ac,
                                Eigen::VectorXd& R, Eigen::MatrixXd* Jac) {
    const int n = p.op.grid->size();
    const int dim = static_cast<int>(p.modes.size());
    Eigen::VectorXd a = ac.head(dim);
    double c = ac[dim];
    Eigen::VectorXd f = p.field(a);
    Eigen::VectorXd Lf = p.op.apply(f);
    Eigen::VectorXd JLf = p.calc.integrate_projected(Lf);
    Eigen::VectorXd df = p.calc.derivative(f);
    Eigen::VectorXd lhs = 0.5 * p.op.apply(f.cwiseAbs2() - JLf.cwiseAbs2()) -
                          f.cwiseProduct(Lf) - JLf.cwiseProduct(df);
    Eigen::VectorXd dir = df + p.op.apply(p.calc.integrate_projected(Lf));
    R = p.calc.lowpass(lhs - c * dir, 16);

    if (!Jac) return;
    Jac->resize(n, dim + 1);
    for (int k = 0; k < dim; ++k) {
        const Eigen::VectorXd& d = p.modes[k];
        Eigen::VectorXd Ld = p.op.apply(d);
        Eigen::VectorXd JLd = p.calc.integrate_projected(Ld);
        Eigen::VectorXd dd = p.calc.derivative(d);
        Eigen::VectorXd dlhs =
            p.op.apply(f.cwiseProduct(d) - JLf.cwiseProduct(JLd)) - d.cwiseProduct(Lf) -
            f.cwiseProduct(Ld) - JLd.cwiseProduct(df) - JLf.cwiseProduct(dd);
        Eigen::VectorXd ddir = dd + p.op.apply(JLd);
        Jac->col(k) = p.calc.lowpass(dlhs - c * ddir, 16);
    }
    Jac->col(dim) = -p.calc.lowpass(dir, 16);
}

} // namespace

AdmissibleBasis admissible_basis_blind(const DNOperator& op, const BoundaryCalculus& calc,
                                       int count, double criterion_tol,
                                       const BlindSearchConfig& cfg) {
    const BoundaryGrid& g = *op.grid;
    const bool grounded = op.flavor == DNFlavor::Grounded;
    const int pairs = cfg.seed_modes > 0 ? cfg.seed_modes : count;
    auto modes = mode_candidates(g, pairs);
    const int dim = static_cast<int>(modes.size());
    BlindProblem prob{op, calc, modes};

    auto evaluate = [&](const Eigen::VectorXd& x, Eigen::VectorXd& R, Eigen::MatrixXd* J) {
        if (grounded)
            grounded_residual_jacobian(prob, x, R, J);
        else
            isolated_residual_jacobian(prob, x, R, J);
    };
    auto wnorm = [&](const Eigen::VectorXd& R) {
        // Quadrature norm on the field part; the trailing penalty (grounded)
        // enters with unit weight.
        int n = g.size();
        double q = R.head(n).cwiseAbs2().dot(g.weights);
        if (R.size() > n) q += R[n] * R[n];
        return std::sqrt(q);
    };
    auto normalize = [&](Eigen::VectorXd x) {
        double nn = x.head(dim).norm();
        if (nn > 0) x.head(dim) /= nn;
        return x;
    };

    AdmissibleBasis out;
    for (int seed = 0; seed < dim && static_cast<int>(out.traces.size()) < count; ++seed) {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(grounded ? dim : dim + 1);
        x[seed] = 1.0;
        Eigen::VectorXd R;
        Eigen::MatrixXd J;
        evaluate(x, R, &J);
        double rn = wnorm(R);
        bool converged = false;
        for (int it = 0; it < cfg.max_iterations; ++it) {
            Eigen::VectorXd step = J.colPivHouseholderQr().solve(-R);
            // Keep the step tangent to the unit sphere of coefficients.
            step.head(dim) -= step.head(dim).dot(x.head(dim)) * x.head(dim);
            double alpha = 1.0;
            Eigen::VectorXd xn;
            Eigen::VectorXd Rn;
            double rnn = rn;
            for (int halvings = 0; halvings < 40; ++halvings) {
                xn = normalize(x + alpha * step);
                evaluate(xn, Rn, nullptr);
                rnn = wnorm(Rn);
                if (rnn <= rn) break;
                alpha *= cfg.damping;
            }
            double step_size = (alpha * step).norm();
            x = xn;
            rn = rnn;
            if (step_size < cfg.step_tol) {
                converged = true;
                break;
            }
            evaluate(x, R, &J);
        }
        if (!converged && rn > criterion_tol) continue;

        Eigen::VectorXd f = prob.field(x.head(dim));
        double fn = g.norm(f);
        if (fn < 1e-8) continue;
        f /= fn;
        double resid;
        if (grounded) {
            GroundedResidual r = residual_grounded(op, calc, f);
            resid = r.residual_norm;
        } else {
            IsolatedResidual r = residual_isolated(op, calc, f);
            resid = r.no_solution ? kInf : r.residual_norm;
        }
        if (!(resid <= criterion_tol)) continue;
        if (independent_of(out.traces, g, f)) out.traces.push_back(f);
    }
    out.complete = static_cast<int>(out.traces.size()) == count;
    return out;
}

} // namespace eit

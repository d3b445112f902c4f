#include "eitsurf/dn_operator.hpp"
#include "eitsurf/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace eit {

const char* to_string(DNFlavor f) {
    return f == DNFlavor::Grounded ? "grounded" : "isolated";
}

DNFlavor dn_flavor_from_string(const std::string& s) {
    if (s == "grounded" || s == "gr") return DNFlavor::Grounded;
    if (s == "isolated" || s == "is") return DNFlavor::Isolated;
    throw IoError("unknown DN flavor '" + s + "'");
}

Eigen::VectorXd DNOperator::apply(const Eigen::VectorXd& f) const {
    if (f.size() != schur.rows()) throw SolveError("DN apply: size mismatch");
    return (schur * f).cwiseQuotient(grid->weights);
}

double DNOperator::form(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const {
    return f.dot(schur * g);
}

DNOperator assemble_dn(const HarmonicSolver& solver, DNFlavor flavor) {
    const SurfaceMesh& mesh = solver.mesh();
    DNOperator op;
    op.flavor = flavor;
    op.grid = std::make_shared<BoundaryGrid>(make_boundary_grid(mesh, mesh.gamma0_index));
    op.mesh_fingerprint = mesh.fingerprint();

    const auto& B = op.grid->nodes;
    const int nb = static_cast<int>(B.size());
    const Eigen::SparseMatrix<double>& K = solver.stiffness();

    // S = K_BB - K_BU K_UU^{-1} K_UB: the harmonic extension of e_c followed
    // by the stiffness action, read off at the boundary rows. The interior
    // unknowns are the free dofs of the flavor's boundary-value problem, so
    // the factorization is shared with the field solves.
    Eigen::MatrixXd S(nb, nb);
    for (int c = 0; c < nb; ++c) {
        ScalarField u = (flavor == DNFlavor::Grounded)
                            ? solver.solve_grounded(Eigen::VectorXd::Unit(nb, c))
                            : solver.solve_isolated(Eigen::VectorXd::Unit(nb, c));
        Eigen::VectorXd w = K * u.values;
        for (int r = 0; r < nb; ++r) S(r, c) = w[B[r]];
    }
    // Symmetrize: removes the roundoff asymmetry of column-wise assembly.
    op.schur = 0.5 * (S + S.transpose());
    return op;
}

DNOperator assemble_dn(const SurfaceMesh& mesh, DNFlavor flavor) {
    HarmonicSolver solver(mesh);
    return assemble_dn(solver, flavor);
}

DNSpectrum dn_spectrum(const DNOperator& op, int k) {
    const int n = op.size();
    if (k < 1 || k > n) throw SolveError("dn_spectrum: k out of range");
    Eigen::VectorXd wsqrt = op.grid->weights.cwiseSqrt();
    Eigen::MatrixXd A = wsqrt.cwiseInverse().asDiagonal() * op.schur *
                        wsqrt.cwiseInverse().asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (A + A.transpose()));
    if (eig.info() != Eigen::Success) throw SolveError("DN eigensolver failed");
    DNSpectrum out;
    out.values = eig.eigenvalues().head(k);
    out.vectors = wsqrt.cwiseInverse().asDiagonal() * eig.eigenvectors().leftCols(k);
    return out;
}

Eigen::MatrixXd dn_compressed(const DNOperator& op, int n_modes) {
    const BoundaryGrid& g = *op.grid;
    const int n = g.size();
    const double w = 2.0 * std::numbers::pi / g.length;
    const int dim = 2 * n_modes + 1;
    if (4 * n_modes + 2 > n) throw SolveError("dn_compressed: n_modes exceeds grid resolution");
    Eigen::MatrixXd V(n, dim);
    V.col(0).setOnes();
    for (int k = 1; k <= n_modes; ++k)
        for (int i = 0; i < n; ++i) {
            V(i, 2 * k - 1) = std::cos(w * k * g.s[i]);
            V(i, 2 * k) = std::sin(w * k * g.s[i]);
        }
    Eigen::MatrixXd gram = V.transpose() * g.weights.asDiagonal() * V;
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) throw SolveError("dn_compressed: dependent mode basis");
    Eigen::MatrixXd Rt = llt.matrixU().transpose();
    Eigen::MatrixXd B =
        Rt.triangularView<Eigen::Lower>().solve(V.transpose()).transpose();
    Eigen::MatrixXd AB(n, dim);
    for (int j = 0; j < dim; ++j) AB.col(j) = op.apply(B.col(j));
    return B.transpose() * g.weights.asDiagonal() * AB;
}

double dn_error_estimate(const DNOperator& fine, const DNOperator& coarse, int n_modes) {
    // Clamp the window to what the coarser grid resolves.
    int cap = (std::min(fine.size(), coarse.size()) - 2) / 4;
    int w = std::max(2, std::min(n_modes, cap));
    Eigen::MatrixXd Mf = dn_compressed(fine, w);
    Eigen::MatrixXd Mc = dn_compressed(coarse, w);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Mf - Mc);
    return svd.singularValues()[0] / 3.0;
}

// ---------------------------------------------------------------------------
// CSV format:
//   DN <flavor> <n> <length>
//   s,<n values>
//   w,<n values>
//   <n rows of n comma-separated entries of the schur matrix>

void write_dn_csv(const DNOperator& op, std::ostream& out) {
    char buf[64];
    const int n = op.size();
    std::snprintf(buf, sizeof buf, "%.17g", op.grid->length);
    out << "DN " << to_string(op.flavor) << " " << n << " " << buf << "\n";
    auto row = [&](const char* tag, const Eigen::VectorXd& v) {
        out << tag;
        for (int i = 0; i < v.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", v[i]);
            out << "," << buf;
        }
        out << "\n";
    };
    row("s", op.grid->s);
    row("w", op.grid->weights);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", op.schur(r, c));
            out << (c ? "," : "") << buf;
        }
        out << "\n";
    }
}

void write_dn_csv_file(const DNOperator& op, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    write_dn_csv(op, f);
}

DNOperator read_dn_csv(std::istream& in) {
    std::string line;
    long lineno = 0;
    if (!std::getline(in, line)) throw IoError("empty DN file", 1);
    ++lineno;
    std::istringstream hs(line);
    std::string tag, flavor;
    int n = 0;
    double length = 0;
    if (!(hs >> tag >> flavor >> n >> length) || tag != "DN" || n <= 0)
        throw IoError("malformed DN header", lineno);

    DNOperator op;
    op.flavor = dn_flavor_from_string(flavor);
    auto grid = std::make_shared<BoundaryGrid>();
    grid->length = length;
    grid->nodes.resize(n);
    for (int i = 0; i < n; ++i) grid->nodes[i] = i;

    auto parse_tagged = [&](const char* want) {
        if (!std::getline(in, line)) throw IoError("truncated DN file", lineno + 1);
        ++lineno;
        std::istringstream ss(line);
        std::string field;
        if (!std::getline(ss, field, ',') || field != want)
            throw IoError(std::string("expected '") + want + "' record", lineno);
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) {
            if (!std::getline(ss, field, ',')) throw IoError("short record", lineno);
            v[i] = std::stod(field);
        }
        return v;
    };
    grid->s = parse_tagged("s");
    grid->weights = parse_tagged("w");
    op.grid = grid;

    op.schur.resize(n, n);
    for (int r = 0; r < n; ++r) {
        if (!std::getline(in, line)) throw IoError("truncated DN matrix", lineno + 1);
        ++lineno;
        std::istringstream ss(line);
        std::string field;
        for (int c = 0; c < n; ++c) {
            if (!std::getline(ss, field, ',')) throw IoError("short matrix row", lineno);
            op.schur(r, c) = std::stod(field);
        }
    }
    return op;
}

DNOperator read_dn_csv_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open for reading: " + path);
    return read_dn_csv(f);
}

} // namespace eit

#include "sepscope/states.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace sepscope {

namespace {

double max_abs_diag(const CMatrix& m) {
    double s = 0;
    for (int i = 0; i < m.rows(); ++i) s = std::max(s, std::abs(m(i, i).real()));
    return s > 0 ? s : 1.0;
}

// 2x2 Hermitian positive definite square root: (A + sqrt(det) I) / sqrt(tr + 2 sqrt(det))
CMatrix sqrt2(const CMatrix& a) {
    double det = (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0)).real();
    double sd = std::sqrt(det);
    double t = std::sqrt(a(0, 0).real() + a(1, 1).real() + 2 * sd);
    CMatrix s = a;
    s(0, 0) += sd;
    s(1, 1) += sd;
    return s / t;
}

CMatrix inverse2(const CMatrix& a) {
    cplx det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    CMatrix r(2, 2);
    r << a(1, 1), -a(0, 1), -a(1, 0), a(0, 0);
    return r / det;
}

// f applied to the spectrum of a Hermitian matrix
template <class F>
CMatrix spectral(const CMatrix& m, F f) {
    EigenSystem es = hermitian_eigen(m);
    const int n = static_cast<int>(m.rows());
    CMatrix d = CMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) d(i, i) = f(es.values[i]);
    return es.vectors * d * es.vectors.adjoint();
}

EigenSystem jacobi(const CMatrix& m, bool want_vectors) {
    const int n = static_cast<int>(m.rows());
    CMatrix a = m;
    CMatrix v = want_vectors ? CMatrix(CMatrix::Identity(n, n)) : CMatrix();
    const double norm = m.norm();
    const double target = 1e-13 * (norm > 0 ? norm : 1.0);
    bool converged = false;
    for (int sweep = 0; sweep < 30; ++sweep) {
        double off = 0;
        for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q)
                if (p != q) off += std::norm(a(p, q));
        if (std::sqrt(off) < target) {
            converged = true;
            break;
        }
        for (int p = 0; p < n - 1; ++p)
            for (int q = p + 1; q < n; ++q) {
                const double mag = std::abs(a(p, q));
                if (mag == 0) continue;
                const cplx ph = std::conj(a(p, q)) / mag;  // e^{-i phi}
                const double app = a(p, p).real(), aqq = a(q, q).real();
                const double theta = (aqq - app) / (2 * mag);
                double t = 1 / (std::abs(theta) + std::sqrt(theta * theta + 1));
                if (theta < 0) t = -t;
                const double c = 1 / std::sqrt(t * t + 1), s = t * c;
                // J: J_pp = c, J_pq = s, J_qp = -s ph, J_qq = c ph
                const cplx jpp = c, jpq = s, jqp = -s * ph, jqq = c * ph;
                for (int k = 0; k < n; ++k) {  // A <- A J
                    cplx akp = a(k, p), akq = a(k, q);
                    a(k, p) = akp * jpp + akq * jqp;
                    a(k, q) = akp * jpq + akq * jqq;
                }
                for (int k = 0; k < n; ++k) {  // A <- J^H A
                    cplx apk = a(p, k), aqk = a(q, k);
                    a(p, k) = std::conj(jpp) * apk + std::conj(jqp) * aqk;
                    a(q, k) = std::conj(jpq) * apk + std::conj(jqq) * aqk;
                }
                a(p, q) = 0;
                a(q, p) = 0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
                if (want_vectors)
                    for (int k = 0; k < n; ++k) {
                        cplx vkp = v(k, p), vkq = v(k, q);
                        v(k, p) = vkp * jpp + vkq * jqp;
                        v(k, q) = vkp * jpq + vkq * jqq;
                    }
            }
    }
    if (!converged) {
        double off = 0;
        for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q)
                if (p != q) off += std::norm(a(p, q));
        if (std::sqrt(off) >= target) throw StateError("Jacobi sweep budget exhausted");
    }
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int i, int j) { return a(i, i).real() < a(j, j).real(); });
    EigenSystem es;
    for (int i : idx) es.values.push_back(a(i, i).real());
    if (want_vectors) {
        es.vectors = CMatrix(n, n);
        for (int c = 0; c < n; ++c) es.vectors.col(c) = v.col(idx[c]);
    }
    return es;
}

}  // namespace

bool DensityMatrix::valid(double tol) const {
    const int n = size();
    if (n == 0 || entries.cols() != n) return false;
    if ((entries - entries.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
    if (std::abs(entries.trace() - cplx(1)) > tol) return false;
    for (int k = 1; k <= n; ++k)
        if (entries.topLeftCorner(k, k).determinant().real() < -tol) return false;
    return true;
}

DensityMatrix sample_hs_ginibre(FieldKind field, int n, RngStream& rng) {
    if (n != 4 && n != 6) throw StateError("Ginibre sampler supports N = 4 and N = 6");
    const int m = field == FieldKind::real ? n + 1 : n;
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, 0, 7, 6> h(m, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            double re = rng.normal();
            double im = field == FieldKind::complex ? rng.normal() : 0.0;
            h(i, j) = cplx(re, im);
        }
    DensityMatrix d;
    d.field = field;
    d.entries = h.adjoint() * h;
    d.entries /= d.entries.trace().real();
    return d;
}

Quaternion operator*(const Quaternion& p, const Quaternion& q) {
    return {p.x1 * q.x1 - p.x2 * q.x2 - p.x3 * q.x3 - p.x4 * q.x4,
            p.x1 * q.x2 + p.x2 * q.x1 + p.x3 * q.x4 - p.x4 * q.x3,
            p.x1 * q.x3 - p.x2 * q.x4 + p.x3 * q.x1 + p.x4 * q.x2,
            p.x1 * q.x4 + p.x2 * q.x3 - p.x3 * q.x2 + p.x4 * q.x1};
}

CholeskySample sample_cholesky_weighted(double alpha, RngStream& rng, int k, CholeskyProposal proposal) {
    const int beta = static_cast<int>(std::lround(2 * alpha));
    if (beta != 1 && beta != 2 && beta != 4) throw StateError("Cholesky sampler supports alpha in {1/2, 1, 2}");
    if (k < 0) throw StateError("induced index must be nonnegative");
    const std::array<double, 4> expo{1 + 6 * alpha + 2 * k, 1 + 4 * alpha + 2 * k, 1 + 2 * alpha + 2 * k,
                                     1.0 + 2 * k};

    // diagonal magnitudes, then beta real components per strictly upper entry (row-major)
    std::array<double, 4> diag{};
    std::array<std::array<double, 4>, 6> off{};
    double norm2 = 0;
    for (int i = 0; i < 4; ++i) {
        if (proposal == CholeskyProposal::tilted) {
            std::gamma_distribution<double> gam((expo[i] + 1) / 2, 1.0);
            diag[i] = std::sqrt(2 * gam(rng));
        } else {
            diag[i] = std::abs(rng.normal());
        }
        norm2 += diag[i] * diag[i];
    }
    for (auto& e : off)
        for (int c = 0; c < beta; ++c) {
            e[c] = rng.normal();
            norm2 += e[c] * e[c];
        }
    const double inv = 1 / std::sqrt(norm2);
    for (auto& x : diag) x *= inv;
    for (auto& e : off)
        for (int c = 0; c < beta; ++c) e[c] *= inv;

    CholeskySample s;
    // entries (0,1) (0,2) (0,3) (1,2) (1,3) (2,3)
    const int rows[6] = {0, 0, 0, 1, 1, 2}, cols[6] = {1, 2, 3, 2, 3, 3};
    for (int i = 0; i < 4; ++i) s.diag[i] = diag[i] * diag[i];
    for (int e = 0; e < 6; ++e) {
        double m2 = 0;
        for (int c = 0; c < beta; ++c) m2 += off[e][c] * off[e][c];
        s.diag[cols[e]] += m2;
    }
    s.weight = 1;
    if (proposal == CholeskyProposal::uniform_sphere)
        for (int i = 0; i < 4; ++i) s.weight *= std::pow(diag[i], expo[i]);

    if (beta <= 2) {
        CMatrix a = CMatrix::Zero(4, 4);
        for (int i = 0; i < 4; ++i) a(i, i) = diag[i];
        for (int e = 0; e < 6; ++e) a(rows[e], cols[e]) = cplx(off[e][0], beta == 2 ? off[e][1] : 0.0);
        DensityMatrix d;
        d.field = beta == 1 ? FieldKind::real : FieldKind::complex;
        d.entries = a.adjoint() * a;
        s.matrix = d;
    }
    return s;
}

double sample_quaternion_ginibre_q11(int m, RngStream& rng) {
    if (m < 1) throw StateError("row count must be positive");
    double first = 0, total = 0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < 4; ++j) {
            Quaternion q{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
            double n2 = q.norm2();
            total += n2;
            if (j == 0) first += n2;
        }
    return first / total;
}

CMatrix partial_transpose(const CMatrix& m, int split) {
    const int n = static_cast<int>(m.rows());
    if (split <= 0 || n != 2 * split) throw StateError("partial transpose needs two equal blocks");
    CMatrix r(n, n);
    for (int bi = 0; bi < 2; ++bi)
        for (int bj = 0; bj < 2; ++bj)
            r.block(bi * split, bj * split, split, split) = m.block(bi * split, bj * split, split, split).transpose();
    return r;
}

bool is_psd(const CMatrix& m, double tol) {
    const int n = static_cast<int>(m.rows());
    const double eps = tol * max_abs_diag(m);
    CMatrix a = m;
    for (int k = 0; k < n; ++k) {
        const double piv = a(k, k).real();
        if (piv < -eps) return false;  // a leading minor is negative
        if (piv <= eps) return jacobi(m, false).values.front() >= -eps;
        for (int i = k + 1; i < n; ++i) {
            const cplx f = a(i, k) / piv;
            for (int j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
        }
    }
    return true;
}

bool is_ppt(const DensityMatrix& rho) { return is_psd(partial_transpose(rho.entries, rho.block_split())); }

EigenSystem hermitian_eigen(const CMatrix& m) { return jacobi(m, true); }

int negative_eigenvalue_count(const CMatrix& m, double tol) {
    auto es = jacobi(m, false);
    return static_cast<int>(std::count_if(es.values.begin(), es.values.end(), [&](double v) { return v < -tol; }));
}

SingularRatio sigma_ratio(const DensityMatrix& rho) {
    const int h = rho.block_split();
    if (h != 2 && h != 3) throw StateError("sigma ratio needs N = 4 or N = 6");
    const CMatrix d1 = rho.entries.topLeftCorner(h, h), d2 = rho.entries.bottomRightCorner(h, h);
    SingularRatio r;
    if (h == 2) {
        const double det1 = (d1(0, 0) * d1(1, 1) - d1(0, 1) * d1(1, 0)).real();
        const double det2 = (d2(0, 0) * d2(1, 1) - d2(0, 1) * d2(1, 0)).real();
        if (!(det1 > 0)) throw StateError("singular first block");
        const CMatrix i1 = inverse2(d1);
        const double tr = (d2 * i1).trace().real();
        const double c = std::max(1.0, 0.5 * std::sqrt(det1 / det2) * tr);
        r.eps_closed = 1 / (c + std::sqrt((c - 1) * (c + 1)));

        const CMatrix v = sqrt2(d2) * inverse2(sqrt2(d1));
        const CMatrix g = v.adjoint() * v;
        const double a = g(0, 0).real(), b = g(1, 1).real(), off = std::norm(g(0, 1));
        const double disc = std::sqrt((a - b) * (a - b) + 4 * off);
        const double hi = (a + b + disc) / 2;
        const double lo = (a * b - off) / hi;  // product of eigenvalues over the larger one
        r.singular_values = {std::sqrt(hi), std::sqrt(std::max(lo, 0.0))};
        r.eps = r.singular_values[1] / r.singular_values[0];
    } else {
        const CMatrix v = spectral(d2, [](double x) { return std::sqrt(std::max(x, 0.0)); }) *
                          spectral(d1, [](double x) {
                              if (!(x > 0)) throw StateError("singular first block");
                              return 1 / std::sqrt(x);
                          });
        EigenSystem es = jacobi(v.adjoint() * v, false);
        for (auto it = es.values.rbegin(); it != es.values.rend(); ++it) r.singular_values.push_back(std::sqrt(std::max(*it, 0.0)));
        r.eps = r.singular_values[1] / r.singular_values[0];
        r.eps2 = r.singular_values[2] / r.singular_values[1];
        r.eps_closed = r.eps;
    }
    return r;
}

double mu_ratio(const DensityMatrix& rho) {
    if (rho.size() != 4) throw StateError("mu ratio needs N = 4");
    auto p = [&](int i) {
        double v = rho.entries(i, i).real();
        if (!(v > 0)) throw StateError("zero diagonal entry");
        return v;
    };
    return std::sqrt(p(0) * p(3) / (p(1) * p(2)));
}

TauRatios tau_ratios(const DensityMatrix& rho) {
    if (rho.size() != 6) throw StateError("tau ratios need N = 6");
    double p[6];
    for (int i = 0; i < 6; ++i) {
        p[i] = rho.entries(i, i).real();
        if (!(p[i] > 0)) throw StateError("zero diagonal entry");
    }
    return {std::sqrt(p[0] * p[4] / (p[1] * p[3])), std::sqrt(p[1] * p[5] / (p[2] * p[4])),
            std::sqrt(p[0] * p[5] / (p[2] * p[3]))};
}

BlooreCoordinates bloore_coordinates(const DensityMatrix& rho) {
    BlooreCoordinates b;
    b.mu = mu_ratio(rho);
    b.nu = b.mu * b.mu;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            if (i == j) continue;
            cplx w = rho.entries(i, j) / std::sqrt(rho.entries(i, i).real() * rho.entries(j, j).real());
            b.z(i, j) = w.real();
            b.y(i, j) = w.imag();
            b.r(i, j) = std::abs(w);
            b.phi(i, j) = std::arg(w);
        }
    return b;
}

double epsilon_from_mu(double z12, double z34, double y12, double y34, double mu) {
    const double s1 = 1 - z12 * z12 - y12 * y12, s2 = 1 - z34 * z34 - y34 * y34;
    if (!(mu > 0) || !(s1 > 0) || !(s2 > 0)) throw StateError("link arguments outside the domain");
    const double arg = (mu * mu - 2 * mu * (z12 * z34 + y12 * y34) + 1) / (2 * mu * std::sqrt(s1) * std::sqrt(s2));
    if (arg < 1 - 1e-12) throw StateError("arccosh argument below 1");
    return std::exp(-std::acosh(std::max(arg, 1.0)));
}

double mu_from_epsilon(double eps, double z12, double z34, double y12, double y34) {
    const double s1 = 1 - z12 * z12 - y12 * y12, s2 = 1 - z34 * z34 - y34 * y34;
    if (!(eps > 0) || !(s1 > 0) || !(s2 > 0)) throw StateError("link arguments outside the domain");
    const double lam = 2 * (z12 * z34 + y12 * y34) + std::sqrt(s1) * std::sqrt(s2) * (eps + 1 / eps);
    if (lam < 2 - 1e-12) throw StateError("inverse link below its branch point");
    const double l2 = std::max(lam * lam - 4, 0.0);
    return 2 / (lam + std::sqrt(l2));  // (lam - sqrt(lam^2 - 4)) / 2 without cancellation
}

DensityMatrix sample_xstate(FieldKind field, RngStream& rng) {
    double p[4];
    for (;;) {
        double s = 0;
        for (double& x : p) {
            x = -std::log(rng.uniform());
            s += x;
        }
        for (double& x : p) x /= s;
        const double prod = p[0] * p[1] * p[2] * p[3];
        const double accept = field == FieldKind::real ? 16 * std::sqrt(prod) : 256 * prod;
        if (rng.uniform() < accept) break;
    }
    auto draw = [&](double radius) {
        if (field == FieldKind::real) return cplx(radius * (2 * rng.uniform() - 1), 0);
        double r = radius * std::sqrt(rng.uniform()), t = 2 * M_PI * rng.uniform();
        return cplx(r * std::cos(t), r * std::sin(t));
    };
    DensityMatrix d;
    d.field = field;
    d.entries = CMatrix::Zero(4, 4);
    for (int i = 0; i < 4; ++i) d.entries(i, i) = p[i];
    const cplx a14 = draw(std::sqrt(p[0] * p[3])), a23 = draw(std::sqrt(p[1] * p[2]));
    d.entries(0, 3) = a14;
    d.entries(3, 0) = std::conj(a14);
    d.entries(1, 2) = a23;
    d.entries(2, 1) = std::conj(a23);
    return d;
}

ConstraintResult constraint_sets(FieldKind field, double mu, const std::array<double, 4>& r,
                                 const std::array<double, 4>& phi) {
    const double r13 = r[0], r14 = r[1], r23 = r[2], r24 = r[3];
    double x = r13 * r14 * r23 * r24;
    if (field == FieldKind::complex) x *= std::cos(phi[0] - phi[1] - phi[2] + phi[3]);
    const double c0 = 1 - r13 * r13 - r23 * r23;
    const double c1 = -r13 * r13 - 2 * x - r14 * r14 + r14 * r14 * r23 * r23 - r23 * r23 +
                      (r13 * r13 - 1) * r24 * r24 + 1;
    const double m2 = mu * mu;
    const double c2 = -m2 * m2 * r14 * r14 +
                      m2 * (-r13 * r13 - 2 * x + r14 * r14 * r23 * r23 + (r13 * r13 - 1) * r24 * r24 + 1) - r23 * r23;
    ConstraintResult out;
    out.positivity = c0 > 0 && c1 > 0;
    out.ppt = out.positivity && c2 > 0;
    return out;
}

}  // namespace sepscope

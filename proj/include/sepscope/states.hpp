#pragma once

#include "sepscope/rng.hpp"

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

namespace sepscope {

enum class FieldKind { real, complex };

using cplx = std::complex<double>;
using CMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, 0, 6, 6>;

struct DensityMatrix {
    CMatrix entries;
    FieldKind field = FieldKind::complex;

    int size() const { return static_cast<int>(entries.rows()); }
    int block_split() const { return size() / 2; }
    // Hermitian, unit trace, leading minors nonnegative
    bool valid(double tol = 1e-12) const;
};

struct StateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// H^* H / tr for an M x N Gaussian H; M = N + 1 real, M = N complex.
DensityMatrix sample_hs_ginibre(FieldKind field, int n, RngStream& rng);

struct Quaternion {
    double x1 = 0, x2 = 0, x3 = 0, x4 = 0;  // 1, i, j, k

    Quaternion conj() const { return {x1, -x2, -x3, -x4}; }
    double norm2() const { return x1 * x1 + x2 * x2 + x3 * x3 + x4 * x4; }
    friend Quaternion operator*(const Quaternion& p, const Quaternion& q);
    friend Quaternion operator+(const Quaternion& p, const Quaternion& q) {
        return {p.x1 + q.x1, p.x2 + q.x2, p.x3 + q.x3, p.x4 + q.x4};
    }
};

enum class CholeskyProposal { tilted, uniform_sphere };

// Upper-triangular A with nonnegative diagonal from a point of the unit sphere in
// 4 + 12 alpha dimensions; Q = A^* A.  weight is the importance ratio to the
// target A11^(1+6a) A22^(1+4a) A33^(1+2a) A44 (times det(Q)^k), up to a constant.
struct CholeskySample {
    std::array<double, 4> diag{};  // Q_ii
    double weight = 1;
    std::optional<DensityMatrix> matrix;  // alpha in {1/2, 1}
};
CholeskySample sample_cholesky_weighted(double alpha, RngStream& rng, int k = 0,
                                        CholeskyProposal proposal = CholeskyProposal::tilted);

// Q11 of H^* H / tr for an M x 4 quaternionic Gaussian H.
double sample_quaternion_ginibre_q11(int m, RngStream& rng);

CMatrix partial_transpose(const CMatrix& m, int split);
// Positive semidefinite within tol * max diagonal: elimination pivots, Jacobi when a pivot is near zero.
bool is_psd(const CMatrix& m, double tol = 1e-12);
bool is_ppt(const DensityMatrix& rho);

struct EigenSystem {
    std::vector<double> values;  // ascending
    CMatrix vectors;             // columns
};
// Cyclic Jacobi; off-diagonal Frobenius norm < 1e-13 ||M||, at most 30 sweeps.
EigenSystem hermitian_eigen(const CMatrix& m);
int negative_eigenvalue_count(const CMatrix& m, double tol = 1e-12);

struct SingularRatio {
    double eps = 1;          // s2/s1
    double eps2 = 1;         // s3/s2, N = 6
    double eps_closed = 1;   // N = 4 arccosh path
    std::vector<double> singular_values;  // descending
};
// V = D2^(1/2) D1^(-1/2) for the diagonal blocks D1, D2.
SingularRatio sigma_ratio(const DensityMatrix& rho);

double mu_ratio(const DensityMatrix& rho);
struct TauRatios {
    double tau1, tau2, tau;
};
TauRatios tau_ratios(const DensityMatrix& rho);

struct BlooreCoordinates {
    double mu = 1, nu = 1;
    Eigen::Matrix4d z = Eigen::Matrix4d::Zero();  // real parts of normalized off-diagonals
    Eigen::Matrix4d y = Eigen::Matrix4d::Zero();  // imaginary parts
    Eigen::Matrix4d r = Eigen::Matrix4d::Zero();
    Eigen::Matrix4d phi = Eigen::Matrix4d::Zero();
};
BlooreCoordinates bloore_coordinates(const DensityMatrix& rho);

// eps = exp(-arccosh((mu^2 - 2 mu c + 1) / (2 mu s))) with c = z12 z34 + y12 y34,
// s = sqrt(1 - z12^2 - y12^2) sqrt(1 - z34^2 - y34^2).
double epsilon_from_mu(double z12, double z34, double y12, double y34, double mu);
// Inverse; returns the root mu <= 1 (the other root is 1/mu).
double mu_from_epsilon(double eps, double z12, double z34, double y12, double y34);

// Uniform X-state: diagonal on the simplex accepted with the antidiagonal volume,
// antidiagonal uniform on the interval (real) or disc (complex).
DensityMatrix sample_xstate(FieldKind field, RngStream& rng);

struct ConstraintResult {
    bool positivity = false;
    bool ppt = false;
};
// r = (r13, r14, r23, r24), phi likewise; phi ignored for the real kind.
ConstraintResult constraint_sets(FieldKind field, double mu, const std::array<double, 4>& r,
                                 const std::array<double, 4>& phi = {0, 0, 0, 0});

}  // namespace sepscope

// Brute-force reference computations. Nothing here calls the structured
// code paths of the library under test.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

inline double logdet(const Eigen::MatrixXd& m)
{
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

// Hessian of a scalar function at x by central differences.
inline Eigen::MatrixXd hessian(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                               double h = 1e-3)
{
    const Eigen::Index n = x.size();
    Eigen::MatrixXd H(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            Eigen::VectorXd pp = x, pm = x, mp = x, mm = x;
            pp[i] += h; pp[j] += h;
            pm[i] += h; pm[j] -= h;
            mp[i] -= h; mp[j] += h;
            mm[i] -= h; mm[j] -= h;
            H(i, j) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4 * h * h);
        }
    return 0.5 * (H + H.transpose());
}

// Precision of the N-particle Gibbs law for V = a0/2|x|^2, W = lam/2|x|^2,
// written out entry by entry from the energy.
inline Eigen::MatrixXd gibbs_precision(int N, int d, double lambda, double alpha = 1.0)
{
    const int n = N * d;
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            for (int c = 0; c < d; ++c) {
                if (i == j) P(i * d + c, j * d + c) = alpha + lambda;
                else P(i * d + c, j * d + c) = -lambda / (N - 1);
            }
    return P;
}

// Covariance of the leading k particles via a full inverse.
inline Eigen::MatrixXd marginal(const Eigen::MatrixXd& precision, int k, int d)
{
    const Eigen::MatrixXd S = precision.inverse();
    return S.topLeftCorner(k * d, k * d);
}

// Conditional law of coordinates [m, m + size) given the first m, by the
// covariance Schur complement (remaining coordinates marginalised).
struct Conditional {
    Eigen::MatrixXd gain;  // mean = gain * x_A
    Eigen::MatrixXd covariance;
};
inline Conditional condition(const Eigen::MatrixXd& precision, int m, int size)
{
    const Eigen::MatrixXd S = precision.inverse();
    const Eigen::MatrixXd Saa = S.topLeftCorner(m, m);
    const Eigen::MatrixXd Sba = S.block(m, 0, size, m);
    const Eigen::MatrixXd Sbb = S.block(m, m, size, size);
    const Eigen::MatrixXd gain = Sba * Saa.inverse();
    return {gain, Sbb - gain * Sba.transpose()};
}

// Renyi divergence of centered Gaussians from determinants; +inf if the tilt is not PD.
inline double renyi(const Eigen::MatrixXd& S1, const Eigen::MatrixXd& S2, double q)
{
    const Eigen::MatrixXd T = q * S1.inverse() + (1 - q) * S2.inverse();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    if (es.eigenvalues().minCoeff() <= 0) return INFINITY;
    const double log_int = -0.5 * q * logdet(S1) - 0.5 * (1 - q) * logdet(S2) - 0.5 * logdet(T);
    return log_int / (q - 1);
}

inline double kl(const Eigen::MatrixXd& S1, const Eigen::MatrixXd& S2)
{
    const double n = static_cast<double>(S1.rows());
    return 0.5 * ((S2.inverse() * S1).trace() - n + logdet(S2) - logdet(S1));
}

// Composite Simpson on [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000)
{
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4 : 2);
    return s * h / 3;
}

inline double normal_pdf(double x, double var)
{
    return std::exp(-x * x / (2 * var)) / std::sqrt(2 * std::numbers::pi * var);
}

// 1-d Renyi by quadrature.
inline double renyi_1d(double v1, double v2, double q)
{
    const double s = 12 * std::sqrt(std::max(v1, v2));
    const double I = simpson([&](double x) { return std::pow(normal_pdf(x, v1), q) * std::pow(normal_pdf(x, v2), 1 - q); },
                             -s, s);
    return std::log(I) / (q - 1);
}

}  // namespace oracle

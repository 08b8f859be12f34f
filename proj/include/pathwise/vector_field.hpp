#pragma once

// Vector fields f: R^n -> Hom(R^d, R^n) with first derivatives and declared
// Lip(alpha) data. Unbounded classical fields (f(y) = My) are smoothly
// truncated outside a radius so the sup-norm bounds exist; the truncation is
// inert on data that stays inside the box.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pathwise/linalg.hpp"

namespace pathwise {

struct VectorField {
    int dim_state = 1;
    int dim_driver = 1;
    std::function<Mat(const Vec&)> eval;                     // n x d
    std::function<std::vector<Mat>(const Vec&)> jacobian;    // per state coord k: d(eval)/dy_k
    double lip_alpha = 2.0;
    double f_inf = 0.0;     // declared sup ||f||_F
    double grad_inf = 0.0;  // declared sup ||grad f||_F
    std::string name = "custom";
    double truncation_radius = 0.0;  // 0 when no truncation applies
};

namespace fielddetail {

// C^2 cutoff: 1 on [0,1], 0 on [2,inf), quintic smootherstep between.
inline double cutoff(double u) {
    if (u <= 1.0) return 1.0;
    if (u >= 2.0) return 0.0;
    const double w = u - 1.0;
    return 1.0 - w * w * w * (10.0 - 15.0 * w + 6.0 * w * w);
}

inline double cutoff_deriv(double u) {
    if (u <= 1.0 || u >= 2.0) return 0.0;
    const double w = u - 1.0;
    return -30.0 * w * w * (1.0 - w) * (1.0 - w);
}

}  // namespace fielddetail

/// f(y) = C, a constant matrix.
inline VectorField constant_field(const Mat& C) {
    VectorField f;
    f.dim_state = static_cast<int>(C.rows);
    f.dim_driver = static_cast<int>(C.cols);
    f.eval = [C](const Vec&) { return C; };
    const std::size_t n = C.rows;
    f.jacobian = [C, n](const Vec&) { return std::vector<Mat>(n, Mat(C.rows, C.cols)); };
    f.lip_alpha = 10.0;
    f.f_inf = frobenius(C);
    f.grad_inf = 0.0;
    f.name = "constant";
    return f;
}

/// Linear field truncated outside |y| = 2R: column j of f(y) is
/// phi(|y|/R) M_j y.
inline VectorField linear_field(std::vector<Mat> Ms, double radius, double lip_alpha = 3.0) {
    if (Ms.empty()) throw std::invalid_argument("linear_field: need at least one matrix");
    const std::size_t n = Ms[0].rows;
    for (const Mat& m : Ms)
        if (m.rows != n || m.cols != n) throw std::invalid_argument("linear_field: matrices must be n x n");
    if (!(radius > 0.0)) throw std::invalid_argument("linear_field: radius must be positive");
    const std::size_t d = Ms.size();
    VectorField f;
    f.dim_state = static_cast<int>(n);
    f.dim_driver = static_cast<int>(d);
    f.truncation_radius = radius;
    f.eval = [Ms, radius, n, d](const Vec& y) {
        const double phi = fielddetail::cutoff(norm2(y) / radius);
        Mat out(n, d);
        if (phi == 0.0) return out;
        for (std::size_t j = 0; j < d; ++j) {
            const Vec c = matvec(Ms[j], y);
            for (std::size_t i = 0; i < n; ++i) out(i, j) = phi * c[i];
        }
        return out;
    };
    f.jacobian = [Ms, radius, n, d](const Vec& y) {
        std::vector<Mat> J(n, Mat(n, d));
        const double r = norm2(y);
        const double phi = fielddetail::cutoff(r / radius);
        const double dphi = fielddetail::cutoff_deriv(r / radius) / radius;
        for (std::size_t j = 0; j < d; ++j) {
            const Vec c = matvec(Ms[j], y);
            for (std::size_t k = 0; k < n; ++k) {
                const double dir = (r > 0.0) ? y[k] / r : 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    J[k](i, j) = phi * Ms[j](i, k) + dphi * dir * c[i];
            }
        }
        return J;
    };
    double m2 = 0.0;
    for (const Mat& m : Ms) {
        const double fn = frobenius(m);
        m2 += fn * fn;
    }
    const double mtot = std::sqrt(m2);
    f.lip_alpha = lip_alpha;
    f.f_inf = 2.0 * radius * mtot;
    // |grad| <= phi |M| + |phi'| |My| / R <= |M| (1 + sup_w 30 w^2(1-w)^2 * 2)
    f.grad_inf = mtot * (1.0 + 2.0 * 1.875);
    f.name = "linear";
    return f;
}

/// Scalar f(y) = y, truncated.
inline VectorField scalar_identity_field(double radius) {
    Mat one(1, 1);
    one(0, 0) = 1.0;
    VectorField f = linear_field({one}, radius);
    f.name = "scalar-identity";
    return f;
}

/// Planar rotation driven by one driver coordinate, truncated.
inline VectorField rotation_field(double radius) {
    Mat rot(2, 2);
    rot(0, 1) = -1.0;
    rot(1, 0) = 1.0;
    VectorField f = linear_field({rot}, radius);
    f.name = "rotation";
    return f;
}

/// Scalar field tabulated on a y-grid with linear interpolation; flat
/// extrapolation outside the table.
inline VectorField tabulated_field(std::vector<double> ys, std::vector<double> fs, double lip_alpha = 2.0) {
    if (ys.size() != fs.size() || ys.size() < 2) throw std::invalid_argument("tabulated_field: bad table");
    for (std::size_t i = 1; i < ys.size(); ++i)
        if (!(ys[i] > ys[i - 1])) throw std::invalid_argument("tabulated_field: y grid must increase");
    auto locate = [ys](double y) {
        std::size_t i = 0;
        while (i + 2 < ys.size() && ys[i + 1] < y) ++i;
        return i;
    };
    VectorField f;
    f.dim_state = 1;
    f.dim_driver = 1;
    f.eval = [ys, fs, locate](const Vec& y) {
        Mat out(1, 1);
        const double v = y[0];
        if (v <= ys.front()) out(0, 0) = fs.front();
        else if (v >= ys.back()) out(0, 0) = fs.back();
        else {
            const std::size_t i = locate(v);
            const double w = (v - ys[i]) / (ys[i + 1] - ys[i]);
            out(0, 0) = (1.0 - w) * fs[i] + w * fs[i + 1];
        }
        return out;
    };
    f.jacobian = [ys, fs, locate](const Vec& y) {
        std::vector<Mat> J(1, Mat(1, 1));
        const double v = y[0];
        if (v > ys.front() && v < ys.back()) {
            const std::size_t i = locate(v);
            J[0](0, 0) = (fs[i + 1] - fs[i]) / (ys[i + 1] - ys[i]);
        }
        return J;
    };
    double finf = 0.0, ginf = 0.0;
    for (std::size_t i = 0; i < fs.size(); ++i) {
        finf = std::max(finf, std::abs(fs[i]));
        if (i > 0) ginf = std::max(ginf, std::abs((fs[i] - fs[i - 1]) / (ys[i] - ys[i - 1])));
    }
    f.lip_alpha = lip_alpha;
    f.f_inf = finf;
    f.grad_inf = ginf;
    f.name = "tabulated";
    return f;
}

/// Finite-difference audit of the declared jacobian at a state.
inline double jacobian_fd_error(const VectorField& f, const Vec& y, double h = 1e-6) {
    const std::vector<Mat> J = f.jacobian(y);
    double worst = 0.0;
    for (int k = 0; k < f.dim_state; ++k) {
        Vec yp = y, ym = y;
        yp[k] += h;
        ym[k] -= h;
        const Mat fp = f.eval(yp), fm = f.eval(ym);
        for (int i = 0; i < f.dim_state; ++i)
            for (int j = 0; j < f.dim_driver; ++j) {
                const double fd = (fp(i, j) - fm(i, j)) / (2.0 * h);
                const double scale = std::max(1.0, std::abs(J[k](i, j)));
                worst = std::max(worst, std::abs(fd - J[k](i, j)) / scale);
            }
    }
    return worst;
}

/// The averaged-derivative one-form g with f(x) - f(y) = g(x,y) (x - y):
/// g(x,y) = int_0^1 Df(y + s(x-y)) ds by composite Gauss-Legendre. Exact to
/// roundoff where f is smooth along the segment; across a truncation shell
/// (C^2 joints) the accuracy drops to the quadrature order.
inline std::vector<Mat> difference_form(const VectorField& f, const Vec& x, const Vec& y,
                                        int panels = 32) {
    static const double nodes[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                    0.9602898564975363};
    static const double weights[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                      0.1012285362903763};
    std::vector<Mat> acc(f.dim_state, Mat(f.dim_state, f.dim_driver));
    const double h = 1.0 / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = (p + 0.5) * h;
        for (int q = 0; q < 4; ++q) {
            for (double sgn : {-1.0, 1.0}) {
                const double s = mid + sgn * 0.5 * h * nodes[q];
                Vec z = y;
                for (std::size_t i = 0; i < z.size(); ++i) z[i] += s * (x[i] - y[i]);
                const std::vector<Mat> J = f.jacobian(z);
                for (int k = 0; k < f.dim_state; ++k) {
                    Mat scaledJ = J[k];
                    scaledJ *= 0.5 * h * weights[q];
                    acc[k] += scaledJ;
                }
            }
        }
    }
    return acc;
}

/// Time-1 flow of dy/ds = f(y) dx starting from y0, by adaptive RK4 with
/// step doubling. Exact (to roundoff) for constant fields.
inline Vec integrate_flow(const VectorField& field, Vec y0, const Vec& dx, double tol = 1e-12) {
    double n2 = 0.0;
    for (double v : dx) n2 += v * v;
    if (n2 == 0.0) return y0;

    auto F = [&](const Vec& y) { return matvec(field.eval(y), dx); };
    auto rk4 = [&](const Vec& y, double h) {
        const Vec k1 = F(y);
        Vec y2 = y;
        axpy(0.5 * h, k1, y2);
        const Vec k2 = F(y2);
        Vec y3 = y;
        axpy(0.5 * h, k2, y3);
        const Vec k3 = F(y3);
        Vec y4 = y;
        axpy(h, k3, y4);
        const Vec k4 = F(y4);
        Vec out = y;
        for (std::size_t i = 0; i < y.size(); ++i)
            out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        return out;
    };

    const double stiffness = std::sqrt(n2) * std::max(field.grad_inf, 1e-3);
    Vec y = std::move(y0);
    // one RK4 step resolves the flow to ~stiffness^5; skip the doubling
    // check when that is already far below the tolerance
    if (stiffness < 5e-3) {
        auto F1 = [&](const Vec& v) { return matvec(field.eval(v), dx); };
        const Vec k1 = F1(y);
        Vec y2 = y;
        axpy(0.5, k1, y2);
        const Vec k2 = F1(y2);
        Vec y3 = y;
        axpy(0.5, k2, y3);
        const Vec k3 = F1(y3);
        Vec y4 = y;
        axpy(1.0, k3, y4);
        const Vec k4 = F1(y4);
        for (std::size_t i = 0; i < y.size(); ++i)
            y[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
        return y;
    }

    double s = 0.0;
    double h = std::min(1.0, 0.5 / stiffness);
    int guard = 0;
    while (s < 1.0) {
        if (++guard > 1000000) throw std::runtime_error("integrate_flow: step count exceeded");
        h = std::min(h, 1.0 - s);
        const Vec full = rk4(y, h);
        Vec half = rk4(rk4(y, 0.5 * h), 0.5 * h);
        double err = 0.0, scale = 1.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            err = std::max(err, std::abs(half[i] - full[i]));
            scale = std::max(scale, std::abs(half[i]));
        }
        err /= 15.0;
        if (err <= tol * scale || h <= 1e-12) {
            for (std::size_t i = 0; i < y.size(); ++i) half[i] += (half[i] - full[i]) / 15.0;
            y = std::move(half);
            s += h;
            if (err < 0.03 * tol * scale) h *= 2.0;
        } else {
            h *= 0.5;
        }
    }
    return y;
}

}  // namespace pathwise

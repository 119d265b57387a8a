#include <imbcal/optimize.hpp>

#include <cmath>

namespace imbcal {

Vector central_difference_gradient(const Objective& f, const Vector& x, double step)
{
    Vector g(x.size());
    Vector probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + step;
        const double up = f(probe);
        probe[i] = x[i] - step;
        const double down = f(probe);
        probe[i] = x[i];
        g[i] = (up - down) / (2.0 * step);
    }
    return g;
}

BfgsResult minimize_bfgs(const Objective& f, Vector x0, const BfgsOptions& options)
{
    const Eigen::Index n = x0.size();
    BfgsResult out;
    out.x = std::move(x0);
    out.value = f(out.x);
    if (!std::isfinite(out.value)) {
        return out;
    }
    Vector g = central_difference_gradient(f, out.x, options.difference_step);
    Matrix h = Matrix::Identity(n, n);

    for (int it = 0; it < options.max_iterations; ++it) {
        out.iterations = it + 1;
        if (out.value <= options.value_tolerance || g.cwiseAbs().maxCoeff() <= options.gradient_tolerance) {
            out.converged = true;
            return out;
        }
        Vector dir = -h * g;
        double slope = g.dot(dir);
        if (!(slope < 0.0)) {
            h.setIdentity();
            dir = -g;
            slope = -g.squaredNorm();
        }

        double step = 1.0;
        Vector trial;
        double trial_value = 0.0;
        bool accepted = false;
        for (int k = 0; k < 60; ++k) {
            trial = out.x + step * dir;
            trial_value = f(trial);
            if (std::isfinite(trial_value) && trial_value <= out.value + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (h.isIdentity()) {
                break;
            }
            h.setIdentity();
            continue;
        }

        const Vector g_new = central_difference_gradient(f, trial, options.difference_step);
        const Vector s = trial - out.x;
        const Vector y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-300) {
            const double rho = 1.0 / sy;
            const Matrix left = Matrix::Identity(n, n) - rho * s * y.transpose();
            h = left * h * left.transpose() + rho * s * s.transpose();
        }
        out.x = trial;
        out.value = trial_value;
        g = g_new;
    }
    out.converged = out.value <= options.value_tolerance || g.cwiseAbs().maxCoeff() <= options.gradient_tolerance;
    return out;
}

} // namespace imbcal

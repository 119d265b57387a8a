#pragma once

#include <imbcal/core.hpp>

#include <functional>

namespace imbcal {

struct BfgsOptions
{
    int max_iterations = 200;
    double gradient_tolerance = 1e-10; // on the max-norm of the gradient
    double value_tolerance = 1e-14;    // stop once f drops below this
    double difference_step = 1e-4;     // central finite differences
};

struct BfgsResult
{
    Vector x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

using Objective = std::function<double(const Vector&)>;

Vector central_difference_gradient(const Objective& f, const Vector& x, double step);

// Quasi-Newton minimization with finite-difference gradients and a
// backtracking Armijo line search on the inverse-Hessian BFGS update.
BfgsResult minimize_bfgs(const Objective& f, Vector x0, const BfgsOptions& options = {});

} // namespace imbcal

#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the library's numerical code paths.

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

// All-pairs concordance with ties counted one half.
inline double auroc_all_pairs(const Eigen::VectorXd& score, const Eigen::VectorXd& y)
{
    double concordant = 0.0;
    double pairs = 0.0;
    for (Eigen::Index i = 0; i < score.size(); ++i) {
        if (y[i] != 1.0) {
            continue;
        }
        for (Eigen::Index j = 0; j < score.size(); ++j) {
            if (y[j] != 0.0) {
                continue;
            }
            pairs += 1.0;
            if (score[i] > score[j]) {
                concordant += 1.0;
            } else if (score[i] == score[j]) {
                concordant += 0.5;
            }
        }
    }
    return concordant / pairs;
}

inline double loglik(double a, double b, const Eigen::VectorXd& x, const Eigen::VectorXd& y)
{
    double ll = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double p = 1.0 / (1.0 + std::exp(-(a + b * x[i])));
        ll += y[i] * std::log(p) + (1.0 - y[i]) * std::log(1.0 - p);
    }
    return ll;
}

struct Point2
{
    double a;
    double b;
};

// Coarse grid then repeated local refinement with a shrinking grid.
inline Point2 grid_maximize(const std::function<double(double, double)>& f, double lo, double hi,
                            int steps = 81, int rounds = 30)
{
    Point2 best{0.0, 0.0};
    double best_v = -INFINITY;
    double alo = lo, ahi = hi, blo = lo, bhi = hi;
    for (int r = 0; r < rounds; ++r) {
        for (int i = 0; i < steps; ++i) {
            const double a = alo + (ahi - alo) * i / (steps - 1);
            for (int j = 0; j < steps; ++j) {
                const double b = blo + (bhi - blo) * j / (steps - 1);
                const double v = f(a, b);
                if (v > best_v) {
                    best_v = v;
                    best = {a, b};
                }
            }
        }
        const double wa = (ahi - alo) / (steps - 1) * 4.0;
        const double wb = (bhi - blo) / (steps - 1) * 4.0;
        alo = best.a - wa;
        ahi = best.a + wa;
        blo = best.b - wb;
        bhi = best.b + wb;
    }
    return best;
}

// Maximize over a 1-D grid with refinement.
inline double grid_maximize_1d(const std::function<double(double)>& f, double lo, double hi, int steps = 201,
                               int rounds = 20)
{
    double best = lo;
    double best_v = -INFINITY;
    for (int r = 0; r < rounds; ++r) {
        for (int i = 0; i < steps; ++i) {
            const double x = lo + (hi - lo) * i / (steps - 1);
            const double v = f(x);
            if (v > best_v) {
                best_v = v;
                best = x;
            }
        }
        const double w = (hi - lo) / (steps - 1) * 3.0;
        lo = best - w;
        hi = best + w;
    }
    return best;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b)
{
    const double n = double(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

} // namespace oracle

#pragma once

// Least angle regression with the lasso modification.
//
// Solves min 1/2 |y - X w|^2 + lambda |w|_1 along the whole lambda path. The
// inverse of the active Gram matrix is grown by a Schur-complement block
// update when a variable enters and shrunk by the complementary downdate when
// one is dropped. Every knot of the path is recorded.

#include "men/common.hpp"
#include "men/transform.hpp"

#include <optional>
#include <string>
#include <vector>

namespace men::lars {

inline constexpr double kTieTolerance = 1e-12;
inline constexpr double kSchurThreshold = 1e-12;
inline constexpr double kStopRatio = 1e-12;

/// What happens at a knot: a variable reaches the active correlation and joins,
/// an active coefficient hits zero and leaves, or the least-squares end is reached.
enum class EventKind { enter, drop, end };

inline const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::enter: return "enter";
        case EventKind::drop: return "drop";
        case EventKind::end: return "end";
    }
    return "?";
}

struct Breakpoint {
    int loop = 0;
    EventKind event = EventKind::enter;
    Index variable = -1;
    Vector coeffs;
    double c_hat = 0.0;
    double l1_norm = 0.0;
};

struct CoefficientPath {
    std::vector<Breakpoint> breakpoints;
};

struct LarsState {
    IndexList active;
    std::vector<int> signs;  // parallel to `active`
    Vector coeffs;
    Matrix gram_inv;         // inverse of X_A^T X_A in `active` order
    Vector residual;
    Vector correlations;
    int loop = 0;
    int entries = 0;
    bool pending_entry = true;  // false right after a drop
    Index last_dropped = -1;

    bool is_active(Index j) const { return std::find(active.begin(), active.end(), j) != active.end(); }
};

struct Direction {
    Vector omega;       // coefficient change per unit step, over active
    Vector u;           // unit equiangular vector
    Vector a;           // X^T u
    double normalizer;  // A_A = (s^T G^{-1} s)^{-1/2}
};

/// X^T (y - X w); the factor 2 of the gradient is dropped.
inline Vector correlations(const Matrix& x, const Vector& y, const Vector& w) {
    const Vector r = y - x * w;
    return x.transpose() * r;
}

inline Vector correlations(const transform::AugmentedProblem& prob, const Vector& w) {
    return correlations(prob.xstar(), prob.ystar, w);
}

inline LarsState init_state(const Matrix& x, const Vector& y) {
    if (x.rows() != y.size()) throw Error("lars", "design/response row mismatch");
    LarsState s;
    s.coeffs = Vector::Zero(x.cols());
    s.residual = y;
    s.correlations = x.transpose() * y;
    s.gram_inv.resize(0, 0);
    return s;
}

inline double active_c_hat(const LarsState& s) {
    double c = 0.0;
    for (Index j : s.active) c = std::max(c, std::abs(s.correlations(j)));
    return c;
}

/// Largest inactive |c_j|; near-ties (relative 1e-12) resolve to the smaller index.
inline std::optional<Index> strongest_inactive(const LarsState& s) {
    std::vector<bool> act(static_cast<std::size_t>(s.coeffs.size()), false);
    for (Index j : s.active) act[static_cast<std::size_t>(j)] = true;
    double best = 0.0;
    for (Index j = 0; j < s.coeffs.size(); ++j)
        if (!act[static_cast<std::size_t>(j)]) best = std::max(best, std::abs(s.correlations(j)));
    if (best <= 0.0) return std::nullopt;
    for (Index j = 0; j < s.coeffs.size(); ++j)
        if (!act[static_cast<std::size_t>(j)] && std::abs(s.correlations(j)) >= best * (1.0 - kTieTolerance)) return j;
    return std::nullopt;
}

/// Block inverse of [[G, b], [b^T, d]] from G^{-1}; nullopt when the Schur
/// complement d - b^T G^{-1} b is not above the threshold (relative to d).
inline std::optional<Matrix> gram_update(const Matrix& gram_inv, const Vector& b, double d) {
    const Index m = gram_inv.rows();
    if (b.size() != m) throw Error("lars", "gram_update: border length mismatch");
    const Vector gb = gram_inv * b;  // A^{-1} B
    const double schur = d - b.dot(gb);
    if (!(schur > kSchurThreshold * std::max(d, 1.0)) || !std::isfinite(schur)) return std::nullopt;
    const double sinv = 1.0 / schur;
    Matrix out(m + 1, m + 1);
    out.topLeftCorner(m, m) = gram_inv;
    out.topLeftCorner(m, m).noalias() += sinv * gb * gb.transpose();
    out.topRightCorner(m, 1) = -sinv * gb;
    out.bottomLeftCorner(1, m) = -sinv * gb.transpose();
    out(m, m) = sinv;
    return out;
}

/// Remove row/column `pos` from a maintained inverse: P - q q^T / s. nullopt on a tiny pivot.
inline std::optional<Matrix> gram_downdate(const Matrix& gram_inv, Index pos) {
    const Index m = gram_inv.rows();
    const double s = gram_inv(pos, pos);
    if (!(s > kSchurThreshold) || !std::isfinite(s)) return std::nullopt;
    IndexList keep;
    for (Index i = 0; i < m; ++i)
        if (i != pos) keep.push_back(i);
    Matrix out(m - 1, m - 1);
    Vector q(m - 1);
    for (Index i = 0; i < m - 1; ++i) {
        q(i) = gram_inv(keep[static_cast<std::size_t>(i)], pos);
        for (Index j = 0; j < m - 1; ++j)
            out(i, j) = gram_inv(keep[static_cast<std::size_t>(i)], keep[static_cast<std::size_t>(j)]);
    }
    out.noalias() -= q * q.transpose() / s;
    return out;
}

inline Matrix active_gram(const Matrix& x, const IndexList& active) {
    const Index m = static_cast<Index>(active.size());
    Matrix xa(x.rows(), m);
    for (Index k = 0; k < m; ++k) xa.col(k) = x.col(active[static_cast<std::size_t>(k)]);
    return xa.transpose() * xa;
}

/// Dense re-factorization of the active Gram inverse.
inline Matrix refactor_gram_inverse(const Matrix& x, const IndexList& active) {
    const Matrix g = active_gram(x, active);
    Eigen::LLT<Matrix> llt(g);
    if (llt.info() != Eigen::Success)
        throw Error("lars",
                    "active Gram matrix is singular (collinear active columns); use lambda2 > 0 to augment the design",
                    ErrorKind::numerical);
    const Vector diag = llt.matrixL().toDenseMatrix().diagonal();
    if (diag.minCoeff() <= std::sqrt(kSchurThreshold) * std::sqrt(g.diagonal().maxCoeff()))
        throw Error("lars",
                    "active Gram matrix is numerically singular; use lambda2 > 0 to augment the design",
                    ErrorKind::numerical);
    return llt.solve(Matrix::Identity(g.rows(), g.cols()));
}

/// Add the strongest inactive variable. Returns false if every inactive correlation is zero.
inline bool extend_active(LarsState& s, const Matrix& x) {
    const std::optional<Index> j = strongest_inactive(s);
    if (!j) return false;
    const Index m = static_cast<Index>(s.active.size());
    Vector b(m);
    for (Index k = 0; k < m; ++k) b(k) = x.col(s.active[static_cast<std::size_t>(k)]).dot(x.col(*j));
    const double d = x.col(*j).squaredNorm();
    std::optional<Matrix> next = gram_update(s.gram_inv, b, d);
    s.active.push_back(*j);
    s.signs.push_back(s.correlations(*j) >= 0.0 ? 1 : -1);
    s.gram_inv = next ? std::move(*next) : refactor_gram_inverse(x, s.active);
    ++s.entries;
    return true;
}

inline Direction direction(const LarsState& s, const Matrix& x) {
    const Index m = static_cast<Index>(s.active.size());
    if (m == 0) throw Error("lars", "direction requested with an empty active set");
    Vector sg(m);
    for (Index k = 0; k < m; ++k) sg(k) = s.signs[static_cast<std::size_t>(k)];
    const Vector gs = s.gram_inv * sg;
    const double q = sg.dot(gs);
    if (!(q > 0.0) || !std::isfinite(q))
        throw Error("lars", "active Gram matrix is not positive definite; use lambda2 > 0 to augment the design",
                    ErrorKind::numerical);
    Direction dir;
    dir.normalizer = 1.0 / std::sqrt(q);
    dir.omega = dir.normalizer * gs;
    dir.u = Vector::Zero(x.rows());
    for (Index k = 0; k < m; ++k) dir.u.noalias() += dir.omega(k) * x.col(s.active[static_cast<std::size_t>(k)]);
    dir.a = x.transpose() * dir.u;
    return dir;
}

struct StepCandidate {
    double rho = std::numeric_limits<double>::infinity();
    Index variable = -1;  // inactive index for rho1, active position for rho2
};

/// rho1 = min+ over inactive j of (C - c_j)/(A_A - a_j), (C + c_j)/(A_A + a_j);
/// the full least-squares step C/A_A when no positive candidate exists.
inline StepCandidate step_length(const LarsState& s, const Direction& dir, double c_hat) {
    const double full = c_hat / dir.normalizer;
    const double floor = kTieTolerance * full;
    std::vector<bool> act(static_cast<std::size_t>(s.coeffs.size()), false);
    for (Index j : s.active) act[static_cast<std::size_t>(j)] = true;
    StepCandidate best;
    for (Index j = 0; j < s.coeffs.size(); ++j) {
        if (act[static_cast<std::size_t>(j)]) continue;
        const double cj = s.correlations(j);
        const double aj = dir.a(j);
        const bool just_dropped = j == s.last_dropped;
        for (const auto& [num, den] : {std::pair{c_hat - cj, dir.normalizer - aj}, std::pair{c_hat + cj, dir.normalizer + aj}}) {
            if (den == 0.0) continue;
            // The side the dropped variable just left sits at zero up to rounding;
            // it may only come back with the opposite sign.
            if (just_dropped && ((cj >= 0.0) == (num == c_hat - cj))) continue;
            const double r = num / den;
            if (r > floor && std::isfinite(r) && r < best.rho) {
                best.rho = r;
                best.variable = j;
            }
        }
    }
    if (best.variable < 0 || best.rho > full) {
        best.rho = full;
        best.variable = -1;
    }
    return best;
}

/// rho2 = min+ over active of -w_j / omega_j: the first zero crossing.
inline StepCandidate drop_length(const LarsState& s, const Direction& dir) {
    StepCandidate best;
    for (std::size_t k = 0; k < s.active.size(); ++k) {
        const double wk = s.coeffs(s.active[k]);
        const double dk = dir.omega(static_cast<Index>(k));
        if (dk == 0.0 || wk == 0.0) continue;
        const double r = -wk / dk;
        if (r > 0.0 && r < best.rho) {
            best.rho = r;
            best.variable = static_cast<Index>(k);
        }
    }
    return best;
}

struct StepResult {
    double rho = 0.0;
    EventKind event = EventKind::end;
    Index variable = -1;
};

/// Advance along the equiangular direction to the next knot.
inline StepResult lars_step(LarsState& s, const Matrix& x, const Vector& y) {
    const double c_hat = active_c_hat(s);
    const Direction dir = direction(s, x);
    const StepCandidate r1 = step_length(s, dir, c_hat);
    const StepCandidate r2 = drop_length(s, dir);

    StepResult out;
    const bool drop = r2.rho < r1.rho;
    out.rho = drop ? r2.rho : r1.rho;
    for (std::size_t k = 0; k < s.active.size(); ++k) s.coeffs(s.active[k]) += out.rho * dir.omega(static_cast<Index>(k));
    s.last_dropped = -1;

    if (drop) {
        const Index pos = r2.variable;
        const Index var = s.active[static_cast<std::size_t>(pos)];
        s.coeffs(var) = 0.0;
        std::optional<Matrix> down = gram_downdate(s.gram_inv, pos);
        s.active.erase(s.active.begin() + pos);
        s.signs.erase(s.signs.begin() + pos);
        s.gram_inv = down ? std::move(*down) : refactor_gram_inverse(x, s.active);
        s.pending_entry = s.active.empty();
        s.last_dropped = var;
        out.event = EventKind::drop;
        out.variable = var;
    } else {
        s.pending_entry = true;
        out.event = r1.variable >= 0 ? EventKind::enter : EventKind::end;
        out.variable = r1.variable;
    }

    // Recompute from the coefficients rather than accumulating rho * a.
    s.residual = y;
    for (Index j : s.active) s.residual.noalias() -= s.coeffs(j) * x.col(j);
    s.correlations.noalias() = x.transpose() * s.residual;
    ++s.loop;
    if (!s.coeffs.allFinite() || !s.correlations.allFinite())
        throw Error("lars", "non-finite coefficients at loop " + std::to_string(s.loop), ErrorKind::numerical);
    return out;
}

struct SolveOptions {
    int max_active = 0;  // K; <= 0 means all features
    double scale = 1.0;  // sqrt(1 + lambda2)
    bool double_shrinkage_correction = false;
    int max_loops = 0;   // <= 0 picks 8 (p + 1)
};

struct SolveResult {
    Vector coeffs;  // W*
    Vector w;       // reported column: W*/scale, or W* * scale with the correction
    CoefficientPath path;
    std::vector<double> objective;  // |y - X W*|^2 at every knot
    int entries = 0;
    int loops = 0;
    bool reached_least_squares = false;
    bool hit_loop_cap = false;
};

/// Run LARS-lasso until K variables are active at a knot, or the path reaches least squares.
inline SolveResult solve(const Matrix& x, const Vector& y, const SolveOptions& opt) {
    const Index p = x.cols();
    const Index k_target = opt.max_active <= 0 ? p : std::min<Index>(opt.max_active, p);
    const int cap = opt.max_loops > 0 ? opt.max_loops : static_cast<int>(8 * (p + 1));

    LarsState s = init_state(x, y);
    SolveResult res;
    auto record = [&](EventKind ev, Index var, double c_hat) {
        Breakpoint bp;
        bp.loop = s.loop;
        bp.event = ev;
        bp.variable = var;
        bp.coeffs = s.coeffs;
        bp.c_hat = c_hat;
        bp.l1_norm = s.coeffs.lpNorm<1>();
        res.path.breakpoints.push_back(std::move(bp));
        res.objective.push_back(s.residual.squaredNorm());
    };

    const double c0 = s.correlations.size() ? s.correlations.cwiseAbs().maxCoeff() : 0.0;
    if (!(c0 > 0.0)) {
        record(EventKind::end, -1, 0.0);
        res.reached_least_squares = true;
    } else {
        record(EventKind::enter, *strongest_inactive(s), c0);
        while (true) {
            if (s.pending_entry && !extend_active(s, x)) {
                res.reached_least_squares = true;
                break;
            }
            StepResult step = lars_step(s, x, y);
            const double c_hat = s.correlations.cwiseAbs().maxCoeff();
            const bool done = c_hat <= kStopRatio * c0 || step.event == EventKind::end;
            if (done) {
                step.event = EventKind::end;
                step.variable = -1;
            }
            record(step.event, step.variable, c_hat);
            if (done) {
                res.reached_least_squares = true;
                break;
            }
            if (step.event != EventKind::drop && static_cast<Index>(s.active.size()) >= k_target) break;
            if (s.loop >= cap) {
                res.hit_loop_cap = true;
                break;
            }
        }
    }
    res.coeffs = s.coeffs;
    res.entries = s.entries;
    res.loops = s.loop;
    res.w = opt.double_shrinkage_correction ? Vector(s.coeffs * opt.scale) : Vector(s.coeffs / opt.scale);
    return res;
}

/// One projection column: K-sparse solve of an augmented problem.
inline SolveResult solve_column(const transform::AugmentedProblem& prob, int k, bool double_shrinkage_correction = false) {
    if (k < 1) throw Error("lars", "K must be >= 1");
    SolveOptions opt;
    opt.max_active = k;
    opt.scale = prob.scale;
    opt.double_shrinkage_correction = double_shrinkage_correction;
    return solve(prob.xstar(), prob.ystar, opt);
}

}  // namespace men::lars

#pragma once

#include <complex>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace eqcont {

// H(x, t) with x in S^n (S = double or std::complex<double>) and real t.
template <class S>
class Homotopy {
public:
    using VecS = Eigen::Matrix<S, Eigen::Dynamic, 1>;
    using MatS = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

    virtual ~Homotopy() = default;
    virtual int dimension() const = 0;
    virtual VecS eval(const VecS& x, double t) const = 0;
    virtual MatS jac_x(const VecS& x, double t) const = 0;
    virtual VecS jac_t(const VecS& x, double t) const = 0;

    // Residual plus both Jacobians; override when they share work.
    virtual void eval_all(const VecS& x, double t, VecS* f, MatS* jx, VecS* jt) const
    {
        if (f) *f = eval(x, t);
        if (jx) *jx = jac_x(x, t);
        if (jt) *jt = jac_t(x, t);
    }

    // Davidenko right-hand side dx/dt = -J_x^{-1} J_t. Returns false when
    // the linear solve is not trustworthy.
    virtual bool tangent(const VecS& x, double t, VecS& dx) const;
};

using RealHomotopy = Homotopy<double>;
using ComplexHomotopy = Homotopy<std::complex<double>>;

struct TrackerConfig {
    double step_init = 1e-3;
    double step_min = 1e-8;
    double step_max = 1e-1;
    double newton_tol = 1e-10;
    int newton_max_iters = 10;
    double diverge_cap = 1e10;
    double singular_eig_tol = 1e-8;
    double endgame_radius = 1e-2;
    double endgame_ratio = 0.7;
    double endgame_floor = 1e-8;
    double start_tol = 1e-8;
    // Relative Newton step size accepted as converged during tracking.
    double corrector_tol = 1e-10;
    // Largest first Newton correction, relative to 1 + |x|, before the step
    // is rejected as a possible path jump.
    double corrector_trust = 0.1;
    bool monitor_singular = true;
    // Real homotopies: flag a sign change of det J_x between steps.
    bool detect_det_sign = true;
    bool trace = false;
    long max_steps = 200000;
    int threads = 1;

    void validate() const;
};

enum class PathStatus { converged, diverged, singular, step_failure };
std::string_view to_string(PathStatus s);

template <class S>
struct PathPoint {
    double t = 0;
    double step = 0;
    Eigen::Matrix<S, Eigen::Dynamic, 1> x;
    double min_sv = 0;
};

template <class S>
struct PathResult {
    Eigen::Matrix<S, Eigen::Dynamic, 1> endpoint;
    PathStatus status = PathStatus::step_failure;
    double t_final = 0;
    double min_abs_eig_seen = 0;  // smallest singular value of J_x along the path
    long steps_taken = 0;
    double residual = 0;          // ‖H(endpoint, t_final)‖∞
    bool bad_start = false;
    std::vector<PathPoint<S>> trace;
};

template <class S>
PathResult<S> track(const Homotopy<S>& h, const Eigen::Matrix<S, Eigen::Dynamic, 1>& x0, double t_from,
                    double t_to, const TrackerConfig& cfg);

template <class S>
std::vector<PathResult<S>> track_all(const Homotopy<S>& h,
                                     const std::vector<Eigen::Matrix<S, Eigen::Dynamic, 1>>& starts,
                                     double t_from, double t_to, const TrackerConfig& cfg);

// Newton on H(., t) = 0 from x; returns true when ‖H‖∞ <= tol.
template <class S>
bool newton_correct(const Homotopy<S>& h, Eigen::Matrix<S, Eigen::Dynamic, 1>& x, double t, double tol,
                    int max_iters);

template <class S>
struct JacobianDiagnostics {
    double min_sv = 0;
    double max_sv = 0;
    double condition = 0;
    S det_phase{};         // sign (real) or unit phase (complex) of det J_x
    double log_abs_det = 0;
    S det() const { return det_phase * std::exp(log_abs_det); }
};

template <class S>
JacobianDiagnostics<S> jacobian_diagnostics(const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>& jac);
template <class S>
JacobianDiagnostics<S> jacobian_diagnostics(const Homotopy<S>& h, const Eigen::Matrix<S, Eigen::Dynamic, 1>& x,
                                            double t);

// Max-norm clustering with component-wise median representatives, sorted
// lexicographically (complex: real part, then imaginary part).
std::vector<Eigen::VectorXd> dedup(const std::vector<Eigen::VectorXd>& pts, double tol = 1e-6);
std::vector<Eigen::VectorXcd> dedup(const std::vector<Eigen::VectorXcd>& pts, double tol = 1e-6);

// Path trace CSV: path_id, t, step, re/im of each coordinate, min_sv.
template <class S>
void write_trace_csv(std::ostream& os, const std::vector<PathResult<S>>& results);

// Finite-difference consistency check of eval vs. jac_x/jac_t; returns the
// largest absolute discrepancy.
template <class S>
double jacobian_fd_error(const Homotopy<S>& h, const Eigen::Matrix<S, Eigen::Dynamic, 1>& x, double t,
                         double rel_step = 1e-6);

}  // namespace eqcont

#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>

namespace hydrofcr::qp {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// minimize 1/2 x'Px + q'x  subject to  l <= Ax <= u.
/// P is symmetrized on input; slightly indefinite P (eigenvalues down to
/// -1e-9) is tolerated and handled by the splitting regularization.
struct Problem {
    Eigen::MatrixXd P;
    Eigen::VectorXd q;
    Eigen::MatrixXd A;
    Eigen::VectorXd l;
    Eigen::VectorXd u;

    Eigen::Index num_vars() const { return q.size(); }
    Eigen::Index num_constraints() const { return l.size(); }
};

enum class Status { Solved, MaxIter, Infeasible };

const char* status_name(Status s);

struct Solution {
    Eigen::VectorXd x;  ///< primal
    Eigen::VectorXd y;  ///< dual of the row constraints
    Status status = Status::MaxIter;
    double primal_res = kInf;
    double dual_res = kInf;
    int iterations = 0;
    double objective = 0.0;
    bool polished = false;
};

struct Settings {
    double eps_abs = 1e-6;
    int max_iter = 20000;
    double rho = 0.1;
    double sigma = 1e-6;
    double alpha = 1.6;       ///< over-relaxation
    int scaling_iters = 10;   ///< Ruiz equilibration sweeps; 0 disables
    bool adaptive_rho = true;
    bool polish = true;
    double eps_infeasible = 1e-8;
    int check_interval = 25;
};

/// Operator-splitting solver with a persistent workspace. The factorization
/// depends on (P, A, rho, sigma) only, so repeated solves that change just
/// q, l, u reuse it; this is the hot path of the receding-horizon loop.
class Solver {
public:
    Solver(Eigen::MatrixXd P, Eigen::MatrixXd A, Settings settings = {});

    /// Replace the vector data; P and A keep their values.
    void set_vectors(Eigen::VectorXd q, Eigen::VectorXd l, Eigen::VectorXd u);

    Solution solve();
    /// Warm start from a previous (x, y) pair for the same problem family.
    Solution solve(const Eigen::VectorXd& x0, const Eigen::VectorXd& y0);

    const Settings& settings() const { return settings_; }
    Settings& settings() { return settings_; }

private:
    void scale_problem();
    void factorize();
    Solution run(Eigen::VectorXd x_scaled, Eigen::VectorXd y_scaled);
    void compute_residuals(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys,
                           const Eigen::VectorXd& zs, double& r_prim, double& r_dual) const;
    bool primal_infeasibility_certificate(const Eigen::VectorXd& dy_scaled) const;
    bool dual_infeasibility_certificate(const Eigen::VectorXd& dx_scaled) const;
    bool try_polish(Solution& sol) const;

    Settings settings_;
    Eigen::Index n_ = 0, m_ = 0;

    // original data
    Eigen::MatrixXd P_, A_;
    Eigen::VectorXd q_, l_, u_;

    // scaled data and scaling diagonals
    Eigen::MatrixXd Ps_, As_;
    Eigen::VectorXd qs_, ls_, us_;
    Eigen::VectorXd d_;  // variable scaling
    Eigen::VectorXd e_;  // constraint scaling
    double c_ = 1.0;     // cost scaling

    Eigen::VectorXd rho_vec_;  // per-row step (larger on equality rows)
    double rho_ = 0.1;
    Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// One-shot interface used by callers without a hot loop.
Solution solve(const Problem& problem, const Settings& settings);
Solution solve(const Problem& problem, double eps_abs = 1e-6, int max_iter = 20000);

/// Flag-gated debug artifact: writes P, q, A, l, u as CSV files with the
/// given path prefix for offline inspection.
void dump_csv(const Problem& problem, const std::string& path_prefix);

} // namespace hydrofcr::qp

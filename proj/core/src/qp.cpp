#include "hydrofcr/qp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "hydrofcr/errors.hpp"

namespace hydrofcr::qp {

namespace {

double inf_norm(const Eigen::VectorXd& v) {
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

bool is_equality(double l, double u) {
    return std::isfinite(l) && std::isfinite(u) && (u - l) < 1e-12;
}

bool is_loose(double l, double u) {
    return !std::isfinite(l) && !std::isfinite(u);
}

constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e6;
constexpr double kRhoEq = 1e3;     // stiffening factor on equality rows
constexpr double kRhoLoose = 1e-6; // relaxation factor on unbounded rows

} // namespace

const char* status_name(Status s) {
    switch (s) {
        case Status::Solved: return "solved";
        case Status::MaxIter: return "max_iter";
        case Status::Infeasible: return "infeasible";
    }
    return "unknown";
}

Solver::Solver(Eigen::MatrixXd P, Eigen::MatrixXd A, Settings settings)
    : settings_(settings), P_(std::move(P)), A_(std::move(A)) {
    n_ = P_.rows();
    m_ = A_.rows();
    if (P_.cols() != n_) throw ConfigError("qp: P must be square");
    if (m_ > 0 && A_.cols() != n_) throw ConfigError("qp: A column count mismatch");
    P_ = ((P_ + P_.transpose()) / 2.0).eval();  // symmetrize
    q_ = Eigen::VectorXd::Zero(n_);
    l_ = Eigen::VectorXd::Constant(m_, -kInf);
    u_ = Eigen::VectorXd::Constant(m_, kInf);
    d_ = Eigen::VectorXd::Ones(n_);
    e_ = Eigen::VectorXd::Ones(m_);
    scale_problem();
    rho_ = settings_.rho;
    factorize();
}

void Solver::set_vectors(Eigen::VectorXd q, Eigen::VectorXd l, Eigen::VectorXd u) {
    if (q.size() != n_ || l.size() != m_ || u.size() != m_)
        throw ConfigError("qp: vector size mismatch");
    for (Eigen::Index i = 0; i < m_; ++i)
        if (l[i] > u[i]) throw ConfigError("qp: l > u on row " + std::to_string(i));
    q_ = std::move(q);
    l_ = std::move(l);
    u_ = std::move(u);
    qs_ = c_ * d_.cwiseProduct(q_);
    ls_ = e_.cwiseProduct(l_);
    us_ = e_.cwiseProduct(u_);
    // equality/loose row classification may have changed
    bool rho_changed = false;
    for (Eigen::Index i = 0; i < m_; ++i) {
        double r = rho_;
        if (is_equality(l_[i], u_[i])) r = std::clamp(rho_ * kRhoEq, kRhoMin, kRhoMax);
        else if (is_loose(l_[i], u_[i])) r = std::clamp(rho_ * kRhoLoose, kRhoMin, kRhoMax);
        if (rho_vec_[i] != r) { rho_vec_[i] = r; rho_changed = true; }
    }
    if (rho_changed) factorize();
}

void Solver::scale_problem() {
    Ps_ = P_;
    As_ = A_;
    qs_ = q_;
    c_ = 1.0;
    d_.setOnes();
    e_.setOnes();
    for (int sweep = 0; sweep < settings_.scaling_iters; ++sweep) {
        Eigen::VectorXd dx(n_), de(m_);
        for (Eigen::Index j = 0; j < n_; ++j) {
            double nrm = Ps_.col(j).cwiseAbs().maxCoeff();
            if (m_ > 0) nrm = std::max(nrm, As_.col(j).cwiseAbs().maxCoeff());
            dx[j] = (nrm > 1e-12 && std::isfinite(nrm)) ? 1.0 / std::sqrt(nrm) : 1.0;
        }
        for (Eigen::Index i = 0; i < m_; ++i) {
            const double nrm = As_.row(i).cwiseAbs().maxCoeff();
            de[i] = (nrm > 1e-12 && std::isfinite(nrm)) ? 1.0 / std::sqrt(nrm) : 1.0;
        }
        Ps_ = dx.asDiagonal() * Ps_ * dx.asDiagonal();
        qs_ = dx.cwiseProduct(qs_);
        if (m_ > 0) As_ = de.asDiagonal() * As_ * dx.asDiagonal();
        d_ = d_.cwiseProduct(dx);
        e_ = e_.cwiseProduct(de);

        double mean_col = 0.0;
        for (Eigen::Index j = 0; j < n_; ++j) mean_col += Ps_.col(j).cwiseAbs().maxCoeff();
        mean_col /= static_cast<double>(std::max<Eigen::Index>(n_, 1));
        const double denom = std::max(mean_col, inf_norm(qs_));
        if (denom > 1e-12 && std::isfinite(denom)) {
            const double g = 1.0 / denom;
            Ps_ *= g;
            qs_ *= g;
            c_ *= g;
        }
    }
    ls_ = e_.cwiseProduct(l_);
    us_ = e_.cwiseProduct(u_);
}

void Solver::factorize() {
    rho_vec_.resize(m_);
    for (Eigen::Index i = 0; i < m_; ++i) {
        double r = rho_;
        if (is_equality(l_[i], u_[i])) r = rho_ * kRhoEq;
        else if (is_loose(l_[i], u_[i])) r = rho_ * kRhoLoose;
        rho_vec_[i] = std::clamp(r, kRhoMin, kRhoMax);
    }
    Eigen::MatrixXd K = Ps_;
    K.diagonal().array() += settings_.sigma;
    if (m_ > 0) K.noalias() += As_.transpose() * rho_vec_.asDiagonal() * As_;
    llt_.compute(K);
    if (llt_.info() != Eigen::Success)
        throw Error("qp: KKT factorization failed");
}

void Solver::compute_residuals(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys,
                               const Eigen::VectorXd& zs, double& r_prim, double& r_dual) const {
    const Eigen::VectorXd x = d_.cwiseProduct(xs);
    const Eigen::VectorXd y = m_ > 0 ? (e_.cwiseProduct(ys) / c_).eval() : ys;
    const Eigen::VectorXd z = m_ > 0 ? zs.cwiseQuotient(e_).eval() : zs;
    r_prim = m_ > 0 ? inf_norm(A_ * x - z) : 0.0;
    Eigen::VectorXd dual = P_ * x + q_;
    if (m_ > 0) dual.noalias() += A_.transpose() * y;
    r_dual = inf_norm(dual);
}

bool Solver::primal_infeasibility_certificate(const Eigen::VectorXd& dy_scaled) const {
    if (m_ == 0) return false;
    const Eigen::VectorXd dy = e_.cwiseProduct(dy_scaled) / c_;
    const double nrm = inf_norm(dy);
    if (nrm < 1e-14) return false;
    const double eps = settings_.eps_infeasible * nrm;
    if (inf_norm(A_.transpose() * dy) > eps) return false;
    double support = 0.0;
    for (Eigen::Index i = 0; i < m_; ++i) {
        const double v = dy[i];
        if (v > eps) {
            if (!std::isfinite(u_[i])) return false;
            support += u_[i] * v;
        } else if (v < -eps) {
            if (!std::isfinite(l_[i])) return false;
            support += l_[i] * v;
        }
    }
    return support <= -eps;
}

bool Solver::dual_infeasibility_certificate(const Eigen::VectorXd& dx_scaled) const {
    const Eigen::VectorXd dx = d_.cwiseProduct(dx_scaled);
    const double nrm = inf_norm(dx);
    if (nrm < 1e-14) return false;
    const double eps = settings_.eps_infeasible * nrm;
    if (inf_norm(P_ * dx) > eps) return false;
    if (q_.dot(dx) > -eps) return false;
    if (m_ > 0) {
        const Eigen::VectorXd adx = A_ * dx;
        for (Eigen::Index i = 0; i < m_; ++i) {
            if (std::isfinite(u_[i]) && adx[i] > eps) return false;
            if (std::isfinite(l_[i]) && adx[i] < -eps) return false;
        }
    }
    return true;
}

bool Solver::try_polish(Solution& sol) const {
    if (m_ == 0) return false;
    // +1 upper-bound active, -1 lower-bound active, 0 inactive
    std::vector<int> side(static_cast<std::size_t>(m_), 0);
    for (Eigen::Index i = 0; i < m_; ++i) {
        if (is_loose(l_[i], u_[i])) continue;
        if (sol.y[i] < 0 && std::isfinite(l_[i])) side[static_cast<std::size_t>(i)] = -1;
        else if (sol.y[i] > 0 && std::isfinite(u_[i])) side[static_cast<std::size_t>(i)] = 1;
    }

    constexpr double kReg = 1e-9;
    constexpr double kSignTol = 1e-9;
    Eigen::VectorXd x_pol, y_pol;
    bool signs_ok = false;
    for (int attempt = 0; attempt < 4 && !signs_ok; ++attempt) {
        std::vector<Eigen::Index> active;
        for (Eigen::Index i = 0; i < m_; ++i)
            if (side[static_cast<std::size_t>(i)] != 0) active.push_back(i);

        const Eigen::Index na = static_cast<Eigen::Index>(active.size());
        const Eigen::Index dim = n_ + na;
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(dim, dim);
        K.topLeftCorner(n_, n_) = P_;
        K.topLeftCorner(n_, n_).diagonal().array() += kReg;
        Eigen::VectorXd rhs(dim);
        rhs.head(n_) = -q_;
        for (Eigen::Index a = 0; a < na; ++a) {
            K.block(0, n_ + a, n_, 1) = A_.row(active[a]).transpose();
            K.block(n_ + a, 0, 1, n_) = A_.row(active[a]);
            K(n_ + a, n_ + a) = -kReg;
            rhs[n_ + a] = side[static_cast<std::size_t>(active[a])] > 0 ? u_[active[a]]
                                                                        : l_[active[a]];
        }

        Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);
        Eigen::VectorXd sol_kkt = lu.solve(rhs);
        Eigen::MatrixXd K0 = K;
        K0.topLeftCorner(n_, n_).diagonal().array() -= kReg;
        for (Eigen::Index a = 0; a < na; ++a) K0(n_ + a, n_ + a) = 0.0;
        for (int it = 0; it < 2; ++it) {
            const Eigen::VectorXd resid = rhs - K0 * sol_kkt;
            sol_kkt += lu.solve(resid);
        }
        if (!sol_kkt.allFinite()) return false;

        x_pol = sol_kkt.head(n_);
        y_pol = Eigen::VectorXd::Zero(m_);
        for (Eigen::Index a = 0; a < na; ++a) y_pol[active[a]] = sol_kkt[n_ + a];

        // drop rows whose multiplier came out with the wrong sign and retry
        signs_ok = true;
        for (Eigen::Index a = 0; a < na; ++a) {
            const Eigen::Index i = active[a];
            const int s = side[static_cast<std::size_t>(i)];
            if (is_equality(l_[i], u_[i])) continue;  // equality multipliers are sign-free
            const double nu = sol_kkt[n_ + a];
            if ((s > 0 && nu < -kSignTol) || (s < 0 && nu > kSignTol)) {
                side[static_cast<std::size_t>(i)] = 0;
                signs_ok = false;
            }
        }
    }
    if (!signs_ok) return false;

    const Eigen::VectorXd ax = A_ * x_pol;
    double r_prim = 0.0;
    for (Eigen::Index i = 0; i < m_; ++i) {
        double v = 0.0;
        if (std::isfinite(l_[i])) v = std::max(v, l_[i] - ax[i]);
        if (std::isfinite(u_[i])) v = std::max(v, ax[i] - u_[i]);
        r_prim = std::max(r_prim, v);
    }
    const double r_dual = inf_norm(P_ * x_pol + q_ + A_.transpose() * y_pol);
    if (std::max(r_prim, r_dual) <= std::max(sol.primal_res, sol.dual_res)) {
        sol.x = std::move(x_pol);
        sol.y = std::move(y_pol);
        sol.primal_res = r_prim;
        sol.dual_res = r_dual;
        sol.polished = true;
        return true;
    }
    return false;
}

Solution Solver::run(Eigen::VectorXd x, Eigen::VectorXd y) {
    Solution sol;
    Eigen::VectorXd z(m_);
    if (m_ > 0) z = (As_ * x).cwiseMax(ls_).cwiseMin(us_);

    Eigen::VectorXd x_prev = x, y_prev = y;
    double r_prim = kInf, r_dual = kInf;
    int iter = 0;
    for (; iter < settings_.max_iter; ++iter) {
        if (iter % settings_.check_interval == 0) {
            compute_residuals(x, y, z, r_prim, r_dual);
            if (r_prim <= settings_.eps_abs && r_dual <= settings_.eps_abs) break;
            if (iter > 0) {
                if (primal_infeasibility_certificate(y - y_prev)) {
                    sol.status = Status::Infeasible;
                    break;
                }
                if (dual_infeasibility_certificate(x - x_prev)) {
                    sol.status = Status::Infeasible;
                    break;
                }
                if (settings_.adaptive_rho) {
                    const Eigen::VectorXd xu = d_.cwiseProduct(x);
                    const Eigen::VectorXd yu =
                        m_ > 0 ? (e_.cwiseProduct(y) / c_).eval() : Eigen::VectorXd(y);
                    double p_scale = 1e-10, d_scale = 1e-10;
                    if (m_ > 0) {
                        p_scale = std::max({inf_norm(A_ * xu),
                                            inf_norm(z.cwiseQuotient(e_)), 1e-10});
                        d_scale = std::max({inf_norm(P_ * xu), inf_norm(q_),
                                            inf_norm(A_.transpose() * yu), 1e-10});
                    }
                    const double ratio = std::sqrt((r_prim / p_scale) / std::max(r_dual / d_scale, 1e-16));
                    if (std::isfinite(ratio) && (ratio > 5.0 || ratio < 0.2)) {
                        rho_ = std::clamp(rho_ * ratio, kRhoMin, kRhoMax);
                        factorize();
                    }
                }
                x_prev = x;
                y_prev = y;
            }
        }

        Eigen::VectorXd rhs = settings_.sigma * x - qs_;
        if (m_ > 0) rhs.noalias() += As_.transpose() * (rho_vec_.cwiseProduct(z) - y);
        const Eigen::VectorXd x_tilde = llt_.solve(rhs);
        const Eigen::VectorXd x_next = settings_.alpha * x_tilde + (1.0 - settings_.alpha) * x;
        if (m_ > 0) {
            const Eigen::VectorXd z_tilde = As_ * x_tilde;
            const Eigen::VectorXd z_relaxed = settings_.alpha * z_tilde + (1.0 - settings_.alpha) * z;
            const Eigen::VectorXd z_next =
                (z_relaxed + y.cwiseQuotient(rho_vec_)).cwiseMax(ls_).cwiseMin(us_);
            y += rho_vec_.cwiseProduct(z_relaxed - z_next);
            z = z_next;
        }
        x = x_next;
    }

    if (sol.status != Status::Infeasible) {
        compute_residuals(x, y, z, r_prim, r_dual);
        sol.status = (r_prim <= settings_.eps_abs && r_dual <= settings_.eps_abs)
                         ? Status::Solved
                         : Status::MaxIter;
    }
    sol.iterations = iter;
    sol.x = d_.cwiseProduct(x);
    sol.y = m_ > 0 ? (e_.cwiseProduct(y) / c_).eval() : Eigen::VectorXd::Zero(0);
    sol.primal_res = r_prim;
    sol.dual_res = r_dual;

    if (settings_.polish && sol.status != Status::Infeasible) {
        // on MaxIter a successful polish can still reach the tolerance; the
        // recomputed residuals decide the status either way
        if (try_polish(sol) && sol.status == Status::MaxIter &&
            sol.primal_res <= settings_.eps_abs && sol.dual_res <= settings_.eps_abs)
            sol.status = Status::Solved;
    }
    sol.objective = 0.5 * sol.x.dot(P_ * sol.x) + q_.dot(sol.x);
    return sol;
}

Solution Solver::solve() {
    return run(Eigen::VectorXd::Zero(n_), Eigen::VectorXd::Zero(m_));
}

Solution Solver::solve(const Eigen::VectorXd& x0, const Eigen::VectorXd& y0) {
    if (x0.size() != n_ || y0.size() != m_) return solve();
    const Eigen::VectorXd xs = x0.cwiseQuotient(d_);
    const Eigen::VectorXd ys = m_ > 0 ? (c_ * y0.cwiseQuotient(e_)).eval() : y0;
    return run(xs, ys);
}

Solution solve(const Problem& problem, const Settings& settings) {
    Solver solver(problem.P, problem.A, settings);
    solver.set_vectors(problem.q, problem.l, problem.u);
    return solver.solve();
}

Solution solve(const Problem& problem, double eps_abs, int max_iter) {
    Settings s;
    s.eps_abs = eps_abs;
    s.max_iter = max_iter;
    return solve(problem, s);
}

void dump_csv(const Problem& problem, const std::string& path_prefix) {
    const Eigen::IOFormat csv(Eigen::FullPrecision, Eigen::DontAlignCols, ",", "\n");
    const auto write = [&](const std::string& name, const Eigen::MatrixXd& mat) {
        std::ofstream out(path_prefix + name + ".csv");
        out << mat.format(csv) << "\n";
    };
    write("P", problem.P);
    write("q", problem.q);
    write("A", problem.A);
    write("l", problem.l);
    write("u", problem.u);
}

} // namespace hydrofcr::qp

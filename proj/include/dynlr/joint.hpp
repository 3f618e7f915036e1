#pragma once

#include "dynlr/linalg.hpp"
#include "dynlr/radon.hpp"
#include "dynlr/tv.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dynlr {

struct FactorPair {
    Matrix B;  // N x K spatial features
    Matrix C;  // K x T temporal features
};

/// Weights of the joint models. Unused weights stay at zero.
struct JointConfig {
    std::size_t rank = 5;
    double alpha = 0.0;
    double lambda_b = 0.0;
    double mu_b = 0.0;
    double lambda_c = 0.0;
    double mu_c = 0.0;
    double lambda_x = 0.0;
    double mu_x = 0.0;
    double tau = 0.0;
    double eps_tv = 1e-5;
    std::size_t max_iter = 1200;
    double rel_tol = 5e-5;
    double floor = kDefaultFloor;
    /// Evaluate the cost every n-th iteration (1 = every iteration, 0 = never).
    std::size_t cost_every = 25;

    void validate() const;
};

enum class StopReason { MaxIterations, RelativeChange };

std::string to_string(StopReason r);

struct TraceEntry {
    std::size_t iteration = 0;
    double cost = 0.0;  // NaN when not evaluated at this iteration
    double rel_change_x = 0.0;
    double rel_change_b = 0.0;
    double rel_change_c = 0.0;
    double seconds = 0.0;  // wall time since the start of the solve
};

struct SolveTrace {
    std::vector<TraceEntry> entries;
    std::size_t iterations_run = 0;
    StopReason stop_reason = StopReason::MaxIterations;
    double seconds_update_x = 0.0;
    double seconds_update_b = 0.0;
    double seconds_update_c = 0.0;
    double seconds_cost = 0.0;
    double seconds_total = 0.0;

    /// Costs of all entries where the cost was evaluated, in order.
    std::vector<double> costs() const;
    double seconds_per_iteration() const;
};

/// CSV with header: iteration,cost,rel_change_x,rel_change_b,rel_change_c,seconds
/// Omitting the timing column makes the output reproducible byte for byte.
void write_trace_csv(std::ostream& os, const SolveTrace& trace, bool with_seconds = true);

/// Measurements together with the quantities every update needs: the
/// operators, the constant backprojection A_t^T Y_t and the TV neighbourhood.
class JointProblem {
public:
    JointProblem(Matrix data, const OperatorSet& ops);
    JointProblem(Matrix data, const OperatorSet& ops, NeighborhoodSystem nbhd);

    const Matrix& data() const { return data_; }
    const OperatorSet& ops() const { return *ops_; }
    const Matrix& backprojected() const { return backprojected_; }
    const NeighborhoodSystem& neighborhood() const { return nbhd_; }
    std::size_t pixels() const { return ops_->pixels(); }
    std::size_t steps() const { return ops_->steps(); }

    /// Column t = A_t^T A_t x_t.
    Matrix normal(const Matrix& x) const;

private:
    Matrix data_;
    const OperatorSet* ops_;
    Matrix backprojected_;
    NeighborhoodSystem nbhd_;
};

/// NNDSVD initialisation from the leading K singular triplets; zeros are
/// replaced by 1e-2 * mean(X0) and the result is floored.
FactorPair init_factors(const Matrix& x0, std::size_t rank, double floor = kDefaultFloor);

double cost_bcx(const JointProblem& problem, const Matrix& x, const Matrix& b, const Matrix& c,
                const JointConfig& cfg);
double cost_bc(const JointProblem& problem, const Matrix& b, const Matrix& c, const JointConfig& cfg);

Matrix bcx_update_X(const JointProblem& problem, const Matrix& x, const Matrix& b, const Matrix& c,
                    const JointConfig& cfg);
Matrix bcx_update_B(const Matrix& b, const Matrix& c, const Matrix& x, const NeighborhoodSystem& nbhd,
                    const JointConfig& cfg);
Matrix bcx_update_C(const Matrix& b, const Matrix& c, const Matrix& x, const JointConfig& cfg);

Matrix bc_update_B(const JointProblem& problem, const Matrix& b, const Matrix& c, const JointConfig& cfg);
Matrix bc_update_C(const JointProblem& problem, const Matrix& b, const Matrix& c, const JointConfig& cfg);

/// Stationary variants: the single operator acts on the K columns of B, never
/// on the T columns of B C. Requires problem.ops().stationary().
Matrix sbc_update_B(const JointProblem& problem, const Matrix& b, const Matrix& c, const JointConfig& cfg);
Matrix sbc_update_C(const JointProblem& problem, const Matrix& b, const Matrix& c, const JointConfig& cfg);

struct BcxResult {
    Matrix X;
    Matrix B;
    Matrix C;
    SolveTrace trace;
};

struct FactorResult {
    Matrix B;
    Matrix C;
    SolveTrace trace;
};

BcxResult bcx_solve(const JointProblem& problem, const JointConfig& cfg, const Matrix& x_init,
                    const FactorPair& init);
FactorResult bc_solve(const JointProblem& problem, const JointConfig& cfg, const FactorPair& init);
FactorResult sbc_solve(const JointProblem& problem, const JointConfig& cfg, const FactorPair& init);

/// Permutation sorting components by descending ||B[:, k]||_2 (stable).
std::vector<std::size_t> order_features(const Matrix& b, const Matrix& c);
FactorPair apply_feature_order(const FactorPair& f, const std::vector<std::size_t>& perm);

}  // namespace dynlr

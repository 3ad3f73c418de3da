#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fogopt/core.hpp"

namespace fogopt::env {

using core::BoxSet;
using core::Mat;
using core::RngStream;
using core::Vec;

enum class FeedbackMode { FullInfo, OnePoint, MultiPoint, ArmValue };

std::string to_string(FeedbackMode m);

// Coefficients of a separable quadratic loss sum_i quad[i] x_i^2 + lin[i] x_i,
// attached to slots whose loss has that closed form so solvers can exploit it.
struct SeparableQuadratic {
    Vec quad;
    Vec lin;
};

// One slot's loss f_t and constraint map g_t. Loss evaluations are metered:
// bandit modes get a fixed budget per slot and no gradient access. The
// benchmark side uses the oracle_* accessors, which bypass the meter.
class SlotFunctions {
  public:
    SlotFunctions(FeedbackMode mode, int eval_budget,
                  std::function<double(const Vec&)> loss,
                  std::function<Vec(const Vec&)> loss_grad,
                  std::function<Vec(const Vec&)> constraints,
                  std::function<Mat(const Vec&)> constraint_jac);

    FeedbackMode mode() const { return mode_; }
    int evals_used() const { return evals_used_; }
    int eval_budget() const { return eval_budget_; }

    // Metered loss evaluation; throws once the slot's feedback budget is spent.
    double eval_loss(const Vec& x);
    // Gradient of f_t; throws in bandit modes.
    Vec loss_gradient(const Vec& x) const;

    // Constraints are known formulas in every mode.
    Vec constraints(const Vec& x) const;
    Mat constraint_jacobian(const Vec& x) const;

    // Unmetered access for the clairvoyant benchmark and tests only.
    double oracle_loss(const Vec& x) const { return loss_(x); }
    Vec oracle_loss_gradient(const Vec& x) const;

    const std::optional<SeparableQuadratic>& quadratic_form() const { return quad_form_; }
    void set_quadratic_form(SeparableQuadratic qf) { quad_form_ = std::move(qf); }

  private:
    FeedbackMode mode_;
    int eval_budget_;
    int evals_used_ = 0;
    std::function<double(const Vec&)> loss_;
    std::function<Vec(const Vec&)> loss_grad_;
    std::function<Vec(const Vec&)> constraints_;
    std::function<Mat(const Vec&)> constraint_jac_;
    std::optional<SeparableQuadratic> quad_form_;
};

// ---------------------------------------------------------------------------
// Demand / exogenous-state processes

enum class DemandKind { IidUniform, MarkovAr1, AdversarialSwitch, AdversarialRamp };

DemandKind demand_kind_from_string(const std::string& s);
std::string to_string(DemandKind k);

struct DemandParams {
    DemandKind kind = DemandKind::IidUniform;
    double lo = 0.0;        // range of draws / levels
    double hi = 1.0;
    double rho = 0.9;       // AR coefficient, markov-ar1
    int period = 100;       // switch period, adversarial-switch
    double slope = 1e-3;    // per-slot drift, adversarial-ramp
    double d_max = -1.0;    // cap; defaults to hi when < 0
};

// Emits nonnegative demand vectors bounded by d_max, one per slot.
class DemandProcess {
  public:
    DemandProcess(std::size_t dim, DemandParams params, RngStream rng);

    Vec next();
    std::size_t dim() const { return state_.size(); }
    double d_max() const { return params_.d_max; }

  private:
    DemandParams params_;
    RngStream rng_;
    Vec state_;
    long slot_ = 0;
};

// ---------------------------------------------------------------------------
// Fog offloading environment

// Directed fog graph plus per-term convex-quadratic delay coefficients.
// The stacked decision is [edge offloads x^{nm} | cloud offloads chi^n | local x^{nn}],
// so its dimension is E + 2N.
struct FogNetwork {
    std::size_t n_nodes = 0;
    std::vector<std::pair<int, int>> edges;  // (from, to)
    BoxSet caps;        // over the stacked decision, lower = 0
    Vec delay_quad;     // a coefficients per stacked coordinate, >= 0
    Vec delay_lin;      // b coefficients per stacked coordinate
    double jitter = 0.0;  // relative coefficient jitter amplitude in [0,1)

    std::size_t dim() const { return edges.size() + 2 * n_nodes; }
    std::size_t edge_offset() const { return 0; }
    std::size_t cloud_offset() const { return edges.size(); }
    std::size_t local_offset() const { return edges.size() + n_nodes; }

    // Constant Jacobian of the per-node balance constraints (N x dim).
    Mat balance_jacobian() const;
    void validate() const;
};

FogNetwork make_line_fog(std::size_t n_nodes, double edge_cap, double cloud_cap,
                         double local_cap, Vec delay_quad, Vec delay_lin, double jitter);

// Builds the slot's loss/constraints from demands and a per-coordinate
// coefficient multiplier (one entry per delay term).
SlotFunctions fog_slot_with_multipliers(const FogNetwork& net, const Vec& demands,
                                        const Vec& coeff_mult, FeedbackMode mode,
                                        int eval_budget = -1);

// Same, with i.i.d. multipliers in [1-jitter, 1+jitter] drawn from coeff_draw.
SlotFunctions fog_slot(const FogNetwork& net, const Vec& demands, RngStream& coeff_draw,
                       FeedbackMode mode = FeedbackMode::FullInfo, int eval_budget = -1);

// Replayable stream of fog slots; demands and coefficient jitter evolve by the
// same process kind so slot variation is governed by one regime.
class FogOcoEnv {
  public:
    FogOcoEnv(FogNetwork net, DemandParams demand_params, FeedbackMode mode,
              std::uint64_t seed, int eval_budget = -1);

    SlotFunctions next();
    const FogNetwork& network() const { return net_; }
    const BoxSet& box() const { return net_.caps; }
    std::size_t n_constraints() const { return net_.n_nodes; }
    FeedbackMode mode() const { return mode_; }

  private:
    FogNetwork net_;
    FeedbackMode mode_;
    int eval_budget_;
    DemandProcess demands_;
    DemandProcess jitter_;  // mapped into [1-j, 1+j]
};

// ---------------------------------------------------------------------------
// Queueing network (semi-interactive setting)

struct QueueState {
    Vec q;  // nonnegative buffered workload per node
};

// Directed network with node-incidence matrix A (one +1 and one -1 per edge
// column). The exogenous term per slot is arrivals minus the fixed service
// vector, so it can take either sign while demands stay nonnegative.
class QueueNetwork {
  public:
    QueueNetwork(std::size_t n_nodes, std::vector<std::pair<int, int>> edges, Vec service,
                 DemandParams arrival_params, std::uint64_t seed);

    const Mat& incidence() const { return incidence_; }
    std::size_t n_nodes() const { return n_nodes_; }
    std::size_t n_edges() const { return edges_.size(); }
    const QueueState& queues() const { return queues_; }
    const Vec& service() const { return service_; }

    // Next exogenous vector c_t = arrivals_t - service.
    Vec next_exogenous();
    // Mean exogenous vector under the arrival process (for stationary analysis).
    Vec mean_exogenous() const;

    void reset_queues();

  private:
    std::size_t n_nodes_;
    std::vector<std::pair<int, int>> edges_;
    Mat incidence_;
    Vec service_;
    DemandProcess arrivals_;
    DemandParams arrival_params_;
    QueueState queues_;

    friend QueueState& queue_step(QueueNetwork& net, const Vec& x, const Vec& c);
};

// q <- max(q + A x + c, 0); updates and returns the stored queue state.
QueueState& queue_step(QueueNetwork& net, const Vec& x, const Vec& c);

// ---------------------------------------------------------------------------
// Finite MDPs for tabular RL

struct FiniteMDP {
    std::size_t n_states = 0;
    std::size_t n_actions = 0;
    double discount = 0.9;
    // transition[a][s] is the distribution over next states (rows sum to 1)
    std::vector<std::vector<Vec>> transition;
    std::vector<Vec> cost;                     // cost[s][a]
    std::vector<std::vector<bool>> available;  // available[s][a]

    void validate() const;
    std::size_t sample_next(std::size_t s, std::size_t a, RngStream& rng) const;
};

FiniteMDP random_mdp(std::size_t n_states, std::size_t n_actions, double discount,
                     RngStream& rng);

// ---------------------------------------------------------------------------
// Discrete-arm environment (arm-value feedback)

enum class AvailabilityKind { Always, IidBernoulli, PeriodicBlocking };

struct ArmAvailability {
    AvailabilityKind kind = AvailabilityKind::Always;
    double rate = 1.0;  // per-arm availability probability (iid)
    int period = 50;    // blocking schedule period (adversarial)
};

// K discrete configurations with per-slot availability masks. Costs may be
// stationary tables or derived from a fog network over a decision grid with
// the deadline-miss indicator objective.
class ArmEnv {
  public:
    // stationary costs: f(k) and g(:,k) fixed over time
    ArmEnv(std::vector<Vec> arms, Vec arm_loss, Mat arm_constraints, ArmAvailability avail,
           std::uint64_t seed);

    // fog-grid arms: per-slot loss is the number of nodes whose delay exceeds
    // the deadline; constraints are the per-node balance values.
    ArmEnv(FogNetwork net, std::size_t grid_per_dim, double deadline,
           DemandParams demand_params, ArmAvailability avail, std::uint64_t seed);

    std::size_t n_arms() const { return arms_.size(); }
    std::size_t n_constraints() const { return n_constraints_; }
    const std::vector<Vec>& arms() const { return arms_; }
    double g_max() const;

    // Advance one slot: returns the availability mask.
    std::vector<bool> next_mask();
    // Observed values for the played arm in the current slot.
    double arm_loss(std::size_t k) const;
    Vec arm_constraints(std::size_t k) const;

    // Full tables for the current slot (benchmark/comparator use only).
    Vec oracle_losses() const;
    Mat oracle_constraints() const;

  private:
    void roll_slot_costs();

    std::vector<Vec> arms_;
    std::size_t n_constraints_ = 0;
    ArmAvailability avail_;
    RngStream avail_rng_;
    long slot_ = -1;

    // stationary mode
    bool stationary_ = true;
    Vec loss_table_;
    Mat constraint_table_;

    // fog-grid mode
    std::optional<FogNetwork> net_;
    double deadline_ = 0.0;
    std::optional<DemandProcess> demands_;
    std::optional<DemandProcess> jitter_;
    Vec cur_loss_;
    Mat cur_constraints_;
};

// Uniform grid over the box with `per_dim` points per coordinate, capped to
// `max_arms` lexicographically-first entries.
std::vector<Vec> discretize_box(const BoxSet& box, std::size_t per_dim, std::size_t max_arms);

}  // namespace fogopt::env

#pragma once

#include "ridepool/core.hpp"
#include "ridepool/costs.hpp"
#include "ridepool/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace ridepool {

namespace lp {

enum class Status { Optimal, Infeasible, WorkLimit };

// min cost . v  subject to  A v = rhs,  lb <= v <= ub. Columns are sparse.
struct Problem {
    int rows = 0;
    std::vector<std::vector<std::pair<int, double>>> cols;
    std::vector<double> cost;
    std::vector<double> lb;
    std::vector<double> ub;
    std::vector<double> rhs;

    int add_col(double c, double lo, double hi) {
        cols.emplace_back();
        cost.push_back(c);
        lb.push_back(lo);
        ub.push_back(hi);
        return static_cast<int>(cols.size()) - 1;
    }
    void set_entry(int col, int row, double v) {
        if (v != 0.0) cols[col].push_back({row, v});
    }
};

struct Result {
    Status status = Status::Infeasible;
    std::vector<double> x;
    double objective = 0.0;
};

// Two-phase primal simplex with bounded variables and a dense basis
// inverse. Entering variable by most negative reduced cost, switching to
// Bland's rule after a degenerate streak; ties everywhere break toward the
// smaller variable index, so identical problems pivot identically.
class Simplex {
public:
    static constexpr double kFeasTol = 1e-7;
    static constexpr double kCostTol = 1e-9;
    static constexpr double kPivTol = 1e-9;

    Result solve(const Problem& p, int64_t& work_budget) {
        m_ = p.rows;
        const int n = static_cast<int>(p.cols.size());
        const int total = n + m_;

        cols_ = p.cols;
        lb_ = p.lb;
        ub_ = p.ub;
        lb_.resize(total);
        ub_.resize(total);
        cost_.assign(total, 0.0);
        state_.assign(total, State::AtLower);
        value_.assign(total, 0.0);

        // All structurals start nonbasic at their lower bound (every
        // variable in these models has a finite one).
        for (int j = 0; j < n; ++j) value_[j] = lb_[j];

        std::vector<double> residual = p.rhs;
        for (int j = 0; j < n; ++j)
            if (value_[j] != 0.0)
                for (const auto& [r, a] : cols_[j]) residual[r] -= a * value_[j];

        // One artificial per row absorbs the residual; phase 1 drives their
        // sum to zero.
        basis_.resize(m_);
        binv_.assign(static_cast<size_t>(m_) * m_, 0.0);
        for (int i = 0; i < m_; ++i) {
            int art = n + i;
            double sign = residual[i] >= 0.0 ? 1.0 : -1.0;
            cols_.push_back({{i, sign}});
            lb_[art] = 0.0;
            ub_[art] = std::numeric_limits<double>::infinity();
            cost_[art] = 1.0;
            basis_[i] = art;
            state_[art] = State::Basic;
            value_[art] = std::abs(residual[i]);
            binv_[static_cast<size_t>(i) * m_ + i] = sign;
        }

        Status st = iterate(work_budget);
        if (st == Status::WorkLimit) return {Status::WorkLimit, {}, 0.0};
        double infeas = 0.0;
        for (int i = 0; i < m_; ++i)
            if (basis_[i] >= n) infeas += value_[basis_[i]];
        if (infeas > 1e-6) return {Status::Infeasible, {}, 0.0};

        for (int j = 0; j < n; ++j) cost_[j] = p.cost[j];
        for (int j = n; j < total; ++j) {
            cost_[j] = 0.0;
            ub_[j] = 0.0;  // artificials pinned at zero in phase 2
            if (state_[j] != State::Basic) value_[j] = 0.0;
        }
        st = iterate(work_budget);
        if (st == Status::WorkLimit) return {Status::WorkLimit, {}, 0.0};

        Result res;
        res.status = Status::Optimal;
        res.x.assign(n, 0.0);
        for (int j = 0; j < n; ++j) res.x[j] = value_[j];
        for (int j = 0; j < n; ++j) res.objective += p.cost[j] * value_[j];
        return res;
    }

private:
    enum class State { Basic, AtLower, AtUpper };

    Status iterate(int64_t& work_budget) {
        int degenerate_streak = 0;
        const int total = static_cast<int>(cols_.size());
        std::vector<double> y(m_), dir(m_);
        for (;;) {
            work_budget -= static_cast<int64_t>(m_) * m_ + total;
            if (work_budget < 0) return Status::WorkLimit;

            // Duals y = c_B B^-1.
            std::fill(y.begin(), y.end(), 0.0);
            for (int i = 0; i < m_; ++i) {
                double cb = cost_[basis_[i]];
                if (cb == 0.0) continue;
                const double* row = &binv_[static_cast<size_t>(i) * m_];
                for (int k = 0; k < m_; ++k) y[k] += cb * row[k];
            }

            // Entering variable.
            const bool bland = degenerate_streak > 40;
            int enter = -1;
            bool from_upper = false;
            double best_score = -kCostTol;
            for (int j = 0; j < total; ++j) {
                if (state_[j] == State::Basic || lb_[j] == ub_[j]) continue;
                double rc = cost_[j];
                for (const auto& [r, a] : cols_[j]) rc -= y[r] * a;
                double score = state_[j] == State::AtLower ? rc : -rc;
                if (score < -kCostTol) {
                    if (bland) {
                        enter = j;
                        from_upper = state_[j] == State::AtUpper;
                        break;
                    }
                    if (score < best_score) {
                        best_score = score;
                        enter = j;
                        from_upper = state_[j] == State::AtUpper;
                    }
                }
            }
            if (enter < 0) return Status::Optimal;

            // dir = B^-1 A_enter; basic i moves by -dir_i * (signed step).
            std::fill(dir.begin(), dir.end(), 0.0);
            for (const auto& [r, a] : cols_[enter])
                for (int i = 0; i < m_; ++i)
                    dir[i] += binv_[static_cast<size_t>(i) * m_ + r] * a;

            const double sign = from_upper ? -1.0 : 1.0;
            double t_max = ub_[enter] - lb_[enter];  // bound-to-bound flip
            int leave = -1;
            bool leave_to_upper = false;
            double leave_pivot = 0.0;
            for (int i = 0; i < m_; ++i) {
                double delta = dir[i] * sign;
                int bj = basis_[i];
                double t;
                bool to_upper;
                if (delta > kPivTol) {
                    t = (value_[bj] - lb_[bj]) / delta;
                    to_upper = false;
                } else if (delta < -kPivTol && std::isfinite(ub_[bj])) {
                    t = (ub_[bj] - value_[bj]) / (-delta);
                    to_upper = true;
                } else {
                    continue;
                }
                if (t < 0.0) t = 0.0;
                bool better = t < t_max - 1e-10;
                bool tie = !better && t <= t_max + 1e-10 && leave >= 0;
                if (tie) {
                    double a = std::abs(delta), b = std::abs(leave_pivot);
                    better = a > b + 1e-12 || (std::abs(a - b) <= 1e-12 && bj < basis_[leave]);
                } else if (!better && leave < 0 && t <= t_max + 1e-10) {
                    better = true;  // matches the bound-flip limit
                }
                if (better) {
                    t_max = std::min(t, t_max);
                    leave = i;
                    leave_to_upper = to_upper;
                    leave_pivot = delta;
                }
            }
            if (!std::isfinite(t_max)) throw InternalFault("unbounded LP in assignment model");
            degenerate_streak = t_max < 1e-10 ? degenerate_streak + 1 : 0;

            double step = sign * t_max;
            value_[enter] += step;
            for (int i = 0; i < m_; ++i) value_[basis_[i]] -= dir[i] * step;

            if (leave < 0) {  // bound-to-bound, basis unchanged
                state_[enter] = from_upper ? State::AtLower : State::AtUpper;
                continue;
            }

            int leaving_var = basis_[leave];
            value_[leaving_var] = leave_to_upper ? ub_[leaving_var] : lb_[leaving_var];
            state_[leaving_var] = leave_to_upper ? State::AtUpper : State::AtLower;
            state_[enter] = State::Basic;
            basis_[leave] = enter;

            double pivot = dir[leave];
            if (std::abs(pivot) < 1e-11) throw InternalFault("singular pivot in simplex");
            double* prow = &binv_[static_cast<size_t>(leave) * m_];
            for (int k = 0; k < m_; ++k) prow[k] /= pivot;
            for (int i = 0; i < m_; ++i) {
                if (i == leave) continue;
                double f = dir[i];
                if (f == 0.0) continue;
                double* row = &binv_[static_cast<size_t>(i) * m_];
                for (int k = 0; k < m_; ++k) row[k] -= f * prow[k];
            }
            work_budget -= static_cast<int64_t>(m_) * m_;
        }
    }

    std::vector<std::vector<std::pair<int, double>>> cols_;
    std::vector<double> cost_, lb_, ub_, value_;
    std::vector<State> state_;
    std::vector<int> basis_;
    std::vector<double> binv_;
    int m_ = 0;
};

}  // namespace lp

// Per-epoch integer assignment model: one binary per graph edge, two
// deviation variables per weighted zone, one unit-assignment row per
// vehicle, one coverage row per outstanding request and one supply balance
// row per weighted zone.
struct AssignmentModel {
    const RTVZGraph* graph = nullptr;
    ObjectiveSpec objective;
    std::vector<VehicleId> vehicle_rows;
    std::vector<RequestId> request_rows;
    std::vector<ObjectiveSpec::ZoneTerm> zone_rows;  // alpha > 0 only
    lp::Problem lp;
    int n_edges = 0;
};

inline AssignmentModel build_assignment_model(const RTVZGraph& graph,
                                              const ObjectiveSpec& objective) {
    AssignmentModel model;
    model.graph = &graph;
    model.objective = objective;
    model.n_edges = static_cast<int>(graph.edges().size());

    for (const auto& v : graph.vehicles) model.vehicle_rows.push_back(v.id);
    for (RequestId r : graph.outstanding) model.request_rows.push_back(r);
    for (const auto& zt : objective.zone_terms)
        if (zt.alpha > 0.0) model.zone_rows.push_back(zt);

    std::map<VehicleId, int> vrow;
    std::map<RequestId, int> rrow;
    int row = 0;
    for (VehicleId v : model.vehicle_rows) vrow[v] = row++;
    for (RequestId r : model.request_rows) rrow[r] = row++;
    const int zone_base = row;
    row += static_cast<int>(model.zone_rows.size());

    model.lp.rows = row;
    model.lp.rhs.assign(row, 0.0);
    for (const auto& [v, i] : vrow) model.lp.rhs[i] = 1.0;
    for (const auto& [r, i] : rrow) model.lp.rhs[i] = 1.0;
    for (size_t zi = 0; zi < model.zone_rows.size(); ++zi)
        model.lp.rhs[zone_base + static_cast<int>(zi)] = model.zone_rows[zi].phi;

    std::set<RequestId> with_dummy;
    for (const auto& e : graph.edges()) {
        int col = model.lp.add_col(objective.edge_cost[e.id], 0.0, 1.0);
        if (col != e.id) throw InternalFault("edge ids must be dense");
        if (e.vehicle >= 0) model.lp.set_entry(col, vrow.at(e.vehicle), 1.0);
        for (RequestId r : e.covers) model.lp.set_entry(col, rrow.at(r), 1.0);
        if (e.is_dummy()) with_dummy.insert(e.request);
        for (size_t zi = 0; zi < model.zone_rows.size(); ++zi) {
            double yv = e.y.of(model.zone_rows[zi].zone);
            if (yv != 0.0) model.lp.set_entry(col, zone_base + static_cast<int>(zi), yv);
        }
    }
    for (RequestId r : model.request_rows)
        if (!with_dummy.count(r))
            throw InternalFault("request " + std::to_string(r) + " lacks a dummy edge");

    const double inf = std::numeric_limits<double>::infinity();
    for (size_t zi = 0; zi < model.zone_rows.size(); ++zi) {
        int dp = model.lp.add_col(model.zone_rows[zi].alpha, 0.0, inf);
        model.lp.set_entry(dp, zone_base + static_cast<int>(zi), 1.0);
        int dm = model.lp.add_col(model.zone_rows[zi].alpha, 0.0, inf);
        model.lp.set_entry(dm, zone_base + static_cast<int>(zi), -1.0);
    }
    return model;
}

struct VehicleDecision {
    VehicleId vehicle = -1;
    enum class Kind { Match, Rebalance, NoOp } kind = Kind::NoOp;
    int edge = -1;
    TripId trip = -1;
    Schedule schedule;  // Match only
    ZoneId zone = -1;   // Rebalance target, or the stay zone for NoOp
};

struct Assignment {
    std::vector<VehicleDecision> decisions;  // sorted by vehicle id
    std::vector<RequestId> unserved;
    std::vector<int> chosen_edges;
    double objective = 0.0;
    bool optimal = true;
    std::map<ZoneId, double> realized_supply;
    std::map<ZoneId, double> deviation;  // phi - realized, weighted zones
};

namespace detail {

// Objective of an integral edge selection, recomputed from first
// principles (edge costs plus absolute supply deviations).
inline double selection_objective(const AssignmentModel& model, const std::vector<int>& chosen) {
    double obj = 0.0;
    std::map<ZoneId, double> supply;
    for (int e : chosen) {
        obj += model.objective.edge_cost[e];
        for (const auto& [z, yv] : model.graph->edges()[e].y.y) supply[z] += yv;
    }
    for (const auto& zt : model.zone_rows) {
        auto it = supply.find(zt.zone);
        double s = it == supply.end() ? 0.0 : it->second;
        obj += zt.alpha * std::abs(zt.phi - s);
    }
    return obj;
}

// Everyone-keeps fallback: valid because requests not covered by a keep
// edge take their dummy edge.
inline std::vector<int> fallback_selection(const AssignmentModel& model) {
    std::vector<int> chosen;
    std::set<RequestId> covered;
    for (VehicleId v : model.vehicle_rows) {
        for (const auto& e : model.graph->edges()) {
            if (e.vehicle == v && e.is_noop()) {
                chosen.push_back(e.id);
                for (RequestId r : e.covers) covered.insert(r);
                break;
            }
        }
    }
    for (const auto& e : model.graph->edges())
        if (e.is_dummy() && !covered.count(e.request)) chosen.push_back(e.id);
    return chosen;
}

}  // namespace detail

inline Assignment decode(const AssignmentModel& model, const std::vector<double>& x,
                         double expected_objective, bool optimal);

// Exact branch-and-bound over the edge binaries with LP relaxation bounds;
// the deviation variables stay continuous. The budget is deterministic
// (simplex work units derived from the nominal seconds), so identical
// models yield identical assignments even when the budget runs out and the
// best incumbent is returned with optimal = false.
inline Assignment solve_assignment(const AssignmentModel& model, double time_budget_s = 10.0) {
    int64_t work_budget = static_cast<int64_t>(time_budget_s * 3e8);

    std::vector<int> incumbent_sel = detail::fallback_selection(model);
    double incumbent_obj = detail::selection_objective(model, incumbent_sel);

    struct Node {
        std::vector<std::pair<int, int>> fixes;  // (edge column, 0/1)
    };
    std::vector<Node> stack;
    stack.push_back({});
    bool exhausted = false;

    while (!stack.empty()) {
        Node node = std::move(stack.back());
        stack.pop_back();

        lp::Problem p = model.lp;
        for (const auto& [col, val] : node.fixes) {
            p.lb[col] = val;
            p.ub[col] = val;
        }
        lp::Simplex simplex;
        lp::Result res = simplex.solve(p, work_budget);
        if (res.status == lp::Status::WorkLimit) {
            exhausted = true;
            break;
        }
        if (res.status == lp::Status::Infeasible) continue;
        if (res.objective >= incumbent_obj - 1e-9) continue;

        int branch = -1;
        double best_frac = 1e-6;
        for (int e = 0; e < model.n_edges; ++e) {
            double frac = std::min(res.x[e], 1.0 - res.x[e]);
            if (frac > best_frac) {
                best_frac = frac;
                branch = e;
            }
        }
        if (branch < 0) {
            std::vector<int> sel;
            for (int e = 0; e < model.n_edges; ++e)
                if (res.x[e] > 0.5) sel.push_back(e);
            double obj = detail::selection_objective(model, sel);
            if (obj < incumbent_obj - 1e-9) {
                incumbent_obj = obj;
                incumbent_sel = std::move(sel);
            }
            continue;
        }
        Node first = node, second = node;
        int preferred = res.x[branch] >= 0.5 ? 1 : 0;
        first.fixes.push_back({branch, preferred});
        second.fixes.push_back({branch, 1 - preferred});
        stack.push_back(std::move(second));
        stack.push_back(std::move(first));
    }

    std::vector<double> xsel(model.lp.cols.size(), 0.0);
    for (int e : incumbent_sel) xsel[e] = 1.0;
    return decode(model, xsel, incumbent_obj, !exhausted);
}

inline Assignment decode(const AssignmentModel& model, const std::vector<double>& x,
                         double expected_objective, bool optimal) {
    const RTVZGraph& g = *model.graph;
    std::vector<int> chosen;
    for (int e = 0; e < model.n_edges; ++e) {
        if (x[e] > 1.0 + 1e-6 || x[e] < -1e-6 || (x[e] > 1e-6 && x[e] < 1.0 - 1e-6))
            throw InternalFault("non-integral edge variable in solution");
        if (x[e] > 0.5) chosen.push_back(e);
    }

    std::map<VehicleId, int> per_vehicle;
    std::map<RequestId, int> per_request;
    for (int e : chosen) {
        const auto& edge = g.edges()[e];
        if (edge.vehicle >= 0) per_vehicle[edge.vehicle] += 1;
        for (RequestId r : edge.covers) per_request[r] += 1;
    }
    for (VehicleId v : model.vehicle_rows)
        if (per_vehicle[v] != 1)
            throw InternalFault("vehicle row violated for vehicle " + std::to_string(v));
    for (RequestId r : model.request_rows)
        if (per_request[r] != 1)
            throw InternalFault("coverage row violated for request " + std::to_string(r));

    Assignment out;
    out.chosen_edges = chosen;
    out.optimal = optimal;
    for (int e : chosen) {
        const auto& edge = g.edges()[e];
        for (const auto& [z, yv] : edge.y.y) out.realized_supply[z] += yv;
        if (edge.is_dummy()) {
            out.unserved.push_back(edge.request);
            continue;
        }
        VehicleDecision d;
        d.vehicle = edge.vehicle;
        d.edge = e;
        d.zone = edge.zone;
        if (edge.is_trip()) {
            d.kind = VehicleDecision::Kind::Match;
            d.trip = edge.trip;
            d.schedule = edge.schedule;
        } else if (edge.is_zone() && !edge.is_noop()) {
            d.kind = VehicleDecision::Kind::Rebalance;
        } else {
            d.kind = VehicleDecision::Kind::NoOp;
        }
        out.decisions.push_back(d);
    }
    std::sort(out.decisions.begin(), out.decisions.end(),
              [](const VehicleDecision& a, const VehicleDecision& b) {
                  return a.vehicle < b.vehicle;
              });
    std::sort(out.unserved.begin(), out.unserved.end());

    for (const auto& zt : model.objective.zone_terms) {
        auto it = out.realized_supply.find(zt.zone);
        double s = it == out.realized_supply.end() ? 0.0 : it->second;
        out.deviation[zt.zone] = zt.phi - s;
    }
    out.objective = detail::selection_objective(model, chosen);
    if (std::abs(out.objective - expected_objective) > 1e-6)
        throw InternalFault("decoded objective disagrees with solver objective");
    return out;
}

// CPLEX LP-format dump for cross-checking against external solvers.
inline void dump_lp_model(const AssignmentModel& model, std::ostream& os) {
    auto var_name = [&](int col) {
        if (col < model.n_edges) return "x" + std::to_string(col);
        int zi = (col - model.n_edges) / 2;
        ZoneId z = model.zone_rows[zi].zone;
        return ((col - model.n_edges) % 2 == 0 ? "dp" : "dm") + std::to_string(z);
    };
    char buf[64];
    os << "Minimize\n obj:";
    for (size_t c = 0; c < model.lp.cols.size(); ++c) {
        if (model.lp.cost[c] == 0.0) continue;
        std::snprintf(buf, sizeof(buf), " %+.9g ", model.lp.cost[c]);
        os << buf << var_name(static_cast<int>(c));
    }
    os << "\nSubject To\n";
    std::vector<std::vector<std::pair<int, double>>> rows(model.lp.rows);
    for (size_t c = 0; c < model.lp.cols.size(); ++c)
        for (const auto& [r, a] : model.lp.cols[c]) rows[r].push_back({static_cast<int>(c), a});
    int row = 0;
    auto emit_row = [&](const std::string& name) {
        os << " " << name << ":";
        for (const auto& [c, a] : rows[row]) {
            std::snprintf(buf, sizeof(buf), " %+.9g ", a);
            os << buf << var_name(c);
        }
        std::snprintf(buf, sizeof(buf), " = %.9g\n", model.lp.rhs[row]);
        os << buf;
        ++row;
    };
    for (VehicleId v : model.vehicle_rows) emit_row("veh" + std::to_string(v));
    for (RequestId r : model.request_rows) emit_row("req" + std::to_string(r));
    for (const auto& zt : model.zone_rows) emit_row("zone" + std::to_string(zt.zone));
    os << "Bounds\n";
    for (size_t c = 0; c < model.lp.cols.size(); ++c) {
        if (std::isfinite(model.lp.ub[c])) {
            std::snprintf(buf, sizeof(buf), " 0 <= %s <= %.9g\n",
                          var_name(static_cast<int>(c)).c_str(), model.lp.ub[c]);
            os << buf;
        } else {
            os << " " << var_name(static_cast<int>(c)) << " >= 0\n";
        }
    }
    os << "Binaries\n";
    for (int e = 0; e < model.n_edges; ++e) os << " x" << e;
    os << "\nEnd\n";
}

}  // namespace ridepool

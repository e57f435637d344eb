#include "ridepool/assign.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>

#include <fmt/format.h>

#include "ridepool/error.hpp"

namespace ridepool {
namespace {

/// Depth-first search over stop orders of one bundle.
class BundleSearch {
 public:
  BundleSearch(const VehicleState& vehicle, std::span<const RequestId> unpicked, const RequestBook& requests,
               const Router& router, const Constraints& constraints, const ObjectiveParams& objective, double now)
      : vehicle_(vehicle), requests_(requests), router_(router), cons_(constraints), objective_(objective),
        now_(now), anchor_(vehicle.anchor(now)) {
    for (const Onboard& o : vehicle.onboard) items_.push_back(Item{&requests.at(o.id), State::riding, o.pickup_s});
    for (RequestId id : unpicked) items_.push_back(Item{&requests.at(id), State::waiting, 0.0});
  }

  std::optional<V2RB> run() {
    if (static_cast<int>(vehicle_.onboard.size()) > cons_.capacity) return std::nullopt;
    std::size_t events = 0;
    for (const Item& it : items_) events += it.state == State::waiting ? 2 : 1;
    dfs(anchor_.node, anchor_.time_s, static_cast<int>(vehicle_.onboard.size()), events);
    return std::move(best_);
  }

 private:
  enum class State { waiting, riding, done };
  struct Item {
    const Request* request;
    State state;
    double pickup_s;
  };

  double wait_bound(const Request& r) const { return r.time_s + cons_.max_wait_s + kTimeTolerance; }
  double ride_bound(const Request& r) const {
    return (1.0 + cons_.max_detour_rel) * r.direct_time_s + kTimeTolerance;
  }

  /// Every remaining event must still be reachable in time from `node`.
  bool others_reachable(NodeId node, double depart) const {
    for (const Item& it : items_) {
      if (it.state == State::waiting) {
        if (depart + router_.travel_time(node, it.request->origin, now_) > wait_bound(*it.request)) return false;
      } else if (it.state == State::riding) {
        const double arrive = depart + router_.travel_time(node, it.request->destination, now_);
        if (arrive - it.pickup_s > ride_bound(*it.request)) return false;
      }
    }
    return true;
  }

  void leaf() {
    Schedule s = time_schedule(vehicle_.id, anchor_, path_, vehicle_.onboard, router_, now_, cons_.dwell_s);
    if (check_feasibility(s, vehicle_.onboard, cons_, requests_, now_) != Violation::none) return;
    const double cost = schedule_cost(s, objective_, requests_);
    if (best_ && !(cost < best_->cost)) return;
    V2RB v;
    v.vehicle = vehicle_.id;
    v.bundle = s.bundle;
    v.schedule = std::move(s);
    v.cost = cost;
    best_ = std::move(v);
  }

  void dfs(NodeId node, double t, int load, std::size_t remaining) {
    if (remaining == 0) {
      leaf();
      return;
    }
    for (Item& it : items_) {
      const Request& r = *it.request;
      if (it.state == State::waiting) {
        if (load >= cons_.capacity) continue;
        const double arrive = t + router_.travel_time(node, r.origin, now_);
        if (arrive > wait_bound(r)) continue;
        const double depart = arrive + cons_.dwell_s;
        it.state = State::riding;
        it.pickup_s = arrive;
        if (others_reachable(r.origin, depart)) {
          path_.push_back(Stop{r.origin, {r.id}, {}, 0.0});
          dfs(r.origin, depart, load + 1, remaining - 1);
          path_.pop_back();
        }
        it.state = State::waiting;
      } else if (it.state == State::riding) {
        const double arrive = t + router_.travel_time(node, r.destination, now_);
        if (arrive - it.pickup_s > ride_bound(r)) continue;
        const double depart = arrive + cons_.dwell_s;
        it.state = State::done;
        if (others_reachable(r.destination, depart)) {
          path_.push_back(Stop{r.destination, {}, {r.id}, 0.0});
          dfs(r.destination, depart, load - 1, remaining - 1);
          path_.pop_back();
        }
        it.state = State::riding;
      }
    }
  }

  const VehicleState& vehicle_;
  const RequestBook& requests_;
  const Router& router_;
  const Constraints& cons_;
  const ObjectiveParams& objective_;
  double now_;
  Anchor anchor_;
  std::vector<Item> items_;
  std::vector<Stop> path_;
  std::optional<V2RB> best_;
};

using SolutionKey = std::vector<std::pair<VehicleId, std::vector<RequestId>>>;

SolutionKey key_of(const AssignmentProblem& p, std::span<const std::size_t> chosen) {
  SolutionKey key;
  for (std::size_t i : chosen) key.emplace_back(p.v2rbs[i].vehicle, p.v2rbs[i].bundle);
  return key;
}

std::vector<std::size_t> vehicle_order(const AssignmentProblem& p, std::span<const std::size_t> chosen) {
  std::vector<std::size_t> sorted(chosen.begin(), chosen.end());
  std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
    const auto va = p.v2rbs[a].vehicle, vb = p.v2rbs[b].vehicle;
    return va != vb ? va < vb : a < b;
  });
  return sorted;
}

template <std::size_t W>
class CoverSearch {
 public:
  explicit CoverSearch(const AssignmentProblem& p) : p_(p) {
    for (RequestId id : p.assigned) add_request(id, true);
    for (RequestId id : p.unassigned) add_request(id, false);

    std::set<VehicleId> vehicles;
    for (const V2RB& v : p.v2rbs) vehicles.insert(v.vehicle);
    vehicles_.assign(vehicles.begin(), vehicles.end());
    options_.resize(vehicles_.size());

    std::vector<std::optional<std::size_t>> last(request_ids_.size());
    masks_.assign(p.v2rbs.size(), Mask{});
    members_.resize(p.v2rbs.size());
    for (std::size_t i = 0; i < p.v2rbs.size(); ++i) {
      const V2RB& v = p.v2rbs[i];
      const std::size_t vi = vehicle_index(v.vehicle);
      options_[vi].push_back(i);
      for (RequestId id : v.bundle) {
        const auto it = request_index_.find(id);
        if (it == request_index_.end()) {
          throw InfeasibleAssignmentError(fmt::format("V2RB for vehicle {} references request {} outside R_a and R_u",
                                                      v.vehicle, id));
        }
        set_bit(masks_[i], it->second);
        members_[i].push_back(it->second);
        last[it->second] = std::max(last[it->second].value_or(0), vi);
      }
    }

    std::vector<RequestId> missing;
    due_.assign(vehicles_.size(), Mask{});
    for (std::size_t r = 0; r < request_ids_.size(); ++r) {
      if (!required_[r]) continue;
      if (!last[r]) {
        missing.push_back(request_ids_[r]);
      } else {
        set_bit(due_[*last[r]], r);
      }
    }
    if (!missing.empty()) {
      throw InfeasibleAssignmentError(fmt::format("no V2RB covers assigned request(s) {}", fmt::join(missing, ", ")));
    }

    by_due_.resize(vehicles_.size());
    for (std::size_t k = 0; k < vehicles_.size(); ++k) {
      for (std::size_t i : options_[k]) {
        Mask part = masks_[i];
        for (std::size_t w = 0; w < W; ++w) part[w] &= due_[k][w];
        by_due_[k][part].push_back(Option{masks_[i], i, 0.0});
      }
    }
  }

  AssignmentSolution run() {
    initial_multipliers();
    prepare();
    dive_ = true;
    search();
    if (!best_) {
      throw InfeasibleAssignmentError("assigned requests cannot be covered exactly once with one V2RB per vehicle");
    }
    dive_ = false;
    improve_multipliers();
    prepare();
    search();
    std::vector<std::size_t> chosen = path(best_->node, std::nullopt);
    const double total = solution_objective(p_, chosen);
    return AssignmentSolution{std::move(chosen), total};
  }

 private:
  using Mask = std::array<std::uint64_t, W>;
  static constexpr std::size_t kRoot = std::numeric_limits<std::size_t>::max();

  struct MaskHash {
    std::size_t operator()(const Mask& m) const {
      std::size_t h = 0xcbf29ce484222325ULL;
      for (std::uint64_t w : m) h = (h ^ w) * 0x100000001b3ULL;
      return h;
    }
  };

  /// Cost summed left to right over the vehicles so far and its last chosen node.
  struct Entry {
    double value = 0.0;
    std::size_t node = kRoot;
  };

  struct Node {
    std::size_t parent = kRoot;
    std::size_t option = 0;
  };

  struct Option {
    Mask mask{};
    std::size_t index = 0;
    double reduced = 0.0;  // cost minus the multipliers of its requests
  };

  static void set_bit(Mask& m, std::size_t r) { m[r / 64] |= std::uint64_t{1} << (r % 64); }
  static bool test_bit(const Mask& m, std::size_t r) { return ((m[r / 64] >> (r % 64)) & 1U) != 0; }

  static bool disjoint(const Mask& a, const Mask& b) {
    for (std::size_t w = 0; w < W; ++w) {
      if ((a[w] & b[w]) != 0) return false;
    }
    return true;
  }

  void add_request(RequestId id, bool required) {
    if (request_index_.contains(id)) throw InfeasibleAssignmentError(fmt::format("request {} listed twice", id));
    request_index_.emplace(id, request_ids_.size());
    request_ids_.push_back(id);
    required_.push_back(required);
  }

  std::size_t vehicle_index(VehicleId v) const {
    return static_cast<std::size_t>(std::lower_bound(vehicles_.begin(), vehicles_.end(), v) - vehicles_.begin());
  }

  double reduced_cost(std::size_t i, const std::vector<double>& lambda) const {
    double rc = p_.v2rbs[i].cost;
    for (std::size_t r : members_[i]) rc -= lambda[r];
    return rc;
  }

  /// Each request starts at its cheapest per-request share; optional ones never above zero.
  void initial_multipliers() {
    lambda_.assign(request_ids_.size(), std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < p_.v2rbs.size(); ++i) {
      const double share = p_.v2rbs[i].cost / static_cast<double>(std::max<std::size_t>(1, members_[i].size()));
      for (std::size_t r : members_[i]) lambda_[r] = std::min(lambda_[r], share);
    }
    for (std::size_t r = 0; r < lambda_.size(); ++r) {
      if (!required_[r]) lambda_[r] = std::min(lambda_[r], 0.0);
    }
  }

  /// Lagrangian bound of the whole problem for `lambda`; `picks` receives each
  /// vehicle's minimizing option, if any has negative reduced cost.
  double relaxation(const std::vector<double>& lambda, std::vector<std::optional<std::size_t>>& picks) const {
    double bound = 0.0;
    for (double l : lambda) bound += l;
    picks.assign(vehicles_.size(), std::nullopt);
    for (std::size_t k = 0; k < vehicles_.size(); ++k) {
      double m = 0.0;
      for (std::size_t i : options_[k]) {
        const double rc = reduced_cost(i, lambda);
        if (rc < m) {
          m = rc;
          picks[k] = i;
        }
      }
      bound += m;
    }
    return bound;
  }

  /// Subgradient ascent on the multipliers with Polyak steps towards the incumbent.
  void improve_multipliers() {
    const double upper = best_->value;
    std::vector<std::optional<std::size_t>> picks;
    std::vector<double> lambda = lambda_;
    double best_bound = relaxation(lambda, picks);
    double mu = 1.0;
    int stale = 0;
    for (int iter = 0; iter < kSubgradientIterations && mu > 1e-4; ++iter) {
      const double bound = relaxation(lambda, picks);
      if (bound > best_bound) {
        best_bound = bound;
        lambda_ = lambda;
        stale = 0;
      } else if (++stale >= 5) {
        mu /= 2.0;
        stale = 0;
      }
      std::vector<double> g(lambda.size(), 1.0);
      for (const auto& pick : picks) {
        if (pick) {
          for (std::size_t r : members_[*pick]) g[r] -= 1.0;
        }
      }
      double norm = 0.0;
      for (std::size_t r = 0; r < g.size(); ++r) {
        if (!required_[r] && lambda[r] >= 0.0 && g[r] > 0.0) g[r] = 0.0;
        norm += g[r] * g[r];
      }
      if (norm == 0.0 || upper - bound <= 0.0) break;
      const double step = mu * (upper - bound) / norm;
      for (std::size_t r = 0; r < lambda.size(); ++r) {
        lambda[r] += step * g[r];
        if (!required_[r]) lambda[r] = std::min(lambda[r], 0.0);
      }
    }
  }

  /// Reduced costs, option order and per-vehicle tails for the current multipliers.
  void prepare() {
    const std::size_t n = vehicles_.size();
    tail_.assign(n + 1, 0.0);
    for (std::size_t k = n; k-- > 0;) {
      double m = 0.0;
      for (auto& [part, group] : by_due_[k]) {
        for (Option& o : group) {
          o.reduced = reduced_cost(o.index, lambda_);
          m = std::min(m, o.reduced);
        }
        std::stable_sort(group.begin(), group.end(),
                         [](const Option& a, const Option& b) { return a.reduced < b.reduced; });
      }
      tail_[k] = tail_[k + 1] + m;
    }
    memo_.assign(n, {});
  }

  double cut() const { return upper_ + 1e-9 * std::max(1.0, std::abs(upper_)); }

  void search() {
    done_ = false;
    dfs(0, Mask{}, 0.0, kRoot);
  }

  void leaf(double value, std::size_t node) {
    if (!best_ || value < best_->value || (value == best_->value && path_less(node, std::nullopt, best_->node))) {
      best_ = Entry{value, node};
    }
    upper_ = std::min(upper_, value);
    if (dive_) done_ = true;
  }

  void dfs(std::size_t k, const Mask& covered, double value, std::size_t node) {
    if (done_) return;
    if (k == vehicles_.size()) {
      leaf(value, node);
      return;
    }
    double open = 0.0;
    for (std::size_t r = 0; r < request_ids_.size(); ++r) {
      if (!test_bit(covered, r)) open += lambda_[r];
    }
    const double base = value + open + tail_[k + 1];
    if (value + open + tail_[k] > cut()) return;

    const auto [it, fresh] = memo_[k].try_emplace(covered, Entry{value, node});
    if (!fresh) {
      if (value > it->second.value) return;
      if (value == it->second.value && !path_less(node, std::nullopt, it->second.node)) return;
      it->second = Entry{value, node};
    }

    // an option must cover exactly the requests due here that are still open
    Mask needed = due_[k];
    bool none_needed = true;
    for (std::size_t w = 0; w < W; ++w) {
      needed[w] &= ~covered[w];
      none_needed = none_needed && needed[w] == 0;
    }
    bool absent_done = !none_needed;
    const auto absent = [&] {
      absent_done = true;
      if (base <= cut()) dfs(k + 1, covered, value, node);
    };
    const auto group = by_due_[k].find(needed);
    if (group != by_due_[k].end()) {
      for (const Option& o : group->second) {
        if (done_) return;
        if (!absent_done && o.reduced >= 0.0) absent();
        if (base + o.reduced > cut()) break;
        if (!disjoint(covered, o.mask)) continue;
        Mask mask = covered;
        for (std::size_t w = 0; w < W; ++w) mask[w] |= o.mask[w];
        if (k + 1 < vehicles_.size() && !completable(k + 1, mask)) continue;
        const std::size_t child = nodes_.size();
        nodes_.push_back(Node{node, o.index});
        dfs(k + 1, mask, value + p_.v2rbs[o.index].cost, child);
      }
    }
    if (!absent_done && !done_) absent();
  }

  /// Whether vehicle k has an option covering exactly its open due requests.
  bool completable(std::size_t k, const Mask& covered) const {
    Mask needed = due_[k];
    bool none_needed = true;
    for (std::size_t w = 0; w < W; ++w) {
      needed[w] &= ~covered[w];
      none_needed = none_needed && needed[w] == 0;
    }
    return none_needed || by_due_[k].contains(needed);
  }

  std::vector<std::size_t> path(std::size_t node, std::optional<std::size_t> option) const {
    std::vector<std::size_t> out;
    if (option) out.push_back(*option);
    for (; node != kRoot; node = nodes_[node].parent) out.push_back(nodes_[node].option);
    std::reverse(out.begin(), out.end());
    return out;
  }

  /// Smaller (vehicle, bundle) list, then smaller V2RB indices.
  bool path_less(std::size_t node, std::optional<std::size_t> option, std::size_t other) const {
    const std::vector<std::size_t> a = path(node, option);
    const std::vector<std::size_t> b = path(other, std::nullopt);
    const SolutionKey ka = key_of(p_, a), kb = key_of(p_, b);
    return ka != kb ? ka < kb : a < b;
  }

  static constexpr int kSubgradientIterations = 100;

  const AssignmentProblem& p_;
  std::map<RequestId, std::size_t> request_index_;
  std::vector<RequestId> request_ids_;
  std::vector<bool> required_;
  std::vector<VehicleId> vehicles_;
  std::vector<std::vector<std::size_t>> options_;
  std::vector<Mask> masks_;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<Mask> due_;
  std::vector<std::unordered_map<Mask, std::vector<Option>, MaskHash>> by_due_;

  std::vector<double> lambda_;
  std::vector<double> tail_;
  std::vector<std::unordered_map<Mask, Entry, MaskHash>> memo_;
  std::vector<Node> nodes_;
  std::optional<Entry> best_;
  double upper_ = std::numeric_limits<double>::infinity();
  bool dive_ = false;
  bool done_ = false;
};

}  // namespace

std::optional<V2RB> best_schedule_for_bundle(const VehicleState& vehicle, std::span<const RequestId> unpicked,
                                             const RequestBook& requests, const Router& router,
                                             const Constraints& constraints, const ObjectiveParams& objective,
                                             double now) {
  return BundleSearch(vehicle, unpicked, requests, router, constraints, objective, now).run();
}

bool shareable(const Request& a, const Request& b, const Router& router, const Constraints& constraints, double now) {
  RequestBook book{{a.id, a}, {b.id, b}};
  const std::vector<RequestId> pair{std::min(a.id, b.id), std::max(a.id, b.id)};
  const ObjectiveParams zero{0.0, 0.0, 0.0};
  for (NodeId start : {a.origin, b.origin}) {
    VehicleState hypothetical;
    hypothetical.id = -1;
    hypothetical.node = start;
    if (best_schedule_for_bundle(hypothetical, pair, book, router, constraints, zero, now)) return true;
  }
  return false;
}

std::vector<V2RB> enumerate_v2rbs(const OperatorState& state, double now, const EnumerationOptions& options,
                                  EnumerationStats* stats) {
  const Router& router = *state.router;
  const Constraints& cons = state.config.constraints;
  EnumerationStats local;

  std::set<RequestId> onboard_anywhere;
  for (const VehicleState& v : state.vehicles) {
    for (const Onboard& o : v.onboard) onboard_anywhere.insert(o.id);
  }
  std::vector<RequestId> unpicked;
  for (const auto& [id, r] : state.requests) {
    if (!onboard_anywhere.contains(id)) unpicked.push_back(id);
  }

  // Step 2: request-request shareability, shared by all vehicles.
  const std::size_t nu = unpicked.size();
  std::vector<std::vector<bool>> share(nu, std::vector<bool>(nu, false));
  std::map<RequestId, std::size_t> pos;
  for (std::size_t i = 0; i < nu; ++i) pos[unpicked[i]] = i;
  for (std::size_t i = 0; i < nu; ++i) {
    for (std::size_t j = i + 1; j < nu; ++j) {
      const bool ok = shareable(state.requests.at(unpicked[i]), state.requests.at(unpicked[j]), router, cons, now);
      share[i][j] = share[j][i] = ok;
      local.shareable_pairs += ok ? 1 : 0;
    }
  }

  std::vector<V2RB> out;
  for (const VehicleState& v : state.vehicles) {
    std::size_t produced = 0;
    const auto capped = [&] { return options.max_bundles_per_vehicle > 0 && produced >= options.max_bundles_per_vehicle; };
    auto try_bundle = [&](const std::vector<RequestId>& part) -> bool {
      ++local.bundles_checked;
      auto res = best_schedule_for_bundle(v, part, state.requests, router, cons, state.objective, now);
      if (!res) return false;
      out.push_back(std::move(*res));
      ++produced;
      return true;
    };

    if (!v.onboard.empty()) try_bundle({});

    // Step 1: vehicle-request reachability within the waiting bound.
    const Anchor anchor = v.anchor(now);
    std::vector<RequestId> reachable;
    for (RequestId id : unpicked) {
      const Request& r = state.requests.at(id);
      if (anchor.time_s + router.travel_time(anchor.node, r.origin, now) <= r.time_s + cons.max_wait_s + kTimeTolerance) {
        reachable.push_back(id);
      }
    }
    local.vehicle_request_pairs += reachable.size();

    // Step 3: grow bundles by grade.
    std::set<std::vector<RequestId>> grade;
    for (RequestId id : reachable) {
      if (capped()) break;
      if (try_bundle({id})) grade.insert({id});
    }
    while (!grade.empty() && !capped()) {
      std::set<std::vector<RequestId>> next;
      for (const auto& base : grade) {
        for (RequestId id : reachable) {
          if (id <= base.back()) continue;
          if (capped()) break;
          bool ok = true;
          for (RequestId member : base) {
            if (!share[pos[member]][pos[id]]) {
              ok = false;
              break;
            }
          }
          if (!ok) continue;
          std::vector<RequestId> cand = base;
          cand.push_back(id);
          // Every sub-bundle dropping one member must have been feasible.
          for (std::size_t drop = 0; ok && drop + 1 < cand.size(); ++drop) {
            std::vector<RequestId> sub;
            for (std::size_t k = 0; k < cand.size(); ++k) {
              if (k != drop) sub.push_back(cand[k]);
            }
            ok = grade.contains(sub);
          }
          if (!ok) continue;
          if (try_bundle(cand)) next.insert(cand);
        }
      }
      grade = std::move(next);
    }
  }

  std::stable_sort(out.begin(), out.end(), [](const V2RB& a, const V2RB& b) {
    if (a.vehicle != b.vehicle) return a.vehicle < b.vehicle;
    if (a.bundle.size() != b.bundle.size()) return a.bundle.size() < b.bundle.size();
    return a.bundle < b.bundle;
  });
  if (stats != nullptr) *stats = local;
  return out;
}

double solution_objective(const AssignmentProblem& problem, std::span<const std::size_t> chosen) {
  double total = 0.0;
  for (std::size_t i : vehicle_order(problem, chosen)) total += problem.v2rbs[i].cost;
  return total;
}

AssignmentSolution ExactCoverSolver::solve(const AssignmentProblem& problem) const {
  const std::size_t requests = problem.assigned.size() + problem.unassigned.size();
  if (requests <= 64) return CoverSearch<1>(problem).run();
  if (requests <= 128) return CoverSearch<2>(problem).run();
  if (requests <= 256) return CoverSearch<4>(problem).run();
  if (requests <= 1024) return CoverSearch<16>(problem).run();
  if (requests <= 4096) return CoverSearch<64>(problem).run();
  throw InfeasibleAssignmentError(fmt::format("{} requests exceed the exact solver's limit of 4096", requests));
}

AssignmentSolution solve_ilp(const AssignmentProblem& problem) { return ExactCoverSolver().solve(problem); }

void write_problem(std::ostream& out, const AssignmentProblem& problem) {
  out << "ridepool-assignment-problem 1\n";
  out << "assigned " << problem.assigned.size();
  for (RequestId id : problem.assigned) out << ' ' << id;
  out << "\nunassigned " << problem.unassigned.size();
  for (RequestId id : problem.unassigned) out << ' ' << id;
  out << "\nv2rbs " << problem.v2rbs.size() << '\n';
  for (const V2RB& v : problem.v2rbs) {
    out << fmt::format("{} {:a} {}", v.vehicle, v.cost, v.bundle.size());
    for (RequestId id : v.bundle) out << ' ' << id;
    out << '\n';
  }
}

AssignmentProblem read_problem(std::istream& in) {
  auto fail = [](const std::string& what) { throw LoadError("assignment problem: " + what); };
  std::string tag;
  int version = 0;
  if (!(in >> tag >> version) || tag != "ridepool-assignment-problem" || version != 1) fail("bad header");
  AssignmentProblem p;
  auto read_ids = [&](const char* name, std::vector<RequestId>& ids) {
    std::size_t n = 0;
    if (!(in >> tag >> n) || tag != name) fail(std::string("expected ") + name);
    ids.resize(n);
    for (auto& id : ids) {
      if (!(in >> id)) fail(std::string("truncated ") + name);
    }
  };
  read_ids("assigned", p.assigned);
  read_ids("unassigned", p.unassigned);
  std::size_t n = 0;
  if (!(in >> tag >> n) || tag != "v2rbs") fail("expected v2rbs");
  for (std::size_t i = 0; i < n; ++i) {
    V2RB v;
    std::string cost;
    std::size_t k = 0;
    if (!(in >> v.vehicle >> cost >> k)) fail(fmt::format("truncated v2rb {}", i));
    v.cost = std::strtod(cost.c_str(), nullptr);
    v.bundle.resize(k);
    for (auto& id : v.bundle) {
      if (!(in >> id)) fail(fmt::format("truncated bundle of v2rb {}", i));
    }
    std::sort(v.bundle.begin(), v.bundle.end());
    v.schedule.vehicle = v.vehicle;
    v.schedule.bundle = v.bundle;
    p.v2rbs.push_back(std::move(v));
  }
  return p;
}

ReoptimizationReport reoptimize(OperatorState& state, double now, const EnumerationOptions& options,
                                const AssignmentSolver* solver) {
  const Router& router = *state.router;
  const Constraints& cons = state.config.constraints;
  AssignmentProblem problem;
  problem.v2rbs = enumerate_v2rbs(state, now, options);

  // Each vehicle's current plan, re-timed from its anchor, is a feasible
  // point of the ILP by construction.
  std::vector<std::pair<VehicleId, double>> incumbent_costs;
  for (const VehicleState& v : state.vehicles) {
    if (!v.has_customers()) continue;
    Schedule s = time_schedule(v.id, v.anchor(now), v.schedule.stops, v.onboard, router, now, cons.dwell_s);
    const double cost = schedule_cost(s, state.objective, state.requests);
    incumbent_costs.emplace_back(v.id, cost);
    auto it = std::find_if(problem.v2rbs.begin(), problem.v2rbs.end(),
                           [&](const V2RB& x) { return x.vehicle == v.id && x.bundle == s.bundle; });
    if (it == problem.v2rbs.end()) {
      V2RB inc;
      inc.vehicle = v.id;
      inc.bundle = s.bundle;
      inc.schedule = std::move(s);
      inc.cost = cost;
      inc.incumbent = true;
      problem.v2rbs.push_back(std::move(inc));
    } else if (cost < it->cost) {
      it->schedule = std::move(s);
      it->cost = cost;
      it->incumbent = true;
    }
  }
  for (const auto& [id, r] : state.requests) problem.assigned.push_back(id);

  const AssignmentSolution solution = solver ? solver->solve(problem) : solve_ilp(problem);

  ReoptimizationReport report;
  report.time_s = now;
  report.requests = problem.assigned.size();
  report.v2rbs = problem.v2rbs.size();
  report.objective = solution.objective;
  for (const auto& [vid, cost] : incumbent_costs) report.incumbent_objective += cost;

  std::vector<bool> assigned(state.vehicles.size(), false);
  for (std::size_t idx : solution.chosen) {
    const V2RB& v = problem.v2rbs[idx];
    VehicleState& veh = state.vehicle(v.vehicle);
    veh.schedule = v.schedule;
    if (!veh.schedule.empty()) veh.reposition_target.reset();
    assigned[static_cast<std::size_t>(v.vehicle)] = true;
  }
  for (VehicleState& veh : state.vehicles) {
    if (assigned[static_cast<std::size_t>(veh.id)]) continue;
    if (!veh.onboard.empty()) {
      throw InfeasibleAssignmentError(fmt::format("vehicle {} left without schedule for onboard requests", veh.id));
    }
    veh.schedule = Schedule{};
    veh.schedule.vehicle = veh.id;
  }
  ++state.version;
  return report;
}

}  // namespace ridepool

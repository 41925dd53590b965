#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pbmarl/election.hpp"
#include "pbmarl/error.hpp"

namespace pbmarl {

enum class Rule { Greedy, EqualShares };

constexpr std::string_view to_string(Rule rule) { return rule == Rule::Greedy ? "greedy" : "equalshares"; }

inline Rule parse_rule(std::string_view text) {
  if (text == "greedy") return Rule::Greedy;
  if (text == "equalshares" || text == "equal_shares" || text == "mes") return Rule::EqualShares;
  throw Error(ErrorKind::ConfigError, "unknown rule '" + std::string(text) + "' (expected greedy|equalshares)");
}

/// Ballots of a population, aligned with `voter_ids`.
struct VoteProfile {
  std::vector<std::string> voter_ids;
  std::vector<CumulativeBallot> ballots;

  std::size_t size() const { return ballots.size(); }
};

inline VoteProfile historical_profile(const ElectionInstance& election) {
  VoteProfile profile;
  for (const auto& v : election.voters) {
    profile.voter_ids.push_back(v.id);
    profile.ballots.push_back(v.historical_ballot);
  }
  return profile;
}

/// Total tokens per project.
inline std::vector<std::int64_t> project_scores(const VoteProfile& profile, std::size_t num_projects) {
  std::vector<std::int64_t> scores(num_projects, 0);
  for (const auto& ballot : profile.ballots)
    for (const auto& [p, t] : ballot.entries()) {
      if (p >= num_projects) throw Error(ErrorKind::UnknownProject, "ballot references project index " + std::to_string(p));
      scores[p] += t;
    }
  return scores;
}

namespace detail {

/// Popularity order: higher score, then lower cost, then lexicographically smaller id.
inline std::vector<std::size_t> popularity_order(const std::vector<std::int64_t>& scores,
                                                 const std::vector<Project>& projects) {
  std::vector<std::size_t> order(projects.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    if (projects[a].cost != projects[b].cost) return projects[a].cost < projects[b].cost;
    return projects[a].id < projects[b].id;
  });
  return order;
}

/// Funds affordable unselected projects in popularity order until nothing more fits.
inline void greedy_fill(const std::vector<std::int64_t>& scores, const std::vector<Project>& projects, Money budget,
                        SelectionPhase phase, WinningSet& winners) {
  for (std::size_t p : popularity_order(scores, projects)) {
    if (winners.contains(p)) continue;
    if (winners.total_cost + projects[p].cost <= budget) {
      winners.projects.push_back(p);
      winners.phases.push_back(phase);
      winners.total_cost += projects[p].cost;
    }
  }
}

}  // namespace detail

/// Utilitarian greedy: repeatedly fund the most popular project that still fits.
inline WinningSet greedy(const VoteProfile& profile, const ElectionInstance& election) {
  WinningSet winners;
  detail::greedy_fill(project_scores(profile, election.projects.size()), election.projects, election.budget,
                      SelectionPhase::Greedy, winners);
  return winners;
}

struct EqualSharesOutcome {
  WinningSet winners;
  /// Amount each voter paid during the equal-shares phase.
  std::vector<mpq_class> payments;
  /// Balance each voter holds when the equal-shares phase stops.
  std::vector<mpq_class> balances;
  Money equal_shares_cost = 0;
};

namespace detail {

struct Supporter {
  std::size_t voter;
  int utility;
};

/// Smallest rho with sum_v min(balance_v, rho * u_v) >= cost, or nullopt when supporters cannot cover the cost.
inline std::optional<mpq_class> min_rho(std::vector<Supporter> supporters, const std::vector<mpq_class>& balance,
                                        Money cost) {
  mpq_class total = 0;
  std::int64_t utility = 0;
  for (const auto& s : supporters) {
    total += balance[s.voter];
    utility += s.utility;
  }
  const mpq_class needed(mpz_class(static_cast<long>(cost)));
  if (total < needed || utility == 0) return std::nullopt;
  // Supporters whose balance runs out first (smallest balance / utility) pay their whole balance.
  std::sort(supporters.begin(), supporters.end(), [&](const Supporter& a, const Supporter& b) {
    return balance[a.voter] * b.utility < balance[b.voter] * a.utility;
  });
  mpq_class paid = 0;
  for (const auto& s : supporters) {
    mpq_class rho = (needed - paid) / mpq_class(utility);
    rho.canonicalize();
    if (rho * s.utility <= balance[s.voter]) return rho;
    paid += balance[s.voter];
    utility -= s.utility;
  }
  return std::nullopt;
}

}  // namespace detail

/// Method of equal shares over cumulative utilities (u_v(p) = tokens v put on p),
/// completed by utilitarian greedy over the unspent budget.
inline EqualSharesOutcome equal_shares_detailed(const VoteProfile& profile, const ElectionInstance& election) {
  const auto& projects = election.projects;
  const std::size_t n = profile.size();
  EqualSharesOutcome out;
  out.payments.assign(n, mpq_class(0));
  out.balances.assign(n, n == 0 ? mpq_class(0) : mpq_class(mpz_class(static_cast<long>(election.budget)), mpz_class(static_cast<unsigned long>(n))));
  for (auto& b : out.balances) b.canonicalize();

  std::vector<std::vector<detail::Supporter>> supporters(projects.size());
  for (std::size_t v = 0; v < n; ++v)
    for (const auto& [p, t] : profile.ballots[v].entries()) {
      if (p >= projects.size()) throw Error(ErrorKind::UnknownProject, "ballot references project index " + std::to_string(p));
      if (t > 0) supporters[p].push_back({v, t});
    }

  std::vector<bool> open(projects.size());
  for (std::size_t p = 0; p < projects.size(); ++p) open[p] = !supporters[p].empty();

  while (true) {
    std::optional<std::size_t> best;
    mpq_class best_rho;
    for (std::size_t p = 0; p < projects.size(); ++p) {
      if (!open[p]) continue;
      auto rho = detail::min_rho(supporters[p], out.balances, projects[p].cost);
      if (!rho) {
        open[p] = false;  // balances only shrink, so it never becomes affordable again
        continue;
      }
      bool better = !best || *rho < best_rho ||
                    (*rho == best_rho && (projects[p].cost < projects[*best].cost ||
                                          (projects[p].cost == projects[*best].cost && projects[p].id < projects[*best].id)));
      if (better) {
        best = p;
        best_rho = *rho;
      }
    }
    if (!best) break;
    for (const auto& s : supporters[*best]) {
      mpq_class charge = best_rho * s.utility;
      if (charge > out.balances[s.voter]) charge = out.balances[s.voter];
      out.balances[s.voter] -= charge;
      out.payments[s.voter] += charge;
    }
    open[*best] = false;
    out.winners.projects.push_back(*best);
    out.winners.phases.push_back(SelectionPhase::EqualShares);
    out.winners.total_cost += projects[*best].cost;
  }
  out.equal_shares_cost = out.winners.total_cost;

  detail::greedy_fill(project_scores(profile, projects.size()), projects, election.budget, SelectionPhase::Completion,
                      out.winners);
  return out;
}

inline WinningSet equal_shares(const VoteProfile& profile, const ElectionInstance& election) {
  return equal_shares_detailed(profile, election).winners;
}

inline WinningSet aggregate(Rule rule, const VoteProfile& profile, const ElectionInstance& election) {
  return rule == Rule::Greedy ? greedy(profile, election) : equal_shares(profile, election);
}

}  // namespace pbmarl

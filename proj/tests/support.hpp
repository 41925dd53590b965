#pragma once

// Test fixtures and reference implementations. The oracles below are written
// independently of the library: plain loops, string-keyed data and exhaustive
// search, so agreement is evidence rather than repetition.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "pbmarl/aggregation.hpp"
#include "pbmarl/election.hpp"

namespace testing_support {

using pbmarl::CumulativeBallot;
using pbmarl::ElectionInstance;
using pbmarl::Money;
using pbmarl::Project;
using pbmarl::VoteProfile;

struct ProjectSpec {
  std::string id;
  Money cost;
  std::set<std::string> areas;
};

/// Builds a validated election; ballots are per voter lists of (project index, tokens).
inline ElectionInstance make_election(const std::vector<ProjectSpec>& projects, Money budget, int tokens,
                                      const std::vector<std::vector<std::pair<std::size_t, int>>>& ballots) {
  ElectionInstance e;
  e.name = "fixture";
  e.budget = budget;
  e.tokens_per_voter = tokens;
  e.currency = "EUR";
  std::set<std::string> all;
  for (const auto& p : projects) {
    e.projects.push_back({p.id, p.cost, p.areas});
    all.insert(p.areas.begin(), p.areas.end());
  }
  e.impact_areas.assign(all.begin(), all.end());
  for (std::size_t v = 0; v < ballots.size(); ++v) {
    pbmarl::VoterProfile voter;
    voter.id = "v" + std::to_string(v + 1);
    for (const auto& [p, t] : ballots[v]) voter.historical_ballot.add(p, t);
    voter.favoured_areas = pbmarl::derive_preferences(voter.historical_ballot, e.projects);
    e.voters.push_back(voter);
  }
  pbmarl::validate(e);
  return e;
}

inline std::filesystem::path data_dir() { return PBMARL_TEST_DATA_DIR; }

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("pbmarl_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// ---------------------------------------------------------------------------
// Random small instances

struct SmallInstance {
  ElectionInstance election;
  VoteProfile profile;
};

/// n voters, P projects, integer costs and token ballots drawn uniformly.
inline SmallInstance random_instance(std::mt19937_64& rng, std::size_t max_voters, std::size_t max_projects,
                                     int max_tokens = 4, Money max_cost = 20) {
  std::uniform_int_distribution<std::size_t> nv(1, max_voters), np(1, max_projects);
  std::uniform_int_distribution<Money> cost(1, max_cost);
  std::uniform_int_distribution<int> tokens(0, max_tokens);
  const std::size_t n = nv(rng), P = np(rng);
  std::vector<ProjectSpec> projects;
  Money cheapest = max_cost;
  for (std::size_t p = 0; p < P; ++p) {
    projects.push_back({"p" + std::to_string(p), cost(rng), {"a"}});
    cheapest = std::min(cheapest, projects.back().cost);
  }
  std::uniform_int_distribution<Money> budget(cheapest, max_cost * static_cast<Money>(P) / 2 + cheapest);
  std::vector<std::vector<std::pair<std::size_t, int>>> ballots(n);
  for (auto& b : ballots)
    for (std::size_t p = 0; p < P; ++p)
      if (int t = tokens(rng) - max_tokens / 2; t > 0) b.push_back({p, t});
  SmallInstance out{make_election(projects, budget(rng), max_tokens * static_cast<int>(P), ballots), {}};
  out.profile = pbmarl::historical_profile(out.election);
  return out;
}

// ---------------------------------------------------------------------------
// Aggregation oracles

/// True when project a should be preferred to b at equal key: lower cost, then smaller id.
inline bool tie_prefers(const Project& a, const Project& b) {
  return a.cost != b.cost ? a.cost < b.cost : a.id < b.id;
}

/// Greedy by repeated scanning: each round picks the best affordable unselected project.
inline std::vector<std::size_t> greedy_oracle(const std::vector<Project>& projects, const std::vector<long>& scores,
                                              Money budget, std::vector<std::size_t> selected = {}) {
  Money left = budget;
  for (std::size_t p : selected) left -= projects[p].cost;
  std::vector<bool> done(projects.size(), false);
  for (std::size_t p : selected) done[p] = true;
  while (true) {
    std::optional<std::size_t> best;
    for (std::size_t p = 0; p < projects.size(); ++p) {
      if (done[p] || projects[p].cost > left) continue;
      if (!best || scores[p] > scores[*best] ||
          (scores[p] == scores[*best] && tie_prefers(projects[p], projects[*best])))
        best = p;
    }
    if (!best) return selected;
    done[*best] = true;
    left -= projects[*best].cost;
    selected.push_back(*best);
  }
}

inline std::vector<long> token_scores(const ElectionInstance& e, const VoteProfile& profile) {
  std::vector<long> s(e.projects.size(), 0);
  for (const auto& b : profile.ballots)
    for (std::size_t p = 0; p < e.projects.size(); ++p) s[p] += b.tokens_for(p);
  return s;
}

/// Smallest rho with sum_v min(balance_v, rho u_v) >= cost, found by checking the
/// affordability function at every breakpoint balance_v / u_v and solving the linear
/// piece between the last unaffordable breakpoint and the first affordable one.
inline std::optional<mpq_class> rho_by_breakpoints(const std::vector<mpq_class>& balance, const std::vector<int>& utility,
                                                   Money cost) {
  auto paid = [&](const mpq_class& rho) {
    mpq_class sum = 0;
    for (std::size_t v = 0; v < balance.size(); ++v) {
      if (utility[v] == 0) continue;
      mpq_class want = rho * utility[v];
      sum += want < balance[v] ? want : balance[v];
    }
    return sum;
  };
  std::vector<mpq_class> points{mpq_class(0)};
  for (std::size_t v = 0; v < balance.size(); ++v)
    if (utility[v] > 0) points.push_back(balance[v] / utility[v]);
  std::sort(points.begin(), points.end());
  const mpq_class c(static_cast<long>(cost));
  if (paid(points.back()) < c) return std::nullopt;
  for (std::size_t k = 1; k < points.size(); ++k) {
    if (paid(points[k]) < c) continue;
    // On [points[k-1], points[k]] the paid amount is linear in rho.
    const mpq_class lo = points[k - 1], f_lo = paid(lo), f_hi = paid(points[k]);
    if (f_lo >= c) return lo;
    mpq_class rho = lo + (c - f_lo) * (points[k] - lo) / (f_hi - f_lo);
    rho.canonicalize();
    return rho;
  }
  return std::nullopt;
}

struct MesOracleResult {
  std::vector<std::size_t> winners;
  std::vector<mpq_class> charged;  // per voter, equal-shares phase only
  Money es_cost = 0;
};

inline MesOracleResult equal_shares_oracle(const ElectionInstance& e, const VoteProfile& profile) {
  const std::size_t n = profile.size(), P = e.projects.size();
  std::vector<mpq_class> balance(n, mpq_class(static_cast<long>(e.budget), static_cast<unsigned long>(n)));
  for (auto& b : balance) b.canonicalize();
  MesOracleResult out;
  out.charged.assign(n, mpq_class(0));
  std::vector<bool> taken(P, false);
  while (true) {
    std::optional<std::size_t> best;
    mpq_class best_rho;
    for (std::size_t p = 0; p < P; ++p) {
      if (taken[p]) continue;
      std::vector<int> u(n);
      bool any = false;
      for (std::size_t v = 0; v < n; ++v) {
        u[v] = profile.ballots[v].tokens_for(p);
        any = any || u[v] > 0;
      }
      if (!any) continue;
      auto rho = rho_by_breakpoints(balance, u, e.projects[p].cost);
      if (!rho) continue;
      if (!best || *rho < best_rho || (*rho == best_rho && tie_prefers(e.projects[p], e.projects[*best]))) {
        best = p;
        best_rho = *rho;
      }
    }
    if (!best) break;
    for (std::size_t v = 0; v < n; ++v) {
      mpq_class want = best_rho * profile.ballots[v].tokens_for(*best);
      mpq_class pay = want < balance[v] ? want : balance[v];
      balance[v] -= pay;
      out.charged[v] += pay;
    }
    taken[*best] = true;
    out.winners.push_back(*best);
    out.es_cost += e.projects[*best].cost;
  }
  out.winners = greedy_oracle(e.projects, token_scores(e, profile), e.budget, out.winners);
  return out;
}

// ---------------------------------------------------------------------------
// Reward oracle: the formula evaluated over string-keyed maps.

struct ScriptedWinner {
  double cost;
  std::set<std::string> areas;
  int tokens;
};

inline double scripted_reward(const std::set<std::string>& favoured, const std::vector<ScriptedWinner>& winners,
                              int T) {
  if (favoured.empty()) return 0.0;
  double r = 0.0;
  for (const auto& w : winners) {
    int common = 0;
    for (const auto& a : w.areas) common += static_cast<int>(favoured.count(a));
    r += std::log(w.cost) * (double(common) / double(favoured.size())) * (double(common) / double(w.areas.size())) *
         (double(w.tokens) / double(T));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Misc oracles

/// Pairwise-difference Gini.
inline double gini_pairwise(const std::vector<double>& x) {
  double sum = 0.0, diff = 0.0;
  for (double a : x) {
    sum += a;
    for (double b : x) diff += std::fabs(a - b);
  }
  if (sum == 0.0) return 0.0;
  const double n = static_cast<double>(x.size());
  return diff / (2.0 * n * n * (sum / n));
}

/// Every multiset of size T over {0..P-1}, as sorted token-count vectors.
inline std::set<std::vector<int>> multisets(int P, int T) {
  std::set<std::vector<int>> out;
  std::vector<int> counts(static_cast<std::size_t>(P), 0);
  auto rec = [&](auto&& self, int p, int left) -> void {
    if (p == P - 1) {
      counts[static_cast<std::size_t>(p)] = left;
      out.insert(counts);
      return;
    }
    for (int k = 0; k <= left; ++k) {
      counts[static_cast<std::size_t>(p)] = k;
      self(self, p + 1, left - k);
    }
  };
  rec(rec, 0, T);
  return out;
}

}  // namespace testing_support

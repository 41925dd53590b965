#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pbmarl/error.hpp"

namespace pbmarl {

/// Money in the smallest unit the election file uses (see ElectionInstance::cost_scale).
using Money = std::int64_t;
using ImpactAreas = std::set<std::string>;

struct Project {
  std::string id;
  Money cost = 0;
  ImpactAreas impact_areas;
};

/// Token assignment of one voter, keyed by project index (file order of PROJECTS).
/// Entries are kept sorted by project index and never hold zero counts.
class CumulativeBallot {
 public:
  using Entry = std::pair<std::size_t, int>;

  CumulativeBallot() = default;

  void add(std::size_t project, int tokens) {
    if (tokens == 0) return;
    auto it = std::lower_bound(entries_.begin(), entries_.end(), project,
                               [](const Entry& e, std::size_t p) { return e.first < p; });
    if (it != entries_.end() && it->first == project) {
      it->second += tokens;
      if (it->second == 0) entries_.erase(it);
    } else {
      entries_.insert(it, {project, tokens});
    }
  }

  int tokens_for(std::size_t project) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), project,
                               [](const Entry& e, std::size_t p) { return e.first < p; });
    return (it != entries_.end() && it->first == project) ? it->second : 0;
  }

  int total() const {
    int sum = 0;
    for (const auto& [_, t] : entries_) sum += t;
    return sum;
  }

  bool empty() const { return entries_.empty(); }
  std::span<const Entry> entries() const { return entries_; }

  friend bool operator==(const CumulativeBallot&, const CumulativeBallot&) = default;

 private:
  std::vector<Entry> entries_;
};

struct VoterProfile {
  std::string id;
  ImpactAreas favoured_areas;
  CumulativeBallot historical_ballot;
};

enum class SelectionPhase { Greedy, EqualShares, Completion };

constexpr const char* to_string(SelectionPhase phase) {
  switch (phase) {
    case SelectionPhase::Greedy: return "greedy";
    case SelectionPhase::EqualShares: return "equal_shares";
    case SelectionPhase::Completion: return "completion";
  }
  return "unknown";
}

/// Projects in selection order together with the phase that selected each one.
struct WinningSet {
  std::vector<std::size_t> projects;
  std::vector<SelectionPhase> phases;
  Money total_cost = 0;

  bool contains(std::size_t project) const {
    return std::find(projects.begin(), projects.end(), project) != projects.end();
  }
  std::size_t size() const { return projects.size(); }
  bool empty() const { return projects.empty(); }

  std::set<std::size_t> as_set() const { return {projects.begin(), projects.end()}; }
};

struct ElectionInstance {
  std::string name;
  std::vector<Project> projects;
  Money budget = 0;
  int tokens_per_voter = 0;
  std::vector<VoterProfile> voters;
  std::string currency;
  /// Money units per currency unit (1 for whole-unit files, 100 for cents).
  Money cost_scale = 1;
  /// Union of all project labels, sorted.
  std::vector<std::string> impact_areas;

  double cost_in_currency(std::size_t project) const {
    return static_cast<double>(projects.at(project).cost) / static_cast<double>(cost_scale);
  }
};

/// Throws unless the instance satisfies the structural invariants every module relies on.
inline void validate(const ElectionInstance& election) {
  if (election.tokens_per_voter < 1)
    throw Error(ErrorKind::TokenCountMissing, "tokens per voter must be at least 1");
  if (election.projects.empty()) throw Error(ErrorKind::DataError, "election has no projects");
  bool affordable = false;
  for (const auto& p : election.projects) {
    if (p.cost <= 0) throw Error(ErrorKind::NonNumericCost, "project " + p.id + " has non-positive cost");
    if (p.impact_areas.empty())
      throw Error(ErrorKind::EmptyImpactAreas, "project " + p.id + " has no impact areas");
    affordable = affordable || p.cost <= election.budget;
  }
  if (!affordable) throw Error(ErrorKind::NoAffordableProject, "no project fits the budget");
}

/// Impact areas of every project that received at least one token.
inline ImpactAreas derive_preferences(const CumulativeBallot& ballot, std::span<const Project> projects) {
  ImpactAreas areas;
  for (const auto& [project, tokens] : ballot.entries()) {
    if (project >= projects.size())
      throw Error(ErrorKind::UnknownProject, "ballot references project index " + std::to_string(project));
    if (tokens > 0) areas.insert(projects[project].impact_areas.begin(), projects[project].impact_areas.end());
  }
  return areas;
}

/// Token count of a project is its multiplicity among the branch choices.
inline CumulativeBallot decode_action(std::span<const std::size_t> branch_choices, std::size_t num_projects) {
  CumulativeBallot ballot;
  for (std::size_t choice : branch_choices) {
    if (choice >= num_projects)
      throw Error(ErrorKind::IndexOutOfRange,
                  "branch choice " + std::to_string(choice) + " with " + std::to_string(num_projects) + " projects");
    ballot.add(choice, 1);
  }
  return ballot;
}

inline CumulativeBallot decode_action(std::span<const std::size_t> branch_choices, std::span<const Project> projects) {
  return decode_action(branch_choices, projects.size());
}

/// Number of distinct cumulative ballots spending exactly `tokens` over `projects`: C(P+T-1, T).
inline std::uint64_t unbranched_action_space(std::uint64_t projects, std::uint64_t tokens) {
  // Multiplicative form keeps every intermediate an exact binomial coefficient.
  unsigned __int128 result = 1;
  const std::uint64_t n = projects + tokens - 1;
  for (std::uint64_t k = 1; k <= tokens; ++k) result = result * (n - tokens + k) / k;
  return static_cast<std::uint64_t>(result);
}

/// Output count of the branching network: one head of P values per token.
constexpr std::uint64_t branched_action_space(std::uint64_t projects, std::uint64_t tokens) {
  return projects * tokens;
}

inline std::size_t project_index(const ElectionInstance& election, const std::string& id) {
  for (std::size_t i = 0; i < election.projects.size(); ++i)
    if (election.projects[i].id == id) return i;
  throw Error(ErrorKind::UnknownProject, "unknown project id " + id);
}

}  // namespace pbmarl

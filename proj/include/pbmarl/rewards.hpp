#pragma once

#include <cmath>
#include <span>

#include "pbmarl/election.hpp"
#include "pbmarl/error.hpp"

namespace pbmarl {

struct RewardContext {
  const VoterProfile& voter;
  const CumulativeBallot& ballot_cast;
  const WinningSet& winners;
  int tokens_total;
};

namespace detail {

inline std::size_t overlap(const ImpactAreas& a, const ImpactAreas& b) {
  std::size_t n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

}  // namespace detail

/// Self-interested reward of one voter for a winning set:
///   sum_w ln(C(w)) * |p∩i(w)|/|p| * |p∩i(w)|/|i(w)| * a(w)/T
/// with p the voter's favoured areas and a(w) the tokens the cast ballot put on w.
/// Costs are taken in currency units (`cost_scale` money units each).
inline double reward(const RewardContext& ctx, std::span<const Project> projects, Money cost_scale = 1) {
  if (ctx.tokens_total < 1) throw Error(ErrorKind::TokenCountMissing, "reward needs T >= 1");
  if (ctx.ballot_cast.total() > ctx.tokens_total)
    throw Error(ErrorKind::BallotExceedsTokens, "cast ballot exceeds the token budget");
  for (std::size_t w : ctx.winners.projects)
    if (w >= projects.size()) throw Error(ErrorKind::UnknownWinnerProject, "winner index " + std::to_string(w));

  const auto& favoured = ctx.voter.favoured_areas;
  if (favoured.empty()) return 0.0;

  double total = 0.0;
  for (std::size_t w : ctx.winners.projects) {
    const int tokens = ctx.ballot_cast.tokens_for(w);
    if (tokens == 0) continue;
    const Project& project = projects[w];
    const auto shared = static_cast<double>(detail::overlap(favoured, project.impact_areas));
    if (shared == 0.0) continue;
    const double cost = static_cast<double>(project.cost) / static_cast<double>(cost_scale);
    total += std::log(cost) * (shared / static_cast<double>(favoured.size())) *
             (shared / static_cast<double>(project.impact_areas.size())) *
             (static_cast<double>(tokens) / static_cast<double>(ctx.tokens_total));
  }
  return total;
}

}  // namespace pbmarl

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pbmarl/aggregation.hpp"
#include "pbmarl/election.hpp"
#include "pbmarl/error.hpp"

namespace pbmarl {

enum class WelfareMeasure { SatisfactionProject, SatisfactionCost, Share };

inline constexpr std::array<WelfareMeasure, 3> kWelfareMeasures = {
    WelfareMeasure::SatisfactionProject, WelfareMeasure::SatisfactionCost, WelfareMeasure::Share};

constexpr std::string_view to_string(WelfareMeasure m) {
  switch (m) {
    case WelfareMeasure::SatisfactionProject: return "satisfaction_project";
    case WelfareMeasure::SatisfactionCost: return "satisfaction_cost";
    case WelfareMeasure::Share: return "share";
  }
  return "unknown";
}

/// Unit label used in reports: satisfactions are fractions, share is money.
constexpr std::string_view unit_of(WelfareMeasure m) { return m == WelfareMeasure::Share ? "currency" : "fraction"; }

/// |a ∩ W| / |W|, where a is the set of projects with at least one token.
inline double satisfaction_project(const CumulativeBallot& ballot, const WinningSet& winners) {
  if (winners.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t w : winners.projects) hit += ballot.tokens_for(w) > 0;
  return static_cast<double>(hit) / static_cast<double>(winners.size());
}

/// c(a ∩ W) / c(W).
inline double satisfaction_cost(const CumulativeBallot& ballot, const WinningSet& winners,
                                std::span<const Project> projects) {
  Money total = 0, hit = 0;
  for (std::size_t w : winners.projects) {
    total += projects[w].cost;
    if (ballot.tokens_for(w) > 0) hit += projects[w].cost;
  }
  return total == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(total);
}

/// What v(p) counts in the share measure.
enum class ShareCounting {
  Supporters,  // voters giving p at least one token
  Tokens,      // tokens p received
};

inline std::vector<std::int64_t> votes_received(const VoteProfile& profile, std::size_t num_projects,
                                                ShareCounting counting) {
  if (counting == ShareCounting::Tokens) return project_scores(profile, num_projects);
  std::vector<std::int64_t> supporters(num_projects, 0);
  for (const auto& ballot : profile.ballots)
    for (const auto& [p, t] : ballot.entries()) {
      if (p >= num_projects) throw Error(ErrorKind::UnknownProject, "ballot references project index " + std::to_string(p));
      supporters[p] += t > 0;
    }
  return supporters;
}

/// sum over voted-for winners p of c(p) / v(p); `votes` holds v(p) per project.
inline double share(const CumulativeBallot& ballot, const WinningSet& winners, std::span<const Project> projects,
                    std::span<const std::int64_t> votes, Money cost_scale = 1) {
  double total = 0.0;
  for (std::size_t w : winners.projects) {
    if (ballot.tokens_for(w) == 0) continue;
    if (votes[w] <= 0)
      throw Error(ErrorKind::ZeroVotesOnOwnVotedWinner, "winner " + projects[w].id + " has no recorded tokens");
    total += static_cast<double>(projects[w].cost) / static_cast<double>(cost_scale) /
             static_cast<double>(votes[w]);
  }
  return total;
}

inline double share(const CumulativeBallot& ballot, const WinningSet& winners, std::span<const Project> projects,
                    const VoteProfile& profile, Money cost_scale = 1,
                    ShareCounting counting = ShareCounting::Supporters) {
  const auto votes = votes_received(profile, projects.size(), counting);
  return share(ballot, winners, projects, votes, cost_scale);
}

/// sum_i sum_j |x_i - x_j| / (2 n^2 mean); 0 when every value is 0.
inline double gini(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::EmptyInput, "gini of no values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  const double sum = std::accumulate(sorted.begin(), sorted.end(), 0.0);
  if (sum <= 0.0) return 0.0;
  double weighted = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i)
    weighted += (2.0 * static_cast<double>(i + 1) - n - 1.0) * sorted[i];
  return std::clamp(weighted / (n * sum), 0.0, 1.0);
}

struct WelfareVector {
  WelfareMeasure measure = WelfareMeasure::SatisfactionProject;
  std::vector<std::string> voter_ids;
  std::vector<double> values;
};

inline WelfareVector welfare_vector(WelfareMeasure measure, const VoteProfile& profile, const WinningSet& winners,
                                    const ElectionInstance& election,
                                    ShareCounting counting = ShareCounting::Supporters) {
  WelfareVector out{measure, profile.voter_ids, {}};
  out.values.reserve(profile.size());
  std::vector<std::int64_t> received;
  if (measure == WelfareMeasure::Share) received = votes_received(profile, election.projects.size(), counting);
  for (const auto& ballot : profile.ballots) {
    switch (measure) {
      case WelfareMeasure::SatisfactionProject: out.values.push_back(satisfaction_project(ballot, winners)); break;
      case WelfareMeasure::SatisfactionCost:
        out.values.push_back(satisfaction_cost(ballot, winners, election.projects));
        break;
      case WelfareMeasure::Share:
        out.values.push_back(share(ballot, winners, election.projects, received, election.cost_scale));
        break;
    }
  }
  return out;
}

struct WelfareSummary {
  double gini = 0.0;
  double egalitarian = 0.0;
  /// Mean welfare per voter.
  double utilitarian = 0.0;
};

inline WelfareSummary summarize(std::span<const double> values) {
  if (values.empty()) return {};
  WelfareSummary s;
  s.gini = gini(values);
  s.egalitarian = *std::min_element(values.begin(), values.end());
  s.utilitarian = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  return s;
}

struct WelfareReport {
  WinningSet winners;
  std::array<WelfareSummary, 3> measures;

  const WelfareSummary& operator[](WelfareMeasure m) const { return measures[static_cast<std::size_t>(m)]; }
};

inline WelfareReport welfare_report(const VoteProfile& profile, const WinningSet& winners,
                                    const ElectionInstance& election,
                                    ShareCounting counting = ShareCounting::Supporters) {
  WelfareReport report{winners, {}};
  for (auto m : kWelfareMeasures)
    report.measures[static_cast<std::size_t>(m)] =
        summarize(welfare_vector(m, profile, winners, election, counting).values);
  return report;
}

/// Fairness of the collective choice for actual and learned ballots under one rule.
inline std::pair<WelfareReport, WelfareReport> build_table(const VoteProfile& actual, const VoteProfile& marl,
                                                           const ElectionInstance& election, Rule rule,
                                                           ShareCounting counting = ShareCounting::Supporters) {
  return {welfare_report(actual, aggregate(rule, actual, election), election, counting),
          welfare_report(marl, aggregate(rule, marl, election), election, counting)};
}

inline constexpr std::array<std::string_view, 4> kCostBuckets = {"small", "medium", "large", "extra_large"};

/// Projects sorted by cost (file order breaks ties) and split into quartiles, the lower buckets
/// taking any remainder. Returns, per bucket, tokens on its projects / (n * T).
inline std::array<double, 4> cost_quartile_distribution(const VoteProfile& profile, const ElectionInstance& election) {
  const std::size_t P = election.projects.size();
  if (P < 4) throw Error(ErrorKind::TooFewProjects, "cost quartiles need at least 4 projects");
  std::vector<std::size_t> order(P);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return election.projects[a].cost < election.projects[b].cost;
  });
  std::vector<std::size_t> bucket_of(P);
  std::size_t pos = 0;
  for (std::size_t b = 0; b < 4; ++b) {
    const std::size_t size = P / 4 + (b < P % 4 ? 1 : 0);
    for (std::size_t k = 0; k < size; ++k) bucket_of[order[pos++]] = b;
  }

  std::array<double, 4> shares{};
  const double possible = static_cast<double>(profile.size()) * static_cast<double>(election.tokens_per_voter);
  if (possible == 0.0) return shares;
  for (const auto& ballot : profile.ballots)
    for (const auto& [p, t] : ballot.entries()) shares[bucket_of.at(p)] += t;
  for (auto& s : shares) s /= possible;
  return shares;
}

/// Thresholds 0, 0.1, ..., 1.0.
inline std::array<double, 11> satisfaction_thresholds() {
  std::array<double, 11> t{};
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = static_cast<double>(k) / 10.0;
  return t;
}

/// Proportion of voters whose value reaches each threshold of `satisfaction_thresholds()`.
inline std::array<double, 11> satisfaction_cdf(std::span<const double> values) {
  std::array<double, 11> out{};
  if (values.empty()) return out;
  const auto thresholds = satisfaction_thresholds();
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    const auto reached = std::count_if(values.begin(), values.end(),
                                       [&](double v) { return v >= thresholds[k] - 1e-12; });
    out[k] = static_cast<double>(reached) / static_cast<double>(values.size());
  }
  return out;
}

}  // namespace pbmarl

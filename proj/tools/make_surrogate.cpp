// Writes synthetic stand-ins for the Aarau 2023 and Toulouse 2019 elections with the
// same dimensions (projects, voters, tokens, budget, nine impact areas). Costs, labels
// and ballots are random; the files are for exercising the pipeline, not for
// reproducing published numbers.
//
//   make_surrogate aarau data/aarau_2023_surrogate.pb
//   make_surrogate toulouse data/toulouse_2019_surrogate.pb

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "pbmarl/pabulib.hpp"

namespace {

struct CityShape {
  std::string unit;
  std::string currency;
  int projects;
  int voters;
  int tokens;
  long budget;
  double min_cost;
  double max_cost;
  long cost_rounding;
  std::uint64_t seed;
};

const std::vector<std::string> kAreas = {"culture",      "education", "environment", "health",  "public_space",
                                         "sport",        "transport", "urban_greenery", "welfare"};

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

pbmarl::RawPbFile generate(const CityShape& city) {
  std::mt19937_64 rng(city.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::lognormal_distribution<double> appeal_dist(0.0, 0.6);

  pbmarl::RawPbFile raw;
  raw.meta = {{"description", "synthetic surrogate with the dimensions of " + city.unit},
              {"country", "synthetic"},
              {"unit", city.unit + " (surrogate)"},
              {"num_projects", std::to_string(city.projects)},
              {"num_votes", std::to_string(city.voters)},
              {"budget", std::to_string(city.budget)},
              {"vote_type", "cumulative"},
              {"rule", "synthetic"},
              {"currency", city.currency},
              {"max_sum_points", std::to_string(city.tokens)}};

  raw.projects.columns = {"project_id", "cost", "category", "name"};
  std::vector<std::vector<int>> labels(static_cast<std::size_t>(city.projects));
  std::vector<double> appeal(static_cast<std::size_t>(city.projects));
  for (int p = 0; p < city.projects; ++p) {
    const double log_cost = std::log(city.min_cost) + unit(rng) * (std::log(city.max_cost) - std::log(city.min_cost));
    long cost = std::lround(std::exp(log_cost) / static_cast<double>(city.cost_rounding)) * city.cost_rounding;
    cost = std::max(cost, city.cost_rounding);
    const double r = unit(rng);
    const int count = r < 0.5 ? 1 : r < 0.85 ? 2 : 3;
    std::vector<int> areas(kAreas.size());
    for (std::size_t a = 0; a < areas.size(); ++a) areas[a] = static_cast<int>(a);
    std::shuffle(areas.begin(), areas.end(), rng);
    areas.resize(static_cast<std::size_t>(count));
    // The first nine projects pin one area each so every label is in use.
    if (p < static_cast<int>(kAreas.size()) && std::find(areas.begin(), areas.end(), p) == areas.end()) areas[0] = p;
    std::sort(areas.begin(), areas.end());
    labels[static_cast<std::size_t>(p)] = areas;
    appeal[static_cast<std::size_t>(p)] = appeal_dist(rng);
    std::vector<std::string> names;
    for (int a : areas) names.push_back(kAreas[static_cast<std::size_t>(a)]);
    raw.projects.rows.push_back({std::to_string(p + 1), std::to_string(cost), join(names, ','),
                                 "Project " + std::to_string(p + 1)});
  }

  raw.votes.columns = {"voter_id", "vote", "points"};
  for (int v = 0; v < city.voters; ++v) {
    const int favourites = 1 + static_cast<int>(unit(rng) * 3.0);
    std::vector<bool> likes(kAreas.size(), false);
    for (int f = 0; f < favourites; ++f) likes[static_cast<std::size_t>(unit(rng) * kAreas.size())] = true;

    std::vector<double> weight(static_cast<std::size_t>(city.projects));
    for (int p = 0; p < city.projects; ++p) {
      int overlap = 0;
      for (int a : labels[static_cast<std::size_t>(p)]) overlap += likes[static_cast<std::size_t>(a)];
      weight[static_cast<std::size_t>(p)] = appeal[static_cast<std::size_t>(p)] * (1.0 + 3.0 * overlap);
    }

    const int spend = unit(rng) < 0.85 ? city.tokens : 1 + static_cast<int>(unit(rng) * (city.tokens - 1));
    const int picks = std::min(spend, 1 + static_cast<int>(unit(rng) * 6.0));
    std::vector<int> chosen;
    std::vector<double> w = weight;
    for (int k = 0; k < picks; ++k) {
      std::discrete_distribution<int> pick(w.begin(), w.end());
      const int p = pick(rng);
      chosen.push_back(p);
      w[static_cast<std::size_t>(p)] = 0.0;
    }
    std::vector<int> tokens(chosen.size(), 1);
    std::vector<double> chosen_weight;
    for (int p : chosen) chosen_weight.push_back(weight[static_cast<std::size_t>(p)]);
    std::discrete_distribution<std::size_t> extra(chosen_weight.begin(), chosen_weight.end());
    for (int t = picks; t < spend; ++t) ++tokens[extra(rng)];

    std::vector<std::size_t> order(chosen.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return chosen[a] < chosen[b]; });
    std::vector<std::string> ids, points;
    for (std::size_t i : order) {
      ids.push_back(std::to_string(chosen[i] + 1));
      points.push_back(std::to_string(tokens[i]));
    }
    raw.votes.rows.push_back({std::to_string(v + 1), join(ids, ','), join(points, ',')});
  }
  return raw;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: make_surrogate aarau|toulouse OUTPUT.pb\n";
    return 3;
  }
  const std::string city = argv[1];
  CityShape shape;
  if (city == "aarau")
    shape = {"Aarau 2023", "CHF", 33, 1703, 10, 50000, 800.0, 25000.0, 100, 20230601};
  else if (city == "toulouse")
    shape = {"Toulouse 2019", "EUR", 30, 1494, 7, 1000000, 10000.0, 400000.0, 1000, 20191001};
  else {
    std::cerr << "unknown city " << city << "\n";
    return 3;
  }
  const auto raw = generate(shape);
  {
    std::ofstream out(argv[2], std::ios::binary | std::ios::trunc);
    out << pbmarl::serialize_pb(raw);
    if (!out) {
      std::cerr << "cannot write " << argv[2] << "\n";
      return 2;
    }
  }
  // Round-trip through the library so a generated file is known to load.
  pbmarl::build_election(pbmarl::parse_pb(pbmarl::read_text_file(argv[2])));
  return 0;
}

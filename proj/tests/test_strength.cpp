#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "cmprank/strength.hpp"

namespace cmprank {
namespace {

constexpr double e = std::numbers::e;

TeamStrength from_params(std::string team, CmpParams a, CmpParams d) {
  TeamStrength ts;
  ts.team = std::move(team);
  ts.attack = attack_strength(a);
  ts.defense = defense_strength(d);
  ts.overall = overall_strength(ts.attack, ts.defense);
  ts.attack_fit.params = a;
  ts.defense_fit.params = d;
  return ts;
}

TeamStrength with_scores(std::string team, double attack, double defense, double overall) {
  TeamStrength ts;
  ts.team = std::move(team);
  ts.attack = attack;
  ts.defense = defense;
  ts.overall = overall;
  return ts;
}

int rank_of(const RankingTable& t, const std::string& team) {
  for (const auto& r : t.rows) {
    if (r.strength.team == team) return r.rank;
  }
  return -1;
}

//---------------------------------------------------------------------------//

TEST(DefenseStrength, Examples) {
  EXPECT_NEAR(defense_strength({e, 2.0}), 2.0, 1e-15);
  EXPECT_GT(defense_strength({20.0, 1.5}), defense_strength({30.0, 1.5}));
  EXPECT_LT(defense_strength({20.0, 1.0}), defense_strength({20.0, 1.5}));
}

TEST(DefenseStrength, LambdaAtMostOneNamesTheTeam) {
  for (double lambda : {1.0, 0.5}) {
    try {
      defense_strength({lambda, 1.0}, "Harbor United");
      FAIL();
    } catch (const Error& err) {
      EXPECT_EQ(err.code(), ErrorCode::lambda_at_most_one);
      EXPECT_NE(std::string(err.what()).find("Harbor United"), std::string::npos);
    }
  }
}

TEST(AttackStrength, Examples) {
  EXPECT_NEAR(attack_strength({e * e, 1.0}), 2.0, 1e-15);
  EXPECT_GT(attack_strength({50.0, 1.0}), attack_strength({50.0, 2.0}));
  EXPECT_LT(attack_strength({20.0, 1.0}), attack_strength({30.0, 1.0}));
}

TEST(AttackStrength, Errors) {
  try {
    attack_strength({0.9, 1.0});
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::lambda_at_most_one);
  }
  try {
    attack_strength({10.0, 0.0});
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::nu_zero);
  }
}

TEST(OverallStrength, Examples) {
  EXPECT_NEAR(overall_strength(3.49, 3.16), 11.0284, 1e-12);
  EXPECT_NEAR(overall_strength(3.57, 3.07), 10.9599, 1e-12);
  EXPECT_EQ(overall_strength(1.0, 0.37), 0.37);
  EXPECT_THROW(overall_strength(-1.0, 2.0), Error);
  EXPECT_THROW(overall_strength(1.0, INFINITY), Error);
}

TEST(Strength, ReciprocalAtEqualParameters) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> lam(1.01, 400.0);
  std::uniform_real_distribution<double> nu(0.05, 5.0);
  for (int i = 0; i < 200; ++i) {
    const CmpParams p{lam(rng), nu(rng)};
    EXPECT_NEAR(attack_strength(p) * defense_strength(p), 1.0, 1e-14);
  }
}

// Each published row, read as two-decimal roundings of the factors, admits a
// product that rounds to the published strength.
TEST(Strength, PublishedRowsConsistentUnderRounding) {
  struct Row {
    double attack, defense, overall;
  };
  const Row rows[] = {{3.49, 3.16, 11.00}, {3.57, 3.07, 10.96}, {3.39, 3.21, 10.89}, {3.47, 3.12, 10.85},
                      {3.48, 3.11, 10.83}, {3.54, 3.05, 10.80}, {3.38, 3.15, 10.63}, {3.39, 3.13, 10.61},
                      {3.39, 3.12, 10.59}, {3.48, 3.05, 10.58}};
  for (const auto& r : rows) {
    const double lo = (r.attack - 0.005) * (r.defense - 0.005);
    const double hi = (r.attack + 0.005) * (r.defense + 0.005);
    EXPECT_LE(lo, r.overall + 0.005) << r.attack << " x " << r.defense;
    EXPECT_GE(hi, r.overall - 0.005) << r.attack << " x " << r.defense;
  }
}

//---------------------------------------------------------------------------//
// rank_teams

TEST(RankTeams, OrdersByOverall) {
  const auto t = rank_teams({with_scores("C", 3.39, 3.21, 10.89), with_scores("A", 3.49, 3.16, 11.00),
                             with_scores("B", 3.57, 3.07, 10.96)});
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.rows[0].strength.team, "A");
  EXPECT_EQ(t.rows[1].strength.team, "B");
  EXPECT_EQ(t.rows[2].strength.team, "C");
  for (int i = 0; i < 3; ++i) EXPECT_EQ(t.rows[i].rank, i + 1);
}

TEST(RankTeams, Singleton) {
  const auto t = rank_teams({with_scores("Solo", 2.0, 0.5, 1.0)});
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0].rank, 1);
}

TEST(RankTeams, TiesBreakOnDefenseThenName) {
  std::vector<TeamStrength> teams{with_scores("Zeta", 4.0, 0.25, 1.0), with_scores("Alpha", 2.0, 0.5, 1.0),
                                  with_scores("Beta", 2.0, 0.5, 1.0)};
  for (int run = 0; run < 3; ++run) {
    const auto t = rank_teams(teams);
    EXPECT_EQ(t.rows[0].strength.team, "Alpha");
    EXPECT_EQ(t.rows[1].strength.team, "Beta");
    EXPECT_EQ(t.rows[2].strength.team, "Zeta");
    std::rotate(teams.begin(), teams.begin() + 1, teams.end());
  }
}

TEST(RankTeams, CarriesSampleAverages) {
  auto ts = with_scores("A", 3.0, 0.3, 0.9);
  ts.avg_scored = 33.32;
  ts.avg_conceded = 24.32;
  const auto t = rank_teams({ts});
  EXPECT_EQ(t.rows[0].avg_scored, 33.32);
  EXPECT_EQ(t.rows[0].avg_conceded, 24.32);
}

TEST(RankTeams, ScalingPreservesOrder) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  std::vector<TeamStrength> teams;
  for (int i = 0; i < 12; ++i) {
    const double a = u(rng), d = u(rng);
    teams.push_back(with_scores("T" + std::to_string(i), a, d, a * d));
  }
  const auto base = rank_teams(teams);
  for (double k : {0.1, 3.0, 1e6}) {
    auto scaled = teams;
    for (auto& t : scaled) t.overall *= k;
    const auto t = rank_teams(scaled);
    for (std::size_t i = 0; i < t.rows.size(); ++i) EXPECT_EQ(t.rows[i].strength.team, base.rows[i].strength.team);
  }
}

TEST(RankTeams, BetterFitsNeverLowerRank) {
  std::vector<TeamStrength> teams;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> lam(50.0, 400.0);
  std::uniform_real_distribution<double> nu(1.0, 2.0);
  for (int i = 0; i < 10; ++i) {
    teams.push_back(from_params("T" + std::to_string(i), {lam(rng), nu(rng)}, {lam(rng), nu(rng)}));
  }
  const auto base = rank_teams(teams);
  for (std::size_t i = 0; i < teams.size(); ++i) {
    auto a = std::get<CmpParams>(teams[i].attack_fit.params);
    auto d = std::get<CmpParams>(teams[i].defense_fit.params);
    for (double f : {1.1, 2.0, 10.0}) {
      auto better_attack = teams;
      better_attack[i] = from_params(teams[i].team, {a.lambda * f, a.nu}, d);
      EXPECT_LE(rank_of(rank_teams(better_attack), teams[i].team), rank_of(base, teams[i].team));
      auto better_defense = teams;
      better_defense[i] = from_params(teams[i].team, a, {1.0 + (d.lambda - 1.0) / f, d.nu});
      EXPECT_LE(rank_of(rank_teams(better_defense), teams[i].team), rank_of(base, teams[i].team));
    }
  }
}

//---------------------------------------------------------------------------//
// assess_team

TEST(AssessTeam, ProductIdentityAndAverages) {
  const CmpParams a{286.46, 1.64};
  const CmpParams d{80.0, 1.4};
  const GoalSeries scored{sample(a, 60, 1), "s"};
  const GoalSeries conceded{sample(d, 60, 2), "c"};
  const auto ts = assess_team("Riverside", scored, conceded);
  EXPECT_EQ(ts.overall, ts.attack * ts.defense);
  EXPECT_EQ(ts.attack, attack_strength(std::get<CmpParams>(ts.attack_fit.params)));
  EXPECT_EQ(ts.defense, defense_strength(std::get<CmpParams>(ts.defense_fit.params)));
  EXPECT_EQ(ts.matches_used, 60u);
  EXPECT_DOUBLE_EQ(ts.avg_scored, empirical_moments(scored).mean);
  EXPECT_DOUBLE_EQ(ts.avg_conceded, empirical_moments(conceded).mean);
  EXPECT_GT(ts.attack, 0.0);
  EXPECT_GT(ts.defense, 0.0);
}

TEST(AssessTeam, LowScoringTeamIsRejected) {
  // Mean well below 1 goal puts the fitted lambda under 1.
  const GoalSeries scored{{0, 0, 1, 0, 0, 2, 0, 0}, "s"};
  const GoalSeries conceded{{20, 25, 30, 22, 27, 24, 21, 29}, "c"};
  try {
    assess_team("Minnows", scored, conceded);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::lambda_at_most_one);
  }
}

//---------------------------------------------------------------------------//
// strength_sensitivity

double closed_form_d_lambda_a(CmpParams a, CmpParams d) { return d.nu / (a.nu * std::log(d.lambda)) / a.lambda; }

TEST(Sensitivity, MatchesClosedForm) {
  const CmpParams a{e * e, 1.0};
  const CmpParams d{e, 2.0};
  const auto s = strength_sensitivity(a, d, 1e-4);
  EXPECT_NEAR(closed_form_d_lambda_a(a, d), 2.0 / (e * e), 1e-15);
  EXPECT_NEAR(s.d_lambda_a / (2.0 / (e * e)), 1.0, 1e-4);
}

TEST(Sensitivity, SlopeHalvesWhenLambdaDoubles) {
  const CmpParams d{25.0, 1.5};
  const auto at20 = strength_sensitivity({20.0, 1.2}, d, 1e-3);
  const auto at40 = strength_sensitivity({40.0, 1.2}, d, 1e-3);
  EXPECT_NEAR(at20.d_lambda_a / at40.d_lambda_a, 2.0, 1e-3);
}

TEST(Sensitivity, DefenseSlopeIsNegative) {
  for (double ld : {3.0, 25.0, 300.0}) {
    for (double la : {3.0, 25.0, 300.0}) {
      const CmpParams a{la, 1.3};
      const CmpParams d{ld, 1.6};
      const auto s = strength_sensitivity(a, d, 1e-3);
      EXPECT_LT(s.d_lambda_d, 0.0);
      // d s / d lambda_d = -s_a nu_d / (lambda_d log^2 lambda_d)
      const double exact = -attack_strength(a) * d.nu / (ld * std::pow(std::log(ld), 2));
      EXPECT_NEAR(s.d_lambda_d / exact, 1.0, 1e-4);
    }
  }
}

TEST(Sensitivity, RejectsStepsCrossingOne) {
  EXPECT_THROW(strength_sensitivity({1.05, 1.0}, {10.0, 1.0}, 0.1), Error);
  EXPECT_THROW(strength_sensitivity({10.0, 1.0}, {10.0, 1.0}, 0.0), Error);
}

}  // namespace
}  // namespace cmprank

#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "castcost/castcost.hpp"
#include "oracle/random_model.hpp"
#include "support/checks.hpp"

using namespace castcost;

namespace {

double total_of(const oracle::RandomModel& m, std::uint64_t layout) {
  auto r = oracle::render(m, layout);
  return compute_part_cost(parse_model(r.text).model, r.part).subtotal;
}

}  // namespace

TEST(Properties, RandomModelsMatchFlatOracle) {
  std::mt19937_64 rng(101);
  double worst = 0;
  for (int i = 0; i < 300; ++i) {
    auto m = oracle::random_model(rng);
    worst = std::max(worst, support::rel_err(total_of(m, 20000 + i), oracle::flat_total(m)));
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(Properties, HomogeneousInMonetaryValues) {
  std::mt19937_64 rng(103);
  for (int i = 0; i < 200; ++i) {
    auto m = oracle::random_model(rng);
    const double base = total_of(m, 30000 + i);
    for (double lambda : {0.5, 3.0, 10.0}) {
      EXPECT_LE(support::rel_err(total_of(oracle::scaled(m, lambda), 30000 + i), lambda * base), 1e-12)
          << i << " " << lambda;
    }
  }
}

TEST(Properties, ScrapFreeModelsAddUp) {
  std::mt19937_64 rng(107);
  for (int i = 0; i < 200; ++i) {
    auto m = oracle::without_scrap(oracle::random_model(rng));
    auto r = oracle::render(m, 40000 + i);
    auto b = compute_part_cost(parse_model(r.text).model, r.part);
    EXPECT_EQ(b.scrap_multiplier_applied, 1.0);
    EXPECT_LE(support::rel_err(b.subtotal, oracle::flat_total(m)), 1e-12);
    std::function<void(const CostBreakdown&)> no_scrap = [&](const CostBreakdown& n) {
      EXPECT_EQ(n.scrap_multiplier_applied, 1.0) << n.label;
      for (const auto& c : n.children) {
        if (auto* k = std::get_if<CostBreakdown>(&c)) {
          no_scrap(*k);
        } else if (std::get<LineItem>(c).label == "scrap") {
          EXPECT_EQ(std::get<LineItem>(c).amount, 0.0);
        }
      }
    };
    no_scrap(b);
  }
}

TEST(Properties, ConservationOnRandomModels) {
  std::mt19937_64 rng(109);
  for (int i = 0; i < 300; ++i) {
    auto r = oracle::render(oracle::random_model(rng), 50000 + i);
    auto b = compute_part_cost(parse_model(r.text).model, r.part);
    auto v = support::conservation_violation(b);
    EXPECT_FALSE(v) << *v;
  }
}

TEST(Properties, ScrapChainMonotone) {
  std::mt19937_64 rng(113);
  std::uniform_real_distribution<double> u(0, 10);
  const auto grid = support::scrap_grid();
  for (int i = 0; i < 50; ++i) {
    std::vector<ScrapStage> s(1 + rng() % 4);
    for (auto& st : s) st = {u(rng), 0.9 * u(rng) / 10};
    const std::size_t k = rng() % s.size();
    const double upstream = u(rng);
    double prev = -1;
    for (double rate : grid) {
      s[k].scrap_rate = rate;
      double c = apply_scrap_chain(s, upstream).cost_per_good_part;
      EXPECT_GE(c, prev);
      prev = c;
    }
  }
}

TEST(Properties, ReferenceTotalMonotoneInEveryScrapRate) {
  auto bundle = build_reference_model();
  for (const auto& lever : support::reference_scrap_levers()) {
    auto rows = sweep(bundle.model, bundle.part, lever, support::scrap_grid());
    ASSERT_EQ(rows.size(), 100u);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      EXPECT_GE(rows[i].total, rows[i - 1].total) << lever << " " << rows[i].value;
    }
  }
}

TEST(Properties, ConservationOnReferenceVariants) {
  auto bundle = build_reference_model();
  std::mt19937_64 rng(127);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 100; ++i) {
    Scenario s;
    s.id = "v";
    s.overrides["n_cores"] = std::floor(u(rng) * 5);
    s.overrides["parts_per_mold"] = 1 + std::floor(u(rng) * 6);
    s.overrides["quality_class"] = 1 + 2 * u(rng);
    s.overrides["mold_scrap_rate"] = 0.2 * u(rng);
    s.overrides["labor_rate_per_h"] = 20 + 60 * u(rng);
    auto b = compute_part_cost(bundle.model, bundle.part, &s);
    auto v = support::conservation_violation(b);
    EXPECT_FALSE(v) << *v;
  }
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "generators.hpp"
#include "oracles.hpp"
#include "reframe/annotation.hpp"
#include "reframe/error.hpp"

using namespace reframe;

namespace {

ReceptivenessRecord record(std::string pair, StrategyKind v, std::string who,
                           std::array<int, 8> answers) {
  return {std::move(pair), v, std::move(who), answers};
}

}  // namespace

TEST_SUITE("annotation") {
  TEST_CASE("reverse coding flips negatively phrased questions") {
    const auto r = record("p", StrategyKind::hedging, "a", {-3, 3, -3, 3, -3, -3, -3, -3});
    const auto coded = code_answers(r);
    for (double v : coded) CHECK(v == 3.0);
    const auto s = receptiveness_score(r);
    CHECK(s.index == 3.0);
    for (double f : s.factors) CHECK(f == 3.0);
    const auto mixed = receptiveness_score(record("p", StrategyKind::hedging, "a", {1, 1, 0, 2, 0, 0, -2, 0}));
    CHECK(mixed.factors[0] == 0.0);   // (-1 + 1) / 2
    CHECK(mixed.factors[1] == 1.0);   // (0 + 2) / 2
    CHECK(mixed.factors[3] == 1.0);   // (2 + 0) / 2
    CHECK(mixed.index == doctest::Approx(0.5));
  }

  TEST_CASE("record validation") {
    CHECK_THROWS_AS(validate(record("p", StrategyKind::hedging, "a", {4, 0, 0, 0, 0, 0, 0, 0})), DataError);
    CHECK_THROWS_AS(validate(record("p", StrategyKind::original, "a", {})), DataError);
    CHECK_THROWS_AS(validate(ReasonabilityRecord{"p", StrategyKind::original, "a", 5}), DataError);
  }

  TEST_CASE("property: index equals the mean of the factor scores") {
    gen::Rng rng(5);
    for (int trial = 0; trial < 500; ++trial) {
      ReceptivenessRecord r{"p", StrategyKind::agreement, "a", {}};
      for (auto& a : r.answers) a = static_cast<int>(gen::uniform(rng, 0, 6)) - 3;
      const auto s = receptiveness_score(r);
      double mean = 0.0;
      for (double f : s.factors) mean += f / 4.0;
      CHECK(std::abs(s.index - mean) <= 1e-12);
      CHECK(s.index >= -3.0);
      CHECK(s.index <= 3.0);
    }
  }

  TEST_CASE("krippendorff alpha known values") {
    // Perfect agreement.
    const std::vector<std::vector<double>> perfect = {{1, 1, 1}, {2, 2}, {3, 3}};
    CHECK(krippendorff_alpha_interval(perfect) == doctest::Approx(1.0));
    // No variation at all.
    const std::vector<std::vector<double>> flat = {{1, 1}, {1, 1}};
    CHECK(krippendorff_alpha_interval(flat) == 1.0);
    // Hand computation: units {1,2} and {3,4}. Do = (2 + 2) / 4 = 1;
    // De = 40 ordered-pair squared differences / (4 * 3) = 10/3; alpha = 1 - 0.3.
    const std::vector<std::vector<double>> small = {{1, 2}, {3, 4}};
    CHECK(krippendorff_alpha_interval(small) == doctest::Approx(0.7));
    const std::vector<std::vector<double>> single = {{1, 2}, {3}};
    CHECK_THROWS_AS(krippendorff_alpha_interval(single), DataError);
  }

  TEST_CASE("oracle: krippendorff alpha on random instances") {
    gen::Rng rng(303);
    for (int trial = 0; trial < 300; ++trial) {
      const auto units = gen::units(rng);
      const double ours = krippendorff_alpha_interval(units);
      CHECK(std::abs(ours - oracle::krippendorff_interval(units)) <= 1e-9);

      // Permuting units and values within units leaves alpha unchanged.
      auto shuffled = units;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      for (auto& u : shuffled) std::shuffle(u.begin(), u.end(), rng);
      CHECK(std::abs(krippendorff_alpha_interval(shuffled) - ours) <= 1e-9);
    }
  }

  TEST_CASE("alpha over records under both unit choices") {
    std::vector<ReceptivenessRecord> rs;
    for (const char* p : {"p1", "p2", "p3"}) {
      for (const char* who : {"a", "b"}) {
        const int v = p[1] - '1';
        rs.push_back(record(p, StrategyKind::hedging, who, {-v, v, -v, v, -v, -v, -v, -v}));
      }
    }
    CHECK(receptiveness_alpha(rs, AlphaUnit::record_index) == doctest::Approx(1.0));
    CHECK(receptiveness_alpha(rs, AlphaUnit::question) == doctest::Approx(1.0));
    auto reversed = rs;
    std::reverse(reversed.begin(), reversed.end());
    rs[1].answers[0] = 3;
    reversed[4].answers[0] = 3;
    CHECK(receptiveness_alpha(rs, AlphaUnit::question) ==
          doctest::Approx(receptiveness_alpha(reversed, AlphaUnit::question)));
    CHECK(to_string(AlphaUnit::question) == "question");
  }

  TEST_CASE("reasonability summary") {
    std::vector<ReasonabilityRecord> rs;
    // original: 2, 1, 2 ; hedging: 3, 2, 4 (two annotators on p1 averaging to 3)
    rs.push_back({"p1", StrategyKind::original, "a", 2});
    rs.push_back({"p2", StrategyKind::original, "a", 1});
    rs.push_back({"p3", StrategyKind::original, "a", 2});
    rs.push_back({"p1", StrategyKind::hedging, "a", 2});
    rs.push_back({"p1", StrategyKind::hedging, "b", 4});
    rs.push_back({"p2", StrategyKind::hedging, "a", 2});
    rs.push_back({"p3", StrategyKind::hedging, "a", 4});
    const auto rows = reasonability_summary(rs);
    REQUIRE(rows.size() == 2);
    const auto& hedge = rows[0];
    CHECK(hedge.variant == StrategyKind::hedging);
    CHECK(hedge.items == 3);
    CHECK(hedge.mean == doctest::Approx(3.0));
    // diffs (1, 1, 2): mean 4/3, sd = 0.57735, t = 4
    CHECK(*hedge.mean_diff == doctest::Approx(4.0 / 3.0));
    CHECK(*hedge.t == doctest::Approx(4.0));
    CHECK(*hedge.df == 2.0);
    CHECK(hedge.ci_lower < hedge.mean);
    CHECK(hedge.ci_upper > hedge.mean);
    // t_{0.975, 2} = 4.302653; se = 1/sqrt(3)
    CHECK(hedge.ci_upper - hedge.mean == doctest::Approx(4.302653 / std::sqrt(3.0)).epsilon(1e-6));
    const auto& orig = rows[1];
    CHECK(orig.variant == StrategyKind::original);
    CHECK_FALSE(orig.mean_diff.has_value());
    CHECK(orig.mean == doctest::Approx(5.0 / 3.0));
  }

  TEST_CASE("reasonability with constant differences keeps the difference") {
    std::vector<ReasonabilityRecord> rs = {{"p1", StrategyKind::original, "a", 1},
                                           {"p2", StrategyKind::original, "a", 2},
                                           {"p1", StrategyKind::agreement, "a", 2},
                                           {"p2", StrategyKind::agreement, "a", 3}};
    const auto rows = reasonability_summary(rs);
    CHECK(*rows[0].mean_diff == doctest::Approx(1.0));
    CHECK_FALSE(rows[0].t.has_value());
  }

  TEST_CASE("table parsing") {
    std::istringstream csv(
        "pair_id,variant,annotator_id,q1,q2,q3,q4,q5,q6,q7,q8\n"
        "p1,hedging,w1,-1,2,0,+1,-3,3,0,0\n"
        "\"p,2\",paraphrase,w2,0,0,0,0,0,0,0,2.0\n");
    const auto rs = parse_receptiveness(csv);
    REQUIRE(rs.size() == 2);
    CHECK(rs[0].answers[3] == 1);
    CHECK(rs[1].pair_id == "p,2");
    CHECK(rs[1].variant == StrategyKind::baseline_paraphrase);
    CHECK(rs[1].answers[7] == 2);

    std::istringstream tsv("pair_id\tvariant\tannotator_id\tscore\np1\toriginal\tw\t3\n");
    CHECK(parse_reasonability(tsv).at(0).score == 3);

    const auto error_line = [](std::string text) -> std::size_t {
      std::istringstream in(text);
      try {
        parse_receptiveness(in);
      } catch (const DataError& e) {
        return e.line();
      }
      return 0;
    };
    const std::string header = "pair_id,variant,annotator_id,q1,q2,q3,q4,q5,q6,q7,q8\n";
    CHECK(error_line(header + "p1,hedging,w,0,0,0,0,0,0,0,0\np2,hedging,w,0,0,9,0,0,0,0,0\n") == 3);
    CHECK(error_line(header + "p1,hedging,w,0,0,0,0,0,0,0\n") == 2);
    CHECK(error_line(header + "p1,hedging,w,0,0,x,0,0,0,0,0\n") == 2);
    CHECK(error_line(header + "p1,original,w,0,0,0,0,0,0,0,0\n") == 2);
    std::istringstream missing_col("pair_id,variant,q1\n");
    CHECK_THROWS_AS(parse_receptiveness(missing_col), DataError);
    CHECK_THROWS_AS(load_reasonability("/nonexistent/file.csv"), DataError);
  }
}

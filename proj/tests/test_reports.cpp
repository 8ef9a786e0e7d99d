#include <doctest.h>

#include <fstream>
#include <sstream>

#include "reframe/error.hpp"
#include "reframe/reports.hpp"

using namespace reframe;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("reports") {
  TEST_CASE("tabular rendering") {
    ReportTable t{"demo", {"name", "n", "x", "missing"}, {}};
    t.add_row({std::string("a\tb"), 3LL, 1.0 / 3.0, std::monostate{}});
    t.add_row({std::string("neg"), -1LL, -0.00001, std::nan("")});
    CHECK(render(t, ReportFormat::tabular) ==
          "name\tn\tx\tmissing\n"
          "a\\tb\t3\t0.3333\tNA\n"
          "neg\t-1\t0.0000\tNA\n");
    CHECK_THROWS_AS(t.add_row({1LL}), DataError);
  }

  TEST_CASE("structured mirror") {
    ReportTable t{"demo", {"name", "x"}, {}};
    t.add_row({std::string("a"), 0.123456});
    t.add_row({std::string("b"), std::monostate{}});
    const auto j = nlohmann::json::parse(render(t, ReportFormat::structured));
    CHECK(j["columns"] == nlohmann::json::array({"name", "x"}));
    CHECK(j["rows"][0]["x"] == 0.1235);
    CHECK(j["rows"][1]["x"].is_null());
    CHECK(render(t, ReportFormat::structured).back() == '\n');
  }

  TEST_CASE("empty tables and determinism") {
    const auto dir = std::filesystem::temp_directory_path() / "reframe_reports";
    std::filesystem::remove_all(dir);
    ReportTable t{"empty", {"a", "b"}, {}};
    const auto paths = emit_report(t, dir);
    CHECK(slurp(paths[0]) == "a\tb\n");
    const auto first = slurp(paths[1]);
    emit_report(t, dir);
    CHECK(slurp(paths[1]) == first);
    std::filesystem::remove_all(dir);
    CHECK_THROWS_AS(emit_report(t, "/proc/forbidden_dir", ReportFormat::tabular), ConfigError);
  }

  TEST_CASE("factor table shape") {
    FactorTable f;
    for (std::size_t s = 0; s < 6; ++s) {
      for (std::size_t k = 0; k < 4; ++k) f.cells[s][k] = static_cast<double>(s + k);
    }
    const auto t = factor_table(f);
    CHECK(t.rows.size() == 7);
    CHECK(t.columns.size() == 6);
    CHECK(std::get<std::string>(t.rows.back()[0]) == "average");
    CHECK(std::get<std::string>(t.rows[5][0]) == "agreement");
  }

  TEST_CASE("exclusion table lists every rule") {
    ExclusionReport r{10, 1, 2, 3, 1, 3};
    CHECK(render(exclusion_table(r), ReportFormat::tabular) ==
          "rule\tcount\ninput\t10\nlabel\t1\nlength\t2\nsubreddit\t3\ntoxicity\t1\nkept\t3\n");
  }
}

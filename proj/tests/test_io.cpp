#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <sstream>

#include "fixtures.hpp"

using namespace factor_risk;

namespace {

std::string error_of(const std::string& csv, const std::vector<std::string>& skip = {}) {
  std::istringstream in(csv);
  try {
    read_csv(in, skip);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(ReadCsv, SkipsNamedColumns) {
  std::istringstream in("date,RF,RM-RF,RI\n2001-01,0.1,1.5,2\n2001-02,0.2,-0.5,3\n2001-03,0.3,0.25,-1e-2\n");
  const auto t = read_csv(in, {"date"});
  EXPECT_EQ(t.rows(), 3u);
  EXPECT_EQ(t.names, (std::vector<std::string>{"RF", "RM-RF", "RI"}));
  EXPECT_EQ(t.column("RI"), (std::vector<double>{2, 3, -0.01}));
  const auto s = make_sample(t, "RI", {"RF", "RM-RF"});
  EXPECT_EQ(s.size(), 3u);
  EXPECT_EQ(s.factor_dim(), 2u);
  EXPECT_EQ(s.factor(2, 1), 0.25);
  EXPECT_EQ(s.loss(0), 2.0);
}

TEST(ReadCsv, ToleratesBomCrlfAndBlankLines) {
  std::istringstream in("\xEF\xBB\xBFX,W\r\n1,+2\r\n\r\n 3 , 4\r\n");
  const auto t = read_csv(in);
  EXPECT_EQ(t.names, (std::vector<std::string>{"X", "W"}));
  EXPECT_EQ(t.column("X"), (std::vector<double>{1, 3}));
  EXPECT_EQ(t.column("W"), (std::vector<double>{2, 4}));
}

TEST(ReadCsv, BlankCellNamesRowAndColumn) {
  const auto msg = error_of("date,RF,RI\n2001-01,,2\n", {"date"});
  EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("column RF"), std::string::npos) << msg;
}

TEST(ReadCsv, Rejections) {
  EXPECT_NE(error_of("").find("empty"), std::string::npos);
  EXPECT_NE(error_of("X,W\n").find("no data rows"), std::string::npos);
  EXPECT_NE(error_of("X,W\n1,2\n3\n").find("row 3"), std::string::npos);
  EXPECT_NE(error_of("X,W\n1,2,3\n").find("row 2"), std::string::npos);
  EXPECT_NE(error_of("X,W\n1,abc\n").find("column W"), std::string::npos);
  EXPECT_NE(error_of("X,W\n1,inf\n").find("column W"), std::string::npos);
  EXPECT_NE(error_of("X,X\n1,2\n").find("duplicate"), std::string::npos);
  EXPECT_NE(error_of("X,,W\n1,2,3\n").find("empty column name"), std::string::npos);
  // a skipped column may hold anything
  EXPECT_EQ(error_of("d,X\nabc,1\n", {"d"}), "");
  EXPECT_THROW(read_csv("/nonexistent/file.csv"), DataError);
}

TEST(MakeSample, MissingColumns) {
  std::istringstream in("X,W\n1,2\n");
  const auto t = read_csv(in);
  EXPECT_THROW(make_sample(t, "Y", {"W"}), DataError);
  EXPECT_THROW(make_sample(t, "X", {"V"}), DataError);
  EXPECT_THROW(make_sample(t, "X", {}), DataError);
}

TEST(Grid, RoundTrip) {
  const auto s = simulate(0.1, {1.0}, 0.5, GaussianFactors{{0.0}, {{1.0}}}, 2000, 3);
  const std::vector<double> p{0.9, 0.975}, q{0.1, 0.5, 0.9};
  DiffOptions opt;
  opt.draws = 20000;
  const auto grid = diff_grid(ols_fit(s), s, p, q, opt);
  std::ostringstream out;
  write_grid(out, grid);
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "p,q,rho_factor,rho_plain,diff");
  std::istringstream in(text);
  const auto back = read_grid(in);
  ASSERT_EQ(back.rows.size(), grid.rows.size());
  for (std::size_t k = 0; k < grid.rows.size(); ++k) {
    // 9 significant digits
    const auto& a = grid.rows[k];
    const auto& b = back.rows[k];
    for (auto [x, y] : {std::pair{a.p, b.p}, {a.q, b.q}, {a.rho_factor, b.rho_factor}, {a.rho_plain, b.rho_plain},
                        {a.diff, b.diff}})
      EXPECT_NEAR(x, y, 5e-9 * std::abs(x));
  }
  std::ostringstream again;
  write_grid(again, back);
  EXPECT_EQ(again.str(), text);
}

TEST(Grid, NaNSurvivesRoundTrip) {
  DiffGrid g;
  g.rows.push_back({0.5, 0.5, 0.0, 0.0, std::nan("")});
  std::ostringstream out;
  write_grid(out, g);
  EXPECT_NE(out.str().find(",nan"), std::string::npos);
  std::istringstream in(out.str());
  EXPECT_TRUE(std::isnan(read_grid(in).rows[0].diff));
}

TEST(Grid, Rejections) {
  std::istringstream bad_header("p,q\n");
  EXPECT_THROW(read_grid(bad_header), DataError);
  std::istringstream short_row("p,q,rho_factor,rho_plain,diff\n1,2,3\n");
  EXPECT_THROW(read_grid(short_row), DataError);
  std::istringstream text_cell("p,q,rho_factor,rho_plain,diff\n1,2,3,4,x\n");
  EXPECT_THROW(read_grid(text_cell), DataError);
}

TEST(RegressionTable, ColumnLayout) {
  const auto s = simulate(0.5, {1.0, -2.0}, 0.3, GaussianFactors{{0, 0}, {{1, 0}, {0, 1}}}, 500, 5);
  const auto fit = ols_fit(s, {"RM-RF", "SMB"});
  const auto table = format_regression_table(fit);
  std::istringstream in(table);
  std::string header, rule, line;
  std::getline(in, header);
  std::getline(in, rule);
  std::istringstream h(header);
  std::vector<std::string> cols;
  for (std::string w; h >> w;) cols.push_back(w);
  EXPECT_EQ(cols, (std::vector<std::string>{"coef", "std", "err", "t", "P>|t|", "[0.025", "0.975]"}));
  EXPECT_EQ(rule.find_first_not_of('-'), std::string::npos);
  std::vector<std::string> names;
  while (std::getline(in, line)) {
    std::istringstream r(line);
    std::string name;
    r >> name;
    names.push_back(name);
    std::vector<double> v;
    for (double x; r >> x;) v.push_back(x);
    ASSERT_EQ(v.size(), 6u) << line;
  }
  EXPECT_EQ(names, (std::vector<std::string>{"const", "RM-RF", "SMB"}));
}

TEST(RegressionTable, FixedDecimals) {
  RegressionFit fit;
  fit.beta0 = 0.1413;
  fit.names = {"const"};
  fit.std_err = {0.061};
  fit.tstat = {2.322};
  fit.pvalue = {0.021};
  fit.ci95 = {{0.021, 0.261}};
  const auto table = format_regression_table(fit);
  const auto row = table.substr(table.rfind("const"));
  EXPECT_NE(row.find("0.1413"), std::string::npos) << row;
  EXPECT_NE(row.find("0.061"), std::string::npos) << row;
  EXPECT_NE(row.find("2.322"), std::string::npos) << row;
  EXPECT_NE(row.find("0.021"), std::string::npos) << row;
  EXPECT_NE(row.find("0.261"), std::string::npos) << row;
}

TEST(RegressionCsv, Header) {
  const auto s = simulate(0.5, {1.0}, 0.3, GaussianFactors{{0}, {{1}}}, 100, 5);
  const auto csv = format_regression_csv(ols_fit(s));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "name,coef,std err,t,P>|t|,0.025,0.975");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <functional>

#include "parity_forge/core.hpp"
#include "parity_forge/error.hpp"

using namespace parity_forge;

namespace {

std::vector<ColumnSpec> race_age_schema() {
  return {{"race", Scale::categorical, Role::protected_attr},
          {"age", Scale::continuous, Role::feature},
          {"y", Scale::binary, Role::response}};
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::undefined;
}

}  // namespace

TEST(LoadCsv, ThreeRows) {
  auto ds = parse_csv("race,age,y\nb,30,1\na,41.5,0\nb,22,0\n", race_age_schema());
  EXPECT_EQ(ds.rows(), 3u);
  EXPECT_EQ(ds.column("race").levels(), (std::vector<std::string>{"a", "b"}));
  EXPECT_DOUBLE_EQ(ds.column("race").values()[0], 1.0);
  EXPECT_DOUBLE_EQ(ds.column("age").values()[1], 41.5);
}

TEST(LoadCsv, NonIntegerCountIsTypeError) {
  std::vector<ColumnSpec> schema = {{"priors", Scale::count, Role::feature}};
  try {
    parse_csv("priors\n1\n2.5\n", schema);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::type);
    std::string msg = e.what();
    EXPECT_NE(msg.find("priors"), std::string::npos);
    EXPECT_NE(msg.find("row 2"), std::string::npos);
  }
}

TEST(LoadCsv, HeaderCaseMismatchIsSchemaError) {
  std::vector<ColumnSpec> schema = {{"age", Scale::continuous, Role::feature}};
  EXPECT_EQ(kind_of([&] { parse_csv("Age\n1\n", schema); }), ErrorKind::schema);
}

TEST(LoadCsv, MissingValueIsValidationError) {
  EXPECT_EQ(kind_of([&] { parse_csv("race,age,y\na,,1\n", race_age_schema()); }),
            ErrorKind::validation);
  EXPECT_EQ(kind_of([&] { parse_csv("race,age,y\na,NA,1\n", race_age_schema()); }),
            ErrorKind::validation);
}

TEST(LoadCsv, BinaryOutsideZeroOneIsTypeError) {
  EXPECT_EQ(kind_of([&] { parse_csv("race,age,y\na,3,2\n", race_age_schema()); }),
            ErrorKind::type);
}

TEST(LoadCsv, QuotedFieldsAndCrlf) {
  auto recs = read_csv_records("a,b\r\n\"x,1\",\"he said \"\"hi\"\"\"\r\n");
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[1][0], "x,1");
  EXPECT_EQ(recs[1][1], "he said \"hi\"");
  EXPECT_EQ(quote_csv_field("x,1"), "\"x,1\"");
}

TEST(LoadCsv, RoundTripIsIdentity) {
  std::vector<ColumnSpec> schema = race_age_schema();
  schema[1].transform = PreTransform::log;
  std::string text = "race,age,y\n\"b, c\",30,1\na,41.5,0\n\"b, c\",22,0\na,0.1,1\n";
  auto ds = parse_csv(text, schema);
  EXPECT_NEAR(ds.column("age").values()[0], std::log(30.0), 1e-15);
  auto text2 = to_csv(ds);
  auto ds2 = parse_csv(text2, schema);
  EXPECT_EQ(to_csv(ds2), text2);
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    EXPECT_EQ(ds.column("age").raw(i), ds2.column("age").raw(i));
    EXPECT_EQ(ds.column("race").values()[i], ds2.column("race").values()[i]);
  }
  EXPECT_NE(text2.find("41.5"), std::string::npos);
  EXPECT_EQ(ds.column("race").levels(), ds2.column("race").levels());
}

TEST(LoadCsv, FileRoundTrip) {
  auto path = (std::filesystem::temp_directory_path() / "pf_core_rt.csv").string();
  auto ds = parse_csv("race,age,y\nb,30,1\na,41.5,0\n", race_age_schema());
  write_csv(path, ds);
  auto ds2 = load_csv(path, race_age_schema());
  EXPECT_EQ(to_csv(ds), to_csv(ds2));
  std::filesystem::remove(path);
  EXPECT_EQ(kind_of([&] { load_csv(path, race_age_schema()); }), ErrorKind::io);
}

TEST(ValidateRoles, Cases) {
  auto ds = parse_csv("race,age,y\nb,30,1\na,41.5,0\n", race_age_schema());
  EXPECT_NO_THROW(validate_roles(ds));

  std::vector<ColumnSpec> no_resp = {{"race", Scale::categorical, Role::protected_attr},
                                     {"age", Scale::continuous, Role::feature}};
  auto ds2 = parse_csv("race,age\nb,30\na,41\n", no_resp);
  EXPECT_EQ(kind_of([&] { validate_roles(ds2); }), ErrorKind::role);

  std::vector<ColumnSpec> two_prot = {{"race", Scale::categorical, Role::protected_attr},
                                      {"sex", Scale::binary, Role::protected_attr},
                                      {"y", Scale::binary, Role::response}};
  auto ds3 = parse_csv("race,sex,y\na,0,1\nb,1,0\n", two_prot);
  EXPECT_NO_THROW(validate_roles(ds3));

  std::vector<ColumnSpec> two_resp = {{"race", Scale::categorical, Role::protected_attr},
                                      {"y1", Scale::binary, Role::response},
                                      {"y2", Scale::binary, Role::response}};
  auto ds4 = parse_csv("race,y1,y2\na,0,1\nb,1,0\n", two_resp);
  EXPECT_EQ(kind_of([&] { validate_roles(ds4); }), ErrorKind::role);

  std::vector<ColumnSpec> no_prot = {{"age", Scale::continuous, Role::feature},
                                     {"y", Scale::binary, Role::response}};
  auto ds5 = parse_csv("age,y\n1,0\n2,1\n", no_prot);
  EXPECT_EQ(kind_of([&] { validate_roles(ds5); }), ErrorKind::role);
  EXPECT_NO_THROW(validate_roles(ds5, false));
}

TEST(Dataset, DerivedViews) {
  auto ds = parse_csv("race,age,y\nb,30,1\na,41.5,0\nb,22,0\n", race_age_schema());
  auto sel = ds.select({"y", "age"});
  EXPECT_EQ(sel.columns()[0].name(), "y");
  std::vector<std::size_t> rows = {2, 0};
  auto sub = ds.take_rows(rows);
  EXPECT_EQ(sub.rows(), 2u);
  EXPECT_DOUBLE_EQ(sub.column("age").values()[0], 22.0);
  EXPECT_EQ(sub.column("race").levels(), ds.column("race").levels());
  auto repl = ds.with_values("age", {1, 2, 3});
  EXPECT_DOUBLE_EQ(repl.column("age").values()[2], 3.0);
  EXPECT_EQ(kind_of([&] { ds.column("nope"); }), ErrorKind::schema);
}

TEST(ErrorCodes, Mapping) {
  EXPECT_EQ(exit_code(ErrorKind::config), 2);
  EXPECT_EQ(exit_code(ErrorKind::usage), 2);
  EXPECT_EQ(exit_code(ErrorKind::type), 3);
  EXPECT_EQ(exit_code(ErrorKind::convergence), 4);
}

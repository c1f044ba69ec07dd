#include <doctest.h>

#include "helpers.hpp"
#include "sackit/error.hpp"
#include "sackit/types.hpp"

using namespace sackit;
using testing::vec;

TEST_CASE("category labels follow the factor table") {
  CHECK(CategoryLabel(Factor::Orientation, "vertical").str() == "orientation:vertical");
  CHECK(CategoryLabel(Factor::Orientation, "Horizontal").value() == "horizontal");
  CHECK_NOTHROW(CategoryLabel(Factor::Depth, "farther"));
  CHECK_NOTHROW(CategoryLabel(Factor::InitialMovement, "opposite"));
  CHECK_NOTHROW(CategoryLabel(Factor::Amplitude, "+1"));
  CHECK_NOTHROW(CategoryLabel(Factor::Amplitude, "-1"));
  CHECK(CategoryLabel(Factor::User, "Alice").value() == "Alice");

  CHECK_THROWS_AS(CategoryLabel(Factor::Orientation, "diagonal"), StructuralError);
  CHECK_THROWS_AS(CategoryLabel(Factor::Depth, "vertical"), StructuralError);
  CHECK_THROWS_AS(CategoryLabel(Factor::User, ""), StructuralError);
  CHECK_THROWS_AS(CategoryLabel(Factor::None, "x"), StructuralError);
  CHECK(CategoryLabel().is_none());
  CHECK(CategoryLabel().str() == "none");
}

TEST_CASE("a none filter matches every label") {
  const CategoryLabel v(Factor::Orientation, "vertical");
  const CategoryLabel h(Factor::Orientation, "horizontal");
  CHECK(v.matches(CategoryLabel::none()));
  CHECK(v.matches(v));
  CHECK_FALSE(v.matches(h));
  CHECK_FALSE(CategoryLabel().matches(v));
}

TEST_CASE("factor names parse case-insensitively") {
  CHECK(parse_factor("Orientation") == Factor::Orientation);
  CHECK(parse_factor("initial_movement") == Factor::InitialMovement);
  CHECK(parse_factor("none") == Factor::None);
  CHECK_THROWS_AS(parse_factor("colour"), ParseError);
}

TEST_CASE("profile invariants are enforced on insertion") {
  SaccadeDataset ds;
  CHECK_NOTHROW(ds.add(testing::profile(vec({0, 1, 2}))));
  CHECK(ds.size() == 1);

  SUBCASE("non-zero start") { CHECK_THROWS_AS(ds.add(testing::profile(vec({0.1, 1, 2}))), StructuralError); }
  SUBCASE("non-positive amplitude") {
    CHECK_THROWS_AS(ds.add(testing::profile(vec({0, 1, 0}))), StructuralError);
  }
  SUBCASE("non-finite value") {
    CHECK_THROWS_AS(ds.add(testing::profile(vec({0, NAN, 2}))), StructuralError);
  }
  SUBCASE("single sample") { CHECK_THROWS_AS(ds.add(testing::profile(vec({0}))), StructuralError); }
  SUBCASE("mismatched dt") {
    auto p = testing::profile(vec({0, 1, 2}));
    p.dt = 2.0;
    CHECK_THROWS_AS(ds.add(p), StructuralError);
  }
  CHECK(ds.size() == 1);
}

TEST_CASE("profile accessors") {
  const auto p = testing::linear_profile(0.5, 20);
  CHECK(p.amplitude() == doctest::Approx(10.0));
  CHECK(p.duration() == doctest::Approx(20.0));
  CHECK(p.size() == 21);
}

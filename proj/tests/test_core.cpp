#include <doctest.h>

#include "uclab/core.hpp"
#include "uclab/rng.hpp"

using namespace uclab;

TEST_CASE("emotion names round-trip") {
  for (Emotion e : all_emotions()) {
    CHECK(emotion_from_name(emotion_name(e)) == e);
  }
  CHECK(!emotion_from_name("joy"));
  CHECK(emotion_name(Emotion::Sad) == "sad");
  CHECK(emotion_name(Emotion::Contempt) == "contempt");
}

TEST_CASE("au set construction and text form") {
  const AuSet s = AuSet::from_ids({12, 4, 1, 4});
  CHECK(s.ids() == std::vector<int>{1, 4, 12});
  CHECK(s.to_string() == "1,4,12");
  CHECK(AuSet::parse("1,4,12") == s);
  CHECK(AuSet::parse("")->empty());
  CHECK(!AuSet::parse("1,,4"));
  CHECK(!AuSet::parse("1,4,4"));
  CHECK(!AuSet::parse("0"));
  CHECK(!AuSet::parse("a"));
  CHECK_THROWS_AS(AuSet::from_ids({0}), std::invalid_argument);
}

TEST_CASE("au_set_f1 examples") {
  const AuSet a = AuSet::from_ids({1, 4, 6});
  CHECK(au_set_f1(a, a) == 1.0);
  CHECK(au_set_f1(AuSet::from_ids({2}), AuSet::from_ids({12, 25})) == 0.0);
  CHECK(au_set_f1(AuSet::from_ids({1, 2, 4}), AuSet::from_ids({1, 4, 6, 9})) ==
        doctest::Approx(4.0 / 7.0).epsilon(1e-12));
  CHECK(au_set_f1(AuSet{}, AuSet{}) == 1.0);
  CHECK(au_set_f1(AuSet{}, AuSet::from_ids({1})) == 0.0);
  CHECK(au_set_f1(AuSet::from_ids({1}), AuSet{}) == 0.0);
}

TEST_CASE("au_set_f1 properties over random sets") {
  RngStream rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<int> xs, ys;
    for (int au = 1; au <= 12; ++au) {
      if (rng.bernoulli(0.4)) xs.push_back(au);
      if (rng.bernoulli(0.4)) ys.push_back(au);
    }
    const AuSet a = AuSet::from_ids(xs);
    const AuSet b = AuSet::from_ids(ys);
    const double f = au_set_f1(a, b);

    // symmetry and bounds
    CHECK(f == au_set_f1(b, a));
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
    CHECK((f == 1.0) == (a == b));

    // adding a correct missing AU never decreases F1
    for (int au : b.ids()) {
      if (!a.contains(au)) {
        std::vector<int> grown = a.ids();
        grown.push_back(au);
        CHECK(au_set_f1(AuSet::from_ids(grown), b) >= f);
        break;
      }
    }
  }
}

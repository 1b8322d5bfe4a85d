#include "doctest.h"

#include <filesystem>

#include "lcmdp/model.hpp"
#include "lcmdp/gridworld.hpp"
#include "generators.hpp"

using namespace lcmdp;

namespace {

Lcmdp one_state_model() {
  Lcmdp m;
  m.ap = {"a"};
  m.n_costs = 1;
  m.labels = {1};
  m.absorbing = {0};
  m.beta = {1.0};
  m.choices.resize(1);
  ActionChoice ch;
  ch.action = 0;
  ch.rows = {{0, 1.0}};
  ch.cost = {0.5};
  m.choices[0].push_back(ch);
  return m;
}

std::filesystem::path temp_path(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("valid one-state model has no violations") {
  CHECK(validate(one_state_model()).empty());
}

TEST_CASE("row sum violation is reported with its location") {
  Lcmdp m = one_state_model();
  m.choices[0][0].rows = {{0, 0.5}, {0, 0.4}};
  auto v = validate(m);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == "row (s=0,a=0) sums to 0.9");
}

TEST_CASE("beta violations name beta") {
  Lcmdp m = one_state_model();
  m.beta = {0.98};
  auto v = validate(m);
  REQUIRE(!v.empty());
  CHECK(v[0].find("beta") != std::string::npos);
}

TEST_CASE("absorbing structure is enforced") {
  Lcmdp m = one_state_model();
  m.choices[0][0].cost = {1.0};  // absorbing states must be zero-cost
  CHECK(!validate(m).empty());

  Lcmdp m2 = one_state_model();
  m2.absorbing = {1};
  m2.choices[0][0].rows = {{0, 1.0}};
  CHECK(!validate(m2).empty());  // beta positive on an absorbing state
}

TEST_CASE("sink must be absorbing") {
  Lcmdp m = one_state_model();
  m.absorbing = {1};
  m.beta = {1.0};
  m.sink = 0;
  auto v = validate(m);  // beta on sink + beta on absorbing
  CHECK(v.size() >= 2);
}

TEST_CASE("transient states partition the state space") {
  // 3-state chain with state 2 absorbing.
  Lcmdp m;
  m.ap = {};
  m.n_costs = 1;
  m.labels = {0, 0, 0};
  m.absorbing = {0, 0, 1};
  m.beta = {1.0, 0.0, 0.0};
  m.choices.resize(3);
  for (StateId s = 0; s < 2; ++s) {
    ActionChoice ch;
    ch.action = 0;
    ch.rows = {{s + 1, 1.0}};
    ch.cost = {1.0};
    m.choices[static_cast<std::size_t>(s)].push_back(ch);
  }
  ActionChoice stay;
  stay.action = 0;
  stay.rows = {{2, 1.0}};
  stay.cost = {0.0};
  m.choices[2].push_back(stay);
  REQUIRE(validate(m).empty());
  CHECK(transient_states(m) == std::vector<StateId>{0, 1});

  // All states absorbing: nothing transient (invalid beta-wise, but the
  // partition invariant is structural).
  Lcmdp all;
  all.ap = {};
  all.n_costs = 1;
  all.labels = {0};
  all.absorbing = {1};
  all.beta = {0.0};
  all.choices.resize(1);
  all.choices[0].push_back(stay);
  all.choices[0][0].rows = {{0, 1.0}};
  CHECK(transient_states(all).empty());
}

TEST_CASE("grid model: transient states are exactly the non-goal cells") {
  auto elev = testgen::synthetic_terrain(6, 6);
  auto cfg = testgen::paper_style_config(6, 6);
  auto risk = grid::derive_risk(elev);
  Lcmdp m = grid::build_grid_lcmdp(elev, risk, cfg);
  REQUIRE(validate(m).empty());
  std::vector<char> goal(static_cast<std::size_t>(m.num_states()), 0);
  for (auto [r, c] : cfg.goal_cells)
    goal[static_cast<std::size_t>(grid::cell_state(r, c, 6))] = 1;
  auto transient = transient_states(m);
  std::vector<char> is_transient(static_cast<std::size_t>(m.num_states()), 0);
  for (StateId s : transient) is_transient[static_cast<std::size_t>(s)] = 1;
  for (StateId s = 0; s < m.num_states(); ++s)
    CHECK(is_transient[static_cast<std::size_t>(s)] == !goal[static_cast<std::size_t>(s)]);
}

TEST_CASE("save/load round trip is the identity") {
  auto p = temp_path("lcmdp_roundtrip.json");
  Lcmdp m = one_state_model();
  m.beta = {1.0};
  m.absorbing = {0};
  m.choices[0][0].rows = {{0, 1.0}};
  m.choices[0][0].cost = {0.1 + 0.2};  // not exactly representable, still bit-exact
  save(m, p);
  Lcmdp back = load_model(p);
  CHECK(back == m);
}

TEST_CASE("10x10 grid model round trip") {
  auto elev = testgen::synthetic_terrain(10, 10);
  auto cfg = testgen::paper_style_config(10, 10);
  Lcmdp m = grid::build_grid_lcmdp(elev, grid::derive_risk(elev), cfg);
  auto p = temp_path("lcmdp_grid_roundtrip.json");
  save(m, p);
  Lcmdp back = load_model(p);
  CHECK(back == m);
}

TEST_CASE("load rejects a negative cost") {
  auto p = temp_path("lcmdp_negcost.json");
  Lcmdp m = one_state_model();
  nlohmann::json j = to_json(m);
  j["costs"][0][0] = -1.0;
  write_file(p, j.dump());
  CHECK_THROWS_AS((void)load_model(p), ModelError);
}

TEST_CASE("load reports parse diagnostics") {
  auto p = temp_path("lcmdp_broken.json");
  write_file(p, "{ not json");
  CHECK_THROWS_AS((void)load_model(p), ModelError);

  write_file(p, "{\"ap\":[]}");
  CHECK_THROWS_WITH_AS((void)load_model(p), doctest::Contains("missing field"), ModelError);
}

TEST_CASE("random models validate") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Lcmdp m = testgen::random_absorbing_lcmdp(seed, 12, 2, 3, 2, 2);
    CAPTURE(seed);
    CHECK(validate(m).empty());
  }
}

}  // TEST_SUITE

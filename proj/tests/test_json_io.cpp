#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "bdlab/error.hpp"
#include "bdlab/json_io.hpp"
#include "helpers.hpp"

using namespace bdlab;
using namespace bdlab::json_io;
using testing::error_kind;

TEST_CASE("atom spaces round trip") {
  std::mt19937_64 rng(3);
  const auto p = testing::random_probability(rng, 7);
  CHECK(atom_space_from_json(parse(to_json(p).dump())) == p);
  CHECK(atom_space_from_json(to_json(AtomSpace::counting(5))) == AtomSpace::counting(5));
  CHECK(atom_space_from_json(Json{{"kind", "probability"}, {"size", 4}}) == AtomSpace::uniform(4));
}

TEST_CASE("functions and sets round trip") {
  const L1Fun f(std::vector<double>{0.5, -1.25, 3.0});
  CHECK(l1fun_from_json(parse(to_json(f).dump())) == f);
  CHECK(l1fun_from_json(Json::array({0.5, -1.25, 3.0})) == f);
  const AtomSet s{4, 1, 9};
  CHECK(atom_set_from_json(to_json(s)) == s);
}

TEST_CASE("operators round trip bit for bit") {
  std::mt19937_64 rng(11);
  std::vector<L1Fun> columns;
  for (int c = 0; c < 5; ++c) columns.emplace_back(testing::uniform_vector(rng, 6, -2.0, 2.0));
  const FiniteOperator op(DomainShape({2, 3}), testing::random_probability(rng, 6), columns);
  const auto back = operator_from_json(parse(to_json(op).dump()));
  CHECK(back == op);
  CHECK(domain_from_json(to_json(DomainShape::square(3))) == DomainShape::square(3));
}

TEST_CASE("random matrix specs round trip") {
  SymmetricRandomMatrixSpec spec;
  spec.m = 3;
  spec.entries.push_back(SymmetricDistribution::two_level(0.25, 3.0, 0.125));
  spec.exact = false;
  spec.monte_carlo = {1234, 9};
  const auto back = random_spec_from_json(parse(to_json(spec).dump()));
  CHECK(back.m == 3);
  CHECK_FALSE(back.exact);
  CHECK(back.monte_carlo.samples == 1234);
  CHECK(back.monte_carlo.seed == 9);
  REQUIRE(back.entries.size() == 1);
  const auto a = spec.entries[0].support();
  const auto b = back.entries[0].support();
  CHECK(std::equal(a.begin(), a.end(), b.begin(), b.end()));
}

TEST_CASE("non-finite numbers are written as null") {
  NormResult r;
  r.value = std::numeric_limits<double>::infinity();
  CHECK(to_json(r)["value"].is_null());
}

TEST_CASE("malformed input is a usage error") {
  CHECK(error_kind([] { parse("{\"kind\": "); }) == ErrorKind::usage);
  CHECK(error_kind([] { atom_space_from_json(Json{{"kind", "lebesgue"}, {"size", 3}}); }) == ErrorKind::usage);
  CHECK(error_kind([] { atom_space_from_json(Json{{"weights", {1, 2}}}); }) == ErrorKind::usage);
  CHECK(error_kind([] { l1fun_from_json(Json{{"values", "abc"}}); }) == ErrorKind::usage);
  CHECK(error_kind([] { operator_from_json(Json{{"domain", {{"blocks", {2}}}}}); }) == ErrorKind::usage);
  CHECK(error_kind([] {
          random_spec_from_json(Json{{"m", 2}, {"support", {{1, 0.5}, {-1, 0.5}}}, {"backend", {{"kind", "quantum"}}}});
        }) == ErrorKind::usage);
  CHECK(error_kind([] { read_file("/nonexistent/definitely/missing.json"); }) == ErrorKind::usage);
}

TEST_CASE("files round trip") {
  const auto path = std::filesystem::temp_directory_path() / "bdlab_json_io_test.json";
  const Json value{{"a", 1}, {"b", {1.5, 2.5}}};
  write_file(path.string(), value);
  CHECK(read_file(path.string()) == value);
  std::filesystem::remove(path);
}

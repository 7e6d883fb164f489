#include <doctest.h>

#include "crashrepro/text.hpp"

using namespace crashrepro::text;

TEST_CASE("trim and normalize") {
  CHECK(trim("  a b \t\n") == "a b");
  CHECK(trim("") == "");
  CHECK(normalize_phrase("  Search \t  ICON ") == "search icon");
  CHECK(to_lower("OK Button") == "ok button");
  CHECK(starts_with_ci("Sentence 3:", "sentence"));
  CHECK_FALSE(starts_with_ci("Sen", "sentence"));
}

TEST_CASE("split_lines keeps blank lines and drops carriage returns") {
  const auto lines = split_lines("a\r\n\nb");
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "a");
  CHECK(lines[1] == "");
  CHECK(lines[2] == "b");
}

TEST_CASE("fnv1a64 reference values") {
  // Published FNV-1a 64-bit test vectors.
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  CHECK(fingerprint("a") == "af63dc4c8601ec8c");
}

#include "nhr/examples.hpp"
#include <doctest.h>
using namespace nhr;

TEST_CASE("placeholder_test_chaplygin") { CHECK(1 == 1); }

#include "nhr/examples.hpp"
#include <doctest.h>
using namespace nhr;

TEST_CASE("placeholder_test_cli") { CHECK(1 == 1); }

#include "nhr/examples.hpp"
#include <doctest.h>
using namespace nhr;

TEST_CASE("placeholder_test_examples") { CHECK(1 == 1); }

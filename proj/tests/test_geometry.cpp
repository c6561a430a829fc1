#include "nhr/chart.hpp"
#include <doctest.h>
using namespace nhr;

TEST_CASE("placeholder") { CHECK(1 == 1); }

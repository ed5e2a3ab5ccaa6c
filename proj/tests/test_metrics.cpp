#include <doctest.h>
TEST_SUITE_BEGIN("metrics");
TEST_SUITE_END();

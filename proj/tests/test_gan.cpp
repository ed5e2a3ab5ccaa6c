#include <doctest.h>
TEST_SUITE_BEGIN("gan");
TEST_SUITE_END();

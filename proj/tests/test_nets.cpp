#include <doctest.h>
TEST_SUITE_BEGIN("nets");
TEST_SUITE_END();

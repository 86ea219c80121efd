#pragma once

#include "dualstop/tree.hpp"

namespace dualstop::testing {

using dualstop::random_tree_suite;
using dualstop::tiny_tree_suite;

}  // namespace dualstop::testing

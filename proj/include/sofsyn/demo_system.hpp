#pragma once

#include "sofsyn/system.hpp"

namespace sofsyn {

/// Built-in five-state uncertain plant with an unstable, singular A, three
/// inputs, two measured outputs and a sinusoidal state nonlinearity of
/// Lipschitz constant 0.3. Used by the `demo` command and the test suites.
UncertainSystem demo_system();

}  // namespace sofsyn

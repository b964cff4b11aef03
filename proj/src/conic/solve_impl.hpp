#pragma once

#include "flexopf/conic/solver.hpp"

namespace flexopf::conic {

/// Shared entry point: optionally relaxes binaries to their box, never used
/// outside the solver translation units.
std::pair<std::vector<double>, SolveReport> solve_socp_impl(const ConicProgram &program,
                                                            const SolverOptions &opts,
                                                            bool relax_binaries,
                                                            bool throw_on_failure);

} // namespace flexopf::conic

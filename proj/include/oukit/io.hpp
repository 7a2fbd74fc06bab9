#pragma once

#include <string>
#include <vector>

#include "oukit/kernel.hpp"
#include "oukit/weights.hpp"

namespace oukit {

/// System document {"A": [[...]], "B": [[...]], "S": [[...]], "d": int}. Complex entries are numbers
/// or [re, im] pairs; S may be omitted (zero drift). Structural problems raise ConfigInvalid, the
/// matrices then go through validate_system.
OUSystem system_from_json(const std::string& text, const ValidationTolerances& tol = {});
OUSystem load_system(const std::string& path, const ValidationTolerances& tol = {});
std::string system_to_json(const OUSystem& sys);

/// {"min": [...], "max": [...], "count": [...]}.
std::string grid_spec_to_json(const GridSpec& spec);
GridSpec grid_spec_from_json(const std::string& text);

/// One row per node in axis-0-fastest order: x0..x{d-1}, then re/im pairs of the N components.
std::string grid_function_to_csv(const GridFunction& v);
/// Reads rows written by grid_function_to_csv; coordinates must match the spec.
GridFunction grid_function_from_csv(const std::string& text, const GridSpec& spec);

/// Kernel K(psi, t) along one axis: columns t, psi, then N^2 entries (row-major) as re/im pairs.
std::string kernel_slice_csv(const OUSystem& sys, double t, int axis, const std::vector<double>& coords);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// Shortest round-trip decimal form of a double.
std::string format_double(double x);

}  // namespace oukit

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "oed/designer.hpp"
#include "oed/lti.hpp"

namespace oed {

/// {"A": [[...]], "B": [[...]], "C": [[...]], "D": [[...]]}, row-major.
LtiSystem load_system_json(const std::filesystem::path& path);
LtiSystem parse_system_json(const std::string& text);
std::string system_to_json(const LtiSystem& sys);

/// {"steps": [{t, branch, u, scalar, rank_after, image_residual, certificate}],
///  "final": {T, rank, target, n_recovered}}
std::string design_log_to_json(const DesignLog& log);
DesignLog parse_design_log_json(const std::string& text);

/// Header t,u_1..u_m[,y_1..y_p][,x_1..x_n]; one row per input sample and a
/// trailing row holding only the terminal state when x is present.
std::string trajectory_to_csv(const Trajectory& traj);
Trajectory parse_trajectory_csv(const std::string& text);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace oed

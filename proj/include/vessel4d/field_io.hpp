#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "vessel4d/coherence.hpp"
#include "vessel4d/metrics.hpp"

namespace vessel4d {

/// `vertex,frame,ux,uy,uz`, one row per vertex and frame, vertex-major.
std::string format_displacement_csv(const DisplacementField& field);
DisplacementField parse_displacement_csv(std::string_view text, std::string_view source = "<string>");

/// `edge,i,j,frame,sigma_mpa`, one row per edge and frame, edge-major.
std::string format_stress_csv(const StressField& stress, std::span<const Edge> edges);
StressField parse_stress_csv(std::string_view text, std::string_view source = "<string>");

std::string read_text_file(const std::filesystem::path& path);

}  // namespace vessel4d

#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "ampeq/sim.hpp"

namespace ampeq {

enum class TrajectoryKind { Full, Reduced };

/// Comment lines "# key: value", then a header row "T,mode_1,..." (full) or
/// "T,y" / "T,y_1,..." (reduced), then one row per sample. Shortest round-trip
/// decimal formatting, so reruns are byte-identical.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, TrajectoryKind kind,
                          const std::vector<std::pair<std::string, std::string>>& metadata = {});

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

}  // namespace ampeq

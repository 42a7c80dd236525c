#include "ampeq/trajectory_io.hpp"

#include <array>
#include <charconv>

#include "ampeq/error.hpp"

namespace ampeq {

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (res.ec != std::errc()) throw Error(ErrorCode::Io, "number formatting failed");
  return std::string(buf.data(), res.ptr);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, TrajectoryKind kind,
                          const std::vector<std::pair<std::string, std::string>>& metadata) {
  for (const auto& [key, value] : metadata) out << "# " << key << ": " << value << '\n';
  if (traj.stopped_at) out << "# stopped_at: " << format_double(*traj.stopped_at) << '\n';
  const Eigen::Index dim = traj.states.empty() ? 0 : traj.states.front().size();
  out << 'T';
  if (kind == TrajectoryKind::Full) {
    for (Eigen::Index k = 0; k < dim; ++k) out << ",mode_" << (k + 1);
  } else if (dim == 1) {
    out << ",y";
  } else {
    for (Eigen::Index k = 0; k < dim; ++k) out << ",y_" << (k + 1);
  }
  out << '\n';
  for (std::size_t i = 0; i < traj.size(); ++i) {
    out << format_double(traj.times[i]);
    for (Eigen::Index k = 0; k < dim; ++k) out << ',' << format_double(traj.states[i][k]);
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "failed to write trajectory");
}

}  // namespace ampeq

#ifndef MINNAERT_CONFIG_HPP
#define MINNAERT_CONFIG_HPP

#include "minnaert/bubble.hpp"
#include "minnaert/medium.hpp"
#include "minnaert/reconstruct.hpp"
#include "minnaert/source.hpp"
#include "minnaert/time_grid.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace minnaert {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, std::vector<std::string> keys)
      : std::runtime_error(message), offending_keys(std::move(keys)) {}
  std::vector<std::string> offending_keys;
};

/// Batch experiment description; see README for the documented key tree
/// (medium.kind, medium.bumps[], bubble.radius, bubble.kappa_k, source.kind,
/// source.p, grid.dims, grid.spacing, time.dt, time.T, receiver, scan, ...).
struct RunConfig {
  PhantomDescriptor phantom;
  BubbleSpec bubble;
  SourceModel source = SeparablePowerSource{};
  int p = 1;
  TimeGrid tg{1e-2, 100};
  Vec3 x0 = Vec3::Zero();
  bool has_xc = false;
  Vec3 xc = Vec3::Zero();
  ScanGrid scan;
  double noise_scale = 0.0;
  bool omit_regular_part = false;
  int pulse_half_width_steps = 16;
  int green_pad_cells = 12;
  double detect_kappa = 10.0;
  unsigned long long seed = 0;
  std::string output_dir = "out";
  std::string data_dir;
  int jobs = 1;
};

RunConfig load_config(const std::string& path);

}  // namespace minnaert

#endif

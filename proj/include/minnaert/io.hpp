#ifndef MINNAERT_IO_HPP
#define MINNAERT_IO_HPP

#include "minnaert/grid.hpp"
#include "minnaert/time_grid.hpp"

#include <string>
#include <utility>
#include <vector>

namespace minnaert {

/// Nodal values as little-endian float64 flat binary (x fastest) next to a
/// JSON sidecar carrying dims/origin/spacing. Paths get .f64/.json suffixes.
void write_grid(const Grid3d& g, const std::string& base_path);
Grid3d read_grid(const std::string& base_path);

/// RFC 4180 CSV (CRLF records), doubles rendered with %.17g.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<const Series*>& columns);

/// Reads back a numeric CSV written by write_csv.
std::vector<Series> read_csv(const std::string& path, std::vector<std::string>* header = nullptr);

std::string sha256_file(const std::string& path);

/// Records every emitted file with its content hash.
class Manifest {
 public:
  void add(const std::string& path);
  void write(const std::string& path) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

struct SvgSeries {
  std::string label;
  std::vector<double> x, y;
};

/// Minimal polyline chart, optionally with log-scaled axes.
void write_svg_plot(const std::string& path, const std::string& title, const std::vector<SvgSeries>& series,
                    bool log_x = false, bool log_y = false);

}  // namespace minnaert

#endif

#include "minnaert/io.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace minnaert {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_grid(const Grid3d& g, const std::string& base_path) {
  {
    std::ofstream bin(base_path + ".f64", std::ios::binary | std::ios::trunc);
    if (!bin) throw std::runtime_error("write_grid: cannot open " + base_path + ".f64");
    bin.write(reinterpret_cast<const char*>(g.values.data()), static_cast<std::streamsize>(g.size() * sizeof(double)));
  }
  nlohmann::json meta;
  meta["format"] = "float64-le";
  meta["dims"] = {g.dims.x(), g.dims.y(), g.dims.z()};
  meta["origin"] = {g.origin.x(), g.origin.y(), g.origin.z()};
  meta["spacing"] = g.spacing;
  meta["order"] = "x-fastest";
  std::ofstream side(base_path + ".json", std::ios::trunc);
  side << meta.dump(2) << "\n";
}

Grid3d read_grid(const std::string& base_path) {
  std::ifstream side(base_path + ".json");
  if (!side) throw std::runtime_error("read_grid: missing sidecar " + base_path + ".json");
  nlohmann::json meta = nlohmann::json::parse(side);
  const auto dims = meta.at("dims");
  const auto origin = meta.at("origin");
  Grid3d g(Vec3(origin[0], origin[1], origin[2]), meta.at("spacing").get<double>(),
           Index3(dims[0], dims[1], dims[2]));
  std::ifstream bin(base_path + ".f64", std::ios::binary);
  if (!bin) throw std::runtime_error("read_grid: missing data " + base_path + ".f64");
  bin.read(reinterpret_cast<char*>(g.values.data()), static_cast<std::streamsize>(g.size() * sizeof(double)));
  if (bin.gcount() != static_cast<std::streamsize>(g.size() * sizeof(double)))
    throw std::runtime_error("read_grid: truncated data " + base_path + ".f64");
  return g;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<const Series*>& columns) {
  if (header.size() != columns.size()) throw std::invalid_argument("write_csv: header/column mismatch");
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  for (std::size_t c = 0; c < header.size(); ++c) out << header[c] << (c + 1 < header.size() ? "," : "\r\n");
  const Eigen::Index rows = columns.empty() ? 0 : columns.front()->size();
  for (const auto* col : columns)
    if (col->size() != rows) throw std::invalid_argument("write_csv: ragged columns");
  for (Eigen::Index r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < columns.size(); ++c)
      out << fmt_double((*columns[c])[r]) << (c + 1 < columns.size() ? "," : "\r\n");
}

std::vector<Series> read_csv(const std::string& path, std::vector<std::string>* header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_csv: empty file " + path);
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
  std::vector<std::string> cols;
  {
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) cols.push_back(tok);
  }
  if (header) *header = cols;
  std::vector<std::vector<double>> data(cols.size());
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::size_t c = 0;
    while (std::getline(ss, tok, ',') && c < cols.size()) data[c++].push_back(std::stod(tok));
  }
  std::vector<Series> out(cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c)
    out[c] = Eigen::Map<const Eigen::ArrayXd>(data[c].data(), static_cast<Eigen::Index>(data[c].size()));
  return out;
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("sha256_file: cannot open " + path);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

void Manifest::add(const std::string& path) { entries_.emplace_back(path, sha256_file(path)); }

void Manifest::write(const std::string& path) const {
  nlohmann::json j;
  for (const auto& [file, hash] : entries_) j["files"][file] = hash;
  std::ofstream out(path, std::ios::trunc);
  out << j.dump(2) << "\n";
}

void write_svg_plot(const std::string& path, const std::string& title, const std::vector<SvgSeries>& series,
                    bool log_x, bool log_y) {
  const int W = 720, H = 480, ml = 70, mr = 20, mt = 40, mb = 50;
  auto tx = [&](double v) { return log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return log_y ? std::log10(v) : v; };

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if ((log_x && s.x[i] <= 0.0) || (log_y && s.y[i] <= 0.0)) continue;
      xmin = std::min(xmin, tx(s.x[i]));
      xmax = std::max(xmax, tx(s.x[i]));
      ymin = std::min(ymin, ty(s.y[i]));
      ymax = std::max(ymax, ty(s.y[i]));
    }
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  if (!(ymax > ymin)) ymax = ymin + 1.0;
  auto px = [&](double v) { return ml + (tx(v) - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto py = [&](double v) { return H - mb - (ty(v) - ymin) / (ymax - ymin) * (H - mt - mb); };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::ofstream out(path, std::ios::trunc);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title << "</text>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\"" << H - mb
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
      << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = xmin + t * (xmax - xmin) / 4.0;
    const double fy = ymin + t * (ymax - ymin) / 4.0;
    const double sx = ml + t * (W - ml - mr) / 4.0;
    const double sy = H - mb - t * (H - mt - mb) / 4.0;
    out << "<text x=\"" << sx << "\" y=\"" << H - mb + 18 << "\" text-anchor=\"middle\" font-size=\"11\">"
        << fmt_double(log_x ? std::pow(10.0, fx) : fx).substr(0, 8) << "</text>\n";
    out << "<text x=\"" << ml - 6 << "\" y=\"" << sy + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
        << fmt_double(log_y ? std::pow(10.0, fy) : fy).substr(0, 8) << "</text>\n";
  }
  int ci = 0;
  for (const auto& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << colors[ci % 6] << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if ((log_x && s.x[i] <= 0.0) || (log_y && s.y[i] <= 0.0)) continue;
      out << px(s.x[i]) << "," << py(s.y[i]) << " ";
    }
    out << "\"/>\n";
    out << "<text x=\"" << W - mr - 8 << "\" y=\"" << mt + 16 * (ci + 1) << "\" text-anchor=\"end\" font-size=\"12\" fill=\""
        << colors[ci % 6] << "\">" << s.label << "</text>\n";
    ++ci;
  }
  out << "</svg>\n";
}

}  // namespace minnaert

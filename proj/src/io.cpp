#include "io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint payloads are written as little-endian float64");

namespace gdiff {

namespace fs = std::filesystem;

void atomic_write_bytes(const std::string& path, const std::vector<unsigned char>& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed for " + path + ": " + ec.message());
}

void atomic_write_text(const std::string& path, const std::string& content) {
  std::vector<unsigned char> bytes(content.begin(), content.end());
  atomic_write_bytes(path, bytes);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string loss_history_csv(const std::vector<TrainRecord>& records) {
  std::string out = "step,loss\n";
  for (const TrainRecord& r : records) {
    out += std::to_string(r.step);
    out += ',';
    out += format_double(r.loss);
    out += '\n';
  }
  return out;
}

std::string samples_csv(const std::vector<double>& data, std::int64_t n, std::int64_t dim) {
  if (static_cast<std::int64_t>(data.size()) != n * dim) {
    throw std::invalid_argument("samples_csv: data length does not match n*dim");
  }
  std::string out;
  for (std::int64_t j = 0; j < dim; ++j) {
    out += (j ? ",x" : "x") + std::to_string(j);
  }
  out += '\n';
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < dim; ++j) {
      if (j) out += ',';
      out += format_double(data[static_cast<std::size_t>(i * dim + j)]);
    }
    out += '\n';
  }
  return out;
}

void save_checkpoint(const std::string& path, const nlohmann::json& header,
                     const std::vector<double>& params) {
  const std::string head = header.dump();
  std::vector<unsigned char> bytes;
  bytes.reserve(head.size() + 1 + params.size() * sizeof(double));
  bytes.insert(bytes.end(), head.begin(), head.end());
  bytes.push_back('\n');
  const std::size_t off = bytes.size();
  bytes.resize(off + params.size() * sizeof(double));
  std::memcpy(bytes.data() + off, params.data(), params.size() * sizeof(double));
  atomic_write_bytes(path, bytes);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  std::string head;
  if (!std::getline(in, head)) throw IoError("checkpoint missing header line: " + path);
  Checkpoint ck;
  try {
    ck.header = nlohmann::json::parse(head);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("checkpoint header is not valid JSON (" + path + "): " + e.what());
  }
  if (!ck.header.contains("param_count") || !ck.header["param_count"].is_number_integer()) {
    throw IoError("checkpoint header lacks param_count: " + path);
  }
  const std::int64_t n = ck.header["param_count"].get<std::int64_t>();
  if (n < 0) throw IoError("checkpoint param_count negative: " + path);
  ck.params.resize(static_cast<std::size_t>(n));
  in.read(reinterpret_cast<char*>(ck.params.data()),
          static_cast<std::streamsize>(ck.params.size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(ck.params.size() * sizeof(double))) {
    throw IoError("checkpoint payload truncated: " + path);
  }
  for (double v : ck.params) {
    if (!std::isfinite(v)) throw IoError("checkpoint payload has non-finite values: " + path);
  }
  return ck;
}

void ensure_dir(const std::string& path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec) throw IoError("cannot create directory " + path + ": " + ec.message());
}

void write_manifest(const std::string& dir, const nlohmann::json& manifest) {
  atomic_write_text(dir + "/manifest.json", manifest.dump(2) + "\n");
}

std::string svg_line_plot(const std::string& title, const std::vector<SvgSeries>& series) {
  constexpr int kW = 720, kH = 440, kPad = 60;
  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  bool first = true;
  for (const SvgSeries& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        xmin = xmax = s.x[i];
        ymin = ymax = s.y[i];
        first = false;
      }
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (xmax <= xmin) xmax = xmin + 1.0;
  if (ymax <= ymin) ymax = ymin + 1.0;
  auto px = [&](double x) { return kPad + (x - xmin) / (xmax - xmin) * (kW - 2 * kPad); };
  auto py = [&](double y) { return kH - kPad - (y - ymin) / (ymax - ymin) * (kH - 2 * kPad); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\" "
      << "font-family=\"sans-serif\">" << title << "</text>\n";
  svg << "<line x1=\"" << kPad << "\" y1=\"" << kH - kPad << "\" x2=\"" << kW - kPad << "\" y2=\""
      << kH - kPad << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kPad << "\" y1=\"" << kPad << "\" x2=\"" << kPad << "\" y2=\""
      << kH - kPad << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 4.0;
    const double yv = ymin + (ymax - ymin) * i / 4.0;
    svg << "<text x=\"" << px(xv) << "\" y=\"" << kH - kPad + 18
        << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">"
        << format_double(std::round(xv * 1e4) / 1e4) << "</text>\n";
    svg << "<text x=\"" << kPad - 6 << "\" y=\"" << py(yv) + 4
        << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">"
        << format_double(std::round(yv * 1e6) / 1e6) << "</text>\n";
  }
  int legend_y = kPad;
  for (const SvgSeries& s : series) {
    svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (i) svg << ' ';
      svg << px(s.x[i]) << ',' << py(s.y[i]);
    }
    svg << "\"/>\n";
    svg << "<text x=\"" << kW - kPad - 150 << "\" y=\"" << legend_y << "\" font-size=\"12\" "
        << "font-family=\"sans-serif\" fill=\"" << s.color << "\">" << s.name << "</text>\n";
    legend_y += 16;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace gdiff

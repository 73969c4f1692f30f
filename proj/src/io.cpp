#include "stlt/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace stlt {
namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

[[noreturn]] void bad_line(const std::string& path, Index lineno,
                           const std::string& what) {
  throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": " +
                              what);
}

void finish_write(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace

SparseTensor read_tns(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);

  SparseTensor t;
  std::string line;
  Index lineno = 0;
  bool have_dims = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string head;
    if (!(ss >> head)) continue;
    if (!have_dims) {
      if (head != "dims") bad_line(path, lineno, "expected `dims` header");
      Index n = 0;
      while (ss >> n) {
        if (n < 1) bad_line(path, lineno, "dims must be positive");
        t.dims.push_back(n);
      }
      if (!ss.eof()) bad_line(path, lineno, "non-integer token in dims");
      if (t.dims.empty()) bad_line(path, lineno, "empty dims");
      have_dims = true;
      continue;
    }
    std::istringstream es(line);
    for (std::size_t k = 0; k < t.dims.size(); ++k) {
      Index i = 0;
      if (!(es >> i)) bad_line(path, lineno, "expected index");
      if (i < 1 || i > t.dims[k])
        bad_line(path, lineno, "index out of range");
      t.coords.push_back(i - 1);
    }
    double v = 0.0;
    if (!(es >> v)) bad_line(path, lineno, "expected value");
    std::string extra;
    if (es >> extra) bad_line(path, lineno, "trailing tokens");
    t.values.push_back(v);
  }
  if (!have_dims) throw std::invalid_argument(path + ": missing dims header");
  t.canonicalize();
  return t;
}

void write_tns(const std::string& path, const SparseTensor& t) {
  t.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "dims";
  for (Index d : t.dims) out << ' ' << d;
  out << '\n';
  for (Index e = 0; e < t.nnz(); ++e) {
    const auto c = t.coord(e);
    for (std::size_t k = 0; k < c.size(); ++k) out << c[k] + 1 << ' ';
    out << fmt(t.values[static_cast<std::size_t>(e)]) << '\n';
  }
  finish_write(out, path);
}

void write_tns(const std::string& path, const DenseTensor& t) {
  t.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "dims";
  for (Index d : t.dims) out << ' ' << d;
  out << '\n';
  const auto strides = layout_strides(t.dims);
  std::vector<Index> idx(t.dims.size(), 0);
  for (Index e = 0; e < t.size(); ++e) {
    Index flat = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) flat += idx[k] * strides[k];
    for (Index i : idx) out << i + 1 << ' ';
    out << fmt(t.values[static_cast<std::size_t>(flat)]) << '\n';
    for (std::size_t k = idx.size(); k-- > 0;) {
      if (++idx[k] < t.dims[k]) break;
      idx[k] = 0;
    }
  }
  finish_write(out, path);
}

void write_history_csv(const std::string& path,
                       const std::vector<IterationRecord>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "iter,g_value,grad_norm,duality_gap,rel_gap,inner_iters,wall_ms\n";
  for (const auto& r : rows) {
    out << r.iter << ',' << fmt(r.g_value) << ',' << fmt(r.grad_norm) << ','
        << fmt(r.duality_gap) << ',' << fmt(r.rel_gap) << ',' << r.inner_iters
        << ',' << fmt(r.wall_ms) << '\n';
  }
  finish_write(out, path);
}

void write_svg_log_plot(const std::string& path, const std::string& title,
                        const std::string& y_label,
                        const std::vector<double>& x,
                        const std::vector<double>& y) {
  if (x.size() != y.size())
    throw std::invalid_argument("plot series length mismatch");
  constexpr double kW = 640, kH = 420, kL = 70, kR = 16, kT = 36, kB = 46;

  double xmin = 0, xmax = 1;
  if (!x.empty()) {
    xmin = xmax = x[0];
    for (double v : x) {
      xmin = std::min(xmin, v);
      xmax = std::max(xmax, v);
    }
  }
  if (xmax <= xmin) xmax = xmin + 1;

  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i] > 0.0) pts.emplace_back(x[i], std::log10(y[i]));

  double lo = -1, hi = 0;
  if (!pts.empty()) {
    double ymin = pts[0].second, ymax = pts[0].second;
    for (const auto& p : pts) {
      ymin = std::min(ymin, p.second);
      ymax = std::max(ymax, p.second);
    }
    lo = std::floor(ymin);
    hi = std::ceil(ymax);
    if (hi <= lo) hi = lo + 1;
  }

  const auto px = [&](double v) {
    return kL + (v - xmin) / (xmax - xmin) * (kW - kL - kR);
  };
  const auto py = [&](double lv) {
    return kT + (hi - lv) / (hi - lo) * (kH - kT - kB);
  };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
      << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW << ' ' << kH
      << "\">\n";
  out << "<rect width=\"" << kW << "\" height=\"" << kH
      << "\" fill=\"#ffffff\"/>\n";
  out << "<text x=\"" << kW / 2 << "\" y=\"20\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"14\">"
      << title << "</text>\n";
  out << "<text x=\"12\" y=\"" << kT - 8
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << y_label
      << "</text>\n";
  out << "<line x1=\"" << kL << "\" y1=\"" << kH - kB << "\" x2=\"" << kW - kR
      << "\" y2=\"" << kH - kB << "\" stroke=\"#444444\"/>\n";
  out << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL
      << "\" y2=\"" << kH - kB << "\" stroke=\"#444444\"/>\n";

  const Index yspan = static_cast<Index>(hi - lo);
  const Index ystep = std::max<Index>(1, (yspan + 5) / 6);
  for (Index d = 0; d <= yspan; d += ystep) {
    const double lv = lo + static_cast<double>(d);
    out << "<line x1=\"" << kL - 4 << "\" y1=\"" << fmt2(py(lv)) << "\" x2=\""
        << kL << "\" y2=\"" << fmt2(py(lv)) << "\" stroke=\"#444444\"/>\n";
    out << "<text x=\"" << kL - 8 << "\" y=\"" << fmt2(py(lv) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">1e"
        << static_cast<long long>(lv) << "</text>\n";
  }
  const double xspan = xmax - xmin;
  const double xstep = std::max(1.0, std::round(xspan / 5.0));
  for (double v = xmin; v <= xmax + 1e-9; v += xstep) {
    out << "<line x1=\"" << fmt2(px(v)) << "\" y1=\"" << kH - kB << "\" x2=\""
        << fmt2(px(v)) << "\" y2=\"" << kH - kB + 4
        << "\" stroke=\"#444444\"/>\n";
    out << "<text x=\"" << fmt2(px(v)) << "\" y=\"" << kH - kB + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << static_cast<long long>(std::llround(v)) << "</text>\n";
  }
  out << "<text x=\"" << (kL + kW - kR) / 2 << "\" y=\"" << kH - 10
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"11\">iteration</text>\n";

  if (pts.empty()) {
    out << "<text x=\"" << kW / 2 << "\" y=\"" << kH / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"12\">no positive data</text>\n";
  } else {
    out << "<polyline fill=\"none\" stroke=\"#0b6aa8\" stroke-width=\"1.5\" "
           "points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) out << ' ';
      out << fmt2(px(pts[i].first)) << ',' << fmt2(py(pts[i].second));
    }
    out << "\"/>\n";
  }
  out << "</svg>\n";
  finish_write(out, path);
}

}  // namespace stlt

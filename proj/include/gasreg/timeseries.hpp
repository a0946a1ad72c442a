#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gasreg/errors.hpp"

namespace gasreg {

// Column-oriented log of one simulation run. Stations are the pipe inlet,
// midpoint and outlet; dU is the inlet density command deviation applied
// over the step ending at t; err_* are observer error norms.
struct TimeSeries {
  std::vector<double> t;
  std::vector<double> rho_in, rho_mid, rho_out;
  std::vector<double> phi_in, phi_mid, phi_out;
  std::vector<double> du, s, eps;
  std::vector<double> err_v, err_w, err_x;

  static constexpr const char* kHeader =
      "t,rho_in,rho_mid,rho_out,phi_in,phi_mid,phi_out,dU,s,eps,err_v,err_w,err_X";

  std::size_t rows() const { return t.size(); }

  void append(double time, double ri, double rm, double ro, double fi, double fm, double fo,
              double du_applied, double s_val, double eps_val, double ev, double ew, double ex) {
    t.push_back(time);
    rho_in.push_back(ri);
    rho_mid.push_back(rm);
    rho_out.push_back(ro);
    phi_in.push_back(fi);
    phi_mid.push_back(fm);
    phi_out.push_back(fo);
    du.push_back(du_applied);
    s.push_back(s_val);
    eps.push_back(eps_val);
    err_v.push_back(ev);
    err_w.push_back(ew);
    err_x.push_back(ex);
  }
};

inline void write_csv(const TimeSeries& ts, std::ostream& os) {
  os << TimeSeries::kHeader << '\n';
  char line[512];
  for (std::size_t k = 0; k < ts.rows(); ++k) {
    std::snprintf(line, sizeof(line),
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  ts.t[k], ts.rho_in[k], ts.rho_mid[k], ts.rho_out[k], ts.phi_in[k], ts.phi_mid[k],
                  ts.phi_out[k], ts.du[k], ts.s[k], ts.eps[k], ts.err_v[k], ts.err_w[k], ts.err_x[k]);
    os << line;
  }
}

inline void write_csv_file(const TimeSeries& ts, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw invalid_input("cannot open for writing: " + path);
  write_csv(ts, os);
  if (!os.good()) throw invalid_input("short write: " + path);
}

inline TimeSeries read_csv(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw invalid_input("time series csv: empty stream");
  if (header != TimeSeries::kHeader) throw invalid_input("time series csv: unexpected header");
  TimeSeries ts;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    double col[13];
    const char* ptr = line.c_str();
    for (int c = 0; c < 13; ++c) {
      char* end = nullptr;
      col[c] = std::strtod(ptr, &end);
      if (end == ptr) throw invalid_input("time series csv: bad number in row");
      ptr = end;
      if (c < 12) {
        if (*ptr != ',') throw invalid_input("time series csv: missing separator");
        ++ptr;
      }
    }
    ts.append(col[0], col[1], col[2], col[3], col[4], col[5], col[6], col[7], col[8], col[9],
              col[10], col[11], col[12]);
  }
  return ts;
}

inline TimeSeries read_csv_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw invalid_input("cannot open: " + path);
  return read_csv(is);
}

}  // namespace gasreg

#include "nlsgi/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace nlsgi {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out.precision(17);
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw InputError("write failed for " + path.string());
}

std::vector<double> to_vec(const RArray& a) { return std::vector<double>(a.data(), a.data() + a.size()); }

RArray array_field(const Json& j, const char* key, Index n, const std::string& where) {
  if (!j.contains(key) || !j[key].is_array()) throw InputError(where + ": missing array '" + key + "'");
  const Json& arr = j[key];
  if (static_cast<Index>(arr.size()) != n) throw InputError(where + ": array '" + std::string(key) + "' has wrong length");
  RArray out(n);
  for (Index i = 0; i < n; ++i) {
    const Json& v = arr[static_cast<size_t>(i)];
    if (!v.is_number()) throw InputError(where + ": non-numeric entry in '" + std::string(key) + "'");
    out[i] = v.get<double>();
  }
  return out;
}

}  // namespace

void write_json(const std::filesystem::path& path, const Json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw InputError(path.string() + ": invalid JSON: " + e.what());
  }
}

void write_scattering_json(const std::filesystem::path& path, const ScatteringData& s, const Json& extra) {
  Json j = extra;
  j["zgrid"] = {{"Z", s.zgrid.half_width}, {"M", s.zgrid.count}};
  j["a_re"] = to_vec(s.a.real());
  j["a_im"] = to_vec(s.a.imag());
  j["b_re"] = to_vec(s.b.real());
  j["b_im"] = to_vec(s.b.imag());
  j["rp_re"] = to_vec(s.rp.real());
  j["rp_im"] = to_vec(s.rp.imag());
  j["rm_re"] = to_vec(s.rm.real());
  j["rm_im"] = to_vec(s.rm.imag());
  j["min_abs_a"] = s.min_abs_a;
  j["unitarity_max_err"] = s.unitarity_max_err;
  j["unitarity_pos_err"] = s.unitarity_pos_err;
  j["unitarity_neg_err"] = s.unitarity_neg_err;
  j["zero_count"] = s.zero_count;
  write_json(path, j);
}

ScatteringData read_scattering_json(const std::filesystem::path& path) {
  const Json j = read_json(path);
  const std::string where = path.string();
  if (!j.is_object() || !j.contains("zgrid") || !j["zgrid"].is_object()) throw InputError(where + ": missing zgrid");
  const Json& zg = j["zgrid"];
  if (!zg.contains("Z") || !zg["Z"].is_number() || !zg.contains("M") || !zg["M"].is_number_integer())
    throw InputError(where + ": zgrid needs numeric Z and integer M");
  ScatteringData s;
  s.zgrid = SpectralGrid{zg["Z"].get<double>(), zg["M"].get<Index>()};
  try {
    validate(s.zgrid);
  } catch (const InputError& e) {
    throw InputError(where + ": " + e.what());
  }
  const Index M = s.zgrid.count;
  auto cplx = [&](const char* re, const char* im) {
    const RArray r = array_field(j, re, M, where), i = array_field(j, im, M, where);
    CArray c(M);
    c.real() = r;
    c.imag() = i;
    if (!c.allFinite()) throw InputError(where + ": non-finite values in " + re);
    return c;
  };
  s.a = cplx("a_re", "a_im");
  s.b = cplx("b_re", "b_im");
  const CArray rp = cplx("rp_re", "rp_im"), rm = cplx("rm_re", "rm_im");
  if ((s.a.abs() == 0.0).any()) throw InputError(where + ": a vanishes at a node");
  finalize_scattering(s);
  const double tol = 1e-9;
  const double drp = ((s.rp - rp).abs() / (1.0 + rp.abs())).maxCoeff();
  const double drm = ((s.rm - rm).abs() / (1.0 + rm.abs())).maxCoeff();
  if (drp > tol || drm > tol) throw InputError(where + ": rp/rm are inconsistent with b/a (corrupted archive)");
  s.rp = rp;
  s.rm = rm;
  return s;
}

void write_scattering_csv(const std::filesystem::path& path, const ScatteringData& s) {
  auto out = open_out(path);
  out << "z,re_a,im_a,re_rp,im_rp,re_rm,im_rm\n";
  for (Index m = 0; m < s.zgrid.count; ++m)
    out << s.zgrid.node(m) << ',' << s.a[m].real() << ',' << s.a[m].imag() << ',' << s.rp[m].real() << ','
        << s.rp[m].imag() << ',' << s.rm[m].real() << ',' << s.rm[m].imag() << '\n';
  finish(out, path);
}

void write_potential_csv(const std::filesystem::path& path, const SpatialGrid& grid, const CArray& u) {
  auto out = open_out(path);
  out << "x,re_u,im_u\n";
  for (Index j = 0; j < grid.count; ++j) out << grid.node(j) << ',' << u[j].real() << ',' << u[j].imag() << '\n';
  finish(out, path);
}

void write_reconstruction_csv(const std::filesystem::path& path, const ReconstructionResult& r) {
  auto out = open_out(path);
  out << "x,re_u,im_u,w_residual\n";
  for (Index j = 0; j < r.grid.count; ++j)
    out << r.grid.node(j) << ',' << r.u_rec[j].real() << ',' << r.u_rec[j].imag() << ',' << r.w_residual[j] << '\n';
  finish(out, path);
}

std::vector<double> CsvTable::column(const std::string& name) const {
  for (size_t c = 0; c < header.size(); ++c) {
    if (header[c] != name) continue;
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) v.push_back(r[c]);
    return v;
  }
  throw InputError("no column '" + name + "'");
}

CsvTable read_csv_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + ": empty file");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.header.push_back(cell);
  }
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double v = 0;
      auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || p != cell.data() + cell.size())
        throw InputError(path.string() + ":" + std::to_string(lineno) + ": not a number: '" + cell + "'");
      row.push_back(v);
    }
    if (row.size() != t.header.size())
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": wrong number of fields");
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace nlsgi

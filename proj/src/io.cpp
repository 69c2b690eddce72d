#include "qf/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "qf/kovalevskaya.hpp"

namespace qf {

namespace {

void dump_rec(const Json& j, std::string& out, int indent, int depth) {
  auto pad = [&](int d) { out.append(size_t(indent) * d, ' '); };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      size_t i = 0;
      for (auto it = j.begin(); it != j.end(); ++it, ++i) {
        pad(depth + 1);
        out += Json(it.key()).dump();
        out += ": ";
        dump_rec(it.value(), out, indent, depth + 1);
        if (i + 1 < j.size()) out += ',';
        out += '\n';
      }
      pad(depth);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (size_t i = 0; i < j.size(); ++i) {
        pad(depth + 1);
        dump_rec(j[i], out, indent, depth + 1);
        if (i + 1 < j.size()) out += ',';
        out += '\n';
      }
      pad(depth);
      out += ']';
      return;
    }
    case Json::value_t::number_float: {
      double v = j.get<double>();
      if (std::isfinite(v))
        out += fmt17(v);
      else
        out += "null";
      return;
    }
    default:
      out += j.dump();
      return;
  }
}

const char* coords_name(ChartKind k) {
  switch (k) {
    case ChartKind::BaseU:
    case ChartKind::ShiftedU:
    case ChartKind::Kov2U:
      return "phi-u";
    case ChartKind::PolarBase:
    case ChartKind::PolarShifted:
      return "phi-r";
    case ChartKind::GeneralY:
      return "phi-y";
    case ChartKind::EmbeddedZ:
      return "phi-z";
  }
  return "phi-u";
}

Real require_number(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number())
    throw_validation("BAD_FIELD", std::string("missing numeric field \"") + key + "\"");
  return j[key].get<double>();
}

void require_schema(const Json& j, int want) {
  if (!j.is_object() || !j.contains("schema") || !j["schema"].is_number_integer() ||
      j["schema"].get<int>() != want)
    throw_validation("BAD_SCHEMA", "expected a schema " + std::to_string(want) + " document");
}

}  // namespace

std::string dump_json(const Json& j, int indent) {
  std::string out;
  dump_rec(j, out, indent, 0);
  out += '\n';
  return out;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw_io("WRITE_FAILED", "cannot open " + tmp + " for writing");
    f.write(content.data(), std::streamsize(content.size()));
    if (!f) throw_io("WRITE_FAILED", "short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw_io("WRITE_FAILED", "cannot move " + tmp + " into place");
  }
}

void write_json(const std::string& path, const Json& j) {
  write_text_atomic(path, dump_json(j));
}

Json read_json(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw_io("READ_FAILED", "cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  Json j = Json::parse(ss.str(), nullptr, false);
  if (j.is_discarded()) throw_io("PARSE_FAILED", path + " is not valid JSON");
  return j;
}

Json system_to_json(const ChartedSystem& sys) {
  Json j;
  j["schema"] = 1;
  j["kind"] = sys.params.kind;
  j["a"] = sys.params.a;
  j["b"] = sys.params.b;
  j["p"] = sys.params.p;
  j["sign"] = sys.params.sign;
  Json charts = Json::array();
  for (size_t ci = 0; ci < sys.charts.size(); ++ci) {
    const Chart& ch = sys.charts[ci];
    Json grid;
    grid["win_lo"] = ch.win_lo;
    grid["win_hi"] = ch.win_hi;
    const int n = 65;
    Json q2 = Json::array(), e1 = Json::array(), e2 = Json::array(), c = Json::array();
    for (int i = 0; i < n; ++i) {
      Real y = ch.win_lo + (ch.win_hi - ch.win_lo) * i / (n - 1);
      ChartEval ev = eval_chart(sys, int(ci), y);
      q2.push_back(y);
      e1.push_back(ev.E1.v);
      e2.push_back(ev.E2.v);
      c.push_back(ev.C.v);
    }
    grid["q2"] = std::move(q2);
    grid["E1"] = std::move(e1);
    grid["E2"] = std::move(e2);
    grid["C"] = std::move(c);
    charts.push_back(Json{{"name", ch.name}, {"coords", coords_name(ch.kind)},
                          {"grid", std::move(grid)}});
  }
  j["charts"] = std::move(charts);
  return j;
}

ChartedSystem system_from_json(const Json& j) {
  require_schema(j, 1);
  if (!j.contains("kind") || !j["kind"].is_string())
    throw_validation("BAD_FIELD", "missing string field \"kind\"");
  std::string kind = j["kind"].get<std::string>();
  Real a = require_number(j, "a");
  Real b = require_number(j, "b");
  Real p = require_number(j, "p");
  if (kind == "base") return build_base(a, b);
  if (kind == "shifted") return build_shifted(a, b, p);
  if (kind == "kovalevskaya") return kov_chart_system();
  if (kind == "kovalevskaya-embedded") return embedded_chart_system();
  throw_validation("BAD_SYSTEM_KIND", "cannot rebuild a system of kind \"" + kind + "\"");
}

ChartedSystem load_system(const std::string& path) {
  return system_from_json(read_json(path));
}

Json integral_to_json(const ChartedSystem& sys, const QuarticAnsatz& ansatz,
                      const NullspaceReport& rep) {
  Json j;
  j["schema"] = 1;
  j["system"] = Json{{"kind", sys.params.kind},
                     {"a", sys.params.a},
                     {"b", sys.params.b},
                     {"p", sys.params.p},
                     {"sign", sys.params.sign}};
  j["degree"] = ansatz.m;
  j["fourier"] = ansatz.M;
  j["radial"] = ansatz.N;
  j["window"] = Json::array({ansatz.y_lo, ansatz.y_hi});
  j["chart"] = sys.charts[ansatz.chart].name;
  j["method"] = rep.method == NullspaceMethod::svd ? "svd" : "normal";
  j["sigma_max"] = rep.sigma_max;
  j["threshold"] = rep.threshold_used;
  j["raw_dim"] = rep.raw_dim;
  j["deflated_dim"] = rep.deflated_dim;
  j["gap"] = rep.gap;
  Json sv = Json::array();
  for (Real s : rep.singular_values) sv.push_back(s);
  j["singular_values"] = std::move(sv);
  Json co = Json::array();
  if (!rep.new_integrals.empty())
    for (int i = 0; i < rep.new_integrals[0].size(); ++i)
      co.push_back(rep.new_integrals[0][i]);
  j["coefficients"] = std::move(co);
  return j;
}

QuarticAnsatz integral_from_json(const Json& j, const ChartedSystem& sys) {
  require_schema(j, 1);
  if (!j.contains("system") || !j["system"].is_object())
    throw_validation("BAD_FIELD", "missing object field \"system\"");
  const Json& se = j["system"];
  if (!se.contains("kind") || !se["kind"].is_string())
    throw_validation("BAD_FIELD", "missing string field \"system.kind\"");
  if (se["kind"].get<std::string>() != sys.params.kind ||
      require_number(se, "a") != sys.params.a || require_number(se, "b") != sys.params.b ||
      require_number(se, "p") != sys.params.p)
    throw_validation("SYSTEM_MISMATCH",
                     "the integral file was produced for a different system");
  QuarticAnsatz az;
  az.m = int(require_number(j, "degree"));
  az.M = int(require_number(j, "fourier"));
  az.N = int(require_number(j, "radial"));
  if (!j.contains("window") || !j["window"].is_array() || j["window"].size() != 2)
    throw_validation("BAD_FIELD", "\"window\" must be [lo, hi]");
  az.y_lo = j["window"][0].get<double>();
  az.y_hi = j["window"][1].get<double>();
  if (!j.contains("chart") || !j["chart"].is_string())
    throw_validation("BAD_FIELD", "missing string field \"chart\"");
  az.chart = sys.chart_index(j["chart"].get<std::string>());
  if (!j.contains("coefficients") || !j["coefficients"].is_array() ||
      int(j["coefficients"].size()) != az.basis_size())
    throw_validation("BAD_FIELD", "coefficient count does not match the basis");
  az.coeffs.resize(az.basis_size());
  for (int i = 0; i < az.basis_size(); ++i) az.coeffs[i] = j["coefficients"][i].get<double>();
  return az;
}

namespace {

void append_sample_row(std::string& out, const ChartedSystem& sys, const TrajSample& smp,
                       const QuarticAnsatz* ansatz) {
  out += fmt17(smp.t);
  out += ',';
  out += sys.charts[smp.s.chart].name;
  out += ',';
  out += fmt17(smp.s.q1);
  out += ',';
  out += fmt17(smp.s.q2);
  out += ',';
  out += fmt17(smp.s.p1);
  out += ',';
  out += fmt17(smp.s.p2);
  out += ',';
  out += fmt17(smp.H);
  out += ',';
  if (ansatz && ansatz->coeffs.size() == ansatz->basis_size() &&
      smp.s.chart == ansatz->chart && smp.s.q2 >= ansatz->y_lo && smp.s.q2 <= ansatz->y_hi)
    out += fmt17(eval_ansatz(*ansatz, ansatz->coeffs, smp.s));
  out += "\r\n";
}

}  // namespace

void write_trajectory_csv(const std::string& path, const ChartedSystem& sys,
                          const Trajectory& traj, const QuarticAnsatz* ansatz) {
  std::string out = "t,chart,q1,q2,p1,p2,H,F\r\n";
  for (const TrajSample& smp : traj.samples) append_sample_row(out, sys, smp, ansatz);
  write_text_atomic(path, out);
}

void write_crossings_csv(const std::string& path, const ChartedSystem& sys,
                         const std::vector<TrajSample>& crossings) {
  std::string out = "t,chart,q1,q2,p1,p2,H,F\r\n";
  for (const TrajSample& smp : crossings) append_sample_row(out, sys, smp, nullptr);
  write_text_atomic(path, out);
}

std::vector<TrajRow> read_trajectory_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw_io("READ_FAILED", "cannot open " + path);
  std::vector<TrajRow> rows;
  std::string line;
  bool header = true;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> parts;
    size_t pos = 0;
    while (true) {
      size_t nxt = line.find(',', pos);
      if (nxt == std::string::npos) {
        parts.push_back(line.substr(pos));
        break;
      }
      parts.push_back(line.substr(pos, nxt - pos));
      pos = nxt + 1;
    }
    if (parts.size() != 8)
      throw_validation("BAD_CSV", path + ": expected 8 columns, got " +
                                      std::to_string(parts.size()));
    TrajRow r;
    try {
      r.t = std::stod(parts[0]);
      r.chart = parts[1];
      r.q1 = std::stod(parts[2]);
      r.q2 = std::stod(parts[3]);
      r.p1 = std::stod(parts[4]);
      r.p2 = std::stod(parts[5]);
      r.H = std::stod(parts[6]);
      if (!parts[7].empty()) r.F = std::stod(parts[7]);
    } catch (const std::exception&) {
      throw_validation("BAD_CSV", path + ": non-numeric field in a data row");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace qf

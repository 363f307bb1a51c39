#include "spnet/spec_file.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

namespace spnet {
namespace {

struct Entry {
  int line = 0;
  std::string key;   // normalized: lowercase, single spaces
  std::string raw;   // text after '=' (may be empty for matrix form)
  std::vector<std::vector<std::string>> rows;  // matrix rows when raw empty
};

struct Section {
  std::string name;
  int line = 0;
  std::vector<Entry> entries;
};

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
  std::ostringstream os;
  os << origin << ":" << line << ": " << msg;
  throw ParseError(os.str());
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<std::string> tokens(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string t;
  while (is >> t) out.push_back(t);
  return out;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

bool parse_num(const std::string& t, double* v) {
  const char* b = t.data();
  const char* e = b + t.size();
  auto res = std::from_chars(b, e, *v);
  return res.ec == std::errc() && res.ptr == e;
}

bool numeric_row(const std::string& s) {
  auto ts = tokens(s);
  if (ts.empty()) return false;
  double v;
  for (const auto& t : ts) {
    if (!parse_num(t, &v)) return false;
  }
  return true;
}

std::vector<Section> split_sections(const std::string& text, const std::string& origin) {
  struct RawLine {
    int no;
    std::string text;
  };
  std::vector<RawLine> lines;
  {
    std::istringstream is(text);
    std::string l;
    int no = 0;
    while (std::getline(is, l)) {
      ++no;
      size_t hash = l.find('#');
      if (hash != std::string::npos) l = l.substr(0, hash);
      l = trim(l);
      if (!l.empty()) lines.push_back({no, l});
    }
  }

  std::vector<Section> secs;
  size_t i = 0;
  while (i < lines.size()) {
    const auto& [no, l] = lines[i];
    if (l.front() == '[') {
      if (l.back() != ']' || l.size() < 3) fail(origin, no, "malformed section header: " + l);
      secs.push_back({lower(trim(l.substr(1, l.size() - 2))), no, {}});
      ++i;
      continue;
    }
    if (secs.empty()) fail(origin, no, "content before first [section]");
    size_t eq = l.find('=');
    if (eq == std::string::npos) fail(origin, no, "expected 'key = value': " + l);
    Entry e;
    e.line = no;
    auto key_toks = tokens(lower(l.substr(0, eq)));
    if (key_toks.empty()) fail(origin, no, "empty key");
    for (size_t k = 0; k < key_toks.size(); ++k) {
      if (k) e.key += ' ';
      e.key += key_toks[k];
    }
    e.raw = trim(l.substr(eq + 1));
    ++i;
    if (e.raw.empty()) {
      while (i < lines.size() && numeric_row(lines[i].text)) {
        e.rows.push_back(tokens(lines[i].text));
        ++i;
      }
      if (e.rows.empty()) fail(origin, no, "key '" + e.key + "' has no value and no matrix rows");
    }
    secs.back().entries.push_back(std::move(e));
  }
  return secs;
}

class Reader {
 public:
  Reader(const Section* sec, const std::string& origin) : sec_(sec), origin_(origin) {}

  bool present() const { return sec_ != nullptr; }
  int line() const { return sec_ ? sec_->line : 0; }

  const Entry* find(const std::string& key) {
    if (!sec_) return nullptr;
    const Entry* hit = nullptr;
    for (const auto& e : sec_->entries) {
      if (e.key == key) {
        if (hit) fail(origin_, e.line, "duplicate key '" + key + "'");
        hit = &e;
      }
    }
    if (hit) used_.insert(key);
    return hit;
  }

  const Entry& require(const std::string& key) {
    const Entry* e = find(key);
    if (!e) fail(origin_, sec_ ? sec_->line : 0, "section [" + (sec_ ? sec_->name : "?") + "] missing key '" + key + "'");
    return *e;
  }

  std::vector<const Entry*> all_with_prefix(const std::string& prefix) {
    std::vector<const Entry*> out;
    if (!sec_) return out;
    for (const auto& e : sec_->entries) {
      if (e.key.rfind(prefix, 0) == 0) {
        out.push_back(&e);
        used_.insert(e.key);
      }
    }
    return out;
  }

  std::vector<const Entry*> all_exact(const std::string& key) {
    std::vector<const Entry*> out;
    if (!sec_) return out;
    for (const auto& e : sec_->entries) {
      if (e.key == key) {
        out.push_back(&e);
        used_.insert(e.key);
      }
    }
    return out;
  }

  void check_no_strays() {
    if (!sec_) return;
    for (const auto& e : sec_->entries) {
      if (!used_.count(e.key)) fail(origin_, e.line, "unknown key '" + e.key + "' in section [" + sec_->name + "]");
    }
  }

  double scalar(const Entry& e) {
    double v;
    if (e.raw.empty() || tokens(e.raw).size() != 1 || !parse_num(e.raw, &v))
      fail(origin_, e.line, "key '" + e.key + "' expects one number");
    return v;
  }

  int integer(const Entry& e) {
    double v = scalar(e);
    int iv = static_cast<int>(v);
    if (static_cast<double>(iv) != v) fail(origin_, e.line, "key '" + e.key + "' expects an integer");
    return iv;
  }

  Vec vec(const Entry& e, int expect) {
    auto ts = tokens(e.raw);
    if (expect >= 0 && static_cast<int>(ts.size()) != expect) {
      std::ostringstream os;
      os << "key '" << e.key << "' expects " << expect << " numbers, got " << ts.size();
      fail(origin_, e.line, os.str());
    }
    Vec v(ts.size());
    for (size_t i = 0; i < ts.size(); ++i) {
      if (!parse_num(ts[i], &v[static_cast<long>(i)]))
        fail(origin_, e.line, "bad number '" + ts[i] + "' in key '" + e.key + "'");
    }
    return v;
  }

  Mat mat(const Entry& e, int rows, int cols) {
    if (e.rows.empty()) fail(origin_, e.line, "key '" + e.key + "' expects matrix rows on following lines");
    if (rows >= 0 && static_cast<int>(e.rows.size()) != rows) {
      std::ostringstream os;
      os << "matrix '" << e.key << "' expects " << rows << " rows, got " << e.rows.size();
      fail(origin_, e.line, os.str());
    }
    size_t nc = e.rows.front().size();
    if (cols >= 0 && static_cast<int>(nc) != cols) {
      std::ostringstream os;
      os << "matrix '" << e.key << "' expects " << cols << " columns, got " << nc;
      fail(origin_, e.line, os.str());
    }
    Mat m(e.rows.size(), nc);
    for (size_t r = 0; r < e.rows.size(); ++r) {
      if (e.rows[r].size() != nc) fail(origin_, e.line, "ragged matrix '" + e.key + "'");
      for (size_t c = 0; c < nc; ++c) {
        if (!parse_num(e.rows[r][c], &m(static_cast<long>(r), static_cast<long>(c))))
          fail(origin_, e.line, "bad number in matrix '" + e.key + "'");
      }
    }
    return m;
  }

  IMat imat01(const Entry& e, int rows, int cols) {
    Mat m = mat(e, rows, cols);
    IMat out(m.rows(), m.cols());
    for (long r = 0; r < m.rows(); ++r) {
      for (long c = 0; c < m.cols(); ++c) {
        double v = m(r, c);
        if (v != 0.0 && v != 1.0) fail(origin_, e.line, "matrix '" + e.key + "' must be 0/1");
        out(r, c) = static_cast<int>(v);
      }
    }
    return out;
  }

 private:
  const Section* sec_;
  std::string origin_;
  std::set<std::string> used_;
};

const Section* pick(const std::vector<Section>& secs, const std::string& name,
                    const std::string& origin) {
  const Section* hit = nullptr;
  for (const auto& s : secs) {
    if (s.name == name) {
      if (hit) fail(origin, s.line, "duplicate section [" + name + "]");
      hit = &s;
    }
  }
  return hit;
}

// Index parsed out of keys like "activity 3"; 1-based in the file.
int key_index(const Entry& e, const std::string& prefix, int max, const std::string& origin) {
  std::string rest = trim(e.key.substr(prefix.size()));
  double v;
  if (!parse_num(rest, &v) || v != static_cast<int>(v) || v < 1 || v > max)
    fail(origin, e.line, "key '" + e.key + "' needs an index in 1.." + std::to_string(max));
  return static_cast<int>(v) - 1;
}

std::string num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void render_vec(std::ostringstream& os, const std::string& key, const Vec& v) {
  os << key << " =";
  for (long i = 0; i < v.size(); ++i) os << ' ' << num(v[i]);
  os << '\n';
}

void render_mat(std::ostringstream& os, const std::string& key, const Mat& m) {
  os << key << " =\n";
  for (long r = 0; r < m.rows(); ++r) {
    for (long c = 0; c < m.cols(); ++c) os << (c ? " " : "") << num(m(r, c));
    os << '\n';
  }
}

}  // namespace

SpecFileData parse_spec_text(const std::string& text, const std::string& origin) {
  auto secs = split_sections(text, origin);
  static const std::set<std::string> known = {"topology", "routing", "primitives",
                                              "scaling",  "workload", "policy", "cost"};
  for (const auto& s : secs) {
    if (!known.count(s.name)) fail(origin, s.line, "unknown section [" + s.name + "]");
  }

  SpecFileData out;
  NetworkSpec& spec = out.spec;

  // ---- topology ----
  const Section* sec = pick(secs, "topology", origin);
  if (!sec) throw ParseError(origin + ": missing section [topology]");
  {
    Reader rd(sec, origin);
    spec.I = rd.integer(rd.require("buffers"));
    spec.J = rd.integer(rd.require("activities"));
    spec.K = rd.integer(rd.require("servers"));
    if (spec.I < 1 || spec.J < 1 || spec.K < 1)
      fail(origin, sec->line, "buffers/activities/servers must be positive");
    spec.C = rd.imat01(rd.require("c"), spec.I, spec.J);
    spec.A = rd.imat01(rd.require("a"), spec.K, spec.J);
    rd.check_no_strays();
  }

  // ---- routing ----
  sec = pick(secs, "routing", origin);
  if (!sec) throw ParseError(origin + ": missing section [routing]");
  {
    Reader rd(sec, origin);
    spec.routing = Mat::Zero(spec.J, spec.I + 1);
    std::vector<bool> seen(spec.J, false);
    for (const Entry* e : rd.all_with_prefix("activity ")) {
      int j = key_index(*e, "activity ", spec.J, origin);
      if (seen[j]) fail(origin, e->line, "duplicate routing row for activity " + std::to_string(j + 1));
      seen[j] = true;
      spec.routing.row(j) = rd.vec(*e, spec.I + 1).transpose();
    }
    for (int j = 0; j < spec.J; ++j) {
      if (!seen[j]) fail(origin, sec->line, "missing routing row for activity " + std::to_string(j + 1));
    }
    rd.check_no_strays();
  }

  // ---- primitives ----
  sec = pick(secs, "primitives", origin);
  if (!sec) throw ParseError(origin + ": missing section [primitives]");
  {
    Reader rd(sec, origin);
    spec.arrival_family.assign(spec.I, PrimitiveFamily::None);
    spec.service_family.assign(spec.J, PrimitiveFamily::None);
    for (const Entry* e : rd.all_with_prefix("arrival ")) {
      int i = key_index(*e, "arrival ", spec.I, origin);
      try {
        spec.arrival_family[i] = family_from_name(lower(trim(e->raw)));
      } catch (const ParseError& pe) {
        fail(origin, e->line, pe.what());
      }
    }
    std::vector<bool> seen(spec.J, false);
    for (const Entry* e : rd.all_with_prefix("service ")) {
      int j = key_index(*e, "service ", spec.J, origin);
      seen[j] = true;
      try {
        spec.service_family[j] = family_from_name(lower(trim(e->raw)));
      } catch (const ParseError& pe) {
        fail(origin, e->line, pe.what());
      }
    }
    for (int j = 0; j < spec.J; ++j) {
      if (!seen[j]) fail(origin, sec->line, "missing service family for activity " + std::to_string(j + 1));
    }
    rd.check_no_strays();
  }

  // ---- scaling ----
  sec = pick(secs, "scaling", origin);
  if (!sec) throw ParseError(origin + ": missing section [scaling]");
  {
    Reader rd(sec, origin);
    ScalingScheme& sc = out.scaling;
    sc.alpha = rd.vec(rd.require("alpha"), spec.I);
    sc.sigma_u = rd.vec(rd.require("sigma_u"), spec.I);
    sc.beta = rd.vec(rd.require("beta"), spec.J);
    sc.sigma_v = rd.vec(rd.require("sigma_v"), spec.J);
    sc.theta1 = Vec::Zero(spec.I);
    sc.theta2 = Vec::Zero(spec.J);
    sc.q = Vec::Zero(spec.I);
    if (const Entry* e = rd.find("theta1")) sc.theta1 = rd.vec(*e, spec.I);
    if (const Entry* e = rd.find("theta2")) sc.theta2 = rd.vec(*e, spec.J);
    if (const Entry* e = rd.find("q")) sc.q = rd.vec(*e, spec.I);
    if (const Entry* e = rd.find("r_list")) {
      Vec rl = rd.vec(*e, -1);
      sc.r_list.assign(rl.data(), rl.data() + rl.size());
      for (size_t i = 0; i + 1 < sc.r_list.size(); ++i) {
        if (sc.r_list[i] >= sc.r_list[i + 1]) fail(origin, e->line, "r_list must be strictly increasing");
      }
      if (!sc.r_list.empty() && sc.r_list.front() <= 0) fail(origin, e->line, "r_list entries must be positive");
    }
    rd.check_no_strays();
  }

  // ---- workload (optional) ----
  if ((sec = pick(secs, "workload", origin))) {
    Reader rd(sec, origin);
    WorkloadInput w;
    w.Lambda = rd.mat(rd.require("lambda"), -1, spec.I);
    w.G = rd.mat(rd.require("g"), static_cast<int>(w.Lambda.rows()), -1);
    rd.check_no_strays();
    out.workload = std::move(w);
  }

  // ---- policy (optional) ----
  if ((sec = pick(secs, "policy", origin))) {
    Reader rd(sec, origin);
    TrackingParams tp;
    if (const Entry* e = rd.find("kappa_exp")) tp.kappa_exp = rd.scalar(*e);
    if (const Entry* e = rd.find("m")) tp.m_exp = rd.scalar(*e);
    if (const Entry* e = rd.find("d1")) tp.d1 = rd.scalar(*e);
    if (const Entry* e = rd.find("rho")) tp.rho = rd.scalar(*e);
    JumpRuleControl& rule = tp.rule;
    if (const Entry* e = rd.find("t")) rule.T = rd.scalar(*e);
    if (const Entry* e = rd.find("p0")) rule.p0 = rd.integer(*e);
    if (const Entry* e = rd.find("j0")) rule.j0 = rd.integer(*e);
    if (const Entry* e = rd.find("eta")) rule.eta = rd.scalar(*e);
    if (const Entry* e = rd.find("m_bound")) rule.M = rd.scalar(*e);
    if (const Entry* e = rd.find("eps0")) rule.eps0 = rd.scalar(*e);
    if (const Entry* e = rd.find("feature_quant")) rule.feature_quant = rd.scalar(*e);
    std::string kind = "zero";
    if (const Entry* e = rd.find("rule")) kind = lower(trim(e->raw));
    if (kind == "zero") {
      rule.kind = RuleKind::Zero;
    } else if (kind == "threshold") {
      rule.kind = RuleKind::Threshold;
    } else if (kind == "kernel") {
      rule.kind = RuleKind::Kernel;
    } else {
      fail(origin, sec->line, "rule must be zero, threshold, or kernel");
    }
    for (const Entry* e : rd.all_exact("trow")) {
      auto parts = split_on(e->raw, ';');
      if (parts.size() != 2) fail(origin, e->line, "trow expects 'component threshold ; b_1 .. b_J'");
      auto head = tokens(parts[0]);
      double comp, thr;
      if (head.size() != 2 || !parse_num(head[0], &comp) || !parse_num(head[1], &thr) ||
          comp != static_cast<int>(comp))
        fail(origin, e->line, "trow head expects 'component threshold'");
      auto bt = tokens(parts[1]);
      if (static_cast<int>(bt.size()) != spec.J) fail(origin, e->line, "trow jump needs one integer per activity");
      ThresholdRow row;
      row.component = static_cast<int>(comp) - 1;
      row.threshold = thr;
      row.b = IVec(spec.J);
      for (int j = 0; j < spec.J; ++j) {
        double v;
        if (!parse_num(bt[j], &v) || v != static_cast<int>(v)) fail(origin, e->line, "trow jump entries must be integers");
        row.b[j] = static_cast<int>(v);
      }
      rule.rows.push_back(std::move(row));
    }
    for (const Entry* e : rd.all_exact("krow")) {
      auto parts = split_on(e->raw, ';');
      if (parts.size() < 2) fail(origin, e->line, "krow expects 'component threshold ; prob b_1 .. b_J ; ...'");
      auto head = tokens(parts[0]);
      double comp, thr;
      if (head.size() != 2 || !parse_num(head[0], &comp) || !parse_num(head[1], &thr) ||
          comp != static_cast<int>(comp))
        fail(origin, e->line, "krow head expects 'component threshold'");
      KernelRow row;
      row.component = static_cast<int>(comp) - 1;
      row.threshold = thr;
      for (size_t g = 1; g < parts.size(); ++g) {
        auto gt = tokens(parts[g]);
        if (static_cast<int>(gt.size()) != spec.J + 1)
          fail(origin, e->line, "krow outcome expects 'prob b_1 .. b_J'");
        LatticeJump lj;
        if (!parse_num(gt[0], &lj.prob)) fail(origin, e->line, "bad probability in krow");
        lj.b = IVec(spec.J);
        for (int j = 0; j < spec.J; ++j) {
          double v;
          if (!parse_num(gt[j + 1], &v) || v != static_cast<int>(v))
            fail(origin, e->line, "krow jump entries must be integers");
          lj.b[j] = static_cast<int>(v);
        }
        row.outcomes.push_back(std::move(lj));
      }
      rule.kernel_rows.push_back(std::move(row));
    }
    if (rule.kind == RuleKind::Threshold && rule.rows.empty())
      fail(origin, sec->line, "threshold rule needs at least one trow");
    if (rule.kind == RuleKind::Kernel && rule.kernel_rows.empty())
      fail(origin, sec->line, "kernel rule needs at least one krow");
    rd.check_no_strays();
    out.policy = std::move(tp);
  }

  // ---- cost (optional) ----
  if ((sec = pick(secs, "cost", origin))) {
    Reader rd(sec, origin);
    CostParams cp;
    cp.h = Vec::Ones(spec.I);
    cp.p = Vec();
    if (const Entry* e = rd.find("gamma")) cp.gamma = rd.scalar(*e);
    if (const Entry* e = rd.find("h")) cp.h = rd.vec(*e, spec.I);
    if (const Entry* e = rd.find("p")) cp.p = rd.vec(*e, -1);
    rd.check_no_strays();
    out.cost = std::move(cp);
  }

  auto rep = validate_spec(spec);
  if (!rep.ok()) throw ParseError(origin + ": invalid network: " + rep.joined());
  auto rep2 = validate_bundle(spec, out.scaling);
  if (!rep2.ok()) throw ParseError(origin + ": invalid scaling: " + rep2.joined());
  return out;
}

SpecFileData load_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open spec file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec_text(buf.str(), path);
}

std::string render_spec_file(const SpecFileData& data) {
  const NetworkSpec& spec = data.spec;
  std::ostringstream os;
  os << "[topology]\n";
  os << "buffers = " << spec.I << "\n";
  os << "activities = " << spec.J << "\n";
  os << "servers = " << spec.K << "\n";
  render_mat(os, "C", spec.C.cast<double>());
  render_mat(os, "A", spec.A.cast<double>());

  os << "\n[routing]\n";
  for (int j = 0; j < spec.J; ++j) {
    os << "activity " << (j + 1) << " =";
    for (int c = 0; c <= spec.I; ++c) os << ' ' << num(spec.routing(j, c));
    os << '\n';
  }

  os << "\n[primitives]\n";
  for (int i = 0; i < spec.I; ++i) {
    if (spec.arrival_family[i] != PrimitiveFamily::None)
      os << "arrival " << (i + 1) << " = " << family_name(spec.arrival_family[i]) << '\n';
  }
  for (int j = 0; j < spec.J; ++j)
    os << "service " << (j + 1) << " = " << family_name(spec.service_family[j]) << '\n';

  os << "\n[scaling]\n";
  const ScalingScheme& sc = data.scaling;
  render_vec(os, "alpha", sc.alpha);
  render_vec(os, "sigma_u", sc.sigma_u);
  render_vec(os, "theta1", sc.theta1);
  render_vec(os, "beta", sc.beta);
  render_vec(os, "sigma_v", sc.sigma_v);
  render_vec(os, "theta2", sc.theta2);
  render_vec(os, "q", sc.q);
  if (!sc.r_list.empty()) {
    os << "r_list =";
    for (double r : sc.r_list) os << ' ' << num(r);
    os << '\n';
  }

  if (data.workload) {
    os << "\n[workload]\n";
    render_mat(os, "Lambda", data.workload->Lambda);
    render_mat(os, "G", data.workload->G);
  }

  if (data.policy) {
    const TrackingParams& tp = *data.policy;
    os << "\n[policy]\n";
    os << "kappa_exp = " << num(tp.kappa_exp) << '\n';
    os << "m = " << num(tp.m_exp) << '\n';
    os << "d1 = " << num(tp.d1) << '\n';
    os << "rho = " << num(tp.rho) << '\n';
    const JumpRuleControl& rule = tp.rule;
    os << "T = " << num(rule.T) << '\n';
    os << "p0 = " << rule.p0 << '\n';
    os << "j0 = " << rule.j0 << '\n';
    os << "eta = " << num(rule.eta) << '\n';
    os << "M_bound = " << num(rule.M) << '\n';
    os << "eps0 = " << num(rule.eps0) << '\n';
    if (rule.feature_quant != 0.0) os << "feature_quant = " << num(rule.feature_quant) << '\n';
    os << "rule = "
       << (rule.kind == RuleKind::Zero ? "zero"
                                       : rule.kind == RuleKind::Threshold ? "threshold" : "kernel")
       << '\n';
    for (const auto& row : rule.rows) {
      os << "trow = " << (row.component + 1) << ' ' << num(row.threshold) << " ;";
      for (int j = 0; j < row.b.size(); ++j) os << ' ' << row.b[j];
      os << '\n';
    }
    for (const auto& row : rule.kernel_rows) {
      os << "krow = " << (row.component + 1) << ' ' << num(row.threshold);
      for (const auto& oc : row.outcomes) {
        os << " ; " << num(oc.prob);
        for (int j = 0; j < oc.b.size(); ++j) os << ' ' << oc.b[j];
      }
      os << '\n';
    }
  }

  if (data.cost) {
    os << "\n[cost]\n";
    os << "gamma = " << num(data.cost->gamma) << '\n';
    render_vec(os, "h", data.cost->h);
    if (data.cost->p.size() > 0) render_vec(os, "p", data.cost->p);
  }
  return os.str();
}

}  // namespace spnet

#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "snum/assembly.hpp"
#include "snum/blocks.hpp"
#include "snum/classify.hpp"
#include "snum/errors.hpp"
#include "snum/params.hpp"
#include "snum/rate_fit.hpp"
#include "snum/widths.hpp"

namespace snum {

using json = nlohmann::json;

inline constexpr std::string_view kCsvHeader = "# snum-csv v1";
inline constexpr std::string_view kConstantsNotice =
    "Envelope values set every undetermined absolute constant to 1; entries flagged "
    "constants_undetermined hold only up to such constants.";

// ---------------------------------------------------------------- numbers

/// Shortest round-trip decimal; "inf"/"-inf" for infinities, "nan" for NaN.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Accepts decimal numbers and "inf" (also "infinity", any case).
inline double parse_number(std::string_view token, const std::string& field) {
  std::string t(token);
  while (!t.empty() && std::isspace(static_cast<unsigned char>(t.front()))) t.erase(t.begin());
  while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back()))) t.pop_back();
  std::string lower;
  for (char c : t) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "inf" || lower == "+inf" || lower == "infinity") return kInf;
  if (lower == "-inf" || lower == "-infinity") return -kInf;
  double v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw ValidationError(field, "malformed number '" + std::string(token) + "'");
  return v;
}

/// JSON cannot hold infinities: they travel as the string "inf", NaN as null.
inline json number_to_json(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline double number_from_json(const json& j) {
  if (j.is_null()) return std::nan("");
  if (j.is_string()) return parse_number(j.get<std::string>(), "json");
  return j.get<double>();
}

// ---------------------------------------------------------------- parameters

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string trim(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  return s;
}

/// A parameter tuple as typed by the user. `delta`, when present, replaces s1:
/// s1 = s2 + delta + d (1/p1 - 1/p2) is recomputed for every tuple.
struct ParamSpec {
  EmbeddingParams base;
  bool has_delta = false;
  double delta = 0;

  EmbeddingParams resolve() const {
    EmbeddingParams p = base;
    if (has_delta) p.s1 = p.s2 + delta + p.d * (inv(p.p1) - inv(p.p2));
    return p;
  }
};

inline const std::vector<std::string>& param_keys() {
  static const std::vector<std::string> keys = {"s1", "s2", "delta", "p1", "q1", "p2", "q2",
                                                "alpha", "d", "source", "target"};
  return keys;
}

inline SpaceType parse_space_type(const std::string& v, const std::string& field) {
  if (v == "B" || v == "b") return SpaceType::B;
  if (v == "F" || v == "f") return SpaceType::F;
  throw ValidationError(field, "space type must be B or F, got '" + v + "'");
}

inline void set_param(ParamSpec& spec, const std::string& key, const std::string& value) {
  auto& p = spec.base;
  if (key == "source") {
    p.source_type = parse_space_type(value, key);
  } else if (key == "target") {
    p.target_type = parse_space_type(value, key);
  } else if (key == "d") {
    const double v = parse_number(value, key);
    if (v != std::floor(v) || !std::isfinite(v)) throw ValidationError("d", "dimension must be an integer, got '" + value + "'");
    p.d = static_cast<int>(v);
  } else {
    const double v = parse_number(value, key);
    if (key == "s1") p.s1 = v, spec.has_delta = false;
    else if (key == "s2") p.s2 = v;
    else if (key == "delta") spec.delta = v, spec.has_delta = true;
    else if (key == "p1") p.p1 = v;
    else if (key == "q1") p.q1 = v;
    else if (key == "p2") p.p2 = v;
    else if (key == "q2") p.q2 = v;
    else if (key == "alpha") p.alpha = v;
    else throw ValidationError("params", "unknown key '" + key + "'");
  }
}

/// "s1=2,s2=0,p1=2,q1=2,p2=2,q2=2,alpha=1,d=1". Unlisted keys keep their defaults.
inline ParamSpec parse_param_spec(std::string_view text) {
  ParamSpec spec;
  if (trim(std::string(text)).empty()) throw ValidationError("params", "empty parameter string");
  for (const auto& raw : split(text, ',')) {
    const std::string item = trim(raw);
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ValidationError("params", "expected key=value, got '" + item + "'");
    set_param(spec, trim(item.substr(0, eq)), trim(item.substr(eq + 1)));
  }
  return spec;
}

inline EmbeddingParams parse_params(std::string_view text) {
  const auto p = parse_param_spec(text).resolve();
  validate(p);
  return p;
}

/// "N=16,p_src=1,p_dst=inf,scale=1"
inline FiniteEmbedding parse_finite_embedding(std::string_view text) {
  FiniteEmbedding e;
  for (const auto& raw : split(text, ',')) {
    const std::string item = trim(raw);
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ValidationError("params", "expected key=value, got '" + item + "'");
    const std::string key = trim(item.substr(0, eq)), value = trim(item.substr(eq + 1));
    const double v = parse_number(value, key);
    if (key == "N") {
      if (!(v >= 1) || v != std::floor(v) || !std::isfinite(v))
        throw ValidationError("N", "dimension must be a positive integer, got '" + value + "'");
      e.N = static_cast<std::size_t>(v);
    } else if (key == "p_src") {
      e.p_src = v;
    } else if (key == "p_dst") {
      e.p_dst = v;
    } else if (key == "scale") {
      e.scale = v;
    } else {
      throw ValidationError("params", "unknown key '" + key + "'");
    }
  }
  validate(e);
  return e;
}

/// Values of one swept key: "0.5,1,inf" or "lo:hi:step" (inclusive).
inline std::vector<double> parse_values(const std::string& text, const std::string& field) {
  std::vector<double> out;
  const auto colon = split(text, ':');
  if (colon.size() == 3) {
    const double lo = parse_number(colon[0], field), hi = parse_number(colon[1], field),
                 step = parse_number(colon[2], field);
    if (!(step > 0) || !std::isfinite(lo) || !std::isfinite(hi) || hi < lo)
      throw ValidationError(field, "range lo:hi:step needs finite lo <= hi and step > 0, got '" + text + "'");
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step * (1 + 1e-12))) + 1;
    for (std::size_t k = 0; k < count; ++k) out.push_back(lo + static_cast<double>(k) * step);
    return out;
  }
  if (colon.size() != 1) throw ValidationError(field, "malformed range '" + text + "'");
  for (const auto& tok : split(text, ',')) {
    if (trim(tok).empty()) throw ValidationError(field, "empty value in '" + text + "'");
    out.push_back(parse_number(tok, field));
  }
  return out;
}

struct RangeAxis {
  std::string key;
  std::vector<std::string> values;  ///< kept as text so that "B"/"F" sweep too
};

/// "p1=0.5,1,2;p2=1,inf". Axes vary slowest first.
inline std::vector<RangeAxis> parse_ranges(std::string_view text) {
  std::vector<RangeAxis> axes;
  if (trim(std::string(text)).empty()) throw ValidationError("range", "empty range");
  for (const auto& raw : split(text, ';')) {
    const std::string item = trim(raw);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ValidationError("range", "expected key=values, got '" + item + "'");
    RangeAxis axis{trim(item.substr(0, eq)), {}};
    const std::string body = trim(item.substr(eq + 1));
    if (std::find(param_keys().begin(), param_keys().end(), axis.key) == param_keys().end())
      throw ValidationError("range", "unknown key '" + axis.key + "'");
    if (body.empty()) throw ValidationError("range", "empty range for '" + axis.key + "'");
    if (axis.key == "source" || axis.key == "target") {
      for (const auto& v : split(body, ',')) axis.values.push_back(trim(v));
    } else {
      for (double v : parse_values(body, axis.key)) axis.values.push_back(format_number(v));
    }
    for (const auto& a : axes)
      if (a.key == axis.key) throw ValidationError("range", "key '" + axis.key + "' given twice");
    axes.push_back(std::move(axis));
  }
  if (axes.empty()) throw ValidationError("range", "empty range");
  return axes;
}

inline std::size_t grid_size(const std::vector<RangeAxis>& axes) {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.values.size();
  return n;
}

/// Parameter tuple number `index` of the Cartesian product (last axis fastest).
inline ParamSpec grid_point(const ParamSpec& base, const std::vector<RangeAxis>& axes, std::size_t index) {
  ParamSpec spec = base;
  std::vector<std::size_t> pick(axes.size());
  for (std::size_t a = axes.size(); a-- > 0;) {
    pick[a] = index % axes[a].values.size();
    index /= axes[a].values.size();
  }
  for (std::size_t a = 0; a < axes.size(); ++a) set_param(spec, axes[a].key, axes[a].values[pick[a]]);
  return spec;
}

/// "16..4096" (doubling), "16..4096*1.5" (ratio 1.5) or "16,32,100".
inline std::vector<double> parse_grid(std::string_view text) {
  const std::string t = trim(std::string(text));
  const auto dots = t.find("..");
  if (dots != std::string::npos) {
    std::string hi = t.substr(dots + 2);
    double ratio = 2;
    if (const auto star = hi.find('*'); star != std::string::npos) {
      ratio = parse_number(hi.substr(star + 1), "grid");
      hi = hi.substr(0, star);
    }
    return geometric_grid(parse_number(t.substr(0, dots), "grid"), parse_number(hi, "grid"), ratio);
  }
  std::vector<double> out;
  for (const auto& tok : split(t, ',')) {
    const double v = parse_number(tok, "grid");
    if (!(v >= 1) || v != std::floor(v) || !std::isfinite(v))
      throw ValidationError("grid", "grid points must be integers >= 1, got '" + trim(tok) + "'");
    if (!out.empty() && !(v > out.back())) throw ValidationError("grid", "grid must be strictly increasing");
    out.push_back(v);
  }
  return out;
}

inline WidthKind parse_kind(const std::string& s) {
  for (auto k : kAllKinds)
    if (s == to_string(k)) return k;
  if (s == "a") return WidthKind::approximation;
  if (s == "c" || s == "g") return WidthKind::gelfand;
  if (s == "d" || s == "k") return WidthKind::kolmogorov;
  throw ValidationError("kind", "unknown width kind '" + s + "'");
}

template <class Enum, std::size_t N>
Enum enum_from_string(const std::string& s, const std::array<Enum, N>& all, const char* field) {
  for (auto e : all)
    if (s == to_string(e)) return e;
  throw ValidationError(field, "unknown value '" + s + "'");
}

// ---------------------------------------------------------------- JSON: params

inline void to_json(json& j, const EmbeddingParams& p) {
  j = json{{"s1", number_to_json(p.s1)}, {"s2", number_to_json(p.s2)}, {"p1", number_to_json(p.p1)},
           {"q1", number_to_json(p.q1)}, {"p2", number_to_json(p.p2)}, {"q2", number_to_json(p.q2)},
           {"alpha", number_to_json(p.alpha)}, {"d", p.d}, {"source", to_string(p.source_type)},
           {"target", to_string(p.target_type)}};
}

inline void from_json(const json& j, EmbeddingParams& p) {
  p.s1 = number_from_json(j.at("s1"));
  p.s2 = number_from_json(j.at("s2"));
  p.p1 = number_from_json(j.at("p1"));
  p.q1 = number_from_json(j.at("q1"));
  p.p2 = number_from_json(j.at("p2"));
  p.q2 = number_from_json(j.at("q2"));
  p.alpha = number_from_json(j.at("alpha"));
  p.d = j.at("d").get<int>();
  p.source_type = parse_space_type(j.at("source").get<std::string>(), "source");
  p.target_type = parse_space_type(j.at("target").get<std::string>(), "target");
}

inline void to_json(json& j, const DerivedQuantities& q) {
  j = json{{"delta", number_to_json(q.delta)},     {"mu", number_to_json(q.mu)},
           {"inv_p_tilde", number_to_json(q.inv_p_tilde)}, {"p_tilde", number_to_json(q.p_tilde)},
           {"theta", number_to_json(q.theta)},     {"theta1", number_to_json(q.theta1)},
           {"t", number_to_json(q.t)},             {"p1_conj", number_to_json(q.p1_conj)},
           {"p2_conj", number_to_json(q.p2_conj)}};
}

inline void from_json(const json& j, DerivedQuantities& q) {
  q.delta = number_from_json(j.at("delta"));
  q.mu = number_from_json(j.at("mu"));
  q.inv_p_tilde = number_from_json(j.at("inv_p_tilde"));
  q.p_tilde = number_from_json(j.at("p_tilde"));
  q.theta = number_from_json(j.at("theta"));
  q.theta1 = number_from_json(j.at("theta1"));
  q.t = number_from_json(j.at("t"));
  q.p1_conj = number_from_json(j.at("p1_conj"));
  q.p2_conj = number_from_json(j.at("p2_conj"));
}

// ---------------------------------------------------------------- JSON: classification

inline constexpr std::array<NotCoveredReason, 4> kAllReasons = {
    NotCoveredReason::limiting, NotCoveredReason::boundary, NotCoveredReason::outside_parameter_range,
    NotCoveredReason::not_compact};
inline constexpr std::array<WidthPair, 3> kAllPairs = {WidthPair::a_c, WidthPair::a_d, WidthPair::c_d};

inline json exponent_to_json(const ExponentResult& r) {
  if (const auto* d = std::get_if<DecayExponent>(&r))
    return json{{"kappa", number_to_json(d->kappa)}, {"case", d->case_label}};
  return json{{"not_covered", to_string(std::get<NotCovered>(r).reason)}};
}

inline ExponentResult exponent_from_json(const json& j) {
  if (j.contains("not_covered"))
    return NotCovered{enum_from_string(j.at("not_covered").get<std::string>(), kAllReasons, "not_covered")};
  return DecayExponent{number_from_json(j.at("kappa")), j.at("case").get<std::string>()};
}

/// "K(i)" or "NotCovered(boundary)"
inline std::string exponent_label(const ExponentResult& r) {
  if (const auto* d = std::get_if<DecayExponent>(&r)) return d->case_label;
  return std::string("NotCovered(") + to_string(std::get<NotCovered>(r).reason) + ")";
}

inline void to_json(json& j, const WidthComparison& c) {
  j = json{{"holds", json::array()}, {"omitted", json::array()}};
  for (const auto& e : c.holds) j["holds"].push_back({{"pair", to_string(e.pair)}, {"sub_case", e.sub_case}});
  for (const auto& e : c.omitted) j["omitted"].push_back({{"pair", to_string(e.pair)}, {"reason", e.reason}});
}

inline void from_json(const json& j, WidthComparison& c) {
  c = {};
  for (const auto& e : j.at("holds"))
    c.holds.push_back({enum_from_string(e.at("pair").get<std::string>(), kAllPairs, "pair"),
                       e.at("sub_case").get<std::string>()});
  for (const auto& e : j.at("omitted"))
    c.omitted.push_back({enum_from_string(e.at("pair").get<std::string>(), kAllPairs, "pair"),
                         e.at("reason").get<std::string>()});
}

inline void to_json(json& j, const Classification& c) {
  j = json{{"params", c.params},
           {"derived", c.derived},
           {"compact", c.compact},
           {"limiting", c.limiting},
           {"approximation", exponent_to_json(c.approximation)},
           {"gelfand", exponent_to_json(c.gelfand)},
           {"kolmogorov", exponent_to_json(c.kolmogorov)},
           {"equivalences", c.equivalences}};
}

inline void from_json(const json& j, Classification& c) {
  c.params = j.at("params").get<EmbeddingParams>();
  c.derived = j.at("derived").get<DerivedQuantities>();
  c.compact = j.at("compact").get<bool>();
  c.limiting = j.at("limiting").get<bool>();
  c.approximation = exponent_from_json(j.at("approximation"));
  c.gelfand = exponent_from_json(j.at("gelfand"));
  c.kolmogorov = exponent_from_json(j.at("kolmogorov"));
  c.equivalences = j.at("equivalences").get<WidthComparison>();
}

// ---------------------------------------------------------------- JSON: widths

inline constexpr std::array<WidthMethod, 5> kAllMethods = {
    WidthMethod::exact_formula, WidthMethod::envelope, WidthMethod::oracle_spectral,
    WidthMethod::oracle_subspace, WidthMethod::reduction};

inline void to_json(json& j, const FiniteEmbedding& e) {
  j = json{{"N", e.N}, {"p_src", number_to_json(e.p_src)}, {"p_dst", number_to_json(e.p_dst)},
           {"scale", number_to_json(e.scale)}};
}

inline void from_json(const json& j, FiniteEmbedding& e) {
  e.N = j.at("N").get<std::size_t>();
  e.p_src = number_from_json(j.at("p_src"));
  e.p_dst = number_from_json(j.at("p_dst"));
  e.scale = number_from_json(j.at("scale"));
}

inline void to_json(json& j, const WidthResult& r) {
  j = json{{"kind", to_string(r.kind)}, {"n", r.n}, {"method", to_string(r.method)}};
  if (r.is_exact()) {
    j["value"] = number_to_json(r.upper());
  } else {
    j["lower"] = number_to_json(r.lower());
    j["upper"] = number_to_json(r.upper());
  }
  j["constants_undetermined"] = r.constants_undetermined();
}

inline void from_json(const json& j, WidthResult& r) {
  r.kind = parse_kind(j.at("kind").get<std::string>());
  r.n = j.at("n").get<std::size_t>();
  r.method = enum_from_string(j.at("method").get<std::string>(), kAllMethods, "method");
  if (j.contains("value"))
    r.value = number_from_json(j.at("value"));
  else
    r.value = Envelope{number_from_json(j.at("lower")), number_from_json(j.at("upper")),
                       j.at("constants_undetermined").get<bool>()};
}

// ---------------------------------------------------------------- JSON: blocks and fits

inline json blocks_to_json(const std::vector<Block>& blocks, int M) {
  json out = json::array();
  for (const auto& b : blocks)
    out.push_back({{"j", b.j}, {"i", b.i}, {"dim", number_to_json(b.dim)}, {"sigma", number_to_json(b.sigma)},
                   {"part", b.level_sum() <= M ? "P" : "Q"}});
  return out;
}

inline void to_json(json& j, const IdealNormEstimate& e) {
  j = json{{"r", number_to_json(e.r)}, {"kind", to_string(e.kind)}, {"value", number_to_json(e.value)},
           {"argmax_n", number_to_json(e.argmax_n)}, {"rho", number_to_json(e.rho)}};
}

inline void from_json(const json& j, IdealNormEstimate& e) {
  e.r = number_from_json(j.at("r"));
  e.kind = parse_kind(j.at("kind").get<std::string>());
  e.value = number_from_json(j.at("value"));
  e.argmax_n = number_from_json(j.at("argmax_n"));
  e.rho = number_from_json(j.at("rho"));
}

inline void to_json(json& j, const RateFit& f) {
  json samples = json::array();
  for (const auto& s : f.samples) samples.push_back({number_to_json(s.n), number_to_json(s.bound)});
  const auto& t = f.truncation;
  j = json{{"kind", to_string(f.kind)},
           {"case", f.case_label},
           {"predicted_kappa", number_to_json(f.predicted_kappa)},
           {"slope", number_to_json(f.slope)},
           {"intercept", number_to_json(f.intercept)},
           {"max_residual", number_to_json(f.max_residual)},
           {"tolerance", number_to_json(f.tolerance)},
           {"verdict", f.pass ? "pass" : "fail"},
           {"shape_only", f.shape_only},
           {"constants_undetermined", f.shape_only},
           {"combiner", to_string(f.combiner)},
           {"combination_exponent", number_to_json(f.combination_exponent)},
           {"samples", samples},
           {"truncation",
            {{"levels", t.levels},
             {"tail_bound", number_to_json(t.tail_bound)},
             {"tail_share", number_to_json(t.tail_share)},
             {"cutoff", t.cutoff},
             {"beta", number_to_json(t.beta)},
             {"remainder", t.remainder}}}};
}

inline void from_json(const json& j, RateFit& f) {
  f.kind = parse_kind(j.at("kind").get<std::string>());
  f.case_label = j.at("case").get<std::string>();
  f.predicted_kappa = number_from_json(j.at("predicted_kappa"));
  f.slope = number_from_json(j.at("slope"));
  f.intercept = number_from_json(j.at("intercept"));
  f.max_residual = number_from_json(j.at("max_residual"));
  f.tolerance = number_from_json(j.at("tolerance"));
  f.pass = j.at("verdict").get<std::string>() == "pass";
  f.shape_only = j.at("shape_only").get<bool>();
  f.combiner = enum_from_string(j.at("combiner").get<std::string>(),
                                std::array{Combiner::direct_sum, Combiner::rho_sum}, "combiner");
  f.combination_exponent = number_from_json(j.at("combination_exponent"));
  f.samples.clear();
  for (const auto& s : j.at("samples")) f.samples.push_back({number_from_json(s.at(0)), number_from_json(s.at(1))});
  const auto& t = j.at("truncation");
  f.truncation.levels = t.at("levels").get<int>();
  f.truncation.tail_bound = number_from_json(t.at("tail_bound"));
  f.truncation.tail_share = number_from_json(t.at("tail_share"));
  f.truncation.cutoff = t.at("cutoff").get<int>();
  f.truncation.beta = number_from_json(t.at("beta"));
  f.truncation.remainder = t.at("remainder").get<IdealNormEstimate>();
}

// ---------------------------------------------------------------- CSV

/// Bounds table: n, bound, method, constants_undetermined.
inline std::string bounds_csv(const std::vector<std::pair<double, double>>& rows, const std::string& method,
                              bool constants_undetermined) {
  std::string out(kCsvHeader);
  out += "\nn,bound,method,constants_undetermined\n";
  for (const auto& [n, b] : rows)
    out += format_number(n) + "," + format_number(b) + "," + method + "," +
           (constants_undetermined ? "true" : "false") + "\n";
  return out;
}

inline const char* kSweepCsvColumns =
    "index,s1,s2,p1,q1,p2,q2,alpha,d,source,target,compact,kappa_approximation,case_approximation,"
    "kappa_gelfand,case_gelfand,kappa_kolmogorov,case_kolmogorov,equivalences";

inline std::string sweep_csv_row(std::size_t index, const Classification& c) {
  const auto& p = c.params;
  const auto kappa = [](const ExponentResult& r) {
    return covered(r) ? format_number(std::get<DecayExponent>(r).kappa) : std::string();
  };
  std::string eq;
  for (const auto& e : c.equivalences.holds) eq += (eq.empty() ? "" : " ") + std::string(to_string(e.pair)) + e.sub_case;
  std::string row = std::to_string(index);
  for (double v : {p.s1, p.s2, p.p1, p.q1, p.p2, p.q2, p.alpha}) row += "," + format_number(v);
  row += "," + std::to_string(p.d) + "," + to_string(p.source_type) + "," + to_string(p.target_type);
  row += std::string(",") + (c.compact ? "true" : "false");
  for (const auto* r : {&c.approximation, &c.gelfand, &c.kolmogorov}) row += "," + kappa(*r) + "," + exponent_label(*r);
  row += "," + eq;
  return row;
}

}  // namespace snum

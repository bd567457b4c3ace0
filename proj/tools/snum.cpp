// snum: decay exponents of weighted Besov embeddings, finite-dimensional
// widths and rate checks from the command line.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "snum/snum.hpp"

#ifndef SNUM_VERSION
#define SNUM_VERSION "0.0.0"
#endif

using namespace snum;

namespace {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2, kIo = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::string params;
  std::string range;
  std::string grid;
  std::string n;
  std::string kind = "all";
  std::string method = "auto";
  std::string combiner = "direct";
  std::string levels = "4";
  std::string format = "json";
  std::string out;
  double tol = 0.1;
  double lambda = 0.5;
  std::uint64_t seed = 0;
  std::size_t starts = 64;
  int max_level = 14;
  int cutoff = -1;
  bool allow_envelope = false;
  bool timing = false;
};

/// SNUM_WORKERS, else the hardware concurrency capped at 8.
std::size_t worker_count() {
  if (const char* env = std::getenv("SNUM_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw UsageError("SNUM_WORKERS must be a positive integer");
    return static_cast<std::size_t>(v);
  }
  return std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 8);
}

/// Everything that determines the output, and nothing else: output path and
/// timing stay out so that reruns compare byte for byte.
json config_echo(const RunConfig& c) {
  json j{{"command", c.command}, {"format", c.format}, {"seed", c.seed}};
  if (!c.params.empty()) j["params"] = c.params;
  if (!c.range.empty()) j["range"] = c.range;
  if (c.command == "widths") {
    j["kind"] = c.kind;
    j["method"] = c.method;
    j["lambda"] = c.lambda;
    j["starts"] = c.starts;
    if (!c.n.empty()) j["n"] = c.n;
  }
  if (c.command == "blocks") {
    j["levels"] = c.levels;
    j["cutoff"] = c.cutoff;
  }
  if (c.command == "verify") {
    j["kind"] = c.kind;
    j["grid"] = c.grid.empty() ? "16..4096" : c.grid;
    j["tol"] = c.tol;
    j["max_level"] = c.max_level;
    j["cutoff"] = c.cutoff;
    j["combiner"] = c.combiner;
    j["lambda"] = c.lambda;
    j["allow_envelope"] = c.allow_envelope;
  }
  return j;
}

json report_header(const RunConfig& c) {
  return json{{"tool", "snum"},
              {"version", SNUM_VERSION},
              {"command", c.command},
              {"config", config_echo(c)},
              {"notice", kConstantsNotice}};
}

/// Output file, or stdout when no path is given. Opened before any work.
class Sink {
 public:
  explicit Sink(const std::string& path) : path_(path) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (!*file_) throw IoError("cannot open '" + path + "' for writing");
  }

  void write(const std::string& s) {
    stream() << s;
    stream().flush();
    if (!stream()) throw IoError("write to '" + (path_.empty() ? std::string("stdout") : path_) + "' failed");
  }

  const std::string& path() const { return path_; }

 private:
  std::ostream& stream() { return file_ ? static_cast<std::ostream&>(*file_) : std::cout; }

  std::string path_;
  std::unique_ptr<std::ofstream> file_;
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << content;
  if (!f) throw IoError("write to '" + path + "' failed");
}

std::vector<WidthKind> parse_kinds(const std::string& text) {
  if (text == "all") return {kAllKinds.begin(), kAllKinds.end()};
  std::vector<WidthKind> out;
  for (const auto& tok : split(text, ',')) out.push_back(parse_kind(trim(tok)));
  return out;
}

std::string finish(json report, const RunConfig& c, std::chrono::steady_clock::time_point start) {
  if (c.timing)
    report["timing"] = {
        {"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};
  return report.dump(2) + "\n";
}

// ---------------------------------------------------------------- classify

std::vector<ParamSpec> parameter_tuples(const RunConfig& c) {
  const ParamSpec base = c.params.empty() ? ParamSpec{} : parse_param_spec(c.params);
  if (c.range.empty()) {
    if (c.params.empty()) throw UsageError("--params or --range is required");
    return {base};
  }
  const auto axes = parse_ranges(c.range);
  std::vector<ParamSpec> out;
  for (std::size_t k = 0, n = grid_size(axes); k < n; ++k) out.push_back(grid_point(base, axes, k));
  return out;
}

std::string csv_classification_header() { return std::string(kCsvHeader) + "\n" + kSweepCsvColumns + "\n"; }

int run_classify(const RunConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  const auto tuples = parameter_tuples(c);
  Sink sink(c.out);
  std::vector<Classification> items;
  for (const auto& t : tuples) {
    const auto p = t.resolve();
    validate(p);
    items.push_back(classify(p));
  }
  if (c.format == "csv") {
    std::string out = csv_classification_header();
    for (std::size_t k = 0; k < items.size(); ++k) out += sweep_csv_row(k, items[k]) + "\n";
    sink.write(out);
  } else {
    json report = report_header(c);
    report["items"] = items;
    sink.write(finish(std::move(report), c, start));
  }
  return kOk;
}

// ---------------------------------------------------------------- sweep

struct SweepRow {
  std::string text;
  bool ok = true;
};

SweepRow sweep_row(const RunConfig& c, std::size_t index, const ParamSpec& spec) {
  try {
    const auto p = spec.resolve();
    validate(p);
    const auto cls = classify(p);
    if (c.format == "csv") return {sweep_csv_row(index, cls) + "\n", true};
    return {json{{"index", index}, {"classification", cls}}.dump() + "\n", true};
  } catch (const ValidationError& e) {
    if (c.format == "csv") return {"# row " + std::to_string(index) + " error: " + e.what() + "\n", false};
    return {json{{"index", index}, {"error", e.what()}}.dump() + "\n", false};
  }
}

int run_sweep(const RunConfig& c) {
  if (c.range.empty()) throw UsageError("sweep needs --range");
  const ParamSpec base = c.params.empty() ? ParamSpec{} : parse_param_spec(c.params);
  const auto axes = parse_ranges(c.range);
  const std::size_t total = grid_size(axes);
  const std::size_t workers = worker_count();
  Sink sink(c.out);

  if (c.format == "csv") {
    sink.write(csv_classification_header());
  } else {
    json header = report_header(c);
    header["rows"] = total;
    sink.write(header.dump() + "\n");
  }

  // Rows are computed in batches by the pool and written in grid order.
  const std::size_t batch = 256 * workers;
  bool all_ok = true;
  std::vector<SweepRow> rows;
  for (std::size_t first = 0; first < total; first += batch) {
    const std::size_t count = std::min(batch, total - first);
    rows.assign(count, {});
    const auto work = [&](std::size_t w) {
      for (std::size_t k = w; k < count; k += workers) rows[k] = sweep_row(c, first + k, grid_point(base, axes, first + k));
    };
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < std::min(workers, count); ++w) pool.emplace_back(work, w);
    work(0);
    pool.clear();
    std::string chunk;
    for (const auto& r : rows) {
      chunk += r.text;
      all_ok = all_ok && r.ok;
    }
    sink.write(chunk);
  }
  return all_ok ? kOk : kFailure;
}

// ---------------------------------------------------------------- widths

bool exact_applies(const FiniteEmbedding& e, WidthKind kind) {
  if (compare_exponents(e.p_dst, e.p_src) > 0) return false;
  return kind != WidthKind::kolmogorov || e.p_dst >= 1.0;
}

WidthResult spectral(const FiniteEmbedding& e, std::size_t n, WidthKind kind) {
  if (e.p_src != 2.0 || e.p_dst != 2.0) throw NotApplicable("spectral method needs p_src = p_dst = 2");
  return diagonal_spectral_oracle({std::vector<double>(e.N, e.scale), 2.0}, n, kind);
}

WidthResult envelope(const FiniteEmbedding& e, std::size_t n, WidthKind kind, double lambda) {
  switch (kind) {
    case WidthKind::kolmogorov: return kolmogorov_envelope(e, n);
    case WidthKind::gelfand: return gelfand_envelope(e, n);
    case WidthKind::approximation: return approximation_envelope(e, n, lambda);
  }
  throw NotApplicable("unknown width kind");
}

WidthResult compute_width(const RunConfig& c, const FiniteEmbedding& e, std::size_t n, WidthKind kind) {
  OracleOptions oracle;
  oracle.seed = c.seed;
  oracle.starts = c.starts;
  if (c.method == "exact") return exact_width_nonincreasing(e, n, kind);
  if (c.method == "envelope") return envelope(e, n, kind, c.lambda);
  if (c.method == "oracle") return subspace_search_oracle(e, n, kind, oracle);
  if (c.method == "spectral") return spectral(e, n, kind);
  // auto: exact formula, then envelope, then the subspace search
  if (exact_applies(e, kind)) return exact_width_nonincreasing(e, n, kind);
  try {
    return envelope(e, n, kind, c.lambda);
  } catch (const NotApplicable&) {
    if (kind == WidthKind::approximation || e.N > kOracleMaxDim) throw;
  }
  return subspace_search_oracle(e, n, kind, oracle);
}

std::vector<std::size_t> width_indices(const RunConfig& c, const FiniteEmbedding& e) {
  std::vector<std::size_t> out;
  if (c.n.empty()) {
    for (std::size_t n = 1; n <= e.N + 1; ++n) out.push_back(n);
    return out;
  }
  for (double v : parse_grid(c.n)) out.push_back(static_cast<std::size_t>(v));
  return out;
}

int run_widths(const RunConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  if (c.params.empty()) throw UsageError("widths needs --params N=..,p_src=..,p_dst=..[,scale=..]");
  const auto emb = parse_finite_embedding(c.params);
  const auto kinds = parse_kinds(c.kind);
  const auto indices = width_indices(c, emb);
  Sink sink(c.out);

  bool all_ok = true;
  json items = json::array();
  std::string csv(kCsvHeader);
  csv += "\nn,bound,method,constants_undetermined\n";
  for (auto kind : kinds) {
    csv += std::string("# kind=") + to_string(kind) + "\n";
    for (std::size_t n : indices) {
      try {
        const auto r = compute_width(c, emb, n, kind);
        items.push_back(r);
        csv += format_number(static_cast<double>(n)) + "," + format_number(r.upper()) + "," + to_string(r.method) +
               "," + (r.constants_undetermined() ? "true" : "false") + "\n";
      } catch (const NotApplicable& e) {
        all_ok = false;
        items.push_back({{"kind", to_string(kind)}, {"n", n}, {"error", e.what()}});
        csv += "# n=" + std::to_string(n) + " error: " + e.what() + "\n";
      }
    }
  }
  if (c.format == "csv") {
    sink.write(csv);
  } else {
    json report = report_header(c);
    report["embedding"] = emb;
    report["items"] = std::move(items);
    sink.write(finish(std::move(report), c, start));
  }
  return all_ok ? kOk : kFailure;
}

// ---------------------------------------------------------------- blocks

std::pair<int, int> parse_levels(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() > 2) throw UsageError("--levels takes J or J,I");
  const auto level = [&](const std::string& s) {
    const double v = parse_number(s, "levels");
    if (!(v >= 0) || v != std::floor(v) || v > 40) throw UsageError("--levels must be integers in [0, 40], got '" + s + "'");
    return static_cast<int>(v);
  };
  const int J = level(parts[0]);
  return {J, parts.size() == 2 ? level(parts[1]) : J};
}

int run_blocks(const RunConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  if (c.params.empty()) throw UsageError("blocks needs --params");
  const auto p = parse_params(c.params);
  const auto [J, I] = parse_levels(c.levels);
  const int M = c.cutoff < 0 ? J + I : c.cutoff;
  const auto blocks = build_blocks({p, J, I});
  const auto [P, Q] = split_PQ(blocks, M);
  Sink sink(c.out);

  if (c.format == "csv") {
    std::string out(kCsvHeader);
    out += "\nj,i,dim,sigma,part\n";
    for (const auto& b : blocks)
      out += std::to_string(b.j) + "," + std::to_string(b.i) + "," + format_number(b.dim) + "," +
             format_number(b.sigma) + "," + (b.level_sum() <= M ? "P" : "Q") + "\n";
    sink.write(out);
    return kOk;
  }
  double p_dim = 0, q_dim = 0;
  for (const auto& b : P) p_dim += b.dim;
  for (const auto& b : Q) q_dim += b.dim;
  json report = report_header(c);
  report["params"] = p;
  report["model"] = {{"J", J}, {"I", I}, {"M", M}, {"delta", number_to_json(delta_of(p))}};
  report["items"] = blocks_to_json(blocks, M);
  report["totals"] = {{"P_blocks", P.size()}, {"Q_blocks", Q.size()}, {"P_dim", p_dim}, {"Q_dim", q_dim}};
  sink.write(finish(std::move(report), c, start));
  return kOk;
}

// ---------------------------------------------------------------- verify

std::string bounds_path(const std::string& out) {
  std::filesystem::path p(out);
  p.replace_extension();
  return p.string() + ".bounds.csv";
}

int run_verify(const RunConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  if (c.params.empty()) throw UsageError("verify needs --params");
  const auto p = parse_params(c.params);
  const auto grid = parse_grid(c.grid.empty() ? "16..4096" : c.grid);
  if (grid.size() < 2) throw UsageError("--grid needs at least two points");

  VerifyOptions opt;
  opt.tolerance = c.tol;
  opt.max_level = c.max_level;
  opt.cutoff = c.cutoff;
  opt.lambda = c.lambda;
  opt.allow_envelope = c.allow_envelope;
  opt.combiner = c.combiner == "rho" ? Combiner::rho_sum : Combiner::direct_sum;
  opt.workers = worker_count();
  Sink sink(c.out);

  bool all_ok = true;
  json items = json::array();
  std::string csv(kCsvHeader);
  csv += "\nn,bound,method,constants_undetermined\n";
  for (auto kind : parse_kinds(c.kind)) {
    csv += std::string("# kind=") + to_string(kind) + "\n";
    try {
      const auto fit = verify_exponent(p, kind, grid, opt);
      items.push_back(fit);
      for (const auto& s : fit.samples)
        csv += format_number(s.n) + "," + format_number(s.bound) + ",assembled," +
               (fit.shape_only ? "true" : "false") + "\n";
      std::cerr << to_string(kind) << ": slope " << format_number(fit.slope) << " vs -"
                << format_number(fit.predicted_kappa) << " (" << fit.case_label << "): "
                << (fit.pass ? "pass" : "fail") << "\n";
      all_ok = all_ok && fit.pass;
    } catch (const VerificationRefused& e) {
      all_ok = false;
      items.push_back({{"kind", to_string(kind)}, {"error", e.what()}, {"verdict", "refused"}});
      std::cerr << to_string(kind) << ": refused: " << e.what() << "\n";
    } catch (const TruncationError& e) {
      all_ok = false;
      items.push_back({{"kind", to_string(kind)}, {"error", e.what()}, {"verdict", "fail"}});
      std::cerr << to_string(kind) << ": failed: " << e.what() << "\n";
    }
  }

  if (c.format == "csv") {
    sink.write(csv);
  } else {
    json report = report_header(c);
    report["items"] = std::move(items);
    sink.write(finish(std::move(report), c, start));
    if (!sink.path().empty()) write_file(bounds_path(sink.path()), csv);
  }
  return all_ok ? kOk : kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"Decay exponents, finite-dimensional widths and rate checks for weighted Besov embeddings.\n"
               "Infinite exponents are written as inf."};
  app.set_config("--config", "", "key=value file; command-line flags override it");
  app.get_config_formatter_base()->arrayDelimiter('\x1f');
  app.require_subcommand(1, 1);

  app.add_option("--params", cfg.params, "s1=..,s2=..,p1=..,q1=..,p2=..,q2=..,alpha=..,d=..[,delta=..] "
                                         "(widths: N=..,p_src=..,p_dst=..,scale=..)");
  app.add_option("--range", cfg.range, "swept keys, e.g. p1=0.5,1,inf;p2=1:3:0.5");
  app.add_option("--grid", cfg.grid, "verify grid: 16..4096, 16..4096*1.5 or a list");
  app.add_option("--n", cfg.n, "widths indices, same syntax as --grid (default 1..N+1)");
  app.add_option("--tol", cfg.tol, "slope tolerance for verify")
      ->check(CLI::Validator(
          [](std::string& v) {
            double t = 0;
            return CLI::detail::lexical_cast(v, t) && t > 0 && std::isfinite(t) ? std::string()
                                                                                : "tolerance must be > 0, got " + v;
          },
          "TOL > 0"));
  app.add_option("--seed", cfg.seed, "seed for randomized searches");
  app.add_option("--out", cfg.out, "output path (default stdout)");
  app.add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--kind", cfg.kind, "approximation, gelfand, kolmogorov, a comma list, or all");
  app.add_option("--method", cfg.method, "widths method")
      ->check(CLI::IsMember({"auto", "exact", "envelope", "oracle", "spectral"}));
  app.add_option("--lambda", cfg.lambda, "approximation envelope switch point N^lambda")->check(CLI::Range(0.0, 1.0));
  app.add_option("--starts", cfg.starts, "subspace search starts")->check(CLI::PositiveNumber);
  app.add_option("--max-level", cfg.max_level, "largest truncation level J = I for verify")->check(CLI::Range(0, 40));
  app.add_option("--cutoff", cfg.cutoff, "P/Q cutoff M");
  app.add_option("--levels", cfg.levels, "blocks: J or J,I");
  app.add_option("--combiner", cfg.combiner, "block combination: direct or rho")
      ->check(CLI::IsMember({"direct", "rho"}));
  app.add_flag("--allow-envelope", cfg.allow_envelope, "let verify use envelope blocks (shape only)");
  app.add_flag("--timing", cfg.timing, "add wall-clock timing to reports");

  const std::pair<const char*, const char*> commands[] = {
      {"classify", "decay exponents and case labels per parameter tuple"},
      {"widths", "s-numbers of a finite-dimensional identity"},
      {"blocks", "block table of the sequence-space model"},
      {"verify", "fit the assembled upper bound against the predicted exponent"},
      {"sweep", "classification rows over a parameter grid"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::FileError& e) {
    std::cerr << "snum: " << e.what() << "\n";
    return kIo;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  cfg.command = app.get_subcommands().front()->get_name();

  try {
    if (cfg.cutoff < -1) throw UsageError("--cutoff must be >= 0");
    if (cfg.command == "classify") return run_classify(cfg);
    if (cfg.command == "sweep") return run_sweep(cfg);
    if (cfg.command == "widths") return run_widths(cfg);
    if (cfg.command == "blocks") return run_blocks(cfg);
    return run_verify(cfg);
  } catch (const UsageError& e) {
    std::cerr << "snum: usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ValidationError& e) {
    std::cerr << "snum: usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "snum: I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "snum: " << e.what() << "\n";
    return kFailure;
  }
}

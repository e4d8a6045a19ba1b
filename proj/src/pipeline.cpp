#include "lacclean/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lacclean/errors.hpp"
#include "lacclean/report.hpp"

namespace lacclean {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Input file missing or unreadable.
class InputUnavailable : public Error
{
public:
  using Error::Error;
};

/// A MalformedRow tagged with the file it came from.
class FileFormatError : public Error
{
public:
  using Error::Error;
};

std::string read_file(const fs::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputUnavailable(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw InputUnavailable(fmt::format("cannot read '{}'", path.string()));
  return ss.str();
}

template <typename Fn>
auto parse_file(const fs::path& path, Fn&& parse)
{
  std::istringstream in(read_file(path));
  try {
    return parse(in);
  } catch (const MalformedRow& e) {
    throw FileFormatError(fmt::format("{}:{}: {}", path.string(), e.line(), e.reason()));
  }
}

json synth_to_json(const SynthSpec& s)
{
  const auto& t = s.topology;
  json j{{"lacs", t.lac_count},
         {"cells_per_lac", t.cells_per_lac},
         {"cell_radius", t.cell_radius_m},
         {"region", {t.region.min_lat, t.region.max_lat, t.region.min_lon, t.region.max_lon}},
         {"mcc", t.mcc},
         {"mnc", t.mnc},
         {"first_lac", t.first_lac},
         {"outlier_rate", s.outliers.rate},
         {"displacement_min", s.outliers.displacement_min_m},
         {"displacement_max", s.outliers.displacement_max_m},
         {"seed", s.seed},
         {"strip_operator", s.strip_operator}};
  j["events"] = s.events ? json(*s.events) : json(nullptr);
  return j;
}

template <typename T>
T get_as(const json& j, std::string_view key)
{
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw InvalidArgument(fmt::format("config key '{}' has the wrong type", key));
  }
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> known, std::string_view where)
{
  if (!j.is_object()) throw InvalidArgument(fmt::format("{} must be a JSON object", where));
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw InvalidArgument(fmt::format("unknown {} key '{}'", where, key));
  }
}

SynthSpec synth_from_json(const json& j)
{
  reject_unknown(j,
                 {"lacs", "cells_per_lac", "cell_radius", "region", "mcc", "mnc", "first_lac", "outlier_rate",
                  "displacement_min", "displacement_max", "seed", "strip_operator", "events", "out"},
                 "synth");
  SynthSpec s;
  auto& t = s.topology;
  if (j.contains("lacs")) t.lac_count = get_as<std::size_t>(j["lacs"], "lacs");
  if (j.contains("cells_per_lac")) t.cells_per_lac = get_as<std::size_t>(j["cells_per_lac"], "cells_per_lac");
  if (j.contains("cell_radius")) t.cell_radius_m = get_as<double>(j["cell_radius"], "cell_radius");
  if (j.contains("region")) {
    const auto r = get_as<std::vector<double>>(j["region"], "region");
    if (r.size() != 4) throw InvalidArgument("region needs min_lat max_lat min_lon max_lon");
    t.region = {r[0], r[1], r[2], r[3]};
  }
  if (j.contains("mcc")) t.mcc = get_as<std::uint16_t>(j["mcc"], "mcc");
  if (j.contains("mnc")) t.mnc = get_as<std::uint16_t>(j["mnc"], "mnc");
  if (j.contains("first_lac")) t.first_lac = get_as<std::uint32_t>(j["first_lac"], "first_lac");
  if (j.contains("outlier_rate")) s.outliers.rate = get_as<double>(j["outlier_rate"], "outlier_rate");
  if (j.contains("displacement_min"))
    s.outliers.displacement_min_m = get_as<double>(j["displacement_min"], "displacement_min");
  if (j.contains("displacement_max"))
    s.outliers.displacement_max_m = get_as<double>(j["displacement_max"], "displacement_max");
  if (j.contains("seed")) s.seed = get_as<std::uint64_t>(j["seed"], "seed");
  if (j.contains("strip_operator")) s.strip_operator = get_as<bool>(j["strip_operator"], "strip_operator");
  if (j.contains("events") && !j["events"].is_null()) s.events = get_as<std::size_t>(j["events"], "events");
  return s;
}

json config_to_json(const PipelineConfig& c)
{
  json j;
  j["trace"] = c.trace ? json(c.trace->string()) : json(nullptr);
  j["cell_db"] = c.cell_db ? json(c.cell_db->string()) : json(nullptr);
  j["synth"] = c.synth ? synth_to_json(*c.synth) : json(nullptr);
  j["out"] = c.out.string();
  j["linkage"] = to_string(c.params.linkage);
  j["metric"] = to_string(c.params.metric);
  j["cutoff"] = c.params.cutoff;
  j["min_size"] = c.params.min_size;
  j["policy"] = to_string(c.policy);
  j["lenient"] = c.strictness == Strictness::lenient;
  j["window"] = c.window;
  j["threads"] = c.threads;
  return j;
}

PipelineConfig config_from_json(const json& j)
{
  reject_unknown(j,
                 {"trace", "cell_db", "synth", "out", "linkage", "metric", "cutoff", "min_size", "policy", "lenient",
                  "window", "threads", "record_timings"},
                 "config");
  PipelineConfig c;
  auto str = [&](const char* key) -> std::optional<std::string> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return get_as<std::string>(j[key], key);
  };
  if (auto v = str("trace")) c.trace = *v;
  if (auto v = str("cell_db")) c.cell_db = *v;
  if (j.contains("synth") && !j["synth"].is_null()) c.synth = synth_from_json(j["synth"]);
  if (auto v = str("out")) c.out = *v;
  if (auto v = str("linkage")) c.params.linkage = parse_linkage(*v);
  if (auto v = str("metric")) c.params.metric = parse_metric(*v);
  c.params.cutoff = j.contains("cutoff") && !j["cutoff"].is_null() ? get_as<double>(j["cutoff"], "cutoff")
                                                                   : default_cutoff(c.params.metric);
  if (j.contains("min_size")) c.params.min_size = get_as<std::size_t>(j["min_size"], "min_size");
  if (auto v = str("policy")) c.policy = parse_policy(*v);
  if (j.contains("lenient") && get_as<bool>(j["lenient"], "lenient")) c.strictness = Strictness::lenient;
  if (j.contains("window")) c.window = get_as<std::size_t>(j["window"], "window");
  if (j.contains("threads")) c.threads = get_as<std::size_t>(j["threads"], "threads");
  if (j.contains("record_timings")) c.record_timings = get_as<bool>(j["record_timings"], "record_timings");

  validate(c.params);
  if (c.window < 1) throw InvalidArgument("window must be at least 1");
  if (c.out.empty()) throw InvalidArgument("an output directory (--out) is required");
  if (c.trace.has_value() != c.cell_db.has_value())
    throw InvalidArgument("--trace and --cell-db must be given together");
  if (!c.trace && !c.synth) throw InvalidArgument("need --trace and --cell-db, or a synth section in --config");
  return c;
}

json load_config_file(const fs::path& path)
{
  const auto text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(fmt::format("config '{}' is not valid JSON: {}", path.string(), e.what()));
  }
  // A run manifest carries its configuration under "config".
  if (j.is_object() && j.contains("tool") && j.contains("config")) return j["config"];
  return j;
}

std::string score_json(const DetectionScore& s)
{
  json j{{"precision", s.precision},
         {"recall", s.recall},
         {"flagged", s.flagged},
         {"true_outliers", s.true_outliers},
         {"true_positives", s.true_positives}};
  return j.dump(2) + "\n";
}

std::vector<TraceEvent> synth_events(const SyntheticWorld& world, const SynthSpec& spec)
{
  TraceOptions opts;
  opts.strip_operator = spec.strip_operator;
  return generate_trace(world, spec.events.value_or(10 * world.cell_count()), spec.seed + 2, opts);
}

SyntheticWorld synth_world(const SynthSpec& spec)
{
  return inject_outliers(generate_topology(spec.topology, spec.seed), spec.outliers, spec.seed + 1);
}

json cells_json(std::span<const ResolvedCell> cells)
{
  json a = json::array();
  for (const auto& c : cells) a.push_back(to_string(c.cell));
  return a;
}

} // namespace

double default_cutoff(DistanceMetric metric)
{
  constexpr double kCutoffM = 35000.0;
  if (metric == DistanceMetric::degrees_euclid) return rad_to_deg(kCutoffM / kEarthRadiusM<double>);
  return kCutoffM;
}

void write_file_atomic(const fs::path& path, std::string_view content)
{
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputUnavailable(fmt::format("cannot write '{}'", tmp.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw InputUnavailable(fmt::format("short write to '{}'", tmp.string()));
  }
  fs::rename(tmp, path);
}

void run_pipeline(const PipelineConfig& config, std::ostream& log)
{
  using clock = std::chrono::steady_clock;
  json timings = json::object();
  auto stamp = clock::now();
  auto lap = [&](const char* name) {
    const auto now = clock::now();
    timings[name] = std::chrono::duration<double, std::milli>(now - stamp).count();
    stamp = now;
  };

  std::vector<TraceEvent> events;
  CellDatabase db;
  std::size_t skipped = 0;
  if (config.trace) {
    auto parsed = parse_file(*config.trace, [&](std::istream& in) { return parse_trace(in, config.strictness); });
    events = std::move(parsed.events);
    skipped = parsed.skipped_rows;
    db = parse_file(*config.cell_db, [](std::istream& in) { return load_cell_db(in); });
  } else {
    const auto world = synth_world(*config.synth);
    db = world_database(world);
    events = synth_events(world, *config.synth);
  }
  lap("load_ms");

  const auto cells = extract_unique_cells(events);
  const auto resolution = resolve_all(db, cells, config.policy);
  lap("resolve_ms");
  const auto result = clean_dataset(resolution.resolved, config.params, config.threads);
  lap("clean_ms");

  const auto retained = retained_cells(result);
  std::vector<CellIdentity> resolved_ids;
  std::vector<CellIdentity> retained_ids;
  for (const auto& c : resolution.resolved) resolved_ids.push_back(c.cell);
  for (const auto& c : retained) retained_ids.push_back(c.cell);
  const auto retention = retention_stats(cells.size(), resolution.stats.resolved, retained.size());
  const auto coverage =
      coverage_series(events, CellSet(std::move(resolved_ids)), CellSet(std::move(retained_ids)), config.window);

  json diagnostics;
  diagnostics["trace_events"] = events.size();
  diagnostics["skipped_rows"] = skipped;
  diagnostics["database_rows"] = db.size();
  diagnostics["resolution"] = {{"total", resolution.stats.total},
                               {"resolved", resolution.stats.resolved},
                               {"unresolved", resolution.stats.unresolved},
                               {"wildcard_ambiguous", resolution.stats.wildcard_ambiguous}};
  json unresolved = json::array();
  for (const auto& c : resolution.unresolved) unresolved.push_back(to_string(c));
  diagnostics["unresolved_cells"] = std::move(unresolved);
  const auto& s = result.stats;
  diagnostics["clean"] = {{"lacs", s.lacs},
                          {"ok_lacs", s.ok_lacs},
                          {"insufficient_lacs", s.insufficient_lacs},
                          {"input_cells", s.input_cells},
                          {"retained", s.retained},
                          {"outliers", s.outliers},
                          {"insufficient_cells", s.insufficient_cells},
                          {"discarded_dense_clusters", s.discarded_dense_clusters}};
  json lacs = json::array();
  for (const auto& l : result.lacs) {
    json dense = json::array();
    for (const auto& c : l.discarded_dense) dense.push_back({{"size", c.size()}, {"cells", cells_json(c)}});
    lacs.push_back({{"lac", l.lac},
                    {"status", to_string(l.status)},
                    {"representative", l.representative.size()},
                    {"outliers", l.outliers.size()},
                    {"insufficient", l.insufficient.size()},
                    {"discarded_dense", std::move(dense)}});
  }
  diagnostics["lacs"] = std::move(lacs);

  std::error_code ec;
  fs::create_directories(config.out, ec);
  if (ec) throw InputUnavailable(fmt::format("cannot create '{}': {}", config.out.string(), ec.message()));
  write_file_atomic(config.out / "cleaned.geojson", export_geojson(result));
  write_file_atomic(config.out / "cleaned.csv", export_csv(result));
  write_file_atomic(config.out / "retention.json", to_json(retention));
  write_file_atomic(config.out / "coverage.json", to_json(coverage));
  write_file_atomic(config.out / "scatter_before.svg", render_scatter(result, ScatterLayer::all));
  write_file_atomic(config.out / "scatter_after.svg", render_scatter(result, ScatterLayer::retained));
  write_file_atomic(config.out / "scatter_roles.svg", render_scatter(result, ScatterLayer::roles));
  write_file_atomic(config.out / "diagnostics.json", diagnostics.dump(1) + "\n");
  lap("write_ms");

  json manifest;
  manifest["tool"] = "lacclean";
  manifest["version"] = kVersion;
  manifest["command"] = "clean";
  manifest["config"] = config_to_json(config);
  if (config.synth) {
    manifest["prng"] = kPrngId;
    manifest["seed"] = config.synth->seed;
  }
  json artifacts = json::array();
  for (auto name : kCleanArtifacts) artifacts.push_back(name);
  artifacts.push_back("scatter_roles.svg");
  artifacts.push_back("diagnostics.json");
  manifest["artifacts"] = std::move(artifacts);
  if (config.record_timings) manifest["timings"] = timings;
  write_file_atomic(config.out / "manifest.json", manifest.dump(2) + "\n");

  log << fmt::format("{} unique cells, {} resolved, {} retained, {} outliers, {} in sparse areas\n", cells.size(),
                     resolution.stats.resolved, s.retained, s.outliers, s.insufficient_cells);
}

namespace {

// Flags that were actually given, keyed like the config file.
struct Overrides
{
  json values = json::object();
  std::vector<std::function<void()>> collectors;

  template <typename T>
  CLI::Option* add(CLI::App& app, const std::string& flag, const std::string& key, T& target, const std::string& help)
  {
    auto* opt = app.add_option(flag, target, help);
    collectors.push_back([this, opt, key, &target] {
      if (opt->count() > 0) values[key] = target;
    });
    return opt;
  }

  CLI::Option* add_flag(CLI::App& app, const std::string& flag, const std::string& key, bool& target,
                        const std::string& help)
  {
    auto* opt = app.add_flag(flag, target, help);
    collectors.push_back([this, opt, key, &target] {
      if (opt->count() > 0) values[key] = target;
    });
    return opt;
  }

  json collect()
  {
    for (auto& c : collectors) c();
    return values;
  }
};

void merge_into(json& base, const json& over)
{
  for (const auto& [k, v] : over.items()) base[k] = v;
}

int report_error(std::ostream& err, int code, const std::string& message)
{
  err << "lacclean: " << message << '\n';
  return code;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Spatial outlier removal for cell-ID location data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic world, cell database and trace");
  Overrides synth_over;
  std::string synth_config;
  std::string synth_out;
  std::size_t lacs = 0, cells_per_lac = 0, events = 0;
  double radius = 0, rate = 0, dmin = 0, dmax = 0;
  std::uint64_t seed = 0;
  bool strip = false;
  std::vector<double> region;
  synth->add_option("--config", synth_config, "JSON file with a synth section or synth keys");
  synth_over.add(*synth, "--out", "out", synth_out, "output directory");
  synth_over.add(*synth, "--lacs", "lacs", lacs, "number of location areas");
  synth_over.add(*synth, "--cells-per-lac", "cells_per_lac", cells_per_lac, "cells per location area");
  synth_over.add(*synth, "--cell-radius", "cell_radius", radius, "cell radius in meters");
  synth_over.add(*synth, "--outlier-rate", "outlier_rate", rate, "fraction of cells displaced per area");
  synth_over.add(*synth, "--displacement-min", "displacement_min", dmin, "minimum displacement in meters");
  synth_over.add(*synth, "--displacement-max", "displacement_max", dmax, "maximum displacement in meters");
  synth_over.add(*synth, "--seed", "seed", seed, "PRNG seed");
  synth_over.add(*synth, "--events", "events", events, "trace length (default 10 per cell)");
  synth_over.add(*synth, "--region", "region", region, "min_lat max_lat min_lon max_lon")->expected(4);
  synth_over.add_flag(*synth, "--strip-operator", "strip_operator", strip, "omit mcc/mnc in the trace");

  // clean
  auto* clean = app.add_subcommand("clean", "resolve, cluster and report a trace");
  Overrides clean_over;
  std::string clean_config, trace, cell_db, clean_out, linkage, metric, policy;
  double cutoff = 0;
  std::size_t min_size = 0, window = 0, threads = 0;
  bool lenient = false, timings = false;
  clean->add_option("--config", clean_config, "JSON config or a previous run manifest");
  clean_over.add(*clean, "--trace", "trace", trace, "trace CSV");
  clean_over.add(*clean, "--cell-db", "cell_db", cell_db, "cell database CSV");
  clean_over.add(*clean, "--out", "out", clean_out, "output directory");
  clean_over.add(*clean, "--linkage", "linkage", linkage, "centroid | single | complete | average");
  clean_over.add(*clean, "--metric", "metric", metric, "equirect | haversine | degrees");
  clean_over.add(*clean, "--cutoff", "cutoff", cutoff, "merge cutoff in metric units (default 35 km)");
  clean_over.add(*clean, "--min-size", "min_size", min_size, "minimum representative size");
  clean_over.add(*clean, "--policy", "policy", policy, "exact_only | allow_wildcard");
  clean_over.add(*clean, "--window", "window", window, "coverage window in events");
  clean_over.add(*clean, "--threads", "threads", threads, "worker threads for per-area clustering");
  clean_over.add_flag(*clean, "--lenient", "lenient", lenient, "skip malformed trace rows");
  clean_over.add_flag(*clean, "--record-timings", "record_timings", timings, "store stage timings in the manifest");

  // score
  auto* score = app.add_subcommand("score", "precision/recall of a cleaned CSV against a synthetic world");
  std::string world_path, result_path, score_out;
  score->add_option("--world", world_path, "world.json from synth")->required();
  score->add_option("--result", result_path, "cleaned.csv from clean")->required();
  score->add_option("--out", score_out, "also write the score JSON here");

  // report
  auto* report = app.add_subcommand("report", "retention table or re-render a cleaned CSV");
  std::vector<std::size_t> retention;
  std::string report_from, report_out;
  report->add_option("--retention", retention, "TOTAL RESOLVED RETAINED")->expected(3);
  std::optional<double> quoted_pct;
  report->add_option("--quoted-pct", quoted_pct, "a published retained share to check against the counts");
  report->add_option("--from", report_from, "cleaned.csv to re-render");
  report->add_option("--out", report_out, "directory for re-rendered GeoJSON and SVG");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return report_error(err, kExitBadConfig, e.what());
  }

  try {
    if (synth->parsed()) {
      json j = synth_config.empty() ? json::object() : load_config_file(synth_config);
      if (j.contains("synth")) j = j["synth"];
      merge_into(j, synth_over.collect());
      if (!j.contains("out")) throw InvalidArgument("synth needs --out");
      const fs::path dir = get_as<std::string>(j["out"], "out");
      const auto spec = synth_from_json(j);
      const auto world = synth_world(spec);
      const auto trace_events = synth_events(world, spec);
      std::error_code ec;
      fs::create_directories(dir, ec);
      if (ec) throw InputUnavailable(fmt::format("cannot create '{}'", dir.string()));
      std::ostringstream w, db, tr;
      write_world_manifest(w, world);
      export_world_db(db, world);
      write_trace(tr, trace_events);
      write_file_atomic(dir / "world.json", w.str());
      write_file_atomic(dir / "cell_db.csv", db.str());
      write_file_atomic(dir / "trace.csv", tr.str());
      err << fmt::format("{} areas, {} cells, {} outliers, {} trace events\n", world.lacs.size(), world.cell_count(),
                         world.outlier_count(), trace_events.size());
      return kExitOk;
    }
    if (clean->parsed()) {
      json j = clean_config.empty() ? json::object() : load_config_file(clean_config);
      merge_into(j, clean_over.collect());
      run_pipeline(config_from_json(j), err);
      return kExitOk;
    }
    if (score->parsed()) {
      const auto world = parse_file(world_path, [](std::istream& in) { return read_world_manifest(in); });
      const auto rows = parse_file(result_path, [](std::istream& in) { return parse_report_csv(in); });
      const auto s = score_detection(clean_result_from_rows(rows), world);
      const auto text = score_json(s);
      if (!score_out.empty()) write_file_atomic(score_out, text);
      out << text;
      return kExitOk;
    }
    if (report->parsed()) {
      if (retention.empty() && report_from.empty()) throw InvalidArgument("report needs --retention or --from");
      if (!retention.empty()) out << to_json(retention_stats(retention[0], retention[1], retention[2], quoted_pct));
      if (!report_from.empty()) {
        if (report_out.empty()) throw InvalidArgument("--from needs --out");
        const auto rows = parse_file(report_from, [](std::istream& in) { return parse_report_csv(in); });
        const auto result = clean_result_from_rows(rows);
        std::error_code ec;
        fs::create_directories(report_out, ec);
        if (ec) throw InputUnavailable(fmt::format("cannot create '{}'", report_out));
        const fs::path dir = report_out;
        write_file_atomic(dir / "cleaned.geojson", export_geojson(result));
        write_file_atomic(dir / "scatter_before.svg", render_scatter(result, ScatterLayer::all));
        write_file_atomic(dir / "scatter_after.svg", render_scatter(result, ScatterLayer::retained));
        write_file_atomic(dir / "scatter_roles.svg", render_scatter(result, ScatterLayer::roles));
      }
      return kExitOk;
    }
  } catch (const InputUnavailable& e) {
    return report_error(err, kExitMissingInput, e.what());
  } catch (const FileFormatError& e) {
    return report_error(err, kExitFormatError, e.what());
  } catch (const WorldMismatch& e) {
    return report_error(err, kExitFormatError, std::string("WorldMismatch: ") + e.what());
  } catch (const fs::filesystem_error& e) {
    return report_error(err, kExitMissingInput, e.what());
  } catch (const std::exception& e) {
    return report_error(err, kExitBadConfig, e.what());
  }
  return kExitBadConfig;
}

} // namespace lacclean

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "motiv/api.hpp"
#include "motiv/archive.hpp"
#include "motiv/errors.hpp"
#include "motiv/glyph.hpp"
#include "motiv/numeric.hpp"
#include "motiv/pipeline.hpp"
#include "motiv/server.hpp"

namespace {

using motiv::api::json;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;
constexpr int kExitModel = 3;

struct ExitError {
  int code;
  std::string message;
};

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw motiv::InputError("cannot write " + tmp.string());
    out << content;
    if (!out) throw motiv::InputError("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::set<std::string> tag_set(const std::vector<std::string>& tags) {
  std::set<std::string> out;
  for (std::string t : tags) {
    t = motiv::trim(t);
    if (!t.empty() && t.front() == '#') t.erase(0, 1);
    if (!t.empty()) out.insert(motiv::to_lower(t));
  }
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw motiv::InputError("cannot read " + path);
  return in;
}

// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string tweets, counties, demographics, covid, out;
  double threshold = motiv::kDefaultOverlapThreshold;
  std::string lexicon, boosters, negators, topic;
  std::vector<std::string> support_tags, oppose_tags;
};

int run_ingest(const IngestArgs& a) {
  motiv::IngestOptions opt;
  opt.overlap_threshold = a.threshold;
  opt.topic = a.topic;
  if (!a.support_tags.empty() || !a.oppose_tags.empty()) {
    opt.hashtags = motiv::HashtagRule{tag_set(a.support_tags), tag_set(a.oppose_tags)};
  }
  motiv::sentiment::Lexicon lexicon = motiv::sentiment::builtin_lexicon();
  if (!a.lexicon.empty()) {
    auto in = open_input(a.lexicon);
    lexicon.entries = motiv::sentiment::read_valence_table(in, a.lexicon);
  }
  if (!a.boosters.empty()) {
    auto in = open_input(a.boosters);
    lexicon.boosters = motiv::sentiment::read_valence_table(in, a.boosters);
  }
  if (!a.negators.empty()) {
    auto in = open_input(a.negators);
    lexicon.negators = motiv::sentiment::read_token_list(in, a.negators);
  }
  opt.lexicon = &lexicon;

  const motiv::IngestResult result = motiv::ingest({a.tweets, a.counties, a.demographics, a.covid}, opt);
  const std::string report = result.report.to_text();
  motiv::archive::write(a.out, *result.dataset);
  write_file(a.out + ".report.txt", report);
  std::cout << report;
  return kExitOk;
}

// ---------------------------------------------------------------------------

std::string resolve_data(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("MOTIV_DATA"); env && *env) return env;
  throw motiv::InputError("no dataset given (--data or MOTIV_DATA)");
}

int run_serve(const std::string& data, const std::string& host, int port, const std::string& cors) {
  const auto dataset = motiv::archive::read(resolve_data(data));
  const motiv::api::Service service(dataset);
  motiv::server::Server server(service, {host, port, cors});
  const int bound = server.bind();
  std::cout << "serving " << dataset->tweets().size() << " tweets on http://" << host << ":" << bound << std::endl;
  server.listen();
  return kExitOk;
}

// ---------------------------------------------------------------------------

std::string fmt(const json& v) {
  if (v.is_null()) return "-";
  if (v.is_number_float()) {
    std::ostringstream s;
    s << std::setprecision(6) << v.get<double>();
    return s.str();
  }
  return v.dump();
}

std::string model_table(const json& r) {
  std::ostringstream out;
  out << "target       " << r["spec"]["target"].get<std::string>() << " ("
      << r["spec"]["granularity"].get<std::string>() << ")\n"
      << "rows         " << r["n_rows"] << " (" << r["dropped_rows"] << " dropped)\n"
      << "lambda       " << fmt(r["lambda"]) << "\n"
      << "edf          " << fmt(r["edf"]) << "\n"
      << "gcv          " << fmt(r["gcv"]) << "\n"
      << "rss          " << fmt(r["rss"]) << "\n"
      << "intercept    " << fmt(r["intercept"]) << "\n\n";
  out << std::left << std::setw(28) << "term" << std::setw(8) << "kind" << std::setw(14) << "coefficient";
  const bool tests = r.contains("pvalues") && r["pvalues"].is_array();
  if (tests) out << std::setw(14) << "std_error" << std::setw(12) << "t" << "p";
  out << "\n";
  for (std::size_t i = 0; i < r["terms"].size(); ++i) {
    const json& t = r["terms"][i];
    out << std::setw(28) << t["feature"].get<std::string>() << std::setw(8) << t["kind"].get<std::string>()
        << std::setw(14) << (t.contains("coefficient") ? fmt(t["coefficient"]) : "-");
    if (tests) {
      const json& p = r["pvalues"][i];
      out << std::setw(14) << fmt(p["std_error"]) << std::setw(12) << fmt(p["t"]) << fmt(p["p_value"]);
    }
    out << "\n";
  }
  if (r.contains("pvalues_note")) out << "\n" << r["pvalues_note"].get<std::string>() << "\n";
  return out.str();
}

int run_fit(const std::string& data, const std::string& spec_path, const std::string& out) {
  const auto dataset = motiv::archive::read(resolve_data(data));
  json spec;
  {
    auto in = open_input(spec_path);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
      spec = json::parse(ss.str());
    } catch (const json::exception& e) {
      throw motiv::InputError(spec_path + ": malformed JSON: " + e.what());
    }
  }
  const motiv::api::Service service(dataset);
  json result;
  try {
    result = service.gam(spec);
  } catch (const motiv::api::ApiError& e) {
    throw ExitError{kExitModel, e.what()};
  }
  const std::string table = model_table(result);
  if (!out.empty()) {
    write_file(out, motiv::api::to_body(result));
    write_file(out + ".txt", table);
  }
  std::cout << table;
  return kExitOk;
}

// ---------------------------------------------------------------------------

int run_export(const std::string& data, const std::string& panel, const std::string& frame,
               const std::string& color, const std::string& out) {
  if (panel != "map" && panel != "timeline") {
    throw motiv::InputError("unknown panel '" + panel + "' (map, timeline)");
  }
  const auto dataset = motiv::archive::read(resolve_data(data));
  const motiv::api::Service service(dataset);
  const std::optional<std::string_view> f = frame.empty() ? std::nullopt : std::optional<std::string_view>(frame);
  const std::optional<std::string_view> c = color.empty() ? std::nullopt : std::optional<std::string_view>(color);
  json payload;
  try {
    payload = panel == "map" ? service.map(f, c) : service.timeline(f, c);
  } catch (const motiv::api::ApiError& e) {
    throw motiv::InputError(e.what());
  }
  write_file(out, motiv::api::to_body(payload));
  if (panel == "map") {
    const auto layout = motiv::glyph::layout_map(service.features(), f ? motiv::parse_frame(*f) : std::nullopt,
                                                 color.empty() ? std::string(motiv::api::kDefaultMapColor) : color);
    std::filesystem::path svg = out;
    svg.replace_extension(".svg");
    write_file(svg, motiv::glyph::render_svg(layout.glyphs));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moral-frame tweet corpus analytics"};
  app.require_subcommand(1);

  IngestArgs ia;
  auto* ingest = app.add_subcommand("ingest", "Parse, score, geo-assign and join a corpus into a dataset archive");
  ingest->add_option("--tweets", ia.tweets, "Tweet CSV")->required();
  ingest->add_option("--counties", ia.counties, "County GeoJSON")->required();
  ingest->add_option("--demographics", ia.demographics, "Demographics CSV")->required();
  ingest->add_option("--covid", ia.covid, "COVID-19 CSV")->required();
  ingest->add_option("--out", ia.out, "Dataset archive to write")->required();
  ingest->add_option("--overlap-threshold", ia.threshold, "Minimum overlap fraction to assign a tweet")
      ->check(CLI::Range(0.0, 1.0));
  ingest->add_option("--lexicon", ia.lexicon, "Valence table (token<TAB>value)");
  ingest->add_option("--boosters", ia.boosters, "Booster table (token<TAB>multiplier)");
  ingest->add_option("--negators", ia.negators, "Negator list");
  ingest->add_option("--support-tags", ia.support_tags, "Hashtags marking stance for")->delimiter(',');
  ingest->add_option("--oppose-tags", ia.oppose_tags, "Hashtags marking stance against")->delimiter(',');
  ingest->add_option("--topic", ia.topic, "Topic label");

  std::string data;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string cors = "*";
  auto* serve = app.add_subcommand("serve", "Serve the HTTP/JSON API");
  serve->add_option("--data", data, "Dataset archive (default $MOTIV_DATA)");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (0 picks one)")->check(CLI::Range(0, 65535));
  serve->add_option("--cors-origin", cors, "Access-Control-Allow-Origin value; empty disables CORS");

  std::string spec;
  std::string out;
  auto* fit = app.add_subcommand("fit", "Fit a model and write its report");
  fit->add_option("--data", data, "Dataset archive (default $MOTIV_DATA)");
  fit->add_option("--spec", spec, "Model spec JSON")->required();
  fit->add_option("--out", out, "Report JSON to write (table goes to <out>.txt)");

  std::string panel;
  std::string frame;
  std::string color;
  auto* exp = app.add_subcommand("export", "Write the map or timeline payload");
  exp->add_option("--data", data, "Dataset archive (default $MOTIV_DATA)");
  exp->add_option("--panel", panel, "map or timeline")->required();
  exp->add_option("--frame", frame, "Frame filter");
  exp->add_option("--color", color, "Color feature");
  exp->add_option("--out", out, "Output JSON (map also writes .svg)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    if (ingest->parsed()) {
      if (!(ia.threshold > 0.0)) throw motiv::InputError("--overlap-threshold must be in (0, 1]");
      return run_ingest(ia);
    }
    if (serve->parsed()) return run_serve(data, host, port, cors);
    if (fit->parsed()) return run_fit(data, spec, out);
    if (exp->parsed()) return run_export(data, panel, frame, color, out);
  } catch (const ExitError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const motiv::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const motiv::ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitModel;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

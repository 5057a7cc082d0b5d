#include "cli.hpp"

#include <pthread.h>
#include <signal.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "geoflood/active_learn.hpp"
#include "geoflood/annotate.hpp"
#include "geoflood/density.hpp"
#include "geoflood/embed.hpp"
#include "geoflood/error.hpp"
#include "geoflood/geo.hpp"
#include "geoflood/geocode.hpp"
#include "geoflood/pipeline.hpp"
#include "geoflood/serve.hpp"
#include "geoflood/stats.hpp"
#include "geoflood/store.hpp"
#include "geoflood/synthetic.hpp"

namespace geoflood::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& message) {
  throw Error(ErrorCode::Config, message);
}

void require_store(const Options& o) {
  if (o.store.empty()) config_error("--store is required");
}

void check_threshold(double t) {
  if (!(t > 0.0)) config_error("--threshold must be > 0");
}

/// Writes to a file, or to `out` when path is "-".
void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path == "-" || path.empty()) {
    out << content;
    return;
  }
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path);
  f << content;
}

/// Explicit --roi, else the RoI recorded by postfilter, else the default collection RoI.
RoI resolve_roi(const Options& o, const StorePaths& paths) {
  if (!o.roi_path.empty()) return load_roi(o.roi_path);
  if (fs::exists(paths.filter_report())) {
    const auto report = read_json(paths.filter_report());
    if (report.contains("roi")) return roi_from_json(report.at("roi"));
  }
  return default_roi();
}

int cmd_synth(const Options& o, std::ostream& out) {
  const MixConfig mix = o.mix_path.empty() ? MixConfig{} : load_mix(o.mix_path);
  mix.validate();
  std::vector<std::pair<std::string, ClassLabel>> labels;
  std::ofstream file;
  std::ostream* sink = &out;
  if (o.out != "-") {
    const fs::path p(o.out);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    file.open(p, std::ios::binary | std::ios::trunc);
    if (!file) throw Error(ErrorCode::Io, "cannot write " + o.out);
    sink = &file;
  }
  SyntheticGenerator gen(mix, o.seed);
  for (std::size_t i = 0; i < o.n; ++i) {
    auto t = gen.next();
    *sink << serialize_tweet(t.record) << '\n';
    if (t.has_keyword && labels.size() < o.labels_max) labels.emplace_back(t.record.id, t.relevance);
  }
  sink->flush();
  if (!o.fixture_out.empty()) emit(o.fixture_out, gen.geocoder_fixture().dump(2) + "\n", out);
  if (!o.labels_out.empty()) save_labels_csv(o.labels_out, labels);
  return 0;
}

int cmd_ingest(const Options& o, std::istream& in, std::ostream& out) {
  require_store(o);
  fs::create_directories(o.store);
  StoreLock lock(o.store);
  json report;
  if (o.input == "-") {
    report = run_ingest(in, StorePaths{o.store});
  } else {
    std::ifstream f(o.input, std::ios::binary);
    if (!f) throw Error(ErrorCode::Io, "cannot read " + o.input);
    report = run_ingest(f, StorePaths{o.store});
  }
  out << report.dump(2) << '\n';
  return 0;
}

int cmd_annotate(const Options& o, std::ostream& out) {
  require_store(o);
  std::shared_ptr<GeocodeBackend> backend;
  SystemClock clock;
  if (o.geocoder == "fixture") {
    if (o.fixture.empty()) config_error("--geocoder fixture requires --fixture");
    if (!o.base_url.empty()) config_error("--base-url only applies to --geocoder live");
    backend = std::make_shared<FixtureBackend>(FixtureBackend::from_file(o.fixture));
  } else if (o.geocoder == "live") {
    if (o.base_url.empty()) config_error("--geocoder live requires --base-url");
    if (!o.fixture.empty()) config_error("--fixture only applies to --geocoder fixture");
    backend = std::make_shared<HttpBackend>(
        o.base_url, clock, httplib_transport(o.user_agent, std::chrono::seconds(30)));
  } else if (!o.fixture.empty() || !o.base_url.empty()) {
    config_error("--geocoder none takes neither --fixture nor --base-url");
  }
  StoreLock lock(o.store);
  std::optional<Geocoder> geocoder;
  if (backend) geocoder.emplace(backend);
  const auto report = run_annotate(StorePaths{o.store}, geocoder ? &*geocoder : nullptr);
  out << report.dump(2) << '\n';
  return 0;
}

int cmd_postfilter(const Options& o, std::ostream& out) {
  require_store(o);
  const RoI roi = o.roi_path.empty() ? default_roi() : load_roi(o.roi_path);
  StoreLock lock(o.store);
  const auto report = run_postfilter(StorePaths{o.store}, roi);
  out << report.dump(2) << '\n';
  return 0;
}

AnnotationKind place_kind(const std::string& s) {
  auto k = parse_kind(s);
  if (!k || *k == AnnotationKind::Geotag) config_error("--kind must be bbox or pbbox");
  return *k;
}

int cmd_stats(const Options& o, std::ostream& out) {
  require_store(o);
  const auto kind = place_kind(o.kind);
  StoreLock lock(o.store);
  const auto store = load_store(o.store);
  const auto pf = place_frequencies(store.set, kind);
  if (!o.scatter_out.empty()) emit(o.scatter_out, scatter_to_csv(pf), out);
  emit(o.out, correlate_loglog(pf, !o.raw_values).to_json().dump(2) + "\n", out);
  return 0;
}

int cmd_density(const Options& o, std::ostream& out) {
  require_store(o);
  check_threshold(o.threshold);
  if (!(o.cell > 0.0)) config_error("--cell must be > 0");
  DensityOptions opt;
  opt.cell_deg = o.cell;
  opt.threshold_km2 = o.threshold;
  opt.subtypes.clear();
  for (const auto& s : o.subtypes) {
    auto st = parse_subtype(s);
    if (!st || (*st != Subtype::Geotag && *st != Subtype::SmallBBox)) {
      config_error("--subtypes accepts geotag and s_bbox, got " + s);
    }
    opt.subtypes.insert(*st);
  }
  StoreLock lock(o.store);
  const StorePaths paths{o.store};
  const auto store = load_store(o.store);
  const auto roi = resolve_roi(o, paths);
  std::unordered_set<std::string> ids;
  if (!o.keywords.empty()) {
    ids = keyword_filter(store.tweets, o.keywords);
    opt.tweet_filter = &ids;
  }
  const auto grid = density_grid(store.set, roi, opt);
  emit(o.out, o.format == "csv" ? density_to_csv(grid) : density_to_geojson(grid).dump() + "\n",
       out);
  return 0;
}

std::vector<TweetRecord> tweets_for_embedding(const Options& o) {
  if (!o.store.empty() && o.input != "-") config_error("use either --store or --input");
  if (!o.store.empty()) {
    StoreLock lock(o.store);
    return read_tweets(StorePaths{o.store}.tweets());
  }
  if (o.input == "-") config_error("--store or --input is required");
  return read_tweets(o.input);
}

NgramHashing hashing_params(const Options& o) {
  if (o.dim == 0) config_error("--dim must be >= 1");
  if (o.n_min == 0 || o.n_min > o.n_max) config_error("n-gram range must satisfy 1 <= n-min <= n-max");
  return NgramHashing{o.dim, o.n_min, o.n_max, o.seed};
}

int cmd_embed(const Options& o, std::ostream& out) {
  if (o.out == "-") config_error("--out is required");
  const auto params = hashing_params(o);
  const auto tweets = tweets_for_embedding(o);
  std::optional<std::unordered_set<std::string>> wanted;
  if (!o.labels.empty()) {
    wanted.emplace();
    for (const auto& [id, label] : load_labels_csv(o.labels)) wanted->insert(id);
  }
  PrecomputedEmbeddings emb;
  for (const auto& t : tweets) {
    if (wanted && !wanted->contains(t.id)) continue;
    emb.insert(t.id, embed_char_ngram(t.text, params));
  }
  emb.save(o.out);
  out << json{{"vectors", emb.size()}, {"dim", params.dim}}.dump(2) << '\n';
  return 0;
}

int cmd_al_run(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.labels.empty()) config_error("--labels is required");
  if (o.embeddings.empty() == (o.store.empty() && o.input == "-")) {
    config_error("give exactly one of --embeddings or --store/--input");
  }
  if (o.batch == 0) config_error("--batch must be >= 1");
  std::vector<Strategy> strategies;
  if (o.strategy == "all") {
    strategies = {Strategy::Random, Strategy::Uncertainty, Strategy::Hierarchical};
  } else if (o.strategy == "random") {
    strategies = {Strategy::Random};
  } else if (o.strategy == "uncertainty") {
    strategies = {Strategy::Uncertainty};
  } else if (o.strategy == "hierarchical") {
    strategies = {Strategy::Hierarchical};
  } else {
    config_error("unknown strategy " + o.strategy);
  }
  if (strategies.size() > 1 && o.out == "-") config_error("--strategy all needs --out DIR");

  PrecomputedEmbeddings emb;
  if (!o.embeddings.empty()) {
    emb = PrecomputedEmbeddings::load(o.embeddings);
  } else {
    const auto params = hashing_params(o);
    for (const auto& t : tweets_for_embedding(o)) emb.insert(t.id, embed_char_ngram(t.text, params));
  }
  std::vector<LabeledSample> samples;
  for (const auto& [id, label] : load_labels_csv(o.labels)) {
    auto v = emb.lookup(id);
    if (!v) throw Error(ErrorCode::Request, "no embedding for labeled tweet " + id);
    samples.push_back({id, std::move(*v), label});
  }
  if (o.test_count >= samples.size()) {
    config_error("--test-count must be smaller than the " + std::to_string(samples.size()) +
                 " labeled samples");
  }
  const auto [pool, test] = split_train_test(samples, o.test_count, o.seed);

  CurveParams params;
  params.batch_size = o.batch;
  params.budget = o.budget == 0 ? pool.size() : o.budget;
  params.seed = o.seed;
  params.train = TrainParams{o.epochs, o.learning_rate, o.regularization, o.seed};

  json summary = {{"train_pool", pool.size()}, {"test_set", test.size()}, {"strategies", json::object()}};
  std::map<Strategy, double> mean_precision;
  for (auto s : strategies) {
    params.strategy = s;
    const auto curve = run_curve(pool, test, params);
    for (const auto& w : curve.warnings) err << "warning: " << strategy_name(s) << ": " << w << '\n';
    const auto csv = curve_to_csv(curve);
    if (strategies.size() > 1) {
      emit((fs::path(o.out) / ("curve_" + std::string(strategy_name(s)) + ".csv")).string(), csv, out);
    } else {
      emit(o.out, csv, out);
    }
    double mean = 0.0;
    for (const auto& r : curve.rows) mean += r.precision.macro;
    if (!curve.rows.empty()) mean /= static_cast<double>(curve.rows.size());
    mean_precision[s] = mean;
    summary["strategies"][std::string(strategy_name(s))] = {
        {"rows", curve.rows.size()},
        {"final_macro_precision", curve.rows.empty() ? 0.0 : curve.rows.back().precision.macro},
        {"mean_macro_precision", mean}};
  }
  if (mean_precision.contains(Strategy::Random)) {
    for (const auto& [s, m] : mean_precision) {
      if (s == Strategy::Random) continue;
      summary["strategies"][std::string(strategy_name(s))]["mean_gain_over_random"] =
          m - mean_precision[Strategy::Random];
    }
  }
  err << summary.dump(2) << '\n';
  return 0;
}

int cmd_serve(const Options& o, std::ostream& err) {
  require_store(o);
  check_threshold(o.threshold);
  const auto colon = o.bind.rfind(':');
  if (colon == std::string::npos) config_error("--bind must be HOST:PORT");
  ApiConfig config;
  config.host = o.bind.substr(0, colon);
  try {
    config.port = std::stoi(o.bind.substr(colon + 1));
  } catch (const std::exception&) {
    config_error("--bind must be HOST:PORT");
  }
  if (config.port < 0 || config.port > 65535) config_error("--bind port out of range");
  config.threshold_km2 = o.threshold;
  config.cors_origin = o.cors_origin;
  config.max_results = o.max_results;

  std::optional<Api> api;
  {
    StoreLock lock(o.store);
    api.emplace(load_store(o.store), resolve_roi(o, StorePaths{o.store}), config);
  }
  if (api->integrity_error()) throw Error(ErrorCode::Integrity, *api->integrity_error());

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  ApiServer server(*api);
  const int port = server.bind(config.host, config.port);
  err << "listening on http://" << config.host << ":" << port << std::endl;
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  waiter.detach();
  server.listen();
  return 0;
}

int cmd_report(const Options& o, std::ostream& out) {
  require_store(o);
  check_threshold(o.threshold);
  StoreLock lock(o.store);
  emit(o.out, build_report(StorePaths{o.store}, o.threshold).dump(2) + "\n", out);
  return 0;
}

}  // namespace

std::unique_ptr<CLI::App> build_cli(Options& o) {
  auto app = std::make_unique<CLI::App>(
      "Geolocated tweet corpus pipeline: ingest, annotate, filter, analyze and serve.", "geoflood");
  app->set_config("--config", "", "Read flag values from a TOML or INI file");
  app->require_subcommand(1);

  auto* synth = app->add_subcommand("synth", "Generate a synthetic tweet corpus as NDJSON");
  synth->add_option("--n", o.n, "Number of tweets")->capture_default_str();
  synth->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  synth->add_option("--mix", o.mix_path, "Mix configuration (JSON)")->check(CLI::ExistingFile);
  synth->add_option("--out", o.out, "Output file, '-' for stdout")->capture_default_str();
  synth->add_option("--fixture-out", o.fixture_out, "Write the geocoder replay fixture here");
  synth->add_option("--labels-out", o.labels_out, "Write relevance labels of keyword tweets (CSV)");
  synth->add_option("--labels-max", o.labels_max, "Maximum number of labels written")
      ->capture_default_str();

  auto* ingest = app->add_subcommand("ingest", "Parse raw NDJSON tweets into a store");
  ingest->add_option("--input", o.input, "Input NDJSON file, '-' for stdin")->capture_default_str();
  ingest->add_option("--out,--store", o.store, "Store directory")->required();

  auto* annotate = app->add_subcommand("annotate", "Derive geotag, bbox and pbbox annotations");
  annotate->add_option("--store", o.store, "Store directory")->required();
  annotate->add_option("--geocoder", o.geocoder, "Profile place recovery: fixture, live or none")
      ->check(CLI::IsMember({"fixture", "live", "none"}))
      ->capture_default_str();
  annotate->add_option("--fixture", o.fixture, "Geocoder replay fixture (JSON)")
      ->check(CLI::ExistingFile);
  annotate->add_option("--base-url", o.base_url, "Nominatim-compatible endpoint for live mode");
  annotate->add_option("--user-agent", o.user_agent, "User-Agent sent in live mode")
      ->capture_default_str();

  auto* postfilter = app->add_subcommand("postfilter", "Drop annotations outside the RoI");
  postfilter->add_option("--store", o.store, "Store directory")->required();
  postfilter->add_option("--roi", o.roi_path, "RoI file (GeoJSON rectangles); default: collection RoI")
      ->check(CLI::ExistingFile);

  auto* stats = app->add_subcommand("stats", "Place surface vs frequency correlation");
  stats->add_option("--store", o.store, "Store directory")->required();
  stats->add_option("--kind", o.kind, "Place kind: bbox or pbbox")
      ->check(CLI::IsMember({"bbox", "pbbox"}))
      ->capture_default_str();
  stats->add_flag("--raw", o.raw_values, "Correlate raw values instead of log10 values");
  stats->add_option("--scatter-out", o.scatter_out, "Write the scatter rows as CSV");
  stats->add_option("--out", o.out, "Correlation report file, '-' for stdout")->capture_default_str();

  auto* density = app->add_subcommand("density", "Aggregate annotations on a lon/lat grid");
  density->add_option("--store", o.store, "Store directory")->required();
  density->add_option("--roi", o.roi_path, "RoI file; default: the RoI used by postfilter")
      ->check(CLI::ExistingFile);
  density->add_option("--cell", o.cell, "Cell size in degrees")->capture_default_str();
  density->add_option("--keywords", o.keywords, "Only tweets containing any of these words")
      ->delimiter(',');
  density->add_option("--subtypes", o.subtypes, "Subtypes to aggregate (geotag, s_bbox)")
      ->delimiter(',')
      ->capture_default_str();
  density->add_option("--threshold", o.threshold, "Small/large surface threshold in km2")
      ->capture_default_str();
  density->add_option("--format", o.format, "Output format: geojson or csv")
      ->check(CLI::IsMember({"geojson", "csv"}))
      ->capture_default_str();
  density->add_option("--out", o.out, "Output file, '-' for stdout")->capture_default_str();

  auto* embed = app->add_subcommand("embed", "Write character n-gram embeddings of tweets");
  embed->add_option("--store", o.store, "Store directory to read tweets from");
  embed->add_option("--input", o.input, "Tweets NDJSON file (instead of --store)");
  embed->add_option("--labels", o.labels, "Only embed tweets listed in this labels CSV")
      ->check(CLI::ExistingFile);
  embed->add_option("--dim", o.dim, "Embedding dimension")->capture_default_str();
  embed->add_option("--n-min", o.n_min, "Shortest n-gram")->capture_default_str();
  embed->add_option("--n-max", o.n_max, "Longest n-gram")->capture_default_str();
  embed->add_option("--seed", o.seed, "Hash seed")->capture_default_str();
  embed->add_option("--out", o.out, "Output vectors file (tweet_id<TAB>values)")->required();

  auto* al = app->add_subcommand("al-run", "Active learning precision curves");
  al->add_option("--labels", o.labels, "Labels CSV (tweet_id,label)")->required()->check(CLI::ExistingFile);
  al->add_option("--embeddings", o.embeddings, "Precomputed vectors file")->check(CLI::ExistingFile);
  al->add_option("--store", o.store, "Embed tweets of this store on the fly");
  al->add_option("--input", o.input, "Embed tweets of this NDJSON file on the fly");
  al->add_option("--strategy", o.strategy, "random, uncertainty, hierarchical or all")
      ->check(CLI::IsMember({"random", "uncertainty", "hierarchical", "all"}))
      ->capture_default_str();
  al->add_option("--batch", o.batch, "Labels revealed per iteration")->capture_default_str();
  al->add_option("--budget", o.budget, "Total labels to reveal (0: whole pool)")->capture_default_str();
  al->add_option("--test-count", o.test_count, "Held-out test samples")->capture_default_str();
  al->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  al->add_option("--epochs", o.epochs, "SGD epochs")->capture_default_str();
  al->add_option("--lr", o.learning_rate, "SGD learning rate")->capture_default_str();
  al->add_option("--reg", o.regularization, "L2 regularization")->capture_default_str();
  al->add_option("--dim", o.dim, "Embedding dimension for on-the-fly embedding")->capture_default_str();
  al->add_option("--n-min", o.n_min, "Shortest n-gram")->capture_default_str();
  al->add_option("--n-max", o.n_max, "Longest n-gram")->capture_default_str();
  al->add_option("--out", o.out, "Curve CSV file ('-' for stdout), or a directory for 'all'")
      ->capture_default_str();

  auto* serve = app->add_subcommand("serve", "Read-only HTTP JSON API over a store");
  serve->add_option("--store", o.store, "Store directory")->required();
  serve->add_option("--roi", o.roi_path, "RoI file; default: the RoI used by postfilter")
      ->check(CLI::ExistingFile);
  serve->add_option("--bind", o.bind, "HOST:PORT to listen on")->capture_default_str();
  serve->add_option("--threshold", o.threshold, "Default small/large threshold in km2")
      ->capture_default_str();
  serve->add_option("--cors-origin", o.cors_origin, "Allowed CORS origin (empty disables)")
      ->capture_default_str();
  serve->add_option("--max-results", o.max_results, "Hard cap on rows per response")
      ->capture_default_str();

  auto* report = app->add_subcommand("report", "Headline aggregates of a processed store");
  report->add_option("--store", o.store, "Store directory")->required();
  report->add_option("--threshold", o.threshold, "Small/large threshold in km2")->capture_default_str();
  report->add_option("--out", o.out, "Output file, '-' for stdout")->capture_default_str();

  return app;
}

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out,
            std::ostream& err) {
  Options o;
  auto app = build_cli(o);
  try {
    app->parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app->help("", CLI::AppFormatMode::Normal);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app->help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  // Help of a subcommand is thrown from the subcommand's own parse; handled above.
  try {
    const auto* sub = app->get_subcommands().front();
    const auto name = sub->get_name();
    if (name == "synth") return cmd_synth(o, out);
    if (name == "ingest") return cmd_ingest(o, in, out);
    if (name == "annotate") return cmd_annotate(o, out);
    if (name == "postfilter") return cmd_postfilter(o, out);
    if (name == "stats") return cmd_stats(o, out);
    if (name == "density") return cmd_density(o, out);
    if (name == "embed") return cmd_embed(o, out);
    if (name == "al-run") return cmd_al_run(o, out, err);
    if (name == "serve") return cmd_serve(o, err);
    if (name == "report") return cmd_report(o, out);
    err << "error: unknown subcommand " << name << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error [" << code_name(e.code()) << "]: " << e.what() << '\n';
    return e.code() == ErrorCode::Config ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace geoflood::cli

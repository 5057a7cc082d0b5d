#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

namespace geoflood::cli {

/// Parsed flag values for every subcommand.
struct Options {
  // synth
  std::size_t n = 1000;
  std::uint64_t seed = 7;
  std::string mix_path;
  std::string out = "-";
  std::string fixture_out;
  std::string labels_out;
  std::size_t labels_max = 421;
  // shared store / geometry
  std::string input = "-";
  std::string store;
  std::string roi_path;
  double threshold = 350.0;
  // annotate
  std::string geocoder = "fixture";
  std::string fixture;
  std::string base_url;
  std::string user_agent = "geoflood/0.1";
  // stats
  std::string kind = "bbox";
  bool raw_values = false;
  std::string scatter_out;
  // density
  double cell = 0.01;
  std::vector<std::string> keywords;
  std::vector<std::string> subtypes = {"geotag", "s_bbox"};
  std::string format = "geojson";
  // embed
  std::string labels;
  std::size_t dim = 500;
  std::size_t n_min = 1;
  std::size_t n_max = 3;
  // al-run
  std::string embeddings;
  std::string strategy = "all";
  std::size_t batch = 10;
  std::size_t budget = 0;
  std::size_t test_count = 105;
  std::size_t epochs = 30;
  double learning_rate = 0.05;
  double regularization = 1e-4;
  // serve
  std::string bind = "127.0.0.1:8080";
  std::string cors_origin = "http://localhost:5173";
  std::size_t max_results = 200000;
};

/// The full command tree; `opts` receives parsed values.
std::unique_ptr<CLI::App> build_cli(Options& opts);

/// Parses argv and runs the selected subcommand. Returns the process exit
/// code: 0 success, 1 data error, 2 configuration error.
int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out,
            std::ostream& err);

}  // namespace geoflood::cli

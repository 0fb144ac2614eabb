/*
 * Copyright 2026 The subsetforge authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// subsetforge — select training-set subsets (random, per-class, monspec),
// compute subset statistics, and characterize the samplers by Monte-Carlo
// simulation. Exit codes: 0 success (warnings allowed), 1 usage error,
// 2 data/validation error, 3 internal error.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "subsetforge/dataset_index.hpp"
#include "subsetforge/montecarlo.hpp"
#include "subsetforge/rng.hpp"
#include "subsetforge/samplers.hpp"
#include "subsetforge/stats.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using subsetforge::ClassFrequencies;
using subsetforge::DatasetIndex;
using subsetforge::InvertedIndex;
using subsetforge::Method;
using subsetforge::Subset;
using subsetforge::ValidationError;

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open file: " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(fnv1a64(buffer.str())));
  return hex;
}

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

std::string quote_arg(const std::string& arg) {
  if (arg.find_first_of(" \t\"") == std::string::npos) {
    return arg;
  }
  std::string quoted = "\"";
  for (const char c : arg) {
    if (c == '"' || c == '\\') {
      quoted += '\\';
    }
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

std::string timestamp_utc() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

// Everything needed to reproduce a run. The timestamp is diagnostic only:
// it goes to stderr, never into output files, which must be byte-identical
// across reruns of the same command.
struct RunManifest {
  std::string command_line;
  std::vector<std::pair<std::string, std::string>> input_digests;
  std::string seed_text = "-";
  bool warnings = false;

  std::vector<std::string> lines() const {
    std::vector<std::string> out;
    out.push_back(std::string("tool=subsetforge ") + kVersion);
    out.push_back("command=" + command_line);
    for (const auto& [name, digest] : input_digests) {
      out.push_back("input_digest." + name + "=" + digest);
    }
    out.push_back("seed=" + seed_text);
    if (warnings) {
      out.push_back("warnings=shortfall");
    }
    return out;
  }

  void log_to_stderr() const {
    for (const std::string& line : lines()) {
      std::cerr << "manifest: " << line << "\n";
    }
    std::cerr << "manifest: timestamp=" << timestamp_utc() << "\n";
  }
};

void write_manifest_sidecar(const RunManifest& manifest,
                            const std::string& out_path) {
  const std::string path = out_path + ".manifest";
  std::ofstream out(path);
  if (!out) {
    throw ValidationError("cannot write manifest file: " + path);
  }
  for (const std::string& line : manifest.lines()) {
    out << line << "\n";
  }
}

Method require_method(const std::string& name) {
  const auto method = subsetforge::parse_method(name);
  if (!method) {
    throw CLI::ValidationError("--method",
                               "unknown method \"" + name + "\"");
  }
  return *method;
}

subsetforge::SizeSpec make_size(const std::optional<double>& fraction,
                                const std::optional<std::int64_t>& count) {
  if (fraction.has_value() == count.has_value()) {
    throw CLI::ValidationError("--fraction/--count",
                               "exactly one of --fraction or --count is "
                               "required");
  }
  return fraction ? subsetforge::fraction_size(*fraction)
                  : subsetforge::absolute_size(*count);
}

void report_shortfalls(const Subset& subset, const DatasetIndex& index) {
  for (const auto& shortfall : subset.shortfalls) {
    std::cerr << "warning: class \""
              << index.class_names()[static_cast<std::size_t>(
                     shortfall.class_index)]
              << "\" quota " << shortfall.requested << " exceeds its "
              << shortfall.taken << " available samples; taking all\n";
  }
}

struct SampleOptions {
  std::string index_path;
  std::string method_name;
  std::optional<double> fraction;
  std::optional<std::int64_t> count;
  std::uint64_t seed = 0;
  std::string out_path;
};

void run_sample(const SampleOptions& opts, const std::string& command_line) {
  const Method method = require_method(opts.method_name);
  const DatasetIndex index = subsetforge::load_index_file(opts.index_path);
  const ClassFrequencies frequencies = subsetforge::dataset_frequencies(index);
  const InvertedIndex inverted = subsetforge::build_inverted_index(index);

  subsetforge::SamplerConfig config;
  config.method = method;
  config.size = make_size(opts.fraction, opts.count);
  config.seed = opts.seed;
  const Subset subset = subsetforge::draw_subset(index, frequencies, inverted,
                                                 config);
  report_shortfalls(subset, index);

  RunManifest manifest;
  manifest.command_line = command_line;
  manifest.input_digests.emplace_back("index", file_digest(opts.index_path));
  manifest.seed_text = method == Method::monspec ? "-"
                                                 : std::to_string(opts.seed);
  manifest.warnings = !subset.shortfalls.empty();

  std::ofstream out(opts.out_path);
  if (!out) {
    throw ValidationError("cannot write subset file: " + opts.out_path);
  }
  const std::optional<std::uint64_t> seed =
      method == Method::monspec ? std::nullopt
                                : std::optional<std::uint64_t>(opts.seed);
  subsetforge::write_subset(subset, index, method, seed, out,
                            manifest.lines());
  manifest.log_to_stderr();
}

struct StatsOptions {
  std::string index_path;
  std::string subset_path;
  std::string format = "csv";
  std::string out_path;  // empty: stdout
};

nlohmann::ordered_json class_keyed(const DatasetIndex& index,
                                   const auto& values) {
  nlohmann::ordered_json object = nlohmann::ordered_json::object();
  for (std::int64_t k = 0; k < index.num_classes(); ++k) {
    object[index.class_names()[static_cast<std::size_t>(k)]] =
        values[static_cast<std::size_t>(k)];
  }
  return object;
}

void write_stats_csv(const subsetforge::SubsetStats& stats,
                     const DatasetIndex& index, std::ostream& out) {
  const auto& classes = index.class_names();
  out << "N,n,l1,n_norm_min,n_norm_avg";
  for (const std::string& c : classes) {
    out << ",n_k." << c;
  }
  for (const std::string& c : classes) {
    out << ",p_subset." << c;
  }
  for (const std::string& c : classes) {
    out << ",n_norm." << c;
  }
  out << "\n";
  out << stats.subset_size << "," << stats.total_objects << ","
      << format_double(stats.l1) << "," << format_double(stats.n_norm_min)
      << "," << format_double(stats.n_norm_avg);
  for (const std::int64_t v : stats.objects_per_class) {
    out << "," << v;
  }
  for (const double v : stats.p_subset) {
    out << "," << format_double(v);
  }
  for (const double v : stats.n_norm) {
    out << "," << format_double(v);
  }
  out << "\n";
}

void run_stats(const StatsOptions& opts, const std::string& command_line) {
  const DatasetIndex index = subsetforge::load_index_file(opts.index_path);
  const ClassFrequencies frequencies = subsetforge::dataset_frequencies(index);

  std::ifstream subset_in(opts.subset_path);
  if (!subset_in) {
    throw ValidationError("cannot open subset file: " + opts.subset_path);
  }
  Subset subset;
  for (const std::uint32_t ordinal :
       subsetforge::read_subset_ordinals(subset_in, index)) {
    subset.entries.push_back({ordinal, subsetforge::kNoProvenance});
  }
  const subsetforge::SubsetStats stats =
      subsetforge::subset_stats(index, frequencies, subset);

  RunManifest manifest;
  manifest.command_line = command_line;
  manifest.input_digests.emplace_back("index", file_digest(opts.index_path));
  manifest.input_digests.emplace_back("subset",
                                      file_digest(opts.subset_path));

  std::ofstream file_out;
  const bool to_file = !opts.out_path.empty();
  if (to_file) {
    file_out.open(opts.out_path);
    if (!file_out) {
      throw ValidationError("cannot write report file: " + opts.out_path);
    }
  }
  std::ostream& out = to_file ? file_out : std::cout;

  if (opts.format == "csv") {
    write_stats_csv(stats, index, out);
    if (to_file) {
      write_manifest_sidecar(manifest, opts.out_path);
    }
  } else {
    nlohmann::ordered_json doc;
    doc["N"] = stats.subset_size;
    doc["n"] = stats.total_objects;
    doc["l1"] = stats.l1;
    doc["n_norm_min"] = stats.n_norm_min;
    doc["n_norm_avg"] = stats.n_norm_avg;
    doc["n_k"] = class_keyed(index, stats.objects_per_class);
    doc["p_subset"] = class_keyed(index, stats.p_subset);
    doc["n_norm"] = class_keyed(index, stats.n_norm);
    nlohmann::ordered_json manifest_doc = nlohmann::ordered_json::object();
    for (const std::string& line : manifest.lines()) {
      const auto split = line.find('=');
      manifest_doc[line.substr(0, split)] = line.substr(split + 1);
    }
    doc["manifest"] = manifest_doc;
    if (opts.format == "json") {
      out << doc.dump(2) << "\n";
    } else {  // ndjson: the same document on a single line
      out << doc.dump() << "\n";
    }
  }
  manifest.log_to_stderr();
}

struct MonteCarloOptions {
  std::string index_path;
  std::vector<std::string> methods = {"random", "per-class", "monspec"};
  std::vector<double> fractions = {0.05, 0.1, 0.2, 0.4, 0.8};
  std::int64_t trials = 1000000;
  std::uint64_t seed = 0;
  int workers = 0;
  std::string out_path;
};

void run_montecarlo(const MonteCarloOptions& opts,
                    const std::string& command_line) {
  std::vector<Method> methods;
  methods.reserve(opts.methods.size());
  for (const std::string& name : opts.methods) {
    methods.push_back(require_method(name));
  }
  if (opts.trials < 1) {
    throw CLI::ValidationError("--trials", "must be at least 1");
  }

  const DatasetIndex index = subsetforge::load_index_file(opts.index_path);
  const ClassFrequencies frequencies = subsetforge::dataset_frequencies(index);
  const InvertedIndex inverted = subsetforge::build_inverted_index(index);

  subsetforge::MonteCarloReport report;
  std::uint64_t cell_ordinal = 0;
  for (const Method method : methods) {
    for (const double fraction : opts.fractions) {
      const std::int64_t subset_size = subsetforge::resolve_size(
          index, subsetforge::fraction_size(fraction), method);
      // Every cell gets its own seed stream so the grid layout never
      // correlates draws across cells.
      const std::uint64_t cell_seed =
          subsetforge::mix_seed(opts.seed, cell_ordinal++);
      report.cells.push_back(subsetforge::analyze_cell(
          index, frequencies, inverted, method, fraction, subset_size,
          opts.trials, cell_seed, opts.workers));
      const auto& cell = report.cells.back();
      if (cell.shortfall_warnings > 0) {
        std::cerr << "warning: " << subsetforge::method_name(method)
                  << " fraction " << format_double(fraction) << " hit "
                  << cell.shortfall_warnings << " class-quota shortfalls\n";
      }
    }
  }

  RunManifest manifest;
  manifest.command_line = command_line;
  manifest.input_digests.emplace_back("index", file_digest(opts.index_path));
  manifest.seed_text = std::to_string(opts.seed);
  for (const auto& cell : report.cells) {
    manifest.warnings = manifest.warnings || cell.shortfall_warnings > 0;
  }

  std::ofstream out(opts.out_path);
  if (!out) {
    throw ValidationError("cannot write report file: " + opts.out_path);
  }
  subsetforge::write_report_csv(report, out);
  write_manifest_sidecar(manifest, opts.out_path);
  manifest.log_to_stderr();
}

struct BenchOptions {
  std::string index_path;
  std::vector<std::string> methods = {"random", "per-class", "monspec"};
  std::optional<double> fraction;
  std::optional<std::int64_t> count;
  std::int64_t runs = 1000;
  std::uint64_t seed = 0;
  std::string out_path;  // empty: stdout
};

void run_bench(const BenchOptions& opts, const std::string& command_line) {
  std::vector<Method> methods;
  for (const std::string& name : opts.methods) {
    methods.push_back(require_method(name));
  }

  const DatasetIndex index = subsetforge::load_index_file(opts.index_path);
  const ClassFrequencies frequencies = subsetforge::dataset_frequencies(index);
  const InvertedIndex inverted = subsetforge::build_inverted_index(index);
  const subsetforge::SizeSpec size = make_size(opts.fraction, opts.count);

  std::ofstream file_out;
  const bool to_file = !opts.out_path.empty();
  if (to_file) {
    file_out.open(opts.out_path);
    if (!file_out) {
      throw ValidationError("cannot write timing file: " + opts.out_path);
    }
  }
  std::ostream& out = to_file ? file_out : std::cout;

  out << "method,N,runs,mean_ms,min_ms,max_ms\n";
  for (const Method method : methods) {
    const std::int64_t subset_size =
        subsetforge::resolve_size(index, size, method);
    const subsetforge::BenchResult result = subsetforge::bench_sampler(
        index, frequencies, inverted, method, subset_size, opts.runs,
        opts.seed);
    out << subsetforge::method_name(method) << "," << result.subset_size
        << "," << result.runs << "," << format_double(result.mean_ms) << ","
        << format_double(result.min_ms) << "," << format_double(result.max_ms)
        << "\n";
  }
  out << "# a subset is drawn once per experiment; even the slowest method "
         "is insignificant next to detector training time\n";

  RunManifest manifest;
  manifest.command_line = command_line;
  manifest.input_digests.emplace_back("index", file_digest(opts.index_path));
  manifest.seed_text = std::to_string(opts.seed);
  manifest.log_to_stderr();
}

struct SynthOptions {
  std::int64_t classes = 10;
  std::int64_t samples = 28310;
  double tail_exponent = 1.5;
  double mean_objects = 35.0;
  std::uint64_t seed = 1;
  std::string out_path;
};

void run_synth(const SynthOptions& opts, const std::string& command_line) {
  subsetforge::SyntheticConfig config;
  config.num_classes = opts.classes;
  config.num_samples = opts.samples;
  config.tail_exponent = opts.tail_exponent;
  config.mean_objects_per_sample = opts.mean_objects;
  config.seed = opts.seed;
  const DatasetIndex index = subsetforge::generate_synthetic(config);

  RunManifest manifest;
  manifest.command_line = command_line;
  manifest.seed_text = std::to_string(opts.seed);

  std::ofstream out(opts.out_path);
  if (!out) {
    throw ValidationError("cannot write index file: " + opts.out_path);
  }
  for (const std::string& line : manifest.lines()) {
    out << "# " << line << "\n";
  }
  subsetforge::save_index(index, out);
  manifest.log_to_stderr();
}

}  // namespace

int main(int argc, char** argv) {
  std::string command_line;
  for (int i = 0; i < argc; ++i) {
    if (i > 0) {
      command_line += ' ';
    }
    command_line += quote_arg(argv[i]);
  }

  CLI::App app{"subset selection and sampler statistics for object-detection "
               "training sets"};
  app.set_version_flag("--version", std::string("subsetforge ") + kVersion);
  app.require_subcommand(1);

  SampleOptions sample_opts;
  auto* sample = app.add_subcommand(
      "sample", "draw a subset and write a .subset file");
  sample->add_option("--index", sample_opts.index_path, "annotation index "
                     "(.clsidx)")->required()->check(CLI::ExistingFile);
  sample->add_option("--method", sample_opts.method_name,
                     "random | per-class | monspec")->required();
  auto* sample_fraction =
      sample->add_option("--fraction", sample_opts.fraction,
                         "subset size as a fraction of D, in (0,1]");
  sample->add_option("--count", sample_opts.count,
                     "subset size as an absolute sample count")
      ->excludes(sample_fraction);
  sample->add_option("--seed", sample_opts.seed, "sampling seed")
      ->envname("SUBSETFORGE_SEED");
  sample->add_option("--out", sample_opts.out_path, "output .subset path")
      ->required();
  sample->callback(
      [&] { run_sample(sample_opts, command_line); });

  StatsOptions stats_opts;
  auto* stats = app.add_subcommand(
      "stats", "compute subset statistics for an existing subset file");
  stats->add_option("--index", stats_opts.index_path, "annotation index")
      ->required()->check(CLI::ExistingFile);
  stats->add_option("--subset", stats_opts.subset_path, "subset file")
      ->required()->check(CLI::ExistingFile);
  stats->add_option("--format", stats_opts.format, "csv | json | ndjson")
      ->check(CLI::IsMember({"csv", "json", "ndjson"}));
  stats->add_option("--out", stats_opts.out_path,
                    "output path (default: stdout)");
  stats->callback([&] { run_stats(stats_opts, command_line); });

  MonteCarloOptions mc_opts;
  auto* montecarlo = app.add_subcommand(
      "montecarlo", "estimate metric distributions over seeded trials");
  montecarlo->add_option("--index", mc_opts.index_path, "annotation index")
      ->required()->check(CLI::ExistingFile);
  montecarlo->add_option("--methods", mc_opts.methods,
                         "comma-separated methods")->delimiter(',');
  montecarlo->add_option("--fractions", mc_opts.fractions,
                         "comma-separated subset fractions")->delimiter(',');
  montecarlo->add_option("--trials", mc_opts.trials,
                         "trials per cell (monspec always runs 1)");
  montecarlo->add_option("--seed", mc_opts.seed, "master seed")
      ->envname("SUBSETFORGE_SEED");
  montecarlo->add_option("--workers", mc_opts.workers,
                         "worker threads (0 = all cores)");
  montecarlo->add_option("--out", mc_opts.out_path, "output CSV path")
      ->required();
  montecarlo->callback([&] { run_montecarlo(mc_opts, command_line); });

  BenchOptions bench_opts;
  auto* bench = app.add_subcommand(
      "bench", "measure per-draw wall-clock time of the samplers");
  bench->add_option("--index", bench_opts.index_path, "annotation index")
      ->required()->check(CLI::ExistingFile);
  bench->add_option("--methods", bench_opts.methods,
                    "comma-separated methods")->delimiter(',');
  auto* bench_fraction = bench->add_option("--fraction", bench_opts.fraction,
                                           "subset size as a fraction of D");
  bench->add_option("--count", bench_opts.count,
                    "subset size as an absolute sample count")
      ->excludes(bench_fraction);
  bench->add_option("--runs", bench_opts.runs, "measured draws per method");
  bench->add_option("--seed", bench_opts.seed, "seed for seeded methods")
      ->envname("SUBSETFORGE_SEED");
  bench->add_option("--out", bench_opts.out_path,
                    "output path (default: stdout)");
  bench->callback([&] { run_bench(bench_opts, command_line); });

  SynthOptions synth_opts;
  auto* synth = app.add_subcommand(
      "synth", "generate a deterministic long-tailed synthetic index");
  synth->add_option("--classes", synth_opts.classes, "number of classes")
      ->required();
  synth->add_option("--samples", synth_opts.samples, "number of samples")
      ->required();
  synth->add_option("--tail-exponent", synth_opts.tail_exponent,
                    "power-law exponent of class popularity");
  synth->add_option("--mean-objects", synth_opts.mean_objects,
                    "expected objects per sample");
  synth->add_option("--seed", synth_opts.seed, "generator seed")
      ->envname("SUBSETFORGE_SEED");
  synth->add_option("--out", synth_opts.out_path, "output .clsidx path")
      ->required();
  synth->callback([&] { run_synth(synth_opts, command_line); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

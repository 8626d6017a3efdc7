// Copyright 2026 the npr-toolkit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "npr/corpus.hpp"
#include "npr/embed.hpp"
#include "npr/geo.hpp"
#include "npr/geodesy.hpp"
#include "npr/image_io.hpp"
#include "npr/manifest.hpp"
#include "npr/parallel.hpp"
#include "npr/photometry.hpp"
#include "npr/report.hpp"
#include "npr/retrieval.hpp"
#include "npr/router.hpp"
#include "npr/solar.hpp"
#include "npr/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string now_rfc3339() {
  const auto now = std::chrono::system_clock::now();
  return npr::format_rfc3339(std::chrono::duration_cast<std::chrono::seconds>(
                                 now.time_since_epoch())
                                 .count());
}

struct GlobalOptions {
  unsigned threads = npr::default_thread_count();
  std::uint64_t seed = 42;
};

npr::RunManifest start_manifest(const std::string& subcommand, const GlobalOptions& global,
                                const std::map<std::string, std::string>& flags) {
  npr::RunManifest m;
  m.subcommand = subcommand;
  m.flags = flags;
  m.flags["threads"] = std::to_string(global.threads);
  m.flags["seed"] = std::to_string(global.seed);
  m.seed = global.seed;
  m.started_utc = now_rfc3339();
  return m;
}

void finish_manifest(npr::RunManifest& m, const fs::path& beside_output) {
  m.finished_utc = now_rfc3339();
  fs::path path = beside_output;
  path += ".manifest.json";
  m.write(path);
}

void print_effective_config(const std::string& subcommand,
                            const std::map<std::string, std::string>& flags) {
  std::ostringstream line;
  line << "npr " << subcommand << ":";
  for (const auto& [k, v] : flags) line << ' ' << k << '=' << v;
  std::cerr << line.str() << '\n';
}

std::vector<fs::path> list_images(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<int> parse_n_list(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  if (out.empty()) throw npr::Error("empty N list");
  return out;
}

json head_to_json(const npr::TrainResult& trained) {
  json j;
  j["in_dim"] = trained.head.weights.cols;
  j["out_dim"] = trained.head.weights.rows;
  j["weights"] = trained.head.weights.data;
  if (trained.class_weights.rows > 0) {
    j["class_count"] = trained.class_weights.rows;
    j["class_weights"] = trained.class_weights.data;
  }
  return j;
}

npr::ProjectionHead load_head(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw npr::Error("cannot open head file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw npr::ParseError("bad head file " + path.string() + ": " + e.what());
  }
  npr::ProjectionHead head;
  head.weights = npr::Mat(j.at("out_dim").get<std::size_t>(), j.at("in_dim").get<std::size_t>());
  const auto values = j.at("weights").get<std::vector<double>>();
  if (values.size() != head.weights.data.size()) {
    throw npr::ParseError("head weight count does not match dimensions in " + path.string());
  }
  head.weights.data = values;
  return head;
}

// Simple key = value config file (TOML-style subset) for night-sim.
std::map<std::string, std::string> read_kv_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw npr::Error("cannot open config file: " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) {
        throw npr::ParseError("config line " + std::to_string(line_no) + ": expected key = value");
      }
      continue;
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r\"");
      const auto e = s.find_last_not_of(" \t\r\"");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

std::vector<npr::RetrievalResult> read_results_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw npr::Error("cannot open results file: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "query_id,rank,db_id,score") {
    throw npr::ParseError("bad results header in " + path.string());
  }
  std::vector<npr::RetrievalResult> results;
  std::map<std::string, std::size_t> index;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string qid, rank_s, db_id, score_s;
    if (!std::getline(ss, qid, ',') || !std::getline(ss, rank_s, ',') ||
        !std::getline(ss, db_id, ',') || !std::getline(ss, score_s)) {
      throw npr::ParseError("bad results row at line " + std::to_string(line_no));
    }
    auto it = index.find(qid);
    if (it == index.end()) {
      index.emplace(qid, results.size());
      results.push_back(npr::RetrievalResult{qid, {}, false});
      it = index.find(qid);
    }
    results[it->second].ranked.emplace_back(db_id, std::stod(score_s));
  }
  return results;
}

void write_results_csv(const std::vector<npr::RetrievalResult>& results, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw npr::Error("cannot open output file: " + path.string());
  out << "query_id,rank,db_id,score\n";
  for (const auto& r : results) {
    for (std::size_t i = 0; i < r.ranked.size(); ++i) {
      char score[40];
      std::snprintf(score, sizeof score, "%.10g", r.ranked[i].second);
      out << r.query_id << ',' << i + 1 << ',' << r.ranked[i].first << ',' << score << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Subcommands. Each returns the process exit code.
// ---------------------------------------------------------------------------

int run_ingest(const GlobalOptions& global, const fs::path& metadata, const fs::path& image_root,
               const fs::path& out) {
  std::map<std::string, std::string> flags{{"metadata", metadata.string()},
                                           {"image-root", image_root.string()},
                                           {"out", out.string()}};
  print_effective_config("ingest", flags);
  auto manifest = start_manifest("ingest", global, flags);
  manifest.add_input(metadata);

  const npr::Corpus corpus = npr::load_corpus(metadata, image_root);
  npr::save_corpus(corpus, out, image_root);
  finish_manifest(manifest, out);
  std::cout << "ingested " << corpus.records.size() << " records ("
            << corpus.database_records().size() << " database, "
            << corpus.query_records().size() << " query)\n";
  return 0;
}

int run_night_sim(const GlobalOptions& global, const fs::path& input_dir,
                  const fs::path& output_dir, npr::NightParams params,
                  const std::optional<fs::path>& config) {
  if (config) {
    const auto kv = read_kv_config(*config);
    auto get = [&](const char* key, double fallback) {
      auto it = kv.find(key);
      return it == kv.end() ? fallback : std::stod(it->second);
    };
    params.exposure_gain = get("exposure_gain", params.exposure_gain);
    params.gamma = get("gamma", params.gamma);
    params.wb_shift[0] = get("wb_r", params.wb_shift[0]);
    params.wb_shift[1] = get("wb_g", params.wb_shift[1]);
    params.wb_shift[2] = get("wb_b", params.wb_shift[2]);
    params.vignette_strength = get("vignette", params.vignette_strength);
    params.noise_sigma = get("noise_sigma", params.noise_sigma);
    params.light_count = static_cast<int>(get("light_count", params.light_count));
  }
  params.seed = global.seed;
  params.validate();

  std::map<std::string, std::string> flags{
      {"input-dir", input_dir.string()},     {"output-dir", output_dir.string()},
      {"gain", std::to_string(params.exposure_gain)},
      {"gamma", std::to_string(params.gamma)},
      {"wb", std::to_string(params.wb_shift[0]) + "," + std::to_string(params.wb_shift[1]) + "," +
                 std::to_string(params.wb_shift[2])},
      {"vignette", std::to_string(params.vignette_strength)},
      {"noise-sigma", std::to_string(params.noise_sigma)},
      {"lights", std::to_string(params.light_count)}};
  print_effective_config("night-sim", flags);
  auto manifest = start_manifest("night-sim", global, flags);

  const auto files = list_images(input_dir);
  if (files.empty()) throw npr::Error("no images found in " + input_dir.string());
  fs::create_directories(output_dir);

  npr::parallel_for(files.size(), global.threads, [&](std::size_t i) {
    const npr::Image img = npr::load_image(files[i]);
    npr::NightParams per_image = params;
    per_image.seed = npr::hash_mix(global.seed, npr::fnv1a64(files[i].filename().string()));
    const npr::Image night = npr::night_transform(img, per_image);
    npr::save_image_png(output_dir / (files[i].stem().string() + ".png"), night);
  });

  // Provenance: the parameters used, serialized beside the rendered images.
  json pj;
  pj["exposure_gain"] = params.exposure_gain;
  pj["gamma"] = params.gamma;
  pj["wb_shift"] = params.wb_shift;
  pj["vignette_strength"] = params.vignette_strength;
  pj["noise_sigma"] = params.noise_sigma;
  pj["light_count"] = params.light_count;
  pj["seed"] = global.seed;
  std::ofstream pout(output_dir / "night_params.json", std::ios::binary);
  pout << pj.dump(2) << '\n';

  finish_manifest(manifest, output_dir / "night_sim");
  std::cout << "rendered " << files.size() << " images\n";
  return 0;
}

int run_luminance(const GlobalOptions& global, const fs::path& input, double threshold,
                  const std::optional<fs::path>& out_path) {
  std::map<std::string, std::string> flags{{"input", input.string()},
                                           {"threshold", std::to_string(threshold)}};
  print_effective_config("luminance", flags);

  std::vector<fs::path> files;
  if (fs::is_directory(input)) {
    files = list_images(input);
  } else {
    files.push_back(input);
  }
  if (files.empty()) throw npr::Error("no images found in " + input.string());

  std::vector<double> lums(files.size());
  npr::parallel_for(files.size(), global.threads,
                    [&](std::size_t i) { lums[i] = npr::mean_luminance(npr::load_image(files[i])); });

  std::ostringstream body;
  body << "path,luminance,label\n";
  for (std::size_t i = 0; i < files.size(); ++i) {
    char lum[40];
    std::snprintf(lum, sizeof lum, "%.10g", lums[i]);
    body << files[i].filename().string() << ',' << lum << ','
         << (npr::classify_by_brightness(lums[i], threshold) == npr::DayNight::Night ? "night"
                                                                                     : "day")
         << '\n';
  }
  if (out_path) {
    std::ofstream out(*out_path, std::ios::binary);
    if (!out) throw npr::Error("cannot open output file: " + out_path->string());
    out << body.str();
    auto manifest = start_manifest("luminance", global, flags);
    finish_manifest(manifest, *out_path);
  } else {
    std::cout << body.str();
  }
  return 0;
}

int run_solar(double lat, double lon, const std::string& date_s,
              const std::optional<std::string>& time_s, double zenith) {
  const npr::CivilDate date = npr::parse_civil_date(date_s);
  std::map<std::string, std::string> flags{{"lat", std::to_string(lat)},
                                           {"lon", std::to_string(lon)},
                                           {"date", date_s},
                                           {"zenith", std::to_string(zenith)}};
  print_effective_config("solar", flags);

  const auto sunrise = npr::sunrise_utc(lat, lon, date, zenith);
  const auto sunset = npr::sunset_utc(lat, lon, date, zenith);
  std::cout << "sunrise_utc=" << (sunrise ? npr::format_rfc3339(*sunrise) : "none") << '\n';
  std::cout << "sunset_utc=" << (sunset ? npr::format_rfc3339(*sunset) : "none") << '\n';

  npr::UnixSeconds when;
  if (time_s) {
    when = npr::parse_rfc3339(date_s + "T" + *time_s + "Z");
  } else {
    when = npr::to_unix_seconds(date, 12, 0, 0);
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", npr::solar_elevation_deg(lat, lon, when));
  std::cout << "elevation_deg_at_" << npr::format_rfc3339(when) << '=' << buf << '\n';
  return 0;
}

int run_partition(const GlobalOptions& global, const fs::path& corpus_path, double cell_size,
                  int heading_bins, const fs::path& out) {
  std::map<std::string, std::string> flags{{"corpus", corpus_path.string()},
                                           {"cell-size", std::to_string(cell_size)},
                                           {"heading-bins", std::to_string(heading_bins)},
                                           {"out", out.string()}};
  print_effective_config("partition", flags);
  auto manifest = start_manifest("partition", global, flags);
  manifest.add_input(corpus_path);

  const npr::Corpus corpus = npr::load_corpus(corpus_path, "");
  const auto classes = npr::partition_classes(corpus, cell_size, heading_bins);
  std::ofstream outf(out, std::ios::binary);
  if (!outf) throw npr::Error("cannot open output file: " + out.string());
  for (const auto& cls : classes) {
    json j;
    j["cell_east_idx"] = cls.cell_east_idx;
    j["cell_north_idx"] = cls.cell_north_idx;
    j["heading_bin"] = cls.heading_bin;
    j["member_ids"] = cls.member_ids;
    outf << j.dump() << '\n';
  }
  finish_manifest(manifest, out);
  std::cout << "partitioned " << corpus.database_records().size() << " records into "
            << classes.size() << " classes\n";
  return 0;
}

int run_mine(const GlobalOptions& global, const fs::path& corpus_path, double r_pos, double r_neg,
             int per_anchor, const fs::path& out, const std::optional<fs::path>& skip_report) {
  std::map<std::string, std::string> flags{{"corpus", corpus_path.string()},
                                           {"r-pos", std::to_string(r_pos)},
                                           {"r-neg", std::to_string(r_neg)},
                                           {"per-anchor", std::to_string(per_anchor)},
                                           {"out", out.string()}};
  print_effective_config("mine", flags);
  auto manifest = start_manifest("mine", global, flags);
  manifest.add_input(corpus_path);

  const npr::Corpus corpus = npr::load_corpus(corpus_path, "");
  const npr::MiningResult mined = npr::mine_triplets(corpus, r_pos, r_neg, per_anchor, global.seed);
  std::ofstream outf(out, std::ios::binary);
  if (!outf) throw npr::Error("cannot open output file: " + out.string());
  for (const auto& t : mined.triplets) {
    json j;
    j["anchor"] = t.anchor_id;
    j["positive"] = t.positive_id;
    j["negative"] = t.negative_id;
    outf << j.dump() << '\n';
  }
  if (skip_report) {
    std::ofstream sk(*skip_report, std::ios::binary);
    sk << json(mined.skipped_anchor_ids).dump(2) << '\n';
  }
  finish_manifest(manifest, out);
  std::cout << "mined " << mined.triplets.size() << " triplets; skipped "
            << mined.skipped_anchor_ids.size() << " anchors without positives\n";
  return 0;
}

int run_embed(const GlobalOptions& global, const fs::path& corpus_path, const fs::path& image_root,
              const std::optional<fs::path>& head_path, const fs::path& out) {
  std::map<std::string, std::string> flags{{"corpus", corpus_path.string()},
                                           {"image-root", image_root.string()},
                                           {"out", out.string()}};
  if (head_path) flags["head"] = head_path->string();
  print_effective_config("embed", flags);
  auto manifest = start_manifest("embed", global, flags);
  manifest.add_input(corpus_path);
  if (head_path) manifest.add_input(*head_path);

  const npr::Corpus corpus = npr::load_corpus(corpus_path, image_root);
  std::optional<npr::ProjectionHead> head;
  if (head_path) head = load_head(*head_path);

  std::vector<std::pair<std::string, npr::EmbeddingVector>> rows(corpus.records.size());
  npr::parallel_for(corpus.records.size(), global.threads, [&](std::size_t i) {
    const auto& rec = corpus.records[i];
    npr::EmbeddingVector v = npr::baseline_descriptor(npr::load_image(rec.image_path));
    if (head) v = head->apply(v);
    rows[i] = {rec.id, std::move(v)};
  });
  std::map<std::string, npr::EmbeddingVector> embeddings;
  for (auto& [id, vec] : rows) embeddings.emplace(std::move(id), std::move(vec));

  npr::write_npre(out, embeddings);
  finish_manifest(manifest, out);
  std::cout << "embedded " << embeddings.size() << " images (dim "
            << embeddings.begin()->second.dim() << ")\n";
  return 0;
}

int run_train(const GlobalOptions& global, const fs::path& descriptors_path,
              const std::optional<fs::path>& triplets_path,
              const std::optional<fs::path>& classes_path, npr::TrainConfig cfg, bool fine_tune,
              bool lr_given, const fs::path& out, const std::optional<fs::path>& history) {
  if (fine_tune && !lr_given) cfg.learning_rate = npr::kFineTuneLearningRate;
  cfg.seed = global.seed;

  std::map<std::string, std::string> flags{
      {"descriptors", descriptors_path.string()},
      {"loss", cfg.loss == npr::LossKind::Triplet ? "triplet" : "lmcl"},
      {"lr", std::to_string(cfg.learning_rate)},
      {"epochs", std::to_string(cfg.epochs)},
      {"batch-size", std::to_string(cfg.batch_size)},
      {"out-dim", std::to_string(cfg.out_dim)},
      {"out", out.string()}};
  print_effective_config("train", flags);
  auto manifest = start_manifest("train", global, flags);
  manifest.add_input(descriptors_path);

  const auto descriptors = npr::read_npre(descriptors_path);
  npr::TrainResult trained;
  if (triplets_path) {
    manifest.add_input(*triplets_path);
    std::ifstream in(*triplets_path);
    if (!in) throw npr::Error("cannot open triplets file: " + triplets_path->string());
    std::vector<npr::Triplet> triplets;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      triplets.push_back(npr::Triplet{j.at("anchor").get<std::string>(),
                                      j.at("positive").get<std::string>(),
                                      j.at("negative").get<std::string>()});
    }
    cfg.loss = npr::LossKind::Triplet;
    trained = npr::train_projection(descriptors, triplets, cfg);
  } else if (classes_path) {
    manifest.add_input(*classes_path);
    std::ifstream in(*classes_path);
    if (!in) throw npr::Error("cannot open classes file: " + classes_path->string());
    std::vector<npr::GeoClass> classes;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      npr::GeoClass cls;
      cls.cell_east_idx = j.at("cell_east_idx").get<std::int64_t>();
      cls.cell_north_idx = j.at("cell_north_idx").get<std::int64_t>();
      cls.heading_bin = j.at("heading_bin").get<int>();
      cls.member_ids = j.at("member_ids").get<std::vector<std::string>>();
      classes.push_back(std::move(cls));
    }
    cfg.loss = npr::LossKind::Lmcl;
    trained = npr::train_projection(descriptors, classes, cfg);
  } else {
    throw npr::Error("train requires --triplets or --classes");
  }

  std::ofstream outf(out, std::ios::binary);
  if (!outf) throw npr::Error("cannot open output file: " + out.string());
  outf << head_to_json(trained).dump() << '\n';
  if (history) {
    std::ofstream h(*history, std::ios::binary);
    h << "epoch,mean_loss\n";
    for (std::size_t e = 0; e < trained.epoch_mean_loss.size(); ++e) {
      char loss[40];
      std::snprintf(loss, sizeof loss, "%.10g", trained.epoch_mean_loss[e]);
      h << e << ',' << loss << '\n';
    }
  }
  finish_manifest(manifest, out);
  std::cout << "trained head in " << cfg.epochs << " epochs; final mean loss "
            << trained.epoch_mean_loss.back() << '\n';
  return 0;
}

int run_index(const GlobalOptions& global, const fs::path& embeddings_path, const fs::path& out) {
  std::map<std::string, std::string> flags{{"embeddings", embeddings_path.string()},
                                           {"out", out.string()}};
  print_effective_config("index", flags);
  auto manifest = start_manifest("index", global, flags);
  manifest.add_input(embeddings_path);

  const auto embeddings = npr::read_npre(embeddings_path);
  const npr::RetrievalIndex index = npr::build_index(embeddings);  // validates
  npr::write_npre(out, embeddings);                                // canonical id-sorted form
  finish_manifest(manifest, out);
  std::cout << "indexed " << index.size() << " embeddings (dim " << index.dim << ")\n";
  return 0;
}

int run_search(const GlobalOptions& global, const fs::path& index_path, const fs::path& queries_path,
               std::size_t k, const fs::path& out) {
  std::map<std::string, std::string> flags{{"index", index_path.string()},
                                           {"queries", queries_path.string()},
                                           {"k", std::to_string(k)},
                                           {"out", out.string()}};
  print_effective_config("search", flags);
  auto manifest = start_manifest("search", global, flags);
  manifest.add_input(index_path);
  manifest.add_input(queries_path);

  const npr::RetrievalIndex index = npr::build_index(npr::read_npre(index_path));
  const auto queries = npr::read_npre(queries_path);
  const auto results = npr::knn_batch(index, queries, k, global.threads);
  write_results_csv(results, out);
  finish_manifest(manifest, out);
  std::cout << "searched " << results.size() << " queries against " << index.size()
            << " database embeddings\n";
  return 0;
}

int run_eval(const GlobalOptions& global, const fs::path& results_path, const fs::path& corpus_path,
             const std::string& n_list, double threshold, bool sunset_split, double zenith,
             double sunset_offset, const fs::path& out, const std::optional<fs::path>& svg) {
  std::map<std::string, std::string> flags{{"results", results_path.string()},
                                           {"corpus", corpus_path.string()},
                                           {"n", n_list},
                                           {"threshold", std::to_string(threshold)},
                                           {"sunset-split", sunset_split ? "true" : "false"},
                                           {"out", out.string()}};
  print_effective_config("eval", flags);
  auto manifest = start_manifest("eval", global, flags);
  manifest.add_input(results_path);
  manifest.add_input(corpus_path);

  const auto results = read_results_csv(results_path);
  const npr::Corpus corpus = npr::load_corpus(corpus_path, "");
  const auto n_values = parse_n_list(n_list);

  npr::EvalReport report;
  if (sunset_split) {
    npr::SolarConfig solar{zenith, sunset_offset};
    report = npr::sunset_split_eval(results, corpus, solar, n_values, threshold);
  } else {
    report = npr::recall_at_n(results, corpus, n_values, threshold);
  }
  npr::write_report_csv(report, out);
  if (svg) npr::write_recall_curve_svg(report, *svg);
  finish_manifest(manifest, out);

  for (const auto& bucket : report.buckets) {
    std::cout << bucket.name << " (" << bucket.query_count << " queries):";
    for (const auto& [n, r] : bucket.recall_at) {
      char buf[48];
      std::snprintf(buf, sizeof buf, " R@%d=%.4f", n, r);
      std::cout << buf;
    }
    std::cout << '\n';
  }
  return 0;
}

int run_route_eval(const GlobalOptions& global, const fs::path& corpus_path,
                   const fs::path& image_root, const fs::path& day_index_path,
                   const fs::path& night_index_path, const fs::path& day_head_path,
                   const fs::path& night_head_path, const std::string& mode_s,
                   double brightness_threshold, double zenith, double sunset_offset, std::size_t k,
                   const std::string& n_list, double threshold, const fs::path& out,
                   const std::optional<fs::path>& tags_path) {
  std::map<std::string, std::string> flags{{"corpus", corpus_path.string()},
                                           {"image-root", image_root.string()},
                                           {"day-index", day_index_path.string()},
                                           {"night-index", night_index_path.string()},
                                           {"day-head", day_head_path.string()},
                                           {"night-head", night_head_path.string()},
                                           {"mode", mode_s},
                                           {"brightness-threshold", std::to_string(brightness_threshold)},
                                           {"k", std::to_string(k)},
                                           {"n", n_list},
                                           {"out", out.string()}};
  print_effective_config("route-eval", flags);
  auto manifest = start_manifest("route-eval", global, flags);
  for (const auto& p : {corpus_path, day_index_path, night_index_path, day_head_path,
                        night_head_path}) {
    manifest.add_input(p);
  }

  npr::RouteConfig cfg;
  if (mode_s == "brightness") {
    cfg.mode = npr::RouteMode::Brightness;
  } else if (mode_s == "solar") {
    cfg.mode = npr::RouteMode::SolarTime;
  } else if (mode_s == "hybrid") {
    cfg.mode = npr::RouteMode::Hybrid;
  } else {
    throw npr::Error("unknown route mode \"" + mode_s + "\"");
  }
  cfg.brightness_threshold = brightness_threshold;
  cfg.solar = npr::SolarConfig{zenith, sunset_offset};

  const npr::Corpus corpus = npr::load_corpus(corpus_path, image_root);
  const npr::ProjectionHead day_head = load_head(day_head_path);
  const npr::ProjectionHead night_head = load_head(night_head_path);

  auto make_pipeline = [](std::string id, const npr::ProjectionHead& head,
                          const fs::path& index_path) {
    npr::Pipeline p;
    p.id = std::move(id);
    p.index = npr::build_index(npr::read_npre(index_path));
    p.embedder = [&head](const npr::Image& img) {
      return head.apply(npr::baseline_descriptor(img));
    };
    return p;
  };
  npr::Router router(cfg, make_pipeline("day", day_head, day_index_path),
                     make_pipeline("night", night_head, night_index_path));

  std::vector<npr::RetrievalResult> day_results, night_results;
  std::vector<npr::RouteTag> tags;
  for (const auto& rec : corpus.records) {
    if (rec.role != npr::Role::Query) continue;
    const npr::Image img = npr::load_image(rec.image_path);
    const npr::RoutedResult routed = router.search(rec, img, k);
    tags.push_back(npr::RouteTag{rec.id, routed.decision.label, routed.decision.rule,
                                 routed.decision.metric});
    (routed.decision.label == npr::DayNight::Night ? night_results : day_results)
        .push_back(routed.result);
  }

  const auto n_values = parse_n_list(n_list);
  npr::EvalReport day_report, night_report;
  if (!day_results.empty()) day_report = npr::recall_at_n(day_results, corpus, n_values, threshold);
  if (!night_results.empty()) {
    night_report = npr::recall_at_n(night_results, corpus, n_values, threshold);
  }
  const npr::EvalReport report = npr::dc_report(day_report, night_report, tags);
  npr::write_report_csv(report, out);
  if (tags_path) npr::write_route_tags_csv(tags, *tags_path);
  finish_manifest(manifest, out);

  std::cout << "routed " << tags.size() << " queries (" << day_results.size() << " day, "
            << night_results.size() << " night)\n";
  for (const auto& bucket : report.buckets) {
    std::cout << bucket.name << " (" << bucket.query_count << " queries):";
    for (const auto& [n, r] : bucket.recall_at) {
      char buf[48];
      std::snprintf(buf, sizeof buf, " R@%d=%.4f", n, r);
      std::cout << buf;
    }
    std::cout << '\n';
  }
  return 0;
}

int run_report(const fs::path& eval_csv, const fs::path& svg, double threshold) {
  std::map<std::string, std::string> flags{{"eval", eval_csv.string()}, {"svg", svg.string()}};
  print_effective_config("report", flags);
  const npr::EvalReport report = npr::read_report_csv(eval_csv, threshold);
  npr::write_recall_curve_svg(report, svg);
  for (const auto& bucket : report.buckets) {
    std::cout << bucket.name << " (" << bucket.query_count << " queries):";
    for (const auto& [n, r] : bucket.recall_at) {
      char buf[48];
      std::snprintf(buf, sizeof buf, " R@%d=%.4f", n, r);
      std::cout << buf;
    }
    std::cout << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nocturnal place recognition toolkit"};
  app.set_version_flag("--version", std::string("npr ") + npr::kToolkitVersion +
                                        " (npre format v" +
                                        std::to_string(npr::kNpreFormatVersion) + ")");
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--threads", global.threads, "worker thread cap")->capture_default_str();
  app.add_option("--seed", global.seed, "seed for all randomness")->capture_default_str();

  // ingest
  fs::path in_metadata, in_image_root, in_out;
  auto* ingest = app.add_subcommand("ingest", "validate and canonicalize a JSONL corpus");
  ingest->add_option("--metadata", in_metadata, "JSONL metadata file")->required();
  ingest->add_option("--image-root", in_image_root, "directory image paths resolve against")
      ->required();
  ingest->add_option("--out", in_out, "canonical corpus output")->required();

  // night-sim
  fs::path ns_in, ns_out;
  std::optional<fs::path> ns_config;
  npr::NightParams ns_params;
  auto* night_sim = app.add_subcommand("night-sim", "render synthetic night copies of images");
  night_sim->add_option("--input-dir", ns_in)->required();
  night_sim->add_option("--output-dir", ns_out)->required();
  night_sim->add_option("--config", ns_config, "key = value parameter file");
  night_sim->add_option("--gain", ns_params.exposure_gain)->capture_default_str();
  night_sim->add_option("--gamma", ns_params.gamma)->capture_default_str();
  night_sim->add_option("--wb-r", ns_params.wb_shift[0])->capture_default_str();
  night_sim->add_option("--wb-g", ns_params.wb_shift[1])->capture_default_str();
  night_sim->add_option("--wb-b", ns_params.wb_shift[2])->capture_default_str();
  night_sim->add_option("--vignette", ns_params.vignette_strength)->capture_default_str();
  night_sim->add_option("--noise-sigma", ns_params.noise_sigma)->capture_default_str();
  night_sim->add_option("--lights", ns_params.light_count)->capture_default_str();

  // luminance
  fs::path lum_in;
  double lum_threshold = npr::kDefaultBrightnessThreshold;
  std::optional<fs::path> lum_out;
  auto* luminance = app.add_subcommand("luminance", "mean luminance and brightness labels");
  luminance->add_option("--input", lum_in, "image file or directory")->required();
  luminance->add_option("--threshold", lum_threshold)->capture_default_str();
  luminance->add_option("--out", lum_out, "CSV output (stdout when absent)");

  // solar
  double so_lat = 0.0, so_lon = 0.0, so_zenith = 90.833;
  std::string so_date;
  std::optional<std::string> so_time;
  auto* solar = app.add_subcommand("solar", "sunrise/sunset and solar elevation");
  solar->add_option("--lat", so_lat)->required();
  solar->add_option("--lon", so_lon)->required();
  solar->add_option("--date", so_date, "YYYY-MM-DD (UTC-anchored local solar day)")->required();
  solar->add_option("--time", so_time, "HH:MM:SS UTC for the elevation printout");
  solar->add_option("--zenith", so_zenith, "sunset zenith angle")->capture_default_str();

  // partition
  fs::path pa_corpus, pa_out;
  double pa_cell = 10.0;
  int pa_bins = 12;
  auto* partition = app.add_subcommand("partition", "geographic class partitioning");
  partition->add_option("--corpus", pa_corpus)->required();
  partition->add_option("--cell-size", pa_cell, "cell edge in meters")->capture_default_str();
  partition->add_option("--heading-bins", pa_bins)->capture_default_str();
  partition->add_option("--out", pa_out)->required();

  // mine
  fs::path mi_corpus, mi_out;
  std::optional<fs::path> mi_skip;
  double mi_rpos = 10.0, mi_rneg = 25.0;
  int mi_per_anchor = 4;
  auto* mine = app.add_subcommand("mine", "GPS triplet mining");
  mine->add_option("--corpus", mi_corpus)->required();
  mine->add_option("--r-pos", mi_rpos, "positive radius, meters")->capture_default_str();
  mine->add_option("--r-neg", mi_rneg, "negative radius, meters")->capture_default_str();
  mine->add_option("--per-anchor", mi_per_anchor)->capture_default_str();
  mine->add_option("--out", mi_out)->required();
  mine->add_option("--skip-report", mi_skip, "JSON list of anchors without positives");

  // embed
  fs::path em_corpus, em_root, em_out;
  std::optional<fs::path> em_head;
  auto* embed = app.add_subcommand("embed", "compute descriptors (optionally projected)");
  embed->add_option("--corpus", em_corpus)->required();
  embed->add_option("--image-root", em_root)->required();
  embed->add_option("--head", em_head, "projection head JSON to apply");
  embed->add_option("--out", em_out, "NPRE output")->required();

  // train
  fs::path tr_desc, tr_out;
  std::optional<fs::path> tr_triplets, tr_classes, tr_history;
  npr::TrainConfig tr_cfg;
  bool tr_fine_tune = false;
  std::string tr_loss = "triplet", tr_neg = "random";
  auto* train = app.add_subcommand("train", "train a projection head");
  train->add_option("--descriptors", tr_desc, "NPRE descriptor file")->required();
  train->add_option("--triplets", tr_triplets, "triplet JSONL (triplet pipeline)");
  train->add_option("--classes", tr_classes, "class JSONL (classification pipeline)");
  train->add_option("--loss", tr_loss, "triplet|lmcl")->capture_default_str();
  train->add_option("--margin", tr_cfg.margin)->capture_default_str();
  train->add_option("--scale", tr_cfg.lmcl.s, "LMCL scale s")->capture_default_str();
  train->add_option("--lmcl-margin", tr_cfg.lmcl.m, "LMCL margin m")->capture_default_str();
  auto* lr_opt = train->add_option("--lr", tr_cfg.learning_rate)->capture_default_str();
  train->add_option("--epochs", tr_cfg.epochs)->capture_default_str();
  train->add_option("--batch-size", tr_cfg.batch_size)->capture_default_str();
  train->add_option("--out-dim", tr_cfg.out_dim)->capture_default_str();
  train->add_option("--negatives", tr_neg, "random|hardest")->capture_default_str();
  train->add_flag("--fine-tune", tr_fine_tune, "use the fine-tuning learning rate default");
  train->add_option("--out", tr_out, "head JSON output")->required();
  train->add_option("--history", tr_history, "loss history CSV");

  // index
  fs::path ix_embeddings, ix_out;
  auto* index_cmd = app.add_subcommand("index", "validate and canonicalize an NPRE index");
  index_cmd->add_option("--embeddings", ix_embeddings)->required();
  index_cmd->add_option("--out", ix_out)->required();

  // search
  fs::path se_index, se_queries, se_out;
  std::size_t se_k = 5;
  auto* search = app.add_subcommand("search", "exact cosine k-nearest-neighbor search");
  search->add_option("--index", se_index)->required();
  search->add_option("--queries", se_queries)->required();
  search->add_option("--k", se_k)->capture_default_str();
  search->add_option("--out", se_out, "results CSV")->required();

  // eval
  fs::path ev_results, ev_corpus, ev_out;
  std::optional<fs::path> ev_svg;
  std::string ev_n = "1,5,10,20";
  double ev_threshold = npr::kDefaultRecallThresholdM;
  bool ev_sunset_split = false;
  double ev_zenith = 90.833, ev_offset = 0.0;
  auto* eval_cmd = app.add_subcommand("eval", "recall@N evaluation by condition");
  eval_cmd->add_option("--results", ev_results)->required();
  eval_cmd->add_option("--corpus", ev_corpus)->required();
  eval_cmd->add_option("--n", ev_n)->capture_default_str();
  eval_cmd->add_option("--threshold", ev_threshold, "meters")->capture_default_str();
  eval_cmd->add_flag("--sunset-split", ev_sunset_split, "re-split sunset queries by solar time");
  eval_cmd->add_option("--zenith", ev_zenith)->capture_default_str();
  eval_cmd->add_option("--sunset-offset", ev_offset, "minutes")->capture_default_str();
  eval_cmd->add_option("--out", ev_out, "report CSV")->required();
  eval_cmd->add_option("--svg", ev_svg, "recall curve SVG");

  // route-eval
  fs::path re_corpus, re_root, re_day_index, re_night_index, re_day_head, re_night_head, re_out;
  std::optional<fs::path> re_tags;
  std::string re_mode = "hybrid", re_n = "1,5,10,20";
  double re_bt = npr::kDefaultBrightnessThreshold, re_zenith = 90.833, re_offset = 0.0;
  double re_threshold = npr::kDefaultRecallThresholdM;
  std::size_t re_k = 20;
  auto* route_eval = app.add_subcommand("route-eval", "divide-and-conquer routed evaluation");
  route_eval->add_option("--corpus", re_corpus)->required();
  route_eval->add_option("--image-root", re_root)->required();
  route_eval->add_option("--day-index", re_day_index)->required();
  route_eval->add_option("--night-index", re_night_index)->required();
  route_eval->add_option("--day-head", re_day_head)->required();
  route_eval->add_option("--night-head", re_night_head)->required();
  route_eval->add_option("--mode", re_mode, "brightness|solar|hybrid")->capture_default_str();
  route_eval->add_option("--brightness-threshold", re_bt)->capture_default_str();
  route_eval->add_option("--zenith", re_zenith)->capture_default_str();
  route_eval->add_option("--sunset-offset", re_offset)->capture_default_str();
  route_eval->add_option("--k", re_k)->capture_default_str();
  route_eval->add_option("--n", re_n)->capture_default_str();
  route_eval->add_option("--threshold", re_threshold)->capture_default_str();
  route_eval->add_option("--out", re_out)->required();
  route_eval->add_option("--tags", re_tags, "route tag CSV");

  // report
  fs::path rp_eval, rp_svg;
  double rp_threshold = npr::kDefaultRecallThresholdM;
  auto* report = app.add_subcommand("report", "render a recall curve from an eval CSV");
  report->add_option("--eval", rp_eval)->required();
  report->add_option("--svg", rp_svg)->required();
  report->add_option("--threshold", rp_threshold)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // CLI11 prints usage/help; fold its exit codes into the documented
    // contract (0 for --help/--version, 1 for any usage error).
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*ingest) return run_ingest(global, in_metadata, in_image_root, in_out);
    if (*night_sim) return run_night_sim(global, ns_in, ns_out, ns_params, ns_config);
    if (*luminance) return run_luminance(global, lum_in, lum_threshold, lum_out);
    if (*solar) return run_solar(so_lat, so_lon, so_date, so_time, so_zenith);
    if (*partition) return run_partition(global, pa_corpus, pa_cell, pa_bins, pa_out);
    if (*mine) return run_mine(global, mi_corpus, mi_rpos, mi_rneg, mi_per_anchor, mi_out, mi_skip);
    if (*embed) return run_embed(global, em_corpus, em_root, em_head, em_out);
    if (*train) {
      if (tr_loss == "lmcl") {
        tr_cfg.loss = npr::LossKind::Lmcl;
      } else if (tr_loss == "triplet") {
        tr_cfg.loss = npr::LossKind::Triplet;
      } else {
        throw npr::Error("unknown loss \"" + tr_loss + "\"");
      }
      tr_cfg.negative_strategy = tr_neg == "hardest" ? npr::NegativeStrategy::HardestInBatch
                                                     : npr::NegativeStrategy::Random;
      return run_train(global, tr_desc, tr_triplets, tr_classes, tr_cfg, tr_fine_tune,
                       lr_opt->count() > 0, tr_out, tr_history);
    }
    if (*index_cmd) return run_index(global, ix_embeddings, ix_out);
    if (*search) return run_search(global, se_index, se_queries, se_k, se_out);
    if (*eval_cmd) {
      return run_eval(global, ev_results, ev_corpus, ev_n, ev_threshold, ev_sunset_split,
                      ev_zenith, ev_offset, ev_out, ev_svg);
    }
    if (*route_eval) {
      return run_route_eval(global, re_corpus, re_root, re_day_index, re_night_index, re_day_head,
                            re_night_head, re_mode, re_bt, re_zenith, re_offset, re_k, re_n,
                            re_threshold, re_out, re_tags);
    }
    if (*report) return run_report(rp_eval, rp_svg, rp_threshold);
  } catch (const npr::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

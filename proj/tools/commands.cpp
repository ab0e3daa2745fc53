// Copyright 2026 The protoseg Authors.
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

#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include "protoseg/image_io.hpp"
#include "protoseg/index.hpp"
#include "protoseg/prototype.hpp"
#include "protoseg/tensorio.hpp"

namespace protoseg::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

// Runs fn(i) for i in [0, n) on up to `threads` workers; rethrows the first
// failure after all workers stop.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  const auto count = static_cast<std::size_t>(std::max(1, threads));
  if (count == 1 || n < 2) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < std::min(count, n); ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
}

void check_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw UsageError("--gamma must lie in (0, 1)");
}
void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw UsageError("--alpha must lie in (0, 1]");
}
void check_beta(double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw UsageError("--beta must lie in [0, 1]");
}
void check_positive(int value, const char* flag) {
  if (value < 1) throw UsageError(std::string(flag) + " must be positive");
}

json felz_json(const FelzParams& p) { return {{"k", p.k}, {"sigma", p.sigma}, {"min_size", p.min_size}}; }

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("cannot write " + path.string());
}

void add_digest(json& inputs, const fs::path& path) { inputs[path.generic_string()] = file_digest(path); }

struct InferenceInput {
  std::string image_id;
  fs::path image;
  std::vector<fs::path> windows;
  fs::path image_embedding;
};

std::vector<InferenceInput> read_inference_inputs(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open inputs file " + path.string());
  const fs::path base = fs::absolute(path).parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
  std::vector<InferenceInput> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      InferenceInput item;
      item.image_id = j.at("image_id").get<std::string>();
      if (item.image_id.empty() || item.image_id.find_first_of("/\\") != std::string::npos) {
        throw ManifestError("image_id must be a non-empty file stem");
      }
      item.image = resolve(j.at("image").get<std::string>());
      for (const auto& w : j.at("windows")) item.windows.push_back(resolve(w.get<std::string>()));
      item.image_embedding = resolve(j.at("image_embedding").get<std::string>());
      out.push_back(std::move(item));
    } catch (const nlohmann::json::exception& e) {
      throw ManifestError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

RgbImage color_map(const LabelMap& labels) {
  RgbImage image(static_cast<int>(labels.rows()), static_cast<int>(labels.cols()));
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    const auto id = static_cast<unsigned>(labels.data()[i]);
    std::uint8_t rgb[3] = {0, 0, 0};
    if (id != static_cast<unsigned>(kUnknownLabel)) {
      // Pascal-style bit-interleaved palette.
      unsigned c = id + 1;
      for (int bit = 7; c != 0; --bit, c >>= 3) {
        for (int ch = 0; ch < 3; ++ch) rgb[ch] |= static_cast<std::uint8_t>(((c >> ch) & 1u) << bit);
      }
    }
    for (int ch = 0; ch < 3; ++ch) image.pixels[std::size_t(i) * 3 + std::size_t(ch)] = rgb[ch];
  }
  return image;
}

bool is_label_file(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".fdt" || ext == ".png" || ext == ".pgm";
}

}  // namespace

std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", md[i]);
    hex += byte;
  }
  return hex;
}

int cmd_masks(const MasksOptions& opt) {
  check_gamma(opt.gamma);
  check_positive(opt.threads, "--threads");
  const auto records = stage("load_manifest", [&] { return load_manifest(opt.manifest); });
  const fs::path mask_dir = opt.out_dir / "masks";
  fs::create_directories(mask_dir);

  // One line per (caption, noun): caption_id, noun, file, status.
  std::vector<std::vector<std::string>> lines(records.size());
  stage("attribution", [&] {
    parallel_for(records.size(), opt.threads, [&](std::size_t r) {
      const auto& rec = records[r];
      std::vector<int> tokens;
      for (const auto& n : rec.nouns) tokens.insert(tokens.end(), n.tokens.begin(), n.tokens.end());
      if (rec.nouns.empty()) return;
      const AttentionStack stack = load_attention_stack(rec.attention, tokens);
      for (std::size_t n = 0; n < rec.nouns.size(); ++n) {
        const auto& noun = rec.nouns[n];
        const std::string file = "masks/" + std::to_string(r) + "_" + std::to_string(n) + ".fdt";
        std::string status = "ok";
        try {
          const BinaryMask mask = localize_noun(rec, noun, stack, opt.gamma);
          if ((mask.array() == 0).all()) status = "empty";
          write_tensor(to_tensor(LabelMap(mask.cast<std::int32_t>())), opt.out_dir / file);
        } catch (const DegenerateMapError& e) {
          spdlog::warn("noun '{}' of caption '{}': {}", noun.noun, rec.caption_id, e.what());
          status = "degenerate";
        }
        lines[r].push_back(rec.caption_id + '\t' + noun.noun + '\t' + (status == "degenerate" ? "-" : file) + '\t' +
                           status);
      }
    });
  });

  std::ofstream list(opt.out_dir / "masks.tsv", std::ios::trunc);
  list << "caption_id\tnoun\tfile\tstatus\n";
  std::size_t written = 0;
  for (const auto& per_record : lines) {
    for (const auto& l : per_record) {
      list << l << '\n';
      ++written;
    }
  }
  json prov = {{"command", "masks"}, {"params", {{"gamma", opt.gamma}}}, {"inputs", json::object()}};
  add_digest(prov["inputs"], opt.manifest);
  write_json(prov, opt.out_dir / "provenance.json");
  std::cout << "wrote " << written << " localization masks to " << mask_dir.string() << '\n';
  return kExitOk;
}

int cmd_build_index(const BuildIndexOptions& opt) {
  check_gamma(opt.gamma);
  check_alpha(opt.alpha);
  check_positive(opt.top_k, "--topk");
  check_positive(opt.ef_search, "--ef-search");
  check_positive(opt.threads, "--threads");
  if (opt.hnsw) {
    if (opt.hnsw->m < 2) throw UsageError("--hnsw-m must be at least 2");
    check_positive(opt.hnsw->ef_construction, "--ef-construction");
  }
  const auto records = stage("load_manifest", [&] { return load_manifest(opt.manifest); });
  std::vector<SkippedNoun> skipped;
  const auto pairs = stage("generate_pairs", [&] {
    return generate_pairs(records, PairOptions{opt.gamma, opt.alpha, opt.threads}, &skipped);
  });
  if (pairs.empty()) throw StageError("generate_pairs", "no key/prototype pairs were produced");
  const auto index = stage("build_index", [&] {
    return PrototypeIndex::build(make_bundle(pairs), opt.hnsw, IndexParams{opt.top_k, opt.ef_search});
  });
  stage("save_index", [&] { index.save(opt.out_dir); });

  json params = {{"gamma", opt.gamma}, {"alpha", opt.alpha}, {"topk", opt.top_k}, {"ef_search", opt.ef_search}};
  if (opt.hnsw) params["hnsw"] = {{"m", opt.hnsw->m}, {"ef_construction", opt.hnsw->ef_construction}};
  json prov = {{"command", "build-index"}, {"params", params}, {"pairs", pairs.size()},
               {"skipped", skipped.size()},  {"inputs", json::object()}};
  add_digest(prov["inputs"], opt.manifest);
  write_json(prov, opt.out_dir / "provenance.json");
  std::cout << "indexed " << pairs.size() << " key/prototype pairs (" << skipped.size() << " nouns skipped)\n";
  return kExitOk;
}

int cmd_segment(const SegmentOptions& opt) {
  check_beta(opt.config.beta);
  check_positive(opt.retrieval.top_k, "--topk");
  check_positive(opt.retrieval.ef_search, "--ef-search");
  check_positive(opt.threads, "--threads");
  try {
    opt.config.validate();
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }

  const auto index = stage("load_index", [&] { return PrototypeIndex::load(opt.index_dir); });
  if (opt.retrieval.mode == SearchMode::Approximate && !index.has_graph()) {
    throw UsageError("--approx needs an index built with --hnsw");
  }
  const auto categories = stage("representatives", [&] {
    return build_representatives(index, load_categories(opt.categories, opt.category_embeds), opt.retrieval);
  });
  const auto inputs = stage("load_inputs", [&] { return read_inference_inputs(opt.inputs); });
  fs::create_directories(opt.out_dir);

  std::vector<std::string> mask_digests(inputs.size());
  stage("segment", [&] {
    parallel_for(inputs.size(), opt.threads, [&](std::size_t i) {
      const auto& item = inputs[i];
      try {
        const RgbImage image = read_image(item.image);
        std::vector<FeatureGridf> grids;
        for (const auto& w : item.windows) grids.push_back(tensor_to_feature_grid(read_tensor(w)));
        const Vectorf embed = tensor_to_vector(read_tensor(item.image_embedding));
        const auto result = segment(image, grids, embed, categories, opt.config);
        const fs::path mask_path = opt.out_dir / (item.image_id + ".fdt");
        write_tensor(to_tensor(result.mask.labels), mask_path);
        if (opt.color_map) write_ppm(color_map(result.mask.labels), opt.out_dir / (item.image_id + ".ppm"));
        mask_digests[i] = file_digest(mask_path);
      } catch (const std::exception& e) {
        throw Error("image '" + item.image_id + "': " + e.what());
      }
    });
  });

  json params = {
      {"beta", opt.config.beta},
      {"topk", opt.retrieval.top_k},
      {"search", opt.retrieval.mode == SearchMode::Exact ? "exact" : "approx"},
      {"ef_search", opt.retrieval.ef_search},
      {"preset", opt.config.preset},
      {"felz", felz_json(opt.config.felz)},
      {"unknown_threshold", opt.config.unknown_threshold ? json(*opt.config.unknown_threshold) : json(nullptr)},
      {"window", opt.config.windows.window},
      {"stride", opt.config.windows.stride},
      {"short_side", opt.config.windows.short_side},
      {"patch", opt.config.windows.patch},
  };
  json prov = {{"command", "segment"}, {"params", params}, {"inputs", json::object()}, {"outputs", json::object()}};
  for (const char* f : {"keys.fdt", "protos.fdt", "meta", "params"}) add_digest(prov["inputs"], opt.index_dir / f);
  add_digest(prov["inputs"], opt.categories);
  add_digest(prov["inputs"], opt.category_embeds);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    add_digest(prov["inputs"], inputs[i].image);
    for (const auto& w : inputs[i].windows) add_digest(prov["inputs"], w);
    add_digest(prov["inputs"], inputs[i].image_embedding);
    prov["outputs"][inputs[i].image_id + ".fdt"] = mask_digests[i];
  }
  write_json(prov, opt.out_dir / "provenance.json");
  std::cout << "segmented " << inputs.size() << " images into " << opt.out_dir.string() << '\n';
  return kExitOk;
}

int cmd_eval(const EvalOptions& opt) {
  const auto names = stage("categories", [&] { return read_category_names(opt.categories); });
  if (names.empty()) throw UsageError("categories file lists no categories");
  ConfusionMatrix cm(static_cast<int>(names.size()));

  std::vector<fs::path> gt_files;
  for (const auto& entry : fs::directory_iterator(opt.gt_dir)) {
    if (entry.is_regular_file() && is_label_file(entry.path())) gt_files.push_back(entry.path());
  }
  std::sort(gt_files.begin(), gt_files.end());
  if (gt_files.empty()) throw StageError("eval", "no ground-truth label maps in " + opt.gt_dir.string());

  stage("eval", [&] {
    for (const auto& gt_path : gt_files) {
      fs::path pred_path;
      for (const char* ext : {".fdt", ".png", ".pgm"}) {
        const fs::path candidate = opt.pred_dir / (gt_path.stem().string() + ext);
        if (fs::exists(candidate)) {
          pred_path = candidate;
          break;
        }
      }
      if (pred_path.empty()) throw Error("no prediction for " + gt_path.filename().string());
      try {
        cm.accumulate(read_label_map(pred_path), read_label_map(gt_path), opt.ignore_label);
      } catch (const std::exception& e) {
        throw Error(gt_path.filename().string() + ": " + e.what());
      }
    }
  });
  const auto result = stage("miou", [&] { return miou(cm); });
  const std::string report = format_report(result, names);
  std::cout << report;
  if (opt.report) {
    std::ofstream out(*opt.report, std::ios::trunc);
    out << report;
  }
  return kExitOk;
}

namespace {

void apply_config_file(const fs::path& path, SegmentOptions& opt) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
    if (j.contains("preset")) {
      opt.config.preset = j["preset"].get<std::string>();
      const auto p = felz_preset(opt.config.preset);
      if (!p) throw UsageError("unknown preset '" + opt.config.preset + "' in " + path.string());
      opt.config.felz = *p;
    }
    if (j.contains("felz")) {
      const auto& f = j["felz"];
      opt.config.felz.k = f.value("k", opt.config.felz.k);
      opt.config.felz.sigma = f.value("sigma", opt.config.felz.sigma);
      opt.config.felz.min_size = f.value("min_size", opt.config.felz.min_size);
    }
    opt.config.beta = j.value("beta", opt.config.beta);
    opt.retrieval.top_k = j.value("topk", opt.retrieval.top_k);
    opt.retrieval.ef_search = j.value("ef_search", opt.retrieval.ef_search);
    if (j.contains("search")) {
      const auto mode = j["search"].get<std::string>();
      if (mode != "exact" && mode != "approx") throw UsageError("config 'search' must be 'exact' or 'approx'");
      opt.retrieval.mode = mode == "exact" ? SearchMode::Exact : SearchMode::Approximate;
    }
    if (j.contains("unknown_threshold") && !j["unknown_threshold"].is_null()) {
      opt.config.unknown_threshold = j["unknown_threshold"].get<double>();
    }
    opt.config.windows.window = j.value("window", opt.config.windows.window);
    opt.config.windows.stride = j.value("stride", opt.config.windows.stride);
    opt.config.windows.short_side = j.value("short_side", opt.config.windows.short_side);
    opt.config.windows.patch = j.value("patch", opt.config.windows.patch);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"protoseg: open-vocabulary segmentation from retrieved visual prototypes"};
  app.require_subcommand(1);
  int verbosity = 0;
  app.add_flag("-v,--verbose", verbosity, "More logging (repeatable)");
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Errors only");

  MasksOptions masks;
  auto* masks_cmd = app.add_subcommand("masks", "Write weak localization masks for every caption noun");
  masks_cmd->add_option("--manifest", masks.manifest, "Caption manifest (JSON lines)")->required();
  masks_cmd->add_option("--out", masks.out_dir, "Output directory")->required();
  masks_cmd->add_option("--gamma", masks.gamma, "Binarization threshold in (0, 1)")->capture_default_str();
  masks_cmd->add_option("--threads", masks.threads, "Worker threads")->capture_default_str();

  BuildIndexOptions build;
  bool build_hnsw = false;
  HnswParams hnsw;
  auto* build_cmd = app.add_subcommand("build-index", "Generate key/prototype pairs and save a retrieval index");
  build_cmd->add_option("--manifest", build.manifest, "Caption manifest (JSON lines)")->required();
  build_cmd->add_option("--out", build.out_dir, "Index directory")->required();
  build_cmd->add_option("--gamma", build.gamma, "Binarization threshold in (0, 1)")->capture_default_str();
  build_cmd->add_option("--alpha", build.alpha, "Noun/caption blend weight in (0, 1]")->capture_default_str();
  build_cmd->add_option("--topk", build.top_k, "Default number of retrieved prototypes")->capture_default_str();
  build_cmd->add_option("--ef-search", build.ef_search, "Default HNSW exploration depth")->capture_default_str();
  build_cmd->add_flag("--hnsw", build_hnsw, "Also build the HNSW graph");
  build_cmd->add_option("--hnsw-m", hnsw.m, "HNSW links per node")->capture_default_str();
  build_cmd->add_option("--ef-construction", hnsw.ef_construction, "HNSW build beam")->capture_default_str();
  build_cmd->add_option("--threads", build.threads, "Worker threads")->capture_default_str();

  SegmentOptions seg;
  std::optional<fs::path> config_path;
  std::optional<double> beta;
  std::optional<int> topk;
  std::optional<int> ef_search;
  std::optional<std::string> preset;
  std::optional<double> felz_k;
  std::optional<double> felz_sigma;
  std::optional<int> felz_min;
  std::optional<double> unknown;
  bool exact = false;
  bool approx = false;
  auto* seg_cmd = app.add_subcommand("segment", "Segment images against a prototype index");
  seg_cmd->add_option("--index", seg.index_dir, "Index directory")->required();
  seg_cmd->add_option("--inputs", seg.inputs, "Per-image inputs (JSON lines)")->required();
  seg_cmd->add_option("--categories", seg.categories, "Category names, one per line")->required();
  seg_cmd->add_option("--category-embeds", seg.category_embeds, "S x d_t category embeddings")->required();
  seg_cmd->add_option("--out", seg.out_dir, "Output directory")->required();
  seg_cmd->add_option("--config", config_path, "JSON config; explicit flags override it");
  seg_cmd->add_option("--beta", beta, "Local/global blend weight in [0, 1] (default 0.8)");
  seg_cmd->add_option("--topk", topk, "Retrieved prototypes per category (default 350)");
  seg_cmd->add_option("--ef-search", ef_search, "HNSW exploration depth (default 128)");
  seg_cmd->add_option("--preset", preset, "Superpixel preset: voc, context, stuff, cityscapes, ade");
  seg_cmd->add_option("--felz-k", felz_k, "Superpixel scale of observation");
  seg_cmd->add_option("--felz-sigma", felz_sigma, "Superpixel pre-smoothing sigma");
  seg_cmd->add_option("--felz-min-size", felz_min, "Minimum superpixel size in pixels");
  seg_cmd->add_option("--unknown-threshold", unknown, "Enable unknown mode with this similarity threshold");
  auto* exact_flag = seg_cmd->add_flag("--exact", exact, "Exact retrieval (default)");
  seg_cmd->add_flag("--approx", approx, "HNSW retrieval")->excludes(exact_flag);
  seg_cmd->add_flag("--color", seg.color_map, "Also write a color-mapped .ppm per image");
  seg_cmd->add_option("--threads", seg.threads, "Worker threads")->capture_default_str();

  EvalOptions eval;
  std::string report_path;
  auto* eval_cmd = app.add_subcommand("eval", "Score predicted label maps against ground truth");
  eval_cmd->add_option("--pred", eval.pred_dir, "Prediction directory")->required();
  eval_cmd->add_option("--gt", eval.gt_dir, "Ground-truth directory")->required();
  eval_cmd->add_option("--categories", eval.categories, "Category names, one per line")->required();
  eval_cmd->add_option("--ignore-label", eval.ignore_label, "Ground-truth label to skip")->capture_default_str();
  eval_cmd->add_option("--report", report_path, "Also write the report to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  spdlog::set_level(quiet ? spdlog::level::err
                          : verbosity >= 2 ? spdlog::level::debug
                          : verbosity == 1 ? spdlog::level::info
                                           : spdlog::level::warn);
  auto fail = [](const std::string& msg, int code) {
    std::cerr << "error: " << msg << '\n';
    return code;
  };

  try {
    if (*masks_cmd) return cmd_masks(masks);
    if (*build_cmd) {
      if (build_hnsw) build.hnsw = hnsw;
      return cmd_build_index(build);
    }
    if (*seg_cmd) {
      if (config_path) apply_config_file(*config_path, seg);
      if (preset) {
        const auto p = felz_preset(*preset);
        if (!p) throw UsageError("unknown preset '" + *preset + "'");
        seg.config.preset = *preset;
        seg.config.felz = *p;
      }
      if (felz_k) seg.config.felz.k = *felz_k;
      if (felz_sigma) seg.config.felz.sigma = *felz_sigma;
      if (felz_min) seg.config.felz.min_size = *felz_min;
      if (beta) seg.config.beta = *beta;
      if (topk) seg.retrieval.top_k = *topk;
      if (ef_search) seg.retrieval.ef_search = *ef_search;
      if (unknown) seg.config.unknown_threshold = *unknown;
      if (exact) seg.retrieval.mode = SearchMode::Exact;
      if (approx) seg.retrieval.mode = SearchMode::Approximate;
      seg.config.top_k = seg.retrieval.top_k;
      return cmd_segment(seg);
    }
    if (*eval_cmd) {
      if (!report_path.empty()) eval.report = report_path;
      return cmd_eval(eval);
    }
  } catch (const UsageError& e) {
    return fail(e.what(), kExitUsage);
  } catch (const std::exception& e) {
    return fail(e.what(), kExitFailure);
  }
  return kExitUsage;
}

}  // namespace protoseg::cli

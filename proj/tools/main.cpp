// tilegan command-line tool: train, translate, profile, info.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "tilegan/checkpoint.hpp"
#include "tilegan/profile.hpp"
#include "tilegan/tiler.hpp"
#include "tilegan/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Exit codes: 0 ok, 2 usage/config, 3 runtime.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void reject_unknown_keys(const json& obj, const std::string& where,
                         std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed)
      if (key == a) known = true;
    if (!known) throw UsageError("config: unknown key '" + where + key + "'");
  }
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("config: cannot open " + path);
  json cfg;
  try {
    in >> cfg;
  } catch (const json::parse_error& e) {
    throw UsageError("config: " + path + ": " + e.what());
  }
  if (!cfg.is_object()) throw UsageError("config: top level must be an object");
  return cfg;
}

std::vector<tilegan::ImageBuffer> load_domain(const json& cfg, const std::string& key) {
  if (!cfg.contains(key)) throw UsageError("config: missing '" + key + "'");
  std::vector<std::string> paths;
  if (cfg[key].is_string())
    paths.push_back(cfg[key].get<std::string>());
  else if (cfg[key].is_array())
    for (const auto& p : cfg[key]) paths.push_back(p.get<std::string>());
  else
    throw UsageError("config: '" + key + "' must be a path or list of paths");
  if (paths.empty()) throw UsageError("config: '" + key + "' is empty");
  for (const std::string& p : paths)
    if (!fs::exists(p)) throw UsageError("config: " + key + " path does not exist: " + p);
  std::vector<tilegan::ImageBuffer> images;
  images.reserve(paths.size());
  for (const std::string& p : paths) images.push_back(tilegan::load_png(p));
  return images;
}

tilegan::TrainConfig parse_train_config(const json& cfg) {
  reject_unknown_keys(cfg, "",
                      {"iterations", "batch_size", "subsample", "domain_a", "domain_b", "seed",
                       "flip_h", "flip_v", "arch", "loss", "adam", "checkpoint_interval",
                       "out_dir", "log", "resume"});
  tilegan::TrainConfig tc;
  tc.iterations = cfg.value("iterations", std::int64_t{1});
  tc.batch_size = cfg.value("batch_size", 1);
  if (cfg.contains("subsample")) {
    reject_unknown_keys(cfg["subsample"], "subsample.", {"width", "height"});
    tc.x_batch = cfg["subsample"].value("width", 128);
    tc.y_batch = cfg["subsample"].value("height", 128);
  }
  tc.seed = cfg.value("seed", std::uint64_t{1});
  tc.allow_flip_h = cfg.value("flip_h", true);
  tc.allow_flip_v = cfg.value("flip_v", true);
  if (cfg.contains("arch")) {
    reject_unknown_keys(cfg["arch"], "arch.",
                        {"base_channels", "private_blocks", "shared_blocks"});
    tc.arch.base_channels = cfg["arch"].value("base_channels", 64);
    tc.arch.private_blocks = cfg["arch"].value("private_blocks", 3);
    tc.arch.shared_blocks = cfg["arch"].value("shared_blocks", 2);
  }
  if (cfg.contains("loss")) {
    reject_unknown_keys(cfg["loss"], "loss.", {"w_gan", "w_cycle"});
    tc.loss.w_gan = cfg["loss"].value("w_gan", 1.0f);
    tc.loss.w_cycle = cfg["loss"].value("w_cycle", 10.0f);
  }
  if (cfg.contains("adam")) {
    reject_unknown_keys(cfg["adam"], "adam.", {"lr", "beta1", "beta2", "epsilon"});
    tc.adam.lr = cfg["adam"].value("lr", 1e-4f);
    tc.adam.beta1 = cfg["adam"].value("beta1", 0.5f);
    tc.adam.beta2 = cfg["adam"].value("beta2", 0.999f);
    tc.adam.epsilon = cfg["adam"].value("epsilon", 1e-8f);
  }
  tc.checkpoint_interval = cfg.value("checkpoint_interval", std::int64_t{0});
  tc.out_dir = cfg.value("out_dir", std::string("."));
  tc.log_path = cfg.value("log", std::string());
  return tc;
}

int cmd_train(const std::string& config_path, std::uint64_t seed_override, bool seed_set,
              const std::string& out_override) {
  const json cfg = load_config(config_path);
  tilegan::TrainConfig tc = parse_train_config(cfg);
  if (seed_set) tc.seed = seed_override;
  if (!out_override.empty()) tc.out_dir = out_override;

  std::vector<tilegan::ImageBuffer> domain_a = load_domain(cfg, "domain_a");
  std::vector<tilegan::ImageBuffer> domain_b = load_domain(cfg, "domain_b");
  std::error_code ec;
  fs::create_directories(tc.out_dir, ec);
  if (ec) throw UsageError("config: cannot create out_dir " + tc.out_dir);
  if (!tc.log_path.empty()) {
    fs::create_directories(fs::path(tc.log_path).parent_path(), ec);
  }

  tilegan::TrainResult result;
  if (cfg.contains("resume")) {
    const std::string prefix = cfg["resume"].get<std::string>();
    if (!fs::exists(prefix + ".tgck"))
      throw UsageError("config: resume checkpoint does not exist: " + prefix + ".tgck");
    tilegan::Trainer trainer = tilegan::Trainer::resume(tc, prefix, std::move(domain_a),
                                                        std::move(domain_b));
    result = trainer.train();
  } else {
    result = tilegan::train(tc, std::move(domain_a), std::move(domain_b));
  }
  std::cout << "checkpoint: " << result.checkpoint_path << "\n";
  return 0;
}

int cmd_translate(const std::string& checkpoint, const std::string& input_path,
                  const std::string& output_path, std::vector<int> tile,
                  std::vector<int> stride, const std::string& scale_mode,
                  std::vector<int> batch, int workers, const std::string& direction,
                  const std::string& stub) {
  if (!fs::exists(input_path)) throw UsageError("input image does not exist: " + input_path);
  if (workers < 1) throw UsageError("--workers must be >= 1");
  const tilegan::ImageBuffer img = tilegan::load_png(input_path);

  tilegan::TileTranslator translator;
  tilegan::GanModel* model_ptr = nullptr;
  std::optional<tilegan::GanModel> model;
  if (stub == "identity") {
    translator.fn = [](const tilegan::Tensor4& x) { return x; };
  } else if (!stub.empty()) {
    throw UsageError("--stub must be 'identity'");
  } else {
    if (!fs::exists(checkpoint)) throw UsageError("checkpoint does not exist: " + checkpoint);
    model.emplace(tilegan::load_model(checkpoint));
    model_ptr = &*model;
    const tilegan::Direction dir =
        direction == "ba" ? tilegan::Direction::BtoA : tilegan::Direction::AtoB;
    if (direction != "ab" && direction != "ba")
      throw UsageError("--direction must be 'ab' or 'ba'");
    translator = tilegan::make_translator(*model_ptr, dir);
  }

  tilegan::TileScaleMode mode;
  if (scale_mode == "rescale")
    mode = tilegan::TileScaleMode::rescale_to(batch[0], batch[1]);
  else if (scale_mode != "native")
    throw UsageError("--scale-mode must be 'native' or 'rescale'");

  const tilegan::ImageBuffer out = tilegan::translate_full(
      translator, img, tile[0], tile[1], stride[0], stride[1], mode, workers);
  tilegan::save_png(output_path, out);
  std::cout << "wrote: " << output_path << "\n";
  return 0;
}

int cmd_profile(const std::string& checkpoint, const std::string& sizes_csv,
                const std::string& out_path, std::size_t label_cap, std::size_t hard_cap,
                int base_channels, int private_blocks, std::uint64_t seed, int tile,
                int stride) {
  std::vector<int> sizes;
  std::stringstream ss(sizes_csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) sizes.push_back(std::stoi(item));
  }
  if (sizes.empty()) throw UsageError("--sizes must list at least one size");

  std::optional<tilegan::GanModel> model;
  if (!checkpoint.empty()) {
    if (!fs::exists(checkpoint)) throw UsageError("checkpoint does not exist: " + checkpoint);
    model.emplace(tilegan::load_model(checkpoint));
  } else {
    tilegan::GanArch arch;
    arch.base_channels = base_channels;
    arch.private_blocks = private_blocks;
    model.emplace(arch, seed);
  }

  const tilegan::SweepReport sweep = tilegan::memory_sweep(*model, sizes, hard_cap, label_cap);
  bool all_aborted = true;
  for (const tilegan::SweepRow& row : sweep.rows) all_aborted &= row.aborted;
  if (all_aborted) {
    std::cerr << "profile: every size aborted on the allocation cap\n";
    return 3;
  }

  std::vector<int> tiled_sizes;
  for (int s : sizes)
    if (s >= tile) tiled_sizes.push_back(s);
  std::string report = tilegan::format_sweep_csv(sweep);
  if (!tiled_sizes.empty()) {
    report += "\n";
    report += tilegan::format_tiled_vs_whole_csv(
        tilegan::tiled_vs_whole(*model, tiled_sizes, tile, stride));
  }

  std::ofstream out(out_path, std::ios::trunc);
  if (!out) throw std::runtime_error("profile: cannot open " + out_path);
  out << report;
  std::cout << report;
  return 0;
}

int cmd_info(const std::string& image_path) {
  if (!fs::exists(image_path)) throw UsageError("image does not exist: " + image_path);
  const tilegan::ImageBuffer img = tilegan::load_png(image_path);
  const std::uint64_t pixels = img.pixel_count();
  // Megapixels, two decimals, rounding half up (integer arithmetic).
  const std::uint64_t centi_mpx = (pixels * 100 + 500000) / 1000000;
  std::printf("width: %d\n", img.width);
  std::printf("height: %d\n", img.height);
  std::printf("megapixels: %llu.%02llu\n",
              static_cast<unsigned long long>(centi_mpx / 100),
              static_cast<unsigned long long>(centi_mpx % 100));
  if (img.width >= 128 && img.height >= 128)
    std::printf("subsamples(128x128): %lld\n",
                static_cast<long long>(tilegan::count_subsamples(img.width, img.height, 128, 128)));
  else
    std::printf("subsamples(128x128): n/a (image smaller than batch)\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Patch-based unpaired image-to-image translation"};
  app.name("tilegan");
  app.require_subcommand(1);

  std::string config_path, checkpoint, input_path, output_path, image_path;
  std::string scale_mode = "native", direction = "ab", stub;
  std::string sizes_csv, report_path = "profile.csv";
  std::vector<int> tile{128, 128}, stride{64, 64}, batch{128, 128};
  int workers = 1, base_channels = 64, private_blocks = 3;
  int profile_tile = 128, profile_stride = 64;
  std::uint64_t seed = 1;
  bool seed_set = false;
  std::size_t label_cap = 0, hard_cap = 0;
  std::string out_override;

  CLI::App* train = app.add_subcommand("train", "Train a translation model from a config file");
  train->add_option("--config", config_path, "JSON run configuration")->required();
  train->add_option("--seed", seed, "Override the config seed")->each([&](const std::string&) {
    seed_set = true;
  });
  train->add_option("--out", out_override, "Override the config out_dir");

  CLI::App* translate =
      app.add_subcommand("translate", "Translate an image with a trained checkpoint");
  translate->add_option("--checkpoint", checkpoint, "Model checkpoint (.tgck)");
  translate->add_option("--in", input_path, "Input PNG")->required();
  translate->add_option("--out", output_path, "Output PNG")->required();
  translate->add_option("--tile", tile, "Tile size W H")->expected(2);
  translate->add_option("--stride", stride, "Tile stride SX SY")->expected(2);
  translate->add_option("--scale-mode", scale_mode, "native|rescale");
  translate->add_option("--batch", batch, "Common resolution W H for rescale mode")->expected(2);
  translate->add_option("--workers", workers, "Parallel tile workers");
  translate->add_option("--direction", direction, "ab|ba");
  translate->add_option("--stub", stub, "Diagnostic translator: identity (skips the model)");

  CLI::App* profile = app.add_subcommand("profile", "Peak-memory experiments");
  profile->add_option("--checkpoint", checkpoint, "Optional model checkpoint (.tgck)");
  profile->add_option("--sizes", sizes_csv, "Comma-separated square sizes, e.g. 128,256,512")
      ->required();
  profile->add_option("--out", report_path, "Report file");
  profile->add_option("--cap", label_cap, "Mark sizes whose peak exceeds this many bytes");
  profile->add_option("--hard-cap", hard_cap, "Abort sizes whose allocations exceed this");
  profile->add_option("--base-channels", base_channels, "Fresh-model width when no checkpoint");
  profile->add_option("--private-blocks", private_blocks, "Fresh-model private residual blocks");
  profile->add_option("--seed", seed, "Fresh-model init seed");
  profile->add_option("--tile", profile_tile, "Tile size for the tiled-vs-whole comparison");
  profile->add_option("--stride", profile_stride, "Tile stride for the comparison");

  CLI::App* info = app.add_subcommand("info", "Image bookkeeping: dims, megapixels, subsamples");
  info->add_option("image", image_path, "PNG to inspect")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (train->parsed()) return cmd_train(config_path, seed, seed_set, out_override);
    if (translate->parsed())
      return cmd_translate(checkpoint, input_path, output_path, tile, stride, scale_mode,
                           batch, workers, direction, stub);
    if (profile->parsed())
      return cmd_profile(checkpoint, sizes_csv, report_path, label_cap, hard_cap,
                         base_channels, private_blocks, seed, profile_tile, profile_stride);
    if (info->parsed()) return cmd_info(image_path);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const tilegan::TrainAbort& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (!e.last_checkpoint().empty())
      std::cerr << "last good checkpoint: " << e.last_checkpoint() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

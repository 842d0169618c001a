// Copyright 2026 The docflow Authors.
// SPDX-License-Identifier: Apache-2.0
//
// extract -i <bundle> -o <dir> [--format markdown|structured|both] ...
//
// Exit codes: 0 ok, 1 unprocessable document, 2 malformed bundle or bad
// usage, 3 I/O failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "docflow/assets.hpp"
#include "docflow/emit.hpp"
#include "docflow/ingest.hpp"
#include "docflow/pipeline.hpp"

namespace fs = std::filesystem;
using namespace docflow;

namespace {

enum Exit { kOk = 0, kUnprocessable = 1, kSchema = 2, kIo = 3 };

bool write_file(const fs::path& p, const std::string& data) {
  std::ofstream out(p, std::ios::binary);
  if (!out) return false;
  out << data;
  return static_cast<bool>(out.flush());
}

int run(int argc, char** argv) {
  CLI::App app{"Convert a document bundle to Markdown and structured output"};
  std::string input, out_dir, asset_dir, format = "markdown", table_format = "html", lang, mode = "auto";
  bool dump_intermediate = false, debug = false;
  app.add_option("-i,--input", input, "Document bundle (JSON)")->required();
  app.add_option("-o,--output", out_dir, "Output directory")->required();
  app.add_option("--format", format, "markdown, structured or both")
      ->check(CLI::IsMember({"markdown", "structured", "both"}));
  app.add_option("--table-format", table_format, "html or latex")
      ->check(CLI::IsMember({"html", "latex"}));
  app.add_option("--asset-dir", asset_dir, "Where cropped images and tables go (default <out>/images)");
  app.add_flag("--dump-intermediate", dump_intermediate, "Also write <source_id>.intermediate");
  app.add_flag("--debug", debug, "Write region trees and overlap reports to <source_id>.debug");
  app.add_option("--lang", lang, "Override language detection")->check(CLI::IsMember({"zh", "en"}));
  app.add_option("--mode", mode, "Override parse type detection")
      ->check(CLI::IsMember({"txt", "ocr", "auto"}));
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kSchema;
  }

  std::ifstream in(input, std::ios::binary);
  if (!in) {
    std::cerr << "extract: cannot read " << input << "\n";
    return kIo;
  }
  std::stringstream buf;
  buf << in.rdbuf();

  DocumentBundle bundle;
  try {
    bundle = load_bundle(buf.str());
  } catch (const IngestError& e) {
    std::cerr << "extract: " << e.what() << "\n";
    return e.kind() == IngestError::Kind::UnprocessableDocument ? kUnprocessable : kSchema;
  }

  EngineConfig cfg;
  if (mode != "auto") cfg.force_mode = parse_parse_type(mode);
  if (!lang.empty()) cfg.force_lang = parse_lang(lang);
  if (const char* v = std::getenv("EXTRACT_VERSION_NAME"); v && *v) cfg.version_name = v;

  PipelineResult result;
  try {
    result = run_pipeline(bundle, cfg);
  } catch (const IngestError& e) {
    std::cerr << "extract: " << e.what() << "\n";
    return kUnprocessable;
  }
  for (const auto& p : result.pages)
    for (const auto& d : p.diagnostics) std::cerr << "page " << p.page_index << ": " << d << "\n";

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (!fs::is_directory(out_dir, ec)) {
    std::cerr << "extract: cannot create output directory " << out_dir << "\n";
    return kIo;
  }

  EmitConfig emit;
  emit.output_format = format == "markdown"   ? OutputFormat::Markdown
                       : format == "structured" ? OutputFormat::Structured
                                                : OutputFormat::Both;
  emit.table_format = table_format == "latex" ? TableFormat::Latex : TableFormat::Html;
  emit.dump_intermediate = dump_intermediate;
  emit.debug = debug;
  fs::path assets = asset_dir.empty() ? fs::path(out_dir) / "images" : fs::path(asset_dir);
  emit.asset_dir = assets.string();
  emit.asset_link_prefix = assets.lexically_proximate(out_dir).generic_string() + "/";

  bool any_raster = std::any_of(bundle.pages.begin(), bundle.pages.end(),
                                [](const PageDigest& p) { return p.page_raster_ref.has_value(); });
  if (any_raster) {
    fs::path base = fs::path(input).parent_path();
    for (const auto& a : crop_assets(result.doc, bundle, assets, base))
      if (a.status == AssetStatus::IoFailure)
        std::cerr << "extract: asset for block " << a.block_id << ": " << a.message << "\n";
  }

  const fs::path stem = fs::path(out_dir) / bundle.source_id;
  bool ok = true;
  auto put = [&](const std::string& ext, const std::string& data) {
    fs::path p = stem;
    p += ext;
    if (!write_file(p, data)) {
      std::cerr << "extract: cannot write " << p.string() << "\n";
      ok = false;
    }
  };
  if (emit.output_format != OutputFormat::Structured) put(".md", to_markdown(result.doc, emit));
  if (emit.output_format != OutputFormat::Markdown) put(".structured", to_structured(result.doc));
  if (emit.dump_intermediate) put(".intermediate", intermediate_dump(result));
  if (emit.debug) put(".debug", debug_dump(result));
  return ok ? kOk : kIo;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "extract: " << e.what() << "\n";
    return kUnprocessable;
  }
}

// Copyright 2026 The docflow Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "builders.hpp"
#include "docflow/assets.hpp"
#include "docflow/emit.hpp"
#include "docflow/unicode.hpp"

using namespace docflow;
using build::block;
using C = BlockCategory;

namespace {

Block ordered(int id, C c, std::string text, int idx) {
  Block b = block(id, c, {10, 10.0 * idx, 100, 10.0 * idx + 8});
  b.text = std::move(text);
  b.order_index = idx;
  return b;
}

IntermediateDoc one_page(std::vector<Block> blocks) {
  DocMeta meta{1, {{612, 792}}, LangType::En, ParseType::Txt, false};
  std::vector<std::vector<Block>> pages{std::move(blocks)};
  return build_intermediate(meta, pages, "1.2.3");
}

}  // namespace

TEST(BuildIntermediate, Examples) {
  DocMeta meta{2, {{612, 792}, {612, 792}}, LangType::En, ParseType::Ocr, false};
  std::vector<std::vector<Block>> pages{
      {ordered(1, C::Text, "b", 1), ordered(0, C::Title, "a", 0), ordered(2, C::Text, "c", 2)},
      {ordered(3, C::Text, "d", 0), ordered(4, C::Text, "e", 1)}};
  auto doc = build_intermediate(meta, pages, "0.1.0");
  EXPECT_EQ(doc.parse_type, ParseType::Ocr);
  EXPECT_EQ(doc.version_name, "0.1.0");
  ASSERT_EQ(doc.pdf_info.size(), 2u);
  EXPECT_EQ(doc.pdf_info[0].para_blocks.size(), 3u);
  EXPECT_EQ(doc.pdf_info[0].para_blocks[0].id, 0);
  EXPECT_EQ(doc.pdf_info[1].para_blocks.size(), 2u);
  EXPECT_TRUE(intermediate_to_json(doc).dump().find("\"_parse_type\":\"ocr\"") != std::string::npos);

  std::vector<std::vector<Block>> empty_and_discard{{}, {ordered(9, C::Header, "h", 0)}};
  auto d2 = build_intermediate(meta, empty_and_discard, "0.1.0");
  EXPECT_TRUE(d2.pdf_info[0].para_blocks.empty());
  EXPECT_TRUE(d2.pdf_info[1].para_blocks.empty());
}

TEST(Markdown, Templates) {
  EXPECT_EQ(to_markdown(one_page({ordered(0, C::Title, "Results", 0)})), "# Results\n\n");
  EXPECT_EQ(to_markdown(one_page({ordered(0, C::InterlineEquation, "E=mc^2", 0)})),
            "$$\nE=mc^2\n$$\n\n");
  EXPECT_EQ(to_markdown(one_page({ordered(0, C::Text, "Energy $E=mc^2$ is conserved", 0)})),
            "Energy $E=mc^2$ is conserved\n\n");
  EXPECT_EQ(to_markdown(one_page({ordered(0, C::Image, "", 0)})), "[image]\n\n");
  EXPECT_EQ(to_markdown(one_page({ordered(0, C::Table, "", 0)})), "[table]\n\n");
}

TEST(Markdown, ImageLinkAndCaptionAfterHost) {
  Block cap = ordered(2, C::ImageCaption, "Figure 1: a cat", 0);
  cap.host_id = 1;
  Block img = ordered(1, C::Image, "", 1);
  img.asset = "doc_p0_1.png";
  EmitConfig cfg;
  cfg.asset_link_prefix = "images/";
  EXPECT_EQ(to_markdown(one_page({cap, img}), cfg),
            "![](images/doc_p0_1.png)\n\nFigure 1: a cat\n\n");
}

TEST(Markdown, TableFormats) {
  Block t = ordered(1, C::Table, "", 0);
  t.table = TableMarkup{"<table><tr><td>1</td></tr></table>", "\\begin{tabular}{c}1\\end{tabular}"};
  EmitConfig cfg;
  EXPECT_EQ(to_markdown(one_page({t}), cfg), "<table><tr><td>1</td></tr></table>\n\n");
  cfg.table_format = TableFormat::Latex;
  EXPECT_EQ(to_markdown(one_page({t}), cfg), "\\begin{tabular}{c}1\\end{tabular}\n\n");
  t.table->latex.clear();
  EXPECT_EQ(to_markdown(one_page({t}), cfg), "<table><tr><td>1</td></tr></table>\n\n");
}

TEST(Markdown, EquationTag) {
  Block eq = ordered(1, C::InterlineEquation, "a+b", 0);
  Block label = ordered(2, C::EquationLabel, "(4)", 1);
  label.host_id = 1;
  EXPECT_EQ(to_markdown(one_page({eq, label})), "$$\na+b \\tag{4}\n$$\n\n");
  eq.equation_tag = "(2.1)";
  EXPECT_EQ(to_markdown(one_page({eq})), "$$\na+b \\tag{2.1}\n$$\n\n");
}

TEST(Markdown, OrphanCaptionIsParagraph) {
  Block cap = ordered(2, C::TableCaption, "Table 9", 0);
  EXPECT_EQ(to_markdown(one_page({cap})), "Table 9\n\n");
}

TEST(Balanced, Markup) {
  EXPECT_TRUE(table_markup_balanced("<table><tr><td>a<br></td></tr></table>", TableFormat::Html));
  EXPECT_FALSE(table_markup_balanced("<table><tr><td>a</tr></table>", TableFormat::Html));
  EXPECT_TRUE(table_markup_balanced("\\begin{tabular}{cc} a & \\{ \\\\ \\end{tabular}",
                                    TableFormat::Latex));
  EXPECT_FALSE(table_markup_balanced("\\begin{tabular}{cc", TableFormat::Latex));
}

TEST(Structured, RoundTripByteIdentical) {
  Block t = ordered(0, C::Title, "Intro", 0);
  Block p = ordered(1, C::Text, "Some text with $x$", 1);
  p.lines.push_back(Line{{10, 10, 90, 18},
                         {build::span({10, 10, 50, 18}, "Some text with"),
                          build::span({52, 10, 60, 18}, "x", SpanKind::InlineFormula)}});
  p.merged_ids = {7, 8};
  p.region = 2;
  Block tab = ordered(2, C::Table, "", 2);
  tab.table = TableMarkup{"<table></table>", ""};
  tab.asset = "d_p0_2.png";
  Block cap = ordered(3, C::TableCaption, "Table 1", 3);
  cap.host_id = 2;
  cap.score = 0.123456789;
  auto doc = one_page({t, p, tab, cap});
  std::string s = to_structured(doc);
  auto back = parse_structured(s);
  EXPECT_EQ(back, doc);
  EXPECT_EQ(to_structured(back), s);
  auto j = nlohmann::ordered_json::parse(s);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"pdf_info", "_parse_type", "_version_name"}));
  EXPECT_THROW(parse_structured("{}"), StructuredError);
}

TEST(Markdown, ConcatenationProperty) {
  Block t = ordered(0, C::Title, "Intro", 0);
  Block p = ordered(1, C::Text, "first  paragraph", 1);
  Block q = ordered(2, C::Text, "second", 2);
  auto doc = one_page({t, p, q});
  std::string md = to_markdown(doc);
  std::string plain;
  for (std::size_t i = 0; i < md.size(); ++i)
    if (!(md[i] == '#' && (i == 0 || md[i - 1] == '\n'))) plain += md[i];
  std::string concat;
  for (const auto& b : doc.pdf_info[0].para_blocks) concat += b.text + " ";
  EXPECT_EQ(unicode::normalize_space(plain), unicode::normalize_space(concat));
}

TEST(Assets, Naming) { EXPECT_EQ(asset_name("paper", 0, 4), "paper_p0_4.png"); }

TEST(Assets, PlaceholdersWithoutRaster) {
  Block img = ordered(1, C::Image, "", 0);
  auto doc = one_page({img});
  auto bundle = build::bundle({build::page(0)});
  auto m = crop_assets(doc, bundle, "/nonexistent/dir", ".");
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].status, AssetStatus::Placeholder);
}

TEST(Assets, UnwritableDirIsNonFatal) {
  Block img = ordered(1, C::Image, "", 0);
  img.asset = "doc_p0_0.png";
  Block tab = ordered(2, C::Table, "", 1);
  tab.asset = "doc_p0_1.png";
  auto doc = one_page({img, tab});
  auto page = build::page(0);
  page.page_raster_ref = "p0.png";
  auto bundle = build::bundle({page});
  auto m = crop_assets(doc, bundle, "/proc/forbidden/assets", ".");
  ASSERT_EQ(m.size(), 2u);
  for (const auto& e : m) EXPECT_EQ(e.status, AssetStatus::IoFailure);
}

TEST(Assets, CropWritesPng) {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "docflow_assets_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  RgbaImage raster{200, 100, std::vector<std::uint8_t>(200 * 100 * 4, 0)};
  for (std::uint32_t y = 0; y < 100; ++y)
    for (std::uint32_t x = 0; x < 200; ++x) raster.pixels[(y * 200 + x) * 4 + 0] = x < 100 ? 255 : 0;
  ASSERT_TRUE(write_png(dir / "page0.png", raster));

  Block img = ordered(1, C::Image, "", 3);
  img.rect = {0, 0, 50, 50};  // page is 100x50 points, raster 2x
  img.asset = "doc_p0_3.png";
  DocMeta meta{1, {{100, 50}}, LangType::En, ParseType::Txt, false};
  std::vector<std::vector<Block>> pages{{img}};
  auto doc = build_intermediate(meta, pages, "0.1.0");
  auto page = build::page(0, 100, 50);
  page.page_raster_ref = "page0.png";
  auto m = crop_assets(doc, build::bundle({page}), dir / "images", dir);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].status, AssetStatus::Written);
  auto crop = read_png(dir / "images" / "doc_p0_3.png");
  ASSERT_TRUE(crop);
  EXPECT_EQ(crop->width, 100u);
  EXPECT_EQ(crop->height, 100u);
  EXPECT_EQ(crop->pixels[0], 255);
  fs::remove_all(dir);
}

// Copyright 2026 The docflow Authors.
// SPDX-License-Identifier: Apache-2.0
//
// detect-eval --gt gt.json --pred pred.json [--json] [--max-dets N]

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "docflow/detect_eval.hpp"

namespace {

bool slurp(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::stringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layout detection metrics (mAP, AP50, AR50)"};
  std::string gt_path, pred_path;
  bool as_json = false;
  docflow::EvalConfig cfg;
  app.add_option("--gt", gt_path, "Ground-truth instances")->required();
  app.add_option("--pred", pred_path, "Predicted instances")->required();
  app.add_option("--max-dets", cfg.max_dets, "Predictions kept per page and category");
  app.add_flag("--json", as_json, "Print the report as JSON");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  std::string gt_text, pred_text;
  if (!slurp(gt_path, gt_text) || !slurp(pred_path, pred_text)) {
    std::cerr << "detect-eval: cannot read input\n";
    return 3;
  }
  try {
    auto gt = docflow::load_gt(gt_text);
    auto preds = docflow::load_preds(pred_text);
    auto rep = docflow::evaluate(gt, preds, cfg);
    for (const auto& d : rep.diagnostics) std::cerr << "detect-eval: " << d << "\n";
    if (as_json)
      std::cout << docflow::report_json(rep).dump(2) << "\n";
    else
      std::cout << docflow::report_table(rep);
  } catch (const docflow::EvalError& e) {
    std::cerr << "detect-eval: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

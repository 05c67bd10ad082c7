#include <iostream>

#include <CLI11.hpp>

#include "polyenc/commands.hpp"
#include "polyenc/error.hpp"

// Exit codes: 0 ok, 1 user error / failed checks, 2 internal error.
int main(int argc, char** argv) {
  CLI::App app{"polyenc - polygon encoders, baselines and property suites"};
  app.require_subcommand(1);

  polyenc::GenOptions gen;
  auto* cgen = app.add_subcommand("gen", "generate a synthetic dataset");
  cgen->add_option("--task", gen.task, "shapes | relations")->default_val("shapes");
  cgen->add_option("--n", gen.n, "samples per class / per relation")->default_val(100);
  cgen->add_option("--seed", gen.seed)->default_val(0);
  cgen->add_option("--sliver-fraction", gen.sliver_fraction, "fraction of isPartOf pairs perturbed")
      ->default_val(0.0);
  cgen->add_option("--vertex-budget", gen.vertex_budget)->default_val(128);
  cgen->add_option("--out", gen.out, "output NDJSON path")->required();

  polyenc::TrainOptions train;
  auto* ctrain = app.add_subcommand("train", "train an encoder + head");
  ctrain->add_option("--config", train.config_path, "run config JSON")->required();
  ctrain->add_option("--data", train.data_path, "training NDJSON")->required();
  ctrain->add_option("--valid", train.valid_path, "validation NDJSON (default: 10% holdout)");
  ctrain->add_option("--out", train.out_path, "checkpoint output path")->required();
  ctrain->add_option("--resume", train.resume_path, "checkpoint to resume from");
  ctrain->add_option("--lr", train.lr, "override learning rate");
  ctrain->add_option("--epochs", train.epochs);
  ctrain->add_option("--batch-size", train.batch_size);
  ctrain->add_option("--seed", train.seed);
  ctrain->add_option("--d", train.d, "embedding dimension");
  ctrain->add_option("--N_wx", train.n_wx, "frequency count along X");
  ctrain->add_option("--w_min", train.w_min);
  ctrain->add_option("--w_max", train.w_max);
  ctrain->add_option("--pca_var", train.pca_var, "PCA variance target (0 disables)");
  ctrain->add_option("--K", train.resnet_blocks, "residual blocks");
  ctrain->add_option("--t", train.t, "KDelta neighbor half-width");
  ctrain->add_option("--dropout", train.dropout);

  polyenc::EvalOptions eval;
  auto* ceval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  ceval->add_option("--checkpoint", eval.checkpoint_path)->required();
  ceval->add_option("--data", eval.data_path)->required();
  ceval->add_option("--out", eval.report_path, "report JSON path (default: stdout)");
  ceval->add_option("--confusion", eval.confusion_path, "confusion matrix CSV path");

  polyenc::PropcheckOptions prop;
  auto* cprop = app.add_subcommand("propcheck", "run the invariance property suites");
  cprop->add_option("--config", prop.config_path, "run config JSON (untrained params)");
  cprop->add_option("--checkpoint", prop.checkpoint_path, "trained checkpoint");
  cprop->add_option("--n", prop.n_per_class, "corpus samples per class")->default_val(8);
  cprop->add_option("--vertex-budget", prop.vertex_budget)->default_val(64);
  cprop->add_option("--seed", prop.seed)->default_val(7);
  cprop->add_option("--out", prop.report_path, "report JSON path");

  polyenc::EncodeOptions enc;
  auto* cenc = app.add_subcommand("encode", "write per-sample embeddings as NDJSON");
  cenc->add_option("--checkpoint", enc.checkpoint_path)->required();
  cenc->add_option("--data", enc.data_path)->required();
  cenc->add_option("--out", enc.out_path)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cgen->parsed()) return polyenc::cmd_gen(gen);
    if (ctrain->parsed()) return polyenc::cmd_train(train);
    if (ceval->parsed()) return polyenc::cmd_eval(eval);
    if (cprop->parsed()) return polyenc::cmd_propcheck(prop);
    if (cenc->parsed()) return polyenc::cmd_encode(enc);
  } catch (const polyenc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == polyenc::Errc::internal ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: E_INTERNAL: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

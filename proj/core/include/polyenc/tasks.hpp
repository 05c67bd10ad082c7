#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "polyenc/datagen.hpp"
#include "polyenc/encoders.hpp"

namespace polyenc {

struct TrainConfig {
  double lr = 1e-3;
  int epochs = 30;
  int batch_size = 32;
  std::uint64_t seed = 0;
  enum class Opt { adam, sgd };
  Opt optimizer = Opt::adam;
  int head_layers = 1;
  int head_hidden = 64;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double valid_acc = 0.0;
};

// A trained (or freshly initialized) classifier: encoder trunk plus head.
struct Model {
  Encoder encoder;
  nn::ParamMap head;  // "head.l{i}.W" / "head.l{i}.b"
  int n_classes = 0;
  int head_layers = 1;
  bool relation_task = false;
};

struct ModelState {
  nn::ParamMap enc_params;
  nn::ParamMap head;
  std::map<std::string, nn::BnState> bn_state;
};

// Everything needed to continue training exactly where it stopped.
struct ResumeState {
  ModelState last;
  ModelState best;
  nn::AdamState opt_enc;
  nn::AdamState opt_head;
  int completed_epochs = 0;
  double best_valid_acc = -1.0;
  int best_epoch = -1;
};

struct TrainResult {
  Model model;  // parameters of the best-validation epoch
  std::vector<EpochStats> history;
  double best_valid_acc = 0.0;
  int best_epoch = -1;
  ResumeState resume;
};

// softmax(MLP_shp(Enc(g))); probability vector over shape classes.
std::vector<double> shape_classify(Model& model, const PolyGeom& g);

// softmax(MLP_rel([Enc(g_sub); Enc(g_obj)])); the pair shares one transform.
std::vector<double> relation_predict(Model& model, const PolyGeom& g_sub, const PolyGeom& g_obj);

// Containment (all subject vertices inside, no boundary crossing) gives
// isPartOf; otherwise the centroid-to-centroid bearing maps onto 8 axis-
// centered 45-degree sectors, half-open [center-22.5, center+22.5).
// Coincident centroids outside containment are unclassifiable (throws).
RelationLabel deterministic_relation(const PolyGeom& g_sub, const PolyGeom& g_obj);

TrainResult train_shapes(const std::vector<ShapeSample>& train,
                         const std::vector<ShapeSample>& valid, const EncoderConfig& enc_cfg,
                         const TrainConfig& train_cfg, const ResumeState* resume = nullptr);

TrainResult train_relations(const std::vector<RelationSample>& train,
                            const std::vector<RelationSample>& valid,
                            const EncoderConfig& enc_cfg, const TrainConfig& train_cfg,
                            const ResumeState* resume = nullptr);

// Untrained model with seeded parameters; invariance properties are
// architecture properties so this is enough for the property suites. Spectral
// preprocessing (PCA, feature statistics) is fitted on fit_corpus when the
// config asks for it.
Model make_untrained_model(const EncoderConfig& enc_cfg, int n_classes, bool relation_task,
                           std::uint64_t seed, const std::vector<PolyGeom>& fit_corpus = {});

struct GroupStat {
  int count = 0;
  int correct = 0;
  double accuracy() const { return count ? static_cast<double>(correct) / count : 0.0; }
};

struct EvalReport {
  int total = 0;
  int correct = 0;
  double overall() const { return total ? static_cast<double>(correct) / total : 0.0; }
  std::vector<std::string> class_names;
  std::map<std::string, GroupStat> per_class;
  std::map<std::string, GroupStat> by_subpolygon_count;  // keys "1".."5", "6+"
  std::map<std::string, GroupStat> by_area_ratio;        // relations only
  std::vector<std::vector<int>> confusion;               // [true][predicted]
};

EvalReport evaluate_shapes(const std::vector<ShapeSample>& samples, Model& model);
EvalReport evaluate_relations(const std::vector<RelationSample>& samples, Model& model);
// The no-learning baseline run through the same report machinery.
EvalReport evaluate_relations_deterministic(const std::vector<RelationSample>& samples);

std::string eval_report_to_json(const EvalReport& report);
void confusion_to_csv(const EvalReport& report, std::ostream& os);

// Area-ratio bin label for area(sub)/area(obj), computed before any
// normalization: [0,0.1), [0.1,0.2), [0.2,0.3), [0.3,1), [1,1.1), [1.1,1.2),
// [1.2,inf).
std::string area_ratio_bin(double ratio);
std::string subpolygon_bin(int parts);

}  // namespace polyenc

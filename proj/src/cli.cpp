#include "wcsplit/cli.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "wcsplit/analysis.hpp"
#include "wcsplit/cluster.hpp"
#include "wcsplit/errors.hpp"
#include "wcsplit/io.hpp"
#include "wcsplit/mmd.hpp"
#include "wcsplit/splitters.hpp"
#include "wcsplit/version.hpp"

namespace wcsplit {
namespace {

constexpr double kIdentityTolerance = 1e-9;

struct KernelOptions {
  std::string family = "rbf";
  double gamma = 1.0;
  std::string gamma_mode = "fixed";

  void attach(CLI::App* cmd) {
    cmd->add_option("--kernel", family, "Kernel family")
        ->check(CLI::IsMember({"rbf", "linear"}))
        ->capture_default_str();
    auto* g = cmd->add_option("--gamma", gamma, "RBF bandwidth")->capture_default_str();
    cmd->add_option("--gamma-mode", gamma_mode, "fixed, or inverse-dim for gamma = 1/d")
        ->check(CLI::IsMember({"fixed", "inverse-dim"}))
        ->excludes(g)
        ->capture_default_str();
  }

  KernelConfig config() const {
    KernelConfig k;
    k.family = family == "linear" ? KernelFamily::Linear : KernelFamily::Rbf;
    k.gamma = gamma;
    k.gamma_mode = gamma_mode == "inverse-dim" ? GammaMode::InverseDim : GammaMode::Fixed;
    k.validate();
    return k;
  }
};

struct DataOptions {
  std::string features;
  std::string labels;
  std::string domains;

  void attach(CLI::App* cmd, bool labels_required_hint = false) {
    cmd->add_option("--features", features, "Feature file (CSV or FMX1)")->required();
    cmd->add_option("--labels", labels,
                    labels_required_hint ? "Label file (or a `label` column in the features CSV)"
                                         : "Label file (optional)");
    cmd->add_option("--domains", domains, "Domain file (or a `domain` column)");
  }

  Dataset load(std::optional<std::string> default_label) const {
    io::DatasetPaths paths;
    paths.features = features;
    if (!labels.empty()) paths.labels = labels;
    if (!domains.empty()) paths.domains = domains;
    paths.default_label = std::move(default_label);
    return io::load_dataset(paths);
  }
};

ConstraintMode parse_mode(const std::string& s) {
  return s == "label-domain" ? ConstraintMode::LabelDomain : ConstraintMode::LabelOnly;
}

void emit(std::ostream& out, const std::string& path, const nlohmann::json& doc) {
  if (path.empty() || path == "-") {
    out << doc.dump(2) << "\n";
  } else {
    io::write_json_file(path, doc);
  }
}

void write_error(std::ostream& err, std::string_view code, const std::string& message) {
  nlohmann::json j{{"error", std::string(code)}, {"message", message}};
  err << j.dump() << "\n";
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Training/validation splitting by maximum mean discrepancy", "wcsplit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  // split ---------------------------------------------------------------
  auto* split = app.add_subcommand("split", "Produce a train/validation split");
  split->require_subcommand(1);

  struct {
    DataOptions data;
    KernelOptions kernel;
    double holdout = 0.2;
    std::string constraints = "label";
    double tolerance = 0.0;
    std::string tolerance_file;
    std::size_t nystrom = 0;
    double rank_cutoff = kDefaultRankCutoff;
    std::size_t restarts = 10;
    std::size_t max_iters = 100;
    std::uint64_t seed = 0;
    std::size_t budget_mib = kDefaultGramBudgetBytes >> 20;
    std::string out;
    std::string report;
  } cl;
  auto* cluster_cmd = split->add_subcommand("cluster", "Constrained kernel k-means split");
  cl.data.attach(cluster_cmd);
  cl.kernel.attach(cluster_cmd);
  cluster_cmd->add_option("--holdout", cl.holdout, "Holdout fraction h")->capture_default_str();
  cluster_cmd->add_option("--constraints", cl.constraints, "Quota groups")
      ->check(CLI::IsMember({"label", "label-domain"}))
      ->capture_default_str();
  auto* tol_opt = cluster_cmd->add_option("--tolerance", cl.tolerance,
                                          "Relative tolerance for every group (0 = hard)");
  cluster_cmd->add_option("--tolerance-per-group", cl.tolerance_file,
                          "CSV of group,tolerance (group is label or label|domain)")
      ->excludes(tol_opt);
  cluster_cmd->add_option("--nystrom", cl.nystrom,
                          "Nystrom landmark count (default: exact Gram, or 2000 when it "
                          "exceeds the memory budget)");
  cluster_cmd->add_option("--rank-cutoff", cl.rank_cutoff, "Relative eigenvalue cutoff")
      ->capture_default_str();
  cluster_cmd->add_option("--restarts", cl.restarts)->capture_default_str();
  cluster_cmd->add_option("--max-iters", cl.max_iters)->capture_default_str();
  cluster_cmd->add_option("--seed", cl.seed)->capture_default_str();
  cluster_cmd->add_option("--gram-budget-mib", cl.budget_mib, "Memory budget for the exact Gram")
      ->capture_default_str();
  cluster_cmd->add_option("--out", cl.out, "Split CSV")->required();
  cluster_cmd->add_option("--report", cl.report, "Report JSON (default: stdout)");

  struct {
    DataOptions data;
    double holdout = 0.2;
    std::string constraints;
    std::uint64_t seed = 0;
    std::string out;
    std::string report;
  } rnd;
  auto* random_cmd = split->add_subcommand(
      "random", "Stratified random split (mix-up and oracle baselines are not provided)");
  rnd.data.attach(random_cmd, true);
  random_cmd->add_option("--holdout", rnd.holdout)->capture_default_str();
  random_cmd->add_option("--constraints", rnd.constraints,
                         "Strata (default: label-domain when domains are given, else label)")
      ->check(CLI::IsMember({"label", "label-domain"}));
  random_cmd->add_option("--seed", rnd.seed)->capture_default_str();
  random_cmd->add_option("--out", rnd.out)->required();
  random_cmd->add_option("--report", rnd.report);

  struct {
    DataOptions data;
    std::string holdout_domain;
    std::string out;
    std::string report;
  } lodo;
  auto* lodo_cmd = split->add_subcommand("lodo", "Leave-one-domain-out split");
  lodo.data.attach(lodo_cmd);
  lodo_cmd->add_option("--holdout-domain", lodo.holdout_domain)->required();
  lodo_cmd->add_option("--out", lodo.out)->required();
  lodo_cmd->add_option("--report", lodo.report);

  // mmd / verify-identity -------------------------------------------------
  struct {
    std::string features;
    std::string split;
    KernelOptions kernel;
    std::size_t nystrom = 0;
    std::uint64_t seed = 0;
    std::string report;
  } mm;
  auto* mmd_cmd = app.add_subcommand("mmd", "MMD between the two sides of a split");
  mmd_cmd->add_option("--features", mm.features)->required();
  mmd_cmd->add_option("--split", mm.split)->required();
  mm.kernel.attach(mmd_cmd);
  mmd_cmd->add_option("--nystrom", mm.nystrom, "Estimate through a Nystrom sketch");
  mmd_cmd->add_option("--seed", mm.seed, "Landmark seed for --nystrom")->capture_default_str();
  mmd_cmd->add_option("--report", mm.report);

  struct {
    std::string features;
    std::string split;
    KernelOptions kernel;
  } vi;
  auto* verify_cmd = app.add_subcommand(
      "verify-identity", "Check MMD^2 against the within-cluster sum-of-squares identity");
  verify_cmd->add_option("--features", vi.features)->required();
  verify_cmd->add_option("--split", vi.split)->required();
  vi.kernel.attach(verify_cmd);

  // analyze ---------------------------------------------------------------
  auto* analyze = app.add_subcommand("analyze", "Analysis tools");
  analyze->require_subcommand(1);
  struct {
    std::string mmds;
    std::string accuracies;
    std::string out;
  } corr;
  auto* corr_cmd = analyze->add_subcommand("correlate", "Spearman correlation of MMD vs accuracy");
  corr_cmd->add_option("--mmds", corr.mmds, "CSV split_id,mmd")->required();
  corr_cmd->add_option("--accuracies", corr.accuracies, "CSV split_id,accuracy")->required();
  corr_cmd->add_option("--out", corr.out);

  struct {
    DataOptions data;
    std::string eval_features;
    std::vector<std::size_t> counts{1, 2, 5, 10, 20, 50};
    std::size_t repeats = 3;
    std::uint64_t seed = 0;
    KernelOptions kernel;
    double holdout = 0.2;
    std::size_t restarts = 10;
    std::size_t max_iters = 100;
    std::size_t nystrom = 0;
    std::string out;
  } cc;
  auto* cc_cmd = analyze->add_subcommand("class-count", "MMD(T,V) against synthetic class count");
  cc.data.attach(cc_cmd);
  cc_cmd->add_option("--eval-features", cc.eval_features, "Held-out evaluation set features");
  cc_cmd->add_option("--counts", cc.counts)->delimiter(',')->capture_default_str();
  cc_cmd->add_option("--repeats", cc.repeats)->capture_default_str();
  cc_cmd->add_option("--seed", cc.seed)->capture_default_str();
  cc.kernel.attach(cc_cmd);
  cc_cmd->add_option("--holdout", cc.holdout)->capture_default_str();
  cc_cmd->add_option("--restarts", cc.restarts)->capture_default_str();
  cc_cmd->add_option("--max-iters", cc.max_iters)->capture_default_str();
  cc_cmd->add_option("--nystrom", cc.nystrom);
  cc_cmd->add_option("--out", cc.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    write_error(err, "UsageError", e.what());
    return 2;
  }

  try {
    if (*cluster_cmd) {
      const Dataset data = cl.data.load("0");
      ClusterRunConfig cfg;
      cfg.kernel = cl.kernel.config();
      cfg.constraints.holdout_fraction = cl.holdout;
      cfg.constraints.mode = parse_mode(cl.constraints);
      cfg.constraints.default_tolerance = cl.tolerance;
      if (!cl.tolerance_file.empty()) {
        cfg.constraints.tolerances = io::read_tolerance_file(cl.tolerance_file);
      }
      if (cl.nystrom > 0) cfg.nystrom = cl.nystrom;
      cfg.nystrom_rank_cutoff = cl.rank_cutoff;
      cfg.restarts = cl.restarts;
      cfg.max_iters = cl.max_iters;
      cfg.seed = cl.seed;
      cfg.gram_budget_bytes = cl.budget_mib << 20;
      const ClusterResult result = cluster_split(data, cfg);
      for (const auto& note : result.report.notes) err << "notice: " << note << "\n";
      io::write_split_file(cl.out, result.assignment.membership());
      emit(out, cl.report, io::split_report_json(result.assignment, result.report));
      return 0;
    }
    if (*random_cmd) {
      const Dataset data = rnd.data.load(std::nullopt);
      ConstraintSpec spec;
      spec.holdout_fraction = rnd.holdout;
      if (rnd.constraints.empty()) {
        spec.mode = data.has_domains() ? ConstraintMode::LabelDomain : ConstraintMode::LabelOnly;
      } else {
        spec.mode = parse_mode(rnd.constraints);
      }
      const SplitAssignment split = random_stratified(data, spec, rnd.seed);
      io::write_split_file(rnd.out, split.membership());
      emit(out, rnd.report,
           io::baseline_report_json(split, audit_quotas(plan_quotas(data, spec), split.membership())));
      return 0;
    }
    if (*lodo_cmd) {
      const Dataset data = lodo.data.load("0");
      const SplitAssignment split = leave_one_domain_out(data, lodo.holdout_domain);
      for (const auto& w : split.warnings()) err << "warning: " << w << "\n";
      io::write_split_file(lodo.out, split.membership());
      nlohmann::json doc = io::baseline_report_json(split, {});
      doc["holdout_domain"] = lodo.holdout_domain;
      emit(out, lodo.report, doc);
      return 0;
    }
    if (*mmd_cmd) {
      const Dataset data = io::load_dataset({mm.features, std::nullopt, std::nullopt, "0"});
      auto membership = io::read_split_file(mm.split);
      if (membership.size() != data.size()) {
        throw Error(ErrorCode::DimensionMismatch, "split has " + std::to_string(membership.size()) +
                                                      " rows for " + std::to_string(data.size()) +
                                                      " samples");
      }
      const SplitAssignment split(std::move(membership), SplitMethod::ClusterSplit, 0);
      const KernelConfig kernel = mm.kernel.config();
      MmdEstimate est;
      if (mm.nystrom > 0) {
        const auto q = std::min(mm.nystrom, data.size());
        est = split_mmd(KernelSource::from_sketch(nystrom_embed(kernel, data.features(), q,
                                                                kDefaultRankCutoff, mm.seed)),
                        split);
      } else {
        est = split_mmd(kernel, data, split);
      }
      emit(out, mm.report, io::to_json(est));
      return 0;
    }
    if (*verify_cmd) {
      const Dataset data = io::load_dataset({vi.features, std::nullopt, std::nullopt, "0"});
      auto membership = io::read_split_file(vi.split);
      if (membership.size() != data.size()) {
        throw Error(ErrorCode::DimensionMismatch, "split length differs from sample count");
      }
      const SplitAssignment split(std::move(membership), SplitMethod::ClusterSplit, 0);
      const double residual = verify_identity(vi.kernel.config(), data, split);
      const bool ok = residual <= kIdentityTolerance;
      out << nlohmann::json{{"residual", residual},
                            {"tolerance", kIdentityTolerance},
                            {"passed", ok}}
                 .dump(2)
          << "\n";
      return ok ? 0 : 1;
    }
    if (*corr_cmd) {
      const auto mmds = io::read_keyed_values(corr.mmds);
      const auto accs = io::read_keyed_values(corr.accuracies);
      std::map<std::string, double> acc_by_id(accs.begin(), accs.end());
      if (acc_by_id.size() != accs.size() || acc_by_id.size() != mmds.size()) {
        throw Error(ErrorCode::LengthMismatch,
                    "MMD and accuracy files must list the same split ids exactly once");
      }
      std::vector<double> x, y;
      for (const auto& [id, value] : mmds) {
        auto it = acc_by_id.find(id);
        if (it == acc_by_id.end()) {
          throw Error(ErrorCode::LengthMismatch, "split id '" + id + "' has no accuracy");
        }
        x.push_back(value);
        y.push_back(it->second);
      }
      emit(out, corr.out, io::to_json(spearman(x, y)));
      return 0;
    }
    if (*cc_cmd) {
      const Dataset data = cc.data.load("0");
      std::optional<Dataset> eval;
      if (!cc.eval_features.empty()) {
        eval = io::load_dataset({cc.eval_features, std::nullopt, std::nullopt, "0"});
      }
      ClusterRunConfig cfg;
      cfg.kernel = cc.kernel.config();
      cfg.constraints.holdout_fraction = cc.holdout;
      cfg.restarts = cc.restarts;
      cfg.max_iters = cc.max_iters;
      cfg.seed = cc.seed;
      if (cc.nystrom > 0) cfg.nystrom = cc.nystrom;
      const auto trend = class_count_experiment(data, cc.counts, cc.repeats, cfg, eval);
      emit(out, cc.out, io::to_json(trend));
      return 0;
    }
  } catch (const Error& e) {
    write_error(err, to_string(e.code()), e.what());
    return 2;
  } catch (const std::exception& e) {
    write_error(err, "InternalError", e.what());
    return 2;
  }
  write_error(err, "UsageError", "no command given");
  return 2;
}

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("wcsplit");
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace wcsplit

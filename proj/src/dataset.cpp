#include "latproph/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "latproph/common.hpp"
#include "latproph/errors.hpp"
#include "latproph/rng.hpp"
#include "nlohmann/json.hpp"

namespace latproph {

const char* const kMeasurementCsvHeader =
    "model_name,family,variant,input_size,device,replicates,latency_ms,latency_std_ms,"
    "total_flops,sum_activations,weighted_sum_neurons,conv_params,total_layers,"
    "input_image_size,fc_params,bn_params,bn_layers,conv_layers,fc_layers";

namespace {

constexpr std::size_t kColumnCount = 19;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (const char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double_field(const std::string& s, std::size_t row, const char* column) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw SchemaError("row " + std::to_string(row) + ": column '" + column +
                      "' is not a number: '" + s + "'");
  }
}

int parse_int_field(const std::string& s, std::size_t row, const char* column) {
  const double v = parse_double_field(s, row, column);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v)
    throw SchemaError("row " + std::to_string(row) + ": column '" + column +
                      "' is not an integer: '" + s + "'");
  return i;
}

std::string record_key(const MeasurementRecord& r) {
  return r.model_name + "\x1f" + r.variant + "\x1f" + std::to_string(r.input_size);
}

}  // namespace

Dataset parse_measurements_csv(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw SchemaError(origin + ": empty file, expected header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMeasurementCsvHeader)
    throw SchemaError(origin + ": unexpected header; expected '" +
                      std::string(kMeasurementCsvHeader) + "'");

  Dataset ds;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++row;
    const auto fields = split_csv_line(line);
    if (fields.size() != kColumnCount)
      throw SchemaError("row " + std::to_string(row) + ": expected " +
                        std::to_string(kColumnCount) + " columns, got " +
                        std::to_string(fields.size()));
    MeasurementRecord r;
    r.model_name = fields[0];
    r.family = fields[1];
    r.variant = fields[2];
    r.input_size = parse_int_field(fields[3], row, "input_size");
    r.device = fields[4];
    r.replicates = parse_int_field(fields[5], row, "replicates");
    r.latency_ms = parse_double_field(fields[6], row, "latency_ms");
    r.latency_std_ms = parse_double_field(fields[7], row, "latency_std_ms");
    for (int f = 0; f < kFeatureCount; ++f)
      r.features[static_cast<std::size_t>(f)] =
          parse_double_field(fields[8 + static_cast<std::size_t>(f)], row,
                             feature_names()[static_cast<std::size_t>(f)].c_str());
    ds.records.push_back(std::move(r));
  }
  if (!ds.records.empty()) ds.device = ds.records.front().device;
  validate_dataset(ds);
  return ds;
}

Dataset load_measurements(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_measurements_csv(buf.str(), path);
}

std::string measurements_to_csv(const Dataset& ds) {
  std::string out(kMeasurementCsvHeader);
  out.push_back('\n');
  for (const auto& r : ds.records) {
    out += r.model_name;
    out += ',';
    out += r.family;
    out += ',';
    out += r.variant;
    out += ',';
    out += std::to_string(r.input_size);
    out += ',';
    out += r.device;
    out += ',';
    out += std::to_string(r.replicates);
    out += ',';
    out += format_double(r.latency_ms);
    out += ',';
    out += format_double(r.latency_std_ms);
    for (const double f : r.features) {
      out += ',';
      out += format_double(f);
    }
    out.push_back('\n');
  }
  return out;
}

void save_measurements(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << measurements_to_csv(ds);
  if (!out) throw IoError("write failed for '" + path + "'");
}

void validate_dataset(const Dataset& ds) {
  std::set<std::string> keys;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    const auto& r = ds.records[i];
    const std::string row = "row " + std::to_string(i + 1);
    if (r.latency_ms <= 0.0)
      throw InvariantError(row + ": latency_ms must be > 0, got " + format_double(r.latency_ms));
    if (r.latency_std_ms < 0.0)
      throw InvariantError(row + ": latency_std_ms must be >= 0");
    if (r.replicates < 1) throw InvariantError(row + ": replicates must be >= 1");
    if (r.device != ds.device)
      throw InvariantError(row + ": device '" + r.device + "' differs from dataset device '" +
                           ds.device + "'");
    if (r.features[kInputImageSize] != static_cast<double>(r.input_size))
      throw InvariantError(row + ": input_image_size feature (" +
                           format_double(r.features[kInputImageSize]) +
                           ") disagrees with input_size column (" +
                           std::to_string(r.input_size) + ")");
    if (!keys.insert(record_key(r)).second)
      throw InvariantError(row + ": duplicate (model_name, variant, input_size) key for '" +
                           r.model_name + "', '" + r.variant + "', " +
                           std::to_string(r.input_size));
  }
}

namespace {

struct VariantGroup {
  std::string family;
  std::string variant;
  std::vector<std::size_t> records;              // all record indices of this (family, variant)
  std::map<int, std::vector<std::size_t>> by_size;
};

// Greedy holdout picker shared by the NCA and NCV stages. Candidates are
// scanned in their (pre-shuffled) order; while no single candidate reaches
// `target`, the first eligible one is taken as filler; once crossing
// candidates exist, the one with the least overshoot ends the stage. `cap`
// bounds the running total so later spaces keep their share of the budget.
// `eligible` is re-evaluated each round, `on_pick` applies side effects.
std::vector<std::size_t> pick_until_target(const std::vector<std::size_t>& sizes, double target,
                                           std::size_t cap,
                                           const std::function<bool(std::size_t)>& eligible,
                                           const std::function<void(std::size_t)>& on_pick) {
  std::vector<std::size_t> picked;
  std::vector<bool> used(sizes.size(), false);
  std::size_t total = 0;
  while (static_cast<double>(total) < target) {
    std::size_t filler = sizes.size();
    std::size_t crossing = sizes.size();
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      if (used[i] || !eligible(i)) continue;
      if (total + sizes[i] > cap) continue;
      if (static_cast<double>(total + sizes[i]) >= target) {
        if (crossing == sizes.size() || sizes[i] < sizes[crossing]) crossing = i;
      } else if (filler == sizes.size()) {
        filler = i;
      }
    }
    const std::size_t best = crossing != sizes.size() ? crossing : filler;
    if (best == sizes.size()) break;  // nothing eligible fits under the cap
    used[best] = true;
    picked.push_back(best);
    total += sizes[best];
    on_pick(best);
  }
  return picked;
}

}  // namespace

SplitPlan make_split(const Dataset& ds, double train_ratio, std::uint64_t seed) {
  if (!(train_ratio > 0.0 && train_ratio < 1.0))
    throw InsufficientDiversityError("train_ratio must be in (0, 1)");
  const std::size_t n = ds.records.size();

  // group records family -> variant
  std::map<std::string, std::map<std::string, VariantGroup>> families;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = ds.records[i];
    auto& vg = families[r.family][r.variant];
    vg.family = r.family;
    vg.variant = r.variant;
    vg.records.push_back(i);
    vg.by_size[r.input_size].push_back(i);
  }

  if (families.size() < 3)
    throw InsufficientDiversityError("need >= 3 families, got " + std::to_string(families.size()));
  bool some_multi_variant = false;
  for (const auto& [fam, variants] : families) {
    if (variants.size() >= 2) some_multi_variant = true;
    for (const auto& [var, vg] : variants) {
      if (vg.by_size.size() < 2)
        throw InsufficientDiversityError("(family '" + fam + "', variant '" + var +
                                         "') has fewer than 2 input sizes");
    }
  }
  if (!some_multi_variant)
    throw InsufficientDiversityError("no family has >= 2 variants");

  const auto target_train = static_cast<std::size_t>(std::llround(train_ratio * static_cast<double>(n)));
  const std::size_t test_budget = n - target_train;
  const double space_target = static_cast<double>(test_budget) / 3.0;

  Rng rng(mix_seed(seed, 1));

  // ---- NCA: whole families ----
  std::vector<std::string> family_order;
  for (const auto& [fam, variants] : families) family_order.push_back(fam);
  rng.shuffle(family_order);

  std::vector<std::size_t> family_sizes(family_order.size());
  std::vector<std::size_t> family_multi(family_order.size());  // has >= 2 variants
  for (std::size_t i = 0; i < family_order.size(); ++i) {
    const auto& variants = families.at(family_order[i]);
    std::size_t count = 0;
    for (const auto& [var, vg] : variants) count += vg.records.size();
    family_sizes[i] = count;
    family_multi[i] = variants.size() >= 2 ? 1 : 0;
  }
  const std::size_t multi_total = static_cast<std::size_t>(
      std::count(family_multi.begin(), family_multi.end(), std::size_t{1}));

  // soft NIS reservation: on corpora of meaningful size, keep a slice of the
  // test budget out of the family/variant holdouts so the NIS space stays
  // populated; tiny corpora skip the reservation
  const std::size_t nis_reserve = test_budget >= 12 ? test_budget / 6 : 0;

  // a family is NCA-eligible if holding it out keeps at least one
  // multi-variant family and at least two families in the remainder; the
  // reserve cap is dropped on a second attempt if nothing fit under it
  std::vector<std::size_t> picked_order;
  for (const std::size_t cap : {test_budget - nis_reserve, test_budget}) {
    std::size_t multi_picked = 0;
    std::size_t count_picked = 0;
    picked_order = pick_until_target(
        family_sizes, space_target, cap,
        [&](std::size_t i) {
          if (family_multi[i] == 1 && multi_picked + 1 >= multi_total) return false;
          return count_picked + 1 < family_order.size() - 1;
        },
        [&](std::size_t i) {
          multi_picked += family_multi[i];
          ++count_picked;
        });
    if (!picked_order.empty()) break;
  }
  if (picked_order.empty())
    throw InsufficientDiversityError("cannot hold out any family for the NCA space");

  SplitPlan plan;
  plan.seed = seed;
  std::set<std::string> nca_families;
  for (const std::size_t i : picked_order) {
    nca_families.insert(family_order[i]);
    for (const auto& [var, vg] : families.at(family_order[i]))
      plan.test_nca.insert(plan.test_nca.end(), vg.records.begin(), vg.records.end());
  }

  // ---- NCV: whole variants within the remaining families ----
  std::vector<const VariantGroup*> variant_groups;
  for (const auto& [fam, variants] : families) {
    if (nca_families.count(fam)) continue;
    if (variants.size() < 2) continue;  // keep >= 1 variant of each family in train
    for (const auto& [var, vg] : variants) variant_groups.push_back(&vg);
  }
  rng.shuffle(variant_groups);

  std::map<std::string, std::size_t> variants_left;
  for (const auto* vg : variant_groups) variants_left[vg->family] += 1;

  std::set<std::string> ncv_keys;
  {
    std::vector<std::size_t> group_sizes(variant_groups.size());
    for (std::size_t i = 0; i < variant_groups.size(); ++i)
      group_sizes[i] = variant_groups[i]->records.size();

    // combined holdout must leave the NIS reserve alone if possible, and in
    // any case stay within the +-2 window the train-ratio invariant allows
    const std::size_t held_nca = plan.test_nca.size();
    std::vector<std::size_t> picks;
    for (const std::size_t cap : {test_budget - nis_reserve, test_budget + 2}) {
      if (cap <= held_nca) continue;
      picks = pick_until_target(
          group_sizes, space_target, cap - held_nca,
          [&](std::size_t i) { return variants_left[variant_groups[i]->family] >= 2; },
          [&](std::size_t i) { variants_left[variant_groups[i]->family] -= 1; });
      if (!picks.empty()) break;
    }
    for (const std::size_t i : picks) {
      const auto* vg = variant_groups[i];
      ncv_keys.insert(vg->family + "\x1f" + vg->variant);
      plan.test_ncv.insert(plan.test_ncv.end(), vg->records.begin(), vg->records.end());
    }
    if (plan.test_ncv.empty())
      throw InsufficientDiversityError("cannot hold out any variant for the NCV space");
  }

  // ---- NIS: single input sizes of the remaining (family, variant) pairs ----
  const std::size_t held = plan.test_nca.size() + plan.test_ncv.size();
  if (held > test_budget + 2)
    throw InsufficientDiversityError(
        "family/variant holdouts exceed the test budget; cannot hit the train ratio");
  const std::size_t nis_needed = held >= test_budget ? 0 : test_budget - held;

  struct SizeUnit {
    const VariantGroup* vg;
    int size;
  };
  std::vector<SizeUnit> units;
  std::map<std::string, std::size_t> sizes_left;
  for (const auto& [fam, variants] : families) {
    if (nca_families.count(fam)) continue;
    for (const auto& [var, vg] : variants) {
      if (ncv_keys.count(fam + "\x1f" + var)) continue;
      sizes_left[fam + "\x1f" + var] = vg.by_size.size();
      for (const auto& [size, recs] : vg.by_size) units.push_back({&vg, size});
    }
  }
  rng.shuffle(units);

  std::size_t nis_count = 0;
  for (const auto& unit : units) {
    if (nis_count >= nis_needed) break;
    auto& left = sizes_left[unit.vg->family + "\x1f" + unit.vg->variant];
    if (left < 2) continue;  // the pair must keep >= 1 size in train
    left -= 1;
    const auto& recs = unit.vg->by_size.at(unit.size);
    plan.test_nis.insert(plan.test_nis.end(), recs.begin(), recs.end());
    nis_count += recs.size();
  }
  if (nis_count + 2 < nis_needed)
    throw InsufficientDiversityError("not enough held-out input sizes to hit the train ratio");

  // ---- train = everything else ----
  std::vector<bool> in_test(n, false);
  for (const auto* list : {&plan.test_nis, &plan.test_ncv, &plan.test_nca})
    for (const std::size_t i : *list) in_test[i] = true;
  for (std::size_t i = 0; i < n; ++i)
    if (!in_test[i]) plan.train.push_back(i);

  std::sort(plan.test_nis.begin(), plan.test_nis.end());
  std::sort(plan.test_ncv.begin(), plan.test_ncv.end());
  std::sort(plan.test_nca.begin(), plan.test_nca.end());

  const auto train_n = static_cast<std::ptrdiff_t>(plan.train.size());
  if (std::abs(train_n - static_cast<std::ptrdiff_t>(target_train)) > 2)
    throw InsufficientDiversityError("train size " + std::to_string(plan.train.size()) +
                                     " misses the requested ratio target " +
                                     std::to_string(target_train) + " by more than 2 records");
  return plan;
}

Standardizer fit_standardizer(const std::vector<FeatureVector>& rows) {
  if (rows.empty()) throw EmptyTrainError("standardizer needs a non-empty training set");
  Standardizer st;
  const double n = static_cast<double>(rows.size());
  for (int f = 0; f < kFeatureCount; ++f) {
    const auto fi = static_cast<std::size_t>(f);
    double mean = 0.0;
    for (const auto& row : rows) mean += row[fi];
    mean /= n;
    double var = 0.0;
    for (const auto& row : rows) var += (row[fi] - mean) * (row[fi] - mean);
    var /= n;  // population variance
    st.mean[fi] = mean;
    const double sd = std::sqrt(var);
    if (sd > 0.0) {
      st.std[fi] = sd;
    } else {
      st.std[fi] = 1.0;
      st.constant_feature[fi] = true;
    }
  }
  return st;
}

Standardizer fit_standardizer(const Dataset& ds, const std::vector<std::size_t>& train) {
  return fit_standardizer(features_of(ds, train));
}

FeatureVector standardize(const Standardizer& st, const FeatureVector& fv) {
  FeatureVector out;
  for (std::size_t f = 0; f < kFeatureCount; ++f) out[f] = (fv[f] - st.mean[f]) / st.std[f];
  return out;
}

std::vector<FeatureVector> features_of(const Dataset& ds, const std::vector<std::size_t>& idx) {
  std::vector<FeatureVector> out;
  out.reserve(idx.size());
  for (const std::size_t i : idx) out.push_back(ds.records[i].features);
  return out;
}

std::vector<double> targets_of(const Dataset& ds, const std::vector<std::size_t>& idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (const std::size_t i : idx) out.push_back(ds.records[i].latency_ms);
  return out;
}

std::string split_plan_to_json(const SplitPlan& plan) {
  nlohmann::ordered_json j;
  j["seed"] = plan.seed;
  j["train"] = plan.train;
  j["test_nis"] = plan.test_nis;
  j["test_ncv"] = plan.test_ncv;
  j["test_nca"] = plan.test_nca;
  return j.dump(2) + "\n";
}

SplitPlan split_plan_from_json(const std::string& text, std::size_t dataset_size) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("malformed split plan: ") + e.what());
  }
  SplitPlan plan;
  plan.seed = j.value("seed", std::uint64_t{0});
  for (const auto& [field, out] :
       std::initializer_list<std::pair<const char*, std::vector<std::size_t>*>>{
           {"train", &plan.train},
           {"test_nis", &plan.test_nis},
           {"test_ncv", &plan.test_ncv},
           {"test_nca", &plan.test_nca}}) {
    if (!j.contains(field)) throw SchemaError(std::string("split plan missing '") + field + "'");
    for (const auto& v : j[field]) {
      const auto i = v.get<std::size_t>();
      if (i >= dataset_size)
        throw SchemaError("split plan index " + std::to_string(i) +
                          " out of range for dataset of " + std::to_string(dataset_size));
      out->push_back(i);
    }
  }
  std::vector<bool> seen(dataset_size, false);
  for (const auto* list : {&plan.train, &plan.test_nis, &plan.test_ncv, &plan.test_nca}) {
    for (const std::size_t i : *list) {
      if (seen[i])
        throw SchemaError("split plan index " + std::to_string(i) + " appears twice");
      seen[i] = true;
    }
  }
  return plan;
}

}  // namespace latproph

#include "coba/augment.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "coba/error.hpp"
#include "coba/tokenize.hpp"

namespace coba {

void AugmentationConfig::validate() const {
  if (k < 1) throw Error(ErrorCode::InvalidK, "k must be >= 1");
  if (!(p_delete >= 0.0 && p_delete <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "p_delete must lie in [0, 1]");
  }
  if (n_variants < 1) throw Error(ErrorCode::InvalidArgument, "n_variants must be >= 1");
  if (tau && *tau < 1) throw Error(ErrorCode::InvalidArgument, "tau must be >= 1");
}

std::string_view to_string(AugmentOp op) noexcept {
  switch (op) {
    case AugmentOp::Modify: return "modify";
    case AugmentOp::GenderSwap: return "gender_swap";
    case AugmentOp::Permute: return "permute";
    case AugmentOp::Delete: return "delete";
  }
  return "?";
}

Label flip_label(Label y, TaskKind task, Rng& rng) {
  if (!in_label_space(task, y)) {
    throw Error(ErrorCode::UnknownLabel, std::string(to_string(y)) +
                                             " is not a " + std::string(to_string(task)) +
                                             " label");
  }
  std::vector<Label> others;
  for (Label l : labels(task)) {
    if (l != y) others.push_back(l);
  }
  if (others.size() == 1) return others.front();
  return others[static_cast<std::size_t>(rng.below(others.size()))];
}

// ---------------------------------------------------------------------------
// Gender lexicon.

GenderLexicon::GenderLexicon(std::map<std::string, std::string> pairs)
    : pairs_(std::move(pairs)) {
  for (const auto& [a, b] : pairs_) {
    auto it = pairs_.find(b);
    if (it == pairs_.end() || it->second != a) {
      throw Error(ErrorCode::AsymmetricLexicon,
                  "'" + a + "' -> '" + b + "' has no inverse");
    }
  }
}

GenderLexicon GenderLexicon::from_pairs(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::map<std::string, std::string> map;
  auto add = [&](const std::string& a, const std::string& b) {
    auto [it, inserted] = map.emplace(a, b);
    if (!inserted && it->second != b) {
      throw Error(ErrorCode::AsymmetricLexicon,
                  "'" + a + "' maps to both '" + it->second + "' and '" + b + "'");
    }
  };
  for (const auto& [x, y] : pairs) {
    const auto a = to_lower(trim(x));
    const auto b = to_lower(trim(y));
    if (a.empty() || b.empty() || a == b) {
      throw Error(ErrorCode::AsymmetricLexicon, "bad lexicon pair '" + x + "' / '" + y + "'");
    }
    add(a, b);
    add(b, a);
  }
  return GenderLexicon(std::move(map));
}

GenderLexicon GenderLexicon::parse(std::string_view content) {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream cols(line);
    std::string a, b, extra;
    if (!(cols >> a)) continue;
    if (!(cols >> b) || (cols >> extra)) {
      throw Error(ErrorCode::InvalidArgument,
                  "gender lexicon needs two columns per line", line_no);
    }
    pairs.emplace_back(a, b);
  }
  return from_pairs(pairs);
}

GenderLexicon GenderLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

GenderLexicon GenderLexicon::builtin() {
  // "him" is left out: "her" already pairs with "his".
  return from_pairs({
      {"man", "woman"},          {"men", "women"},
      {"he", "she"},             {"his", "her"},
      {"himself", "herself"},    {"boy", "girl"},
      {"boys", "girls"},         {"father", "mother"},
      {"fathers", "mothers"},    {"son", "daughter"},
      {"sons", "daughters"},     {"brother", "sister"},
      {"brothers", "sisters"},   {"husband", "wife"},
      {"husbands", "wives"},     {"king", "queen"},
      {"kings", "queens"},       {"mr", "mrs"},
      {"sir", "madam"},          {"gentleman", "lady"},
      {"gentlemen", "ladies"},   {"male", "female"},
      {"males", "females"},      {"uncle", "aunt"},
      {"uncles", "aunts"},       {"nephew", "niece"},
      {"grandfather", "grandmother"}, {"grandson", "granddaughter"},
      {"boyfriend", "girlfriend"}, {"actor", "actress"},
      {"actors", "actresses"},   {"prince", "princess"},
      {"dad", "mom"},            {"daddy", "mommy"},
      {"groom", "bride"},        {"waiter", "waitress"},
      {"guy", "gal"},            {"monk", "nun"},
      {"emperor", "empress"},    {"hero", "heroine"},
      {"steward", "stewardess"}, {"businessman", "businesswoman"},
      {"policeman", "policewoman"}, {"chairman", "chairwoman"},
  });
}

std::set<std::string> GenderLexicon::words() const {
  std::set<std::string> out;
  for (const auto& [a, b] : pairs_) out.insert(a);
  return out;
}

namespace {

bool ascii_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool ascii_lower(char c) { return c >= 'a' && c <= 'z'; }

std::string apply_case(std::string_view original, const std::string& word) {
  std::string out = word;
  const bool any_lower = std::any_of(original.begin(), original.end(), ascii_lower);
  if (original.size() > 1 && !any_lower &&
      std::any_of(original.begin(), original.end(), ascii_upper)) {
    for (char& c : out) {
      if (ascii_lower(c)) c = static_cast<char>(c - 'a' + 'A');
    }
  } else if (!original.empty() && ascii_upper(original.front()) && !out.empty() &&
             ascii_lower(out.front())) {
    out.front() = static_cast<char>(out.front() - 'a' + 'A');
  }
  return out;
}

std::size_t possessive_suffix(std::string_view original) {
  auto ends_with = [&](std::string_view s) {
    return original.size() > s.size() && original.substr(original.size() - s.size()) == s;
  };
  if (ends_with("'s") || ends_with("'S")) return 2;
  if (ends_with("\xE2\x80\x99s") || ends_with("\xE2\x80\x99S")) return 4;
  return 0;
}

}  // namespace

std::string GenderLexicon::swap(std::string_view text, int* count) const {
  std::string out;
  std::size_t last = 0;
  int n = 0;
  for (const auto& tok : tokenize_spans(text)) {
    const auto original = text.substr(tok.byte_begin, tok.byte_end - tok.byte_begin);
    std::string key = tok.text;
    std::size_t suffix = 0;
    auto it = pairs_.find(key);
    if (it == pairs_.end()) {
      suffix = possessive_suffix(original);
      if (suffix == 0 || key.size() < 3) continue;
      key.resize(key.size() - 2);
      it = pairs_.find(key);
      if (it == pairs_.end()) continue;
    }
    const auto base = original.substr(0, original.size() - suffix);
    out.append(text.substr(last, tok.byte_begin - last));
    out += apply_case(base, it->second);
    out.append(original.substr(base.size()));
    last = tok.byte_end;
    ++n;
  }
  out.append(text.substr(last));
  if (count) *count = n;
  return out;
}

TripleSet gender_swap(const TripleSet& ts, const GenderLexicon& lexicon, int* replacements) {
  TripleSet out = ts;
  int total = 0;
  for (auto& e : out.entries) {
    for (auto* slot : {&e.triple.subject, &e.triple.predicate, &e.triple.object}) {
      int n = 0;
      *slot = lexicon.swap(*slot, &n);
      total += n;
    }
  }
  if (replacements) *replacements = total;
  return out;
}

TripleSet permute_normals(const TripleSet& ts, Rng& rng) {
  TripleSet out = ts;
  std::vector<std::size_t> positions;
  std::vector<CategorizedTriple> normals;
  for (std::size_t i = 0; i < ts.entries.size(); ++i) {
    if (ts.entries[i].category == TripleCategory::Normal) {
      positions.push_back(i);
      normals.push_back(ts.entries[i]);
    }
  }
  if (normals.size() < 2) return out;
  rng.shuffle(std::span<CategorizedTriple>(normals));
  for (std::size_t j = 0; j < positions.size(); ++j) out.entries[positions[j]] = normals[j];
  return out;
}

TripleSet delete_normals(const TripleSet& ts, double p_delete, Rng& rng) {
  std::vector<bool> keep(ts.entries.size(), true);
  for (std::size_t i = 0; i < ts.entries.size(); ++i) {
    if (ts.entries[i].category == TripleCategory::Normal && rng.bernoulli(p_delete)) {
      keep[i] = false;
    }
  }
  std::map<int, std::vector<std::size_t>> by_group;
  for (std::size_t i = 0; i < ts.entries.size(); ++i) {
    by_group[ts.entries[i].triple.group].push_back(i);
  }
  for (const auto& [group, members] : by_group) {
    const bool any = std::any_of(members.begin(), members.end(),
                                 [&](std::size_t i) { return keep[i]; });
    if (!any) keep[members[static_cast<std::size_t>(rng.below(members.size()))]] = true;
  }
  TripleSet out;
  out.task = ts.task;
  for (std::size_t i = 0; i < ts.entries.size(); ++i) {
    if (keep[i]) out.entries.push_back(ts.entries[i]);
  }
  return out;
}

void load_lexicons(const AugmentationConfig& cfg, AugmentDeps& deps) {
  deps.gender = cfg.gender_lexicon_path ? GenderLexicon::load(*cfg.gender_lexicon_path)
                                        : GenderLexicon::builtin();
  deps.extra_spurious.clear();
  if (cfg.extra_spurious_path) deps.extra_spurious = load_word_list(*cfg.extra_spurious_path);
}

// ---------------------------------------------------------------------------
// Pipeline.

namespace {

// Sub-seed streams: 0 label flip, 1..n variants, kImportanceStream + i model i.
constexpr std::uint64_t kImportanceStream = 1u << 20;

std::string classifier_input(const std::string& text1, const std::optional<std::string>& text2) {
  if (!text2) return text1;
  return text1 + std::string(ScoringView::kSeparator) + *text2;
}

}  // namespace

std::vector<CounterbiasRecord> generate_counterbias(const Example& example, TaskKind task,
                                                    const AugmentDeps& deps,
                                                    const AugmentationConfig& cfg,
                                                    ExampleTrace* trace) {
  cfg.validate();
  if (deps.ensemble.empty()) throw Error(ErrorCode::InvalidArgument, "empty ensemble");
  if (!deps.backend) throw Error(ErrorCode::InvalidArgument, "no LLM backend");
  validate_example(example, task);

  const auto raw = decompose(*deps.backend, example, deps.prompts.ext, deps.ext_params);
  auto parsed = parse_triples(raw, task);

  std::vector<TopKWords> lists;
  lists.reserve(deps.ensemble.size());
  for (std::size_t i = 0; i < deps.ensemble.size(); ++i) {
    const auto& model = *deps.ensemble[i];
    const auto scores = score_importance(model, example, deps.importance,
                                         derive_seed(cfg.seed, example.id, kImportanceStream + i));
    lists.push_back(top_k(scores, cfg.k, model.name()));
  }
  const auto voted = vote(lists, cfg.tau);
  auto lexicon = deps.extra_spurious;
  for (const auto& w : deps.gender.words()) lexicon.insert(w);
  const auto word_sets = extend_spurious(voted.sets, lexicon);
  const auto before = categorize(parsed.triples, word_sets);

  Rng label_rng(derive_seed(cfg.seed, example.id, 0));
  const Label target = flip_label(example.label, task, label_rng);

  std::vector<AugmentOp> base_ops;
  TripleSet modified = before;
  const bool has_principal = before.count(TripleCategory::Principal) > 0;
  for (auto& e : modified.entries) {
    if (e.category != TripleCategory::Principal) continue;
    e.triple = modify_triple(*deps.backend, e.triple, target, deps.prompts.mod, deps.mod_params);
  }
  if (has_principal) {
    base_ops.push_back(AugmentOp::Modify);
  } else {
    spdlog::warn("NoPrincipalTriples: no principal word of '{}' occurs in its triples",
                 example.id);
  }
  int swapped = 0;
  modified = gender_swap(modified, deps.gender, &swapped);
  if (swapped > 0) base_ops.push_back(AugmentOp::GenderSwap);

  if (trace) {
    trace->top_k = lists;
    trace->no_principal_triples = !has_principal;
    trace->skipped_lines = parsed.skipped_lines;
  }

  std::vector<CounterbiasRecord> records;
  for (int v = 0; v < cfg.n_variants; ++v) {
    Rng rng(derive_seed(cfg.seed, example.id, static_cast<std::uint64_t>(v) + 1));
    auto ops = base_ops;
    auto after = permute_normals(modified, rng);
    if (modified.count(TripleCategory::Normal) >= 2) ops.push_back(AugmentOp::Permute);
    const auto kept = after.size();
    after = delete_normals(after, cfg.p_delete, rng);
    if (after.size() < kept) ops.push_back(AugmentOp::Delete);

    std::string content = serialize_triples(after, Numbering::Original);
    if (task == TaskKind::Nli3Way) content += "\n\nlabel: " + std::string(to_string(target));
    const auto text = reconstruct(*deps.backend, content, deps.prompts.rec, deps.rec_params);

    CounterbiasRecord rec;
    rec.source_id = example.id;
    rec.original_label = example.label;
    rec.target_label = target;
    if (task == TaskKind::Nli3Way) {
      auto [s1, s2] = split_nli_reconstruction(text);
      rec.text1 = std::move(s1);
      rec.text2 = std::move(s2);
    } else {
      rec.text1 = text;
    }
    rec.triples_before = before;
    rec.triples_after = std::move(after);
    rec.applied_ops = std::move(ops);
    rec.word_sets = word_sets;
    rec.variant_index = v;
    if (cfg.verify) {
      const auto input = classifier_input(rec.text1, rec.text2);
      const auto want = label_index(task, target);
      std::size_t agree = 0;
      for (const auto& model : deps.ensemble) {
        const auto row = model->predict_one(input);
        const auto best = static_cast<std::size_t>(
            std::max_element(row.probs.begin(), row.probs.end()) - row.probs.begin());
        if (best == want) ++agree;
      }
      rec.verified = 2 * agree > deps.ensemble.size();
    }
    records.push_back(std::move(rec));
  }
  return records;
}

namespace {

struct Outcome {
  std::vector<CounterbiasRecord> records;
  ExampleTrace trace;
  std::optional<std::string> failure;
};

/// Spurious words of spurious triples that reappear in the output text.
std::pair<std::size_t, std::size_t> retention(const CounterbiasRecord& rec) {
  std::set<std::string> wanted;
  for (const auto& e : rec.triples_after.entries) {
    if (e.category != TripleCategory::Spurious) continue;
    for (const auto* slot : {&e.triple.subject, &e.triple.predicate, &e.triple.object}) {
      for (auto& tok : tokenize(*slot)) {
        if (rec.word_sets.spurious.count(tok)) wanted.insert(std::move(tok));
      }
    }
  }
  auto toks = tokenize(rec.text1);
  if (rec.text2) {
    auto more = tokenize(*rec.text2);
    toks.insert(toks.end(), more.begin(), more.end());
  }
  const std::set<std::string> present(toks.begin(), toks.end());
  std::size_t kept = 0;
  for (const auto& w : wanted) kept += present.count(w);
  return {kept, wanted.size()};
}

}  // namespace

AugmentResult augment_dataset(const Dataset& ds, const AugmentDeps& deps,
                              const AugmentationConfig& cfg, int workers) {
  cfg.validate();
  if (workers < 1) throw Error(ErrorCode::InvalidArgument, "workers must be >= 1");
  std::vector<Outcome> outcomes(ds.examples.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < ds.examples.size(); i = next++) {
      const auto& ex = ds.examples[i];
      try {
        outcomes[i].records = generate_counterbias(ex, ds.task, deps, cfg, &outcomes[i].trace);
      } catch (const Error& e) {
        outcomes[i].failure = std::string(to_string(e.code())) + ": " + e.what();
      } catch (const std::exception& e) {
        outcomes[i].failure = e.what();
      }
    }
  };
  const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(workers),
                                               std::max<std::size_t>(ds.examples.size(), 1));
  if (n_threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(work);
  }

  AugmentResult result;
  auto& s = result.summary;
  s.examples = ds.examples.size();
  std::size_t kept = 0;
  std::size_t wanted = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    auto& o = outcomes[i];
    const auto& id = ds.examples[i].id;
    if (o.failure) {
      ++s.skipped;
      s.failures[id] = *o.failure;
      spdlog::warn("skipping '{}': {}", id, *o.failure);
      continue;
    }
    ++s.succeeded;
    if (o.trace.no_principal_triples) ++s.no_principal_warnings;
    s.unparsed_lines += o.trace.skipped_lines;
    result.top_k.emplace_back(id, std::move(o.trace.top_k));
    for (auto& rec : o.records) {
      const auto [k, w] = retention(rec);
      kept += k;
      wanted += w;
      if (rec.verified) {
        ++s.verified_total;
        if (*rec.verified) ++s.verified_true;
      }
      result.records.push_back(std::move(rec));
    }
  }
  s.records = result.records.size();
  s.spurious_word_retention = wanted ? static_cast<double>(kept) / static_cast<double>(wanted) : 1.0;
  if (result.records.empty()) {
    throw Error(ErrorCode::AllExamplesFailed,
                "no counterbias records produced from " + std::to_string(s.examples) +
                    " examples");
  }
  return result;
}

namespace {

nlohmann::ordered_json triples_json(const TripleSet& ts) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& e : ts.entries) {
    nlohmann::ordered_json t;
    t["group"] = e.triple.group;
    t["ordinal"] = e.triple.ordinal;
    t["subject"] = e.triple.subject;
    t["predicate"] = e.triple.predicate;
    t["object"] = e.triple.object;
    t["category"] = to_string(e.category);
    arr.push_back(std::move(t));
  }
  return arr;
}

}  // namespace

std::string records_to_jsonl(const std::vector<CounterbiasRecord>& records, TaskKind task) {
  std::string out;
  for (const auto& rec : records) {
    nlohmann::ordered_json j;
    j["source_id"] = rec.source_id;
    j["label"] = to_string(rec.target_label);
    j["text"] = rec.text1;
    if (task == TaskKind::Nli3Way && rec.text2) j["text2"] = *rec.text2;
    nlohmann::ordered_json prov;
    prov["original_label"] = to_string(rec.original_label);
    prov["word_sets"] = {{"principal", rec.word_sets.principal},
                         {"spurious", rec.word_sets.spurious}};
    auto ops = nlohmann::ordered_json::array();
    for (auto op : rec.applied_ops) ops.push_back(to_string(op));
    prov["applied_ops"] = std::move(ops);
    prov["variant"] = rec.variant_index;
    if (rec.verified) prov["verified"] = *rec.verified;
    prov["triples_before"] = triples_json(rec.triples_before);
    prov["triples_after"] = triples_json(rec.triples_after);
    j["provenance"] = std::move(prov);
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

Dataset merge_dataset(const Dataset& original, const std::vector<CounterbiasRecord>& records) {
  Dataset merged = original;
  std::set<std::string> ids;
  for (const auto& ex : original.examples) ids.insert(ex.id);
  for (const auto& rec : records) {
    Example ex;
    ex.id = rec.source_id + "-cb" + std::to_string(rec.variant_index);
    for (int n = 2; ids.count(ex.id); ++n) {
      ex.id = rec.source_id + "-cb" + std::to_string(rec.variant_index) + "-" + std::to_string(n);
    }
    ids.insert(ex.id);
    ex.text1 = rec.text1;
    if (original.task == TaskKind::Nli3Way) ex.text2 = rec.text2;
    ex.label = rec.target_label;
    merged.examples.push_back(std::move(ex));
  }
  return merged;
}

}  // namespace coba

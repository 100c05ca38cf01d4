#include "coba/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include <Eigen/Dense>

#include "coba/error.hpp"
#include "coba/http_client.hpp"
#include "coba/tokenize.hpp"

namespace coba {

OverlapReport duplication_ratio(const std::vector<ExampleTopK>& examples) {
  if (examples.empty()) throw Error(ErrorCode::InvalidArgument, "no examples");
  auto model_names = [](const ExampleTopK& ex) {
    std::set<std::string> names;
    for (const auto& l : ex.lists) {
      if (!names.insert(l.model_name).second) {
        throw Error(ErrorCode::InconsistentModels,
                    "model '" + l.model_name + "' listed twice for '" + ex.example_id + "'");
      }
    }
    return names;
  };
  const auto reference = model_names(examples.front());
  if (reference.empty()) throw Error(ErrorCode::InconsistentModels, "no model lists");

  std::size_t all = 0;
  std::size_t two = 0;
  std::size_t two_not_all = 0;
  for (const auto& ex : examples) {
    if (model_names(ex) != reference) {
      throw Error(ErrorCode::InconsistentModels,
                  "example '" + ex.example_id + "' has a different model set");
    }
    std::map<std::string, std::size_t> models_per_word;
    for (const auto& l : ex.lists) {
      for (const auto& w : std::set<std::string>(l.words.begin(), l.words.end())) {
        ++models_per_word[w];
      }
    }
    bool in_all = false;
    bool in_two = false;
    for (const auto& [w, n] : models_per_word) {
      in_all = in_all || n == ex.lists.size();
      in_two = in_two || n >= 2;
    }
    all += in_all;
    two += in_two;
    two_not_all += in_two && !in_all;
  }
  const auto n = static_cast<double>(examples.size());
  return {static_cast<double>(all) / n, static_cast<double>(two) / n,
          static_cast<double>(two_not_all) / n, examples.size()};
}

// ---------------------------------------------------------------------------

std::string_view to_string(PosBucket bucket) noexcept {
  switch (bucket) {
    case PosBucket::Noun: return "Noun";
    case PosBucket::Verb: return "Verb";
    case PosBucket::AdjAdv: return "AdjAdv";
    case PosBucket::Others: return "Others";
  }
  return "?";
}

PosBucket bucket_from_penn(std::string_view tag) noexcept {
  auto starts = [&](std::string_view p) { return tag.substr(0, p.size()) == p; };
  if (starts("NN")) return PosBucket::Noun;
  if (starts("VB")) return PosBucket::Verb;
  if (starts("JJ") || starts("RB")) return PosBucket::AdjAdv;
  return PosBucket::Others;
}

namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() > suffix.size() + 1 && s.substr(s.size() - suffix.size()) == suffix;
}

std::optional<PosBucket> bucket_name(std::string_view name) {
  for (auto b : kPosBuckets) {
    if (to_lower(name) == to_lower(to_string(b))) return b;
  }
  return std::nullopt;
}

}  // namespace

HeuristicTagger::HeuristicTagger() {
  const char* others[] = {
      "a", "an", "the", "this", "that", "these", "those", "i", "you", "he",
      "she", "it", "we", "they", "me", "him", "her", "us", "them", "my",
      "your", "his", "its", "our", "their", "mine", "yours", "who", "whom",
      "which", "what", "and", "or", "but", "nor", "so", "yet", "if", "than",
      "because", "while", "although", "in", "on", "at", "by", "for", "with",
      "about", "against", "between", "into", "through", "during", "before",
      "after", "above", "below", "to", "from", "up", "down", "of", "off",
      "over", "under", "as", "until", "some", "any", "each", "every", "all",
      "both", "no", "one", "two", "three", "there", "here", "can", "could",
      "will", "would", "shall", "should", "may", "might", "must"};
  const char* verbs[] = {
      "is", "are", "was", "were", "be", "been", "am", "do", "does", "did",
      "has", "have", "had", "love", "loves", "hate", "hates", "like",
      "likes", "enjoy", "enjoys", "feel", "feels", "felt", "make", "makes",
      "made", "get", "gets", "got", "go", "goes", "went", "see", "saw",
      "seen", "watch", "know", "knew", "think", "thought", "say", "said",
      "take", "took", "come", "came", "give", "gave", "find", "found",
      "sit", "sits", "sat", "eat", "eats", "ate", "run", "ran", "seem",
      "seems", "recommend", "waste", "wasted", "play", "plays", "talk",
      "talks", "walk", "walks", "ride", "rides", "hold", "holds", "wear",
      "wears", "stand", "stands", "lie", "lies"};
  const char* adj_adv[] = {
      "good", "bad", "great", "best", "worst", "better", "worse", "fine",
      "nice", "poor", "awful", "terrible", "excellent", "amazing", "boring",
      "dull", "fun", "funny", "sad", "happy", "old", "new", "young", "big",
      "small", "long", "short", "high", "low", "very", "too", "not", "never",
      "always", "often", "just", "quite", "rather", "really", "well", "also",
      "still", "even", "again", "almost", "perfect", "brilliant", "stupid",
      "beautiful", "ugly", "superb", "mediocre", "red", "blue", "green",
      "black", "white", "little", "few", "many", "much", "more", "most",
      "less", "least", "only", "enough", "together", "outside", "inside"};
  for (const char* w : others) lexicon_.emplace(w, PosBucket::Others);
  for (const char* w : verbs) lexicon_.emplace(w, PosBucket::Verb);
  for (const char* w : adj_adv) lexicon_.emplace(w, PosBucket::AdjAdv);
}

PosBucket HeuristicTagger::tag(std::string_view word) const {
  const auto w = to_lower(word);
  if (auto it = lexicon_.find(w); it != lexicon_.end()) return it->second;
  if (std::none_of(w.begin(), w.end(), [](unsigned char c) { return std::isalpha(c) || c >= 0x80; })) {
    return PosBucket::Others;
  }
  if (ends_with(w, "ly")) return PosBucket::AdjAdv;
  if (ends_with(w, "ing") || ends_with(w, "ed") || ends_with(w, "ize") ||
      ends_with(w, "ise") || ends_with(w, "ify")) {
    return PosBucket::Verb;
  }
  for (std::string_view s : {"tion", "sion", "ness", "ment", "ity", "ship", "ism", "ance", "ence"}) {
    if (ends_with(w, s)) return PosBucket::Noun;
  }
  for (std::string_view s : {"ous", "ful", "less", "able", "ible", "ive", "ic", "al", "est", "ish"}) {
    if (ends_with(w, s)) return PosBucket::AdjAdv;
  }
  return PosBucket::Noun;
}

TagFileTagger::TagFileTagger(std::string_view content, std::shared_ptr<const Tagger> fallback)
    : fallback_(std::move(fallback)) {
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    std::istringstream cols(line);
    std::string word, tag;
    if (!(cols >> word >> tag)) {
      throw Error(ErrorCode::MalformedRecord, "expected 'word<TAB>TAG'", line_no);
    }
    tags_[to_lower(word)] = bucket_name(tag).value_or(bucket_from_penn(tag));
  }
}

std::unique_ptr<TagFileTagger> TagFileTagger::load(const std::filesystem::path& path,
                                                   std::shared_ptr<const Tagger> fallback) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::make_unique<TagFileTagger>(ss.str(), std::move(fallback));
}

PosBucket TagFileTagger::tag(std::string_view word) const {
  if (auto it = tags_.find(to_lower(word)); it != tags_.end()) return it->second;
  if (fallback_) return fallback_->tag(word);
  return PosBucket::Others;
}

PosReport pos_ratio(const std::vector<std::string>& words, const Tagger& tagger) {
  if (words.empty()) throw Error(ErrorCode::EmptyWordList, "no words to tag");
  PosReport r;
  for (auto b : kPosBuckets) r.counts[b] = 0;
  for (const auto& w : words) ++r.counts[tagger.tag(w)];
  r.total = words.size();
  for (auto b : kPosBuckets) {
    r.ratios[b] = static_cast<double>(r.counts[b]) / static_cast<double>(r.total);
  }
  return r;
}

// ---------------------------------------------------------------------------

std::vector<EmbeddingVector> embed_tfidf(const std::vector<std::string>& texts) {
  if (texts.empty()) throw Error(ErrorCode::InvalidArgument, "no texts to embed");
  std::map<std::string, std::size_t> vocab;
  std::vector<std::vector<std::string>> docs;
  docs.reserve(texts.size());
  for (const auto& t : texts) {
    docs.push_back(tokenize(t));
    for (const auto& tok : docs.back()) vocab.emplace(tok, 0);
  }
  std::size_t j = 0;
  for (auto& [w, idx] : vocab) idx = j++;
  std::vector<double> df(vocab.size(), 0.0);
  for (const auto& d : docs) {
    for (const auto& w : std::set<std::string>(d.begin(), d.end())) df[vocab[w]] += 1.0;
  }
  const auto n = static_cast<double>(docs.size());
  std::vector<EmbeddingVector> out;
  out.reserve(docs.size());
  for (const auto& d : docs) {
    EmbeddingVector v;
    v.source = EmbeddingSource::LocalTfidf;
    v.values.assign(vocab.size(), 0.0);
    for (const auto& w : d) v.values[vocab[w]] += 1.0;
    double norm = 0.0;
    for (std::size_t k = 0; k < v.values.size(); ++k) {
      v.values[k] *= std::log((1.0 + n) / (1.0 + df[k])) + 1.0;
      norm += v.values[k] * v.values[k];
    }
    if (norm > 0.0) {
      norm = std::sqrt(norm);
      for (double& x : v.values) x /= norm;
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<EmbeddingVector> embed_remote(const HttpClient& client,
                                          const std::vector<std::string>& texts) {
  if (texts.empty()) throw Error(ErrorCode::InvalidArgument, "no texts to embed");
  const auto resp = client.post("/embeddings", nlohmann::json{{"texts", texts}});
  if (resp.status != 200) {
    throw Error(ErrorCode::BackendUnavailable,
                "/embeddings returned HTTP " + std::to_string(resp.status));
  }
  const auto j = parse_json_reply(resp, "/embeddings");
  std::vector<std::vector<double>> rows;
  try {
    rows = j.at("vectors").get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BackendUnavailable, std::string("bad /embeddings reply: ") + e.what());
  }
  if (rows.size() != texts.size()) {
    throw Error(ErrorCode::ShapeMismatch, "/embeddings returned " + std::to_string(rows.size()) +
                                              " vectors for " + std::to_string(texts.size()) +
                                              " texts");
  }
  const std::size_t dim = rows.empty() ? 0 : rows.front().size();
  std::vector<EmbeddingVector> out;
  for (auto& r : rows) {
    if (r.empty() || r.size() != dim) {
      throw Error(ErrorCode::DimensionMismatch, "inconsistent embedding dimensions");
    }
    if (!std::all_of(r.begin(), r.end(), [](double x) { return std::isfinite(x); })) {
      throw Error(ErrorCode::BackendUnavailable, "non-finite embedding value");
    }
    out.push_back({std::move(r), EmbeddingSource::Remote});
  }
  return out;
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.values.size() != b.values.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::to_string(a.values.size()) + " vs " + std::to_string(b.values.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    dot += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::ZeroVector, "zero embedding");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double pca_explained_variance(const std::vector<EmbeddingVector>& vectors, int n_components) {
  if (vectors.size() < 2) throw Error(ErrorCode::InvalidArgument, "PCA needs >= 2 vectors");
  if (n_components < 1) throw Error(ErrorCode::InvalidArgument, "n_components must be >= 1");
  const auto n = static_cast<Eigen::Index>(vectors.size());
  const auto d = static_cast<Eigen::Index>(vectors.front().values.size());
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& v = vectors[static_cast<std::size_t>(i)].values;
    if (static_cast<Eigen::Index>(v.size()) != d) {
      throw Error(ErrorCode::DimensionMismatch, "inconsistent embedding dimensions");
    }
    x.row(i) = Eigen::Map<const Eigen::RowVectorXd>(v.data(), d);
  }
  const double scale = x.squaredNorm() / static_cast<double>(n);
  x.rowwise() -= x.colwise().mean();
  // Covariance and Gram matrix share their non-zero spectrum; use the
  // smaller one.
  const Eigen::MatrixXd m = d <= n ? Eigen::MatrixXd(x.transpose() * x) : Eigen::MatrixXd(x * x.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::DegenerateData, "eigendecomposition failed");
  }
  std::vector<double> eig(solver.eigenvalues().data(),
                          solver.eigenvalues().data() + solver.eigenvalues().size());
  for (double& e : eig) e = std::max(e, 0.0);
  std::sort(eig.begin(), eig.end(), std::greater<>());
  const double total = std::accumulate(eig.begin(), eig.end(), 0.0);
  if (!(total > 1e-12 * std::max(scale, 1e-300))) {
    throw Error(ErrorCode::DegenerateData, "all vectors are identical");
  }
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(n_components), eig.size());
  const double top = std::accumulate(eig.begin(), eig.begin() + static_cast<std::ptrdiff_t>(take), 0.0);
  return std::clamp(top / total, 0.0, 1.0);
}

DiversityReport diversity(const std::vector<EmbeddingVector>& original,
                          const std::vector<EmbeddingVector>& augmented,
                          const std::vector<std::size_t>& pairs, int n_components) {
  if (augmented.empty()) throw Error(ErrorCode::InvalidArgument, "no augmented vectors");
  if (pairs.size() != augmented.size()) {
    throw Error(ErrorCode::ShapeMismatch, "one pair index per augmented vector required");
  }
  DiversityReport r;
  r.pairs = pairs.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i] >= original.size()) {
      throw Error(ErrorCode::InvalidArgument, "pair index out of range");
    }
    sum += cosine_similarity(original[pairs[i]], augmented[i]);
  }
  r.mean_cosine = sum / static_cast<double>(pairs.size());
  r.n_components = n_components;
  r.pca_variance = std::numeric_limits<double>::quiet_NaN();
  if (augmented.size() >= 2) {
    try {
      r.pca_variance = pca_explained_variance(augmented, n_components);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateData) throw;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const OverlapReport& r) {
  return {{"all_models_ratio", r.all_models_ratio},
          {"two_or_more_ratio", r.two_or_more_ratio},
          {"two_or_more_not_all_ratio", r.two_or_more_not_all_ratio},
          {"n_examples", r.n_examples}};
}

nlohmann::json to_json(const PosReport& r) {
  nlohmann::json ratios, counts;
  for (auto b : kPosBuckets) {
    ratios[std::string(to_string(b))] = r.ratios.count(b) ? r.ratios.at(b) : 0.0;
    counts[std::string(to_string(b))] = r.counts.count(b) ? r.counts.at(b) : 0;
  }
  return {{"ratios", ratios}, {"counts", counts}, {"total", r.total}};
}

nlohmann::json to_json(const DiversityReport& r) {
  nlohmann::json j = {{"pairs", r.pairs}, {"mean_cosine", r.mean_cosine},
                      {"n_components", r.n_components}};
  j["pca_variance"] = std::isfinite(r.pca_variance) ? nlohmann::json(r.pca_variance) : nlohmann::json();
  return j;
}

std::string format_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size(), 0);
  auto measure = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size() && i < width.size(); ++i) {
      width[i] = std::max(width[i], char_length(row[i]));
    }
  };
  measure(header);
  for (const auto& r : rows) measure(r);
  auto line = [&](const std::vector<std::string>& row) {
    std::string out;
    for (std::size_t i = 0; i < width.size(); ++i) {
      const std::string cell = i < row.size() ? row[i] : "";
      if (i) out += "  ";
      out += cell;
      if (i + 1 < width.size()) out.append(width[i] - char_length(cell), ' ');
    }
    out.push_back('\n');
    return out;
  };
  std::string out = line(header);
  std::vector<std::string> rule;
  for (auto w : width) rule.emplace_back(w, '-');
  out += line(rule);
  for (const auto& r : rows) out += line(r);
  return out;
}

}  // namespace coba

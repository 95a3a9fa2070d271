#include "ossforge/config.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace ossforge {

namespace {

std::string describe(const std::vector<ConfigIssue>& issues) {
  std::string msg = "invalid config:";
  for (const auto& i : issues) msg += "\n  " + i.field + ": " + i.message;
  return msg;
}

bool looks_like_secret(const std::string& key) {
  const std::string k = to_lower_ascii(key);
  return k.find("token") != std::string::npos || k.find("api_key") != std::string::npos ||
         k.find("apikey") != std::string::npos || k.find("secret") != std::string::npos ||
         k.find("password") != std::string::npos;
}

// Typed access to one JSON object with issue collection and unknown-key checks.
class Section {
 public:
  Section(const Json* obj, std::string path, std::vector<ConfigIssue>& issues, Json& canon)
      : obj_(obj), path_(std::move(path)), issues_(issues), canon_(canon) {
    if (obj_ != nullptr && !obj_->is_object()) {
      issue("", "expected an object");
      obj_ = nullptr;
    }
  }

  ~Section() {
    if (obj_ == nullptr) return;
    for (const auto& [key, value] : obj_->items()) {
      if (known_.contains(key)) continue;
      issue(key, looks_like_secret(key) ? "secrets are read from environment variables only, never from the config"
                                        : "unknown field");
    }
  }

  void issue(const std::string& key, const std::string& msg) {
    issues_.push_back({key.empty() ? path_ : (path_.empty() ? key : path_ + "." + key), msg});
  }

  const Json* raw(const std::string& key) {
    known_.insert(key);
    if (obj_ == nullptr || !obj_->contains(key) || (*obj_)[key].is_null()) return nullptr;
    return &(*obj_)[key];
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    const Json* v = raw(key);
    T out = fallback;
    if (v != nullptr) {
      try {
        out = v->get<T>();
      } catch (const Json::exception&) {
        issue(key, "wrong type");
      }
    }
    canon_[key] = out;
    return out;
  }

  std::size_t count(const std::string& key, std::size_t fallback, std::size_t min_value = 0) {
    const Json* v = raw(key);
    std::size_t out = fallback;
    if (v != nullptr) {
      if (!v->is_number_integer() || v->get<std::int64_t>() < static_cast<std::int64_t>(min_value)) {
        issue(key, "expected an integer >= " + std::to_string(min_value));
      } else {
        out = v->get<std::size_t>();
      }
    }
    canon_[key] = out;
    return out;
  }

  std::optional<std::filesystem::path> path(const std::string& key, const std::filesystem::path& base,
                                            bool required, bool must_exist = true) {
    const Json* v = raw(key);
    if (v == nullptr) {
      if (required) issue(key, "required");
      canon_[key] = nullptr;
      return std::nullopt;
    }
    if (!v->is_string() || v->get<std::string>().empty()) {
      issue(key, "expected a path string");
      return std::nullopt;
    }
    canon_[key] = *v;
    std::filesystem::path p = v->get<std::string>();
    if (p.is_relative()) p = base / p;
    if (must_exist && !std::filesystem::exists(p)) issue(key, "path does not exist: " + p.string());
    return p;
  }

  Section child(const std::string& key) {
    const Json* v = raw(key);
    canon_[key] = Json::object();
    return Section(v, path_.empty() ? key : path_ + "." + key, issues_, canon_[key]);
  }

  bool present(const std::string& key) {
    known_.insert(key);
    return obj_ != nullptr && obj_->contains(key) && !(*obj_)[key].is_null();
  }

  Json& canon() { return canon_; }

 private:
  const Json* obj_;
  std::string path_;
  std::vector<ConfigIssue>& issues_;
  Json& canon_;
  std::set<std::string> known_;
};

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : std::runtime_error(describe(issues)), issues_(std::move(issues)) {}

std::string PipelineConfig::hash() const {
  Json j = canonical;
  j.erase("output_dir");
  return sha256_hex(j.dump());
}

PipelineConfig parse_config(const Json& j, const std::filesystem::path& base_dir) {
  std::vector<ConfigIssue> issues;
  PipelineConfig cfg;
  {
    Section root(&j, "", issues, cfg.canonical);

    {
      Section s = root.child("corpus");
      if (auto p = s.path("path", base_dir, true)) cfg.corpus_path = *p;
      for (auto& lang : s.get<std::vector<std::string>>("languages", {})) cfg.languages.insert(to_lower_ascii(lang));
      s.canon()["languages"] = cfg.languages;
    }
    {
      Section s = root.child("sampling");
      const Json* seed = s.raw("rng_seed");
      if (seed == nullptr) {
        s.issue("rng_seed", "required (no implicit entropy)");
      } else if (!seed->is_number_unsigned() && !(seed->is_number_integer() && seed->get<std::int64_t>() >= 0)) {
        s.issue("rng_seed", "expected a non-negative integer");
      } else {
        cfg.quota.rng_seed = seed->get<std::uint64_t>();
      }
      s.canon()["rng_seed"] = cfg.quota.rng_seed;
      const Json* quota = s.raw("quota");
      if (quota == nullptr || !quota->is_object()) {
        s.issue("quota", "required: object of language -> document count");
      } else {
        for (const auto& [lang, count] : quota->items()) {
          if (!count.is_number_integer() || count.get<std::int64_t>() < 0) {
            s.issue("quota." + lang, "expected a non-negative integer");
            continue;
          }
          cfg.quota.per_language[to_lower_ascii(lang)] = count.get<std::size_t>();
        }
        if (cfg.quota.total() == 0) s.issue("quota", "at least one language needs a positive count");
      }
      s.canon()["quota"] = cfg.quota.per_language;
      cfg.seeds_per_document = s.count("seeds_per_document", 1, 1);
    }
    if (cfg.languages.empty()) {
      for (const auto& [lang, n] : cfg.quota.per_language) cfg.languages.insert(lang);
    }

    {
      Section s = root.child("prompt");
      cfg.template_path = s.path("template_path", base_dir, false);
      cfg.prompt.placeholder = s.get<std::string>("placeholder", "{seed}");
      cfg.prompt.markers.problem = s.get<std::string>("problem_marker", cfg.prompt.markers.problem);
      cfg.prompt.markers.solution = s.get<std::string>("solution_marker", cfg.prompt.markers.solution);
      if (cfg.template_path && std::filesystem::exists(*cfg.template_path)) {
        cfg.prompt.text = read_file(*cfg.template_path);
      }
      try {
        cfg.prompt.validate();
      } catch (const FatalError& e) {
        s.issue(cfg.template_path ? "template_path" : "placeholder", e.what());
      }
    }

    {
      Section s = root.child("teacher");
      cfg.teacher.backend = s.get<std::string>("backend", "mock");
      if (cfg.teacher.backend != "mock" && cfg.teacher.backend != "http") {
        s.issue("backend", "expected \"mock\" or \"http\"");
      }
      cfg.teacher.http.endpoint = s.get<std::string>("endpoint", cfg.teacher.http.endpoint);
      cfg.teacher.http.model = s.get<std::string>("model", cfg.teacher.http.model);
      cfg.teacher.http.timeout_seconds = static_cast<int>(s.count("timeout_seconds", 120, 1));
      cfg.teacher.concurrency = s.count("concurrency", 8, 1);
      cfg.teacher.retry.max_retries = static_cast<int>(s.count("max_retries", 5));
      cfg.teacher.retry.initial_delay = std::chrono::milliseconds(s.count("initial_delay_ms", 1000));
      cfg.teacher.retry.max_delay = std::chrono::milliseconds(s.count("max_delay_ms", 30000));
      cfg.teacher.retry.multiplier = s.get<double>("backoff_multiplier", 2.0);
      if (cfg.teacher.retry.multiplier < 1.0) s.issue("backoff_multiplier", "must be >= 1");
      cfg.teacher.max_new_tokens = static_cast<int>(s.count("max_new_tokens", kDefaultMaxNewTokens, 1));
      {
        Section d = s.child("decoding");
        const auto mode = d.get<std::string>("mode", "greedy");
        if (mode == "greedy") {
          cfg.teacher.decoding = Decoding{};
        } else if (mode == "sampled") {
          cfg.teacher.decoding = Decoding::sampled(d.get<double>("temperature", 0.2), d.get<double>("top_p", 0.95));
        } else {
          d.issue("mode", "expected \"greedy\" or \"sampled\"");
        }
      }
      {
        Section m = s.child("mock");
        cfg.teacher.mock_fixtures = m.path("fixtures", base_dir, false);
        const auto fallback = m.get<std::string>("fallback", "error");
        if (fallback == "synthesize") {
          cfg.teacher.mock_fallback = MockBackend::Fallback::kSynthesize;
        } else if (fallback != "error") {
          m.issue("fallback", "expected \"error\" or \"synthesize\"");
        }
      }
    }

    {
      Section s = root.child("cleaning");
      cfg.sample_options.short_solution_lines = s.count("short_solution_lines", 2);
      const Json* syntax = s.raw("comment_syntax");
      if (syntax != nullptr) {
        try {
          cfg.comment_overrides = syntax->get<std::map<std::string, std::vector<std::string>>>();
        } catch (const Json::exception&) {
          s.issue("comment_syntax", "expected an object of language -> list of prefixes");
        }
      }
      for (const auto& [lang, prefixes] : cfg.comment_overrides) cfg.comments.set(to_lower_ascii(lang), prefixes);
      s.canon()["comment_syntax"] = cfg.comment_overrides;
    }

    {
      Section s = root.child("decontamination");
      const Json* list = s.raw("benchmarks");
      Json canon_list = Json::array();
      if (list != nullptr) {
        if (!list->is_array()) {
          s.issue("benchmarks", "expected a list of descriptor paths");
        } else {
          for (std::size_t i = 0; i < list->size(); ++i) {
            const Json& item = (*list)[i];
            if (!item.is_string()) {
              s.issue("benchmarks[" + std::to_string(i) + "]", "expected a path string");
              continue;
            }
            std::filesystem::path p = item.get<std::string>();
            if (p.is_relative()) p = base_dir / p;
            if (!std::filesystem::exists(p)) {
              s.issue("benchmarks[" + std::to_string(i) + "]", "path does not exist: " + p.string());
            }
            cfg.benchmarks.push_back(p);
            canon_list.push_back(item);
          }
        }
      }
      s.canon()["benchmarks"] = canon_list;
      cfg.benchmark_options.min_match_len = s.count("min_match_len", 20, 1);
      cfg.workers = s.count("workers", 1, 1);
    }

    {
      Section s = root.child("analysis");
      cfg.analysis.tokenizer = s.get<std::string>("tokenizer", "whitespace");
      if (cfg.analysis.tokenizer != "whitespace") s.issue("tokenizer", "only the built-in \"whitespace\" counter is available");
      cfg.analysis.bin_width = s.count("bin_width", 32, 1);
      if (s.present("similarity")) {
        Section sim = s.child("similarity");
        SimilaritySettings st;
        if (auto p = sim.path("descriptor", base_dir, true)) st.descriptor = *p;
        st.benchmark = sim.get<std::string>("benchmark", "");
        cfg.analysis.similarity = st;
      } else {
        s.canon()["similarity"] = nullptr;
      }
      const Json* cats = s.raw("categories");
      Json canon_cats = nullptr;
      if (cats != nullptr) {
        canon_cats = Json::array();
        if (!cats->is_array()) {
          s.issue("categories", "expected a list of {name, description}");
        } else {
          for (const auto& c : *cats) {
            if (!c.is_object() || !c.contains("name") || !c["name"].is_string() ||
                (c.contains("description") && !c["description"].is_string())) {
              s.issue("categories", "each category needs a string name (and optional description)");
              continue;
            }
            Category cat{c["name"].get<std::string>(), c.value("description", c["name"].get<std::string>())};
            canon_cats.push_back({{"name", cat.name}, {"description", cat.description}});
            cfg.analysis.categories.push_back(std::move(cat));
          }
          if (cfg.analysis.categories.size() != kCategoryCount) {
            s.issue("categories", "exactly 10 categories are required, got " +
                                      std::to_string(cfg.analysis.categories.size()));
          }
        }
      }
      s.canon()["categories"] = canon_cats;
      {
        Section e = s.child("embedder");
        cfg.analysis.embedder.kind = e.get<std::string>("kind", "tfidf");
        if (cfg.analysis.embedder.kind != "tfidf" && cfg.analysis.embedder.kind != "remote") {
          e.issue("kind", "expected \"tfidf\" or \"remote\"");
        }
        auto& r = cfg.analysis.embedder.remote;
        r.endpoint = e.get<std::string>("endpoint", r.endpoint);
        r.model = e.get<std::string>("model", r.model);
        r.instruction = e.get<std::string>("instruction", "");
        r.batch_size = e.count("batch_size", 64, 1);
        r.timeout_seconds = static_cast<int>(e.count("timeout_seconds", 120, 1));
      }
    }

    {
      Section s = root.child("pairs");
      if (s.present("target")) {
        cfg.pair_target = s.count("target", 0);
      } else {
        s.canon()["target"] = nullptr;
      }
      cfg.mine_options.min_comment_tokens = s.count("min_comment_tokens", 3);
      cfg.mine_options.min_body_lines = s.count("min_body_lines", 2);
      cfg.mine_options.allow_leading_comments = s.get<bool>("allow_leading_comments", false);
    }

    {
      Section s = root.child("export");
      cfg.dataset_name = s.get<std::string>("name", "oss-instruct");
      cfg.schema.instruction_key = s.get<std::string>("instruction_key", "instruction");
      cfg.schema.response_key = s.get<std::string>("response_key", "response");
      cfg.schema.include_metadata = s.get<bool>("include_metadata", true);
      if (cfg.schema.instruction_key.empty() || cfg.schema.response_key.empty() ||
          cfg.schema.instruction_key == cfg.schema.response_key) {
        s.issue("instruction_key", "instruction and response keys must be distinct and non-empty");
      }
    }

    if (auto p = root.path("output_dir", base_dir, true, false)) cfg.output_dir = *p;
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw ConfigError({ConfigIssue{"<file>", std::string("not valid JSON: ") + e.what()}});
  } catch (const FatalError& e) {
    throw ConfigError({ConfigIssue{"<file>", e.what()}});
  }
  return parse_config(j, std::filesystem::absolute(path).parent_path());
}

}  // namespace ossforge

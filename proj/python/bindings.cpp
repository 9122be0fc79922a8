#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "btk/aligner.hpp"
#include "btk/bleu.hpp"
#include "btk/corpus.hpp"
#include "btk/dedup.hpp"
#include "btk/filter.hpp"
#include "btk/report.hpp"
#include "btk/translator.hpp"

namespace py = pybind11;
using namespace btk;

namespace {

py::object json_to_py(const nlohmann::ordered_json& j) {
  switch (j.type()) {
    case nlohmann::ordered_json::value_t::object: {
      py::dict d;
      for (const auto& [key, value] : j.items()) d[py::str(key)] = json_to_py(value);
      return d;
    }
    case nlohmann::ordered_json::value_t::array: {
      py::list l;
      for (const auto& value : j) l.append(json_to_py(value));
      return l;
    }
    case nlohmann::ordered_json::value_t::string: return py::str(j.get<std::string>());
    case nlohmann::ordered_json::value_t::boolean: return py::bool_(j.get<bool>());
    case nlohmann::ordered_json::value_t::number_integer:
      return py::int_(j.get<std::int64_t>());
    case nlohmann::ordered_json::value_t::number_unsigned:
      return py::int_(j.get<std::uint64_t>());
    case nlohmann::ordered_json::value_t::number_float: return py::float_(j.get<double>());
    default: return py::none();
  }
}

Document make_document(const std::vector<std::string>& lines, Lang lang,
                       const std::string& domain) {
  Document doc;
  doc.lang = lang;
  doc.domain = DomainTag::parse(domain);
  doc.source_id = "python";
  for (const std::string& line : lines) doc.append({line, lang});
  return doc;
}

std::shared_ptr<CachedTranslator> wrap(std::shared_ptr<Translator> inner) {
  return std::make_shared<CachedTranslator>(std::move(inner),
                                            std::make_shared<TranslationCache>());
}

BleuConfig make_config(int max_n, bool case_sensitive, const std::string& tokenizer,
                       const std::string& smoothing) {
  BleuConfig config;
  config.max_n = max_n;
  config.case_sensitive = case_sensitive;
  config.tokenizer = parse_tokenizer(tokenizer);
  if (!smoothing.empty()) config.smoothing = parse_smoothing(smoothing);
  return config;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "parallel corpus construction, alignment, filtering and evaluation";

  py::register_exception<Error>(m, "BtkError");

  py::class_<BleuBreakdown>(m, "BleuBreakdown")
      .def_readonly("score", &BleuBreakdown::score)
      .def_readonly("precisions", &BleuBreakdown::precisions)
      .def_readonly("brevity_penalty", &BleuBreakdown::brevity_penalty)
      .def_readonly("hyp_len", &BleuBreakdown::hyp_len)
      .def_readonly("ref_len", &BleuBreakdown::ref_len)
      .def("__repr__", [](const BleuBreakdown& b) {
        return "<BleuBreakdown score=" + std::to_string(b.score) + ">";
      });

  m.def(
      "tokenize",
      [](const std::string& text, int max_n, bool case_sensitive, const std::string& tokenizer) {
        return tokenize(text, make_config(max_n, case_sensitive, tokenizer, ""));
      },
      py::arg("text"), py::arg("max_n") = 4, py::arg("case_sensitive") = true,
      py::arg("tokenizer") = "intl");

  m.def(
      "sentence_bleu",
      [](const std::string& hyp, const std::string& ref, int max_n, bool case_sensitive,
         const std::string& tokenizer, const std::string& smoothing) {
        return sentence_bleu(hyp, ref, make_config(max_n, case_sensitive, tokenizer, smoothing));
      },
      py::arg("hyp"), py::arg("ref"), py::arg("max_n") = 4, py::arg("case_sensitive") = true,
      py::arg("tokenizer") = "intl", py::arg("smoothing") = "");

  m.def(
      "corpus_bleu",
      [](const std::vector<std::string>& hyps, const std::vector<std::string>& refs, int max_n,
         bool case_sensitive, const std::string& tokenizer, const std::string& smoothing) {
        return corpus_bleu(hyps, refs, make_config(max_n, case_sensitive, tokenizer, smoothing));
      },
      py::arg("hyps"), py::arg("refs"), py::arg("max_n") = 4, py::arg("case_sensitive") = true,
      py::arg("tokenizer") = "intl", py::arg("smoothing") = "");

  py::class_<Sentence>(m, "Sentence")
      .def_readonly("text", &Sentence::text)
      .def_property_readonly("lang",
                             [](const Sentence& s) { return std::string(to_string(s.lang)); });

  py::class_<SentencePair>(m, "SentencePair")
      .def_property_readonly("en", [](const SentencePair& p) { return p.en.text; })
      .def_property_readonly("vi", [](const SentencePair& p) { return p.vi.text; })
      .def_property_readonly("domain", [](const SentencePair& p) { return p.domain.str(); })
      .def_readonly("tier", &SentencePair::tier)
      .def_property_readonly("source", [](const SentencePair& p) { return p.source_id; })
      .def_readonly("score", &SentencePair::score)
      .def("__repr__", [](const SentencePair& p) {
        return "<SentencePair en=" + p.en.text.substr(0, 24) + "...>";
      });

  py::class_<Corpus>(m, "Corpus")
      .def_readonly("name", &Corpus::name)
      .def("__len__", &Corpus::size)
      .def("__getitem__",
           [](const Corpus& c, std::size_t i) {
             if (i >= c.size()) throw py::index_error();
             return c.pairs[i];
           })
      .def("pairs", [](const Corpus& c) { return c.pairs; });

  m.def(
      "make_pair",
      [](const std::string& en, const std::string& vi, const std::string& domain, int tier,
         std::optional<double> score) {
        SentencePair p;
        p.en = {en, Lang::en};
        p.vi = {vi, Lang::vi};
        p.domain = DomainTag::parse(domain);
        p.tier = tier;
        p.score = score;
        return p;
      },
      py::arg("en"), py::arg("vi"), py::arg("domain") = "other", py::arg("tier") = 1,
      py::arg("score") = std::nullopt);

  m.def("make_corpus", [](const std::vector<SentencePair>& pairs, const std::string& name) {
    Corpus c;
    c.pairs = pairs;
    c.name = name;
    return c;
  }, py::arg("pairs"), py::arg("name") = "python");

  m.def(
      "ingest",
      [](const std::string& path, const std::string& format, const std::string& domain,
         int tier) { return ingest(path, parse_format(format), DomainTag::parse(domain), tier); },
      py::arg("path"), py::arg("format") = "jsonl", py::arg("domain") = "other",
      py::arg("tier") = 1);

  m.def(
      "export_corpus",
      [](const Corpus& corpus, const std::string& path, const std::string& format) {
        export_corpus(corpus, path, parse_format(format));
      },
      py::arg("corpus"), py::arg("path"), py::arg("format") = "jsonl");

  m.def("merge", [](const std::vector<Corpus>& corpora) { return merge(corpora); });

  m.def("stats", [](const Corpus& corpus) { return json_to_py(stats(corpus).to_json()); });

  m.def(
      "sample_test_set",
      [](const Corpus& corpus, const std::map<std::string, std::size_t>& per_domain,
         std::uint64_t seed) {
        std::map<DomainTag, std::size_t> want;
        for (const auto& [domain, count] : per_domain) want[DomainTag::parse(domain)] = count;
        SampleSplit split = sample_test_set(corpus, want, seed);
        return py::make_tuple(split.test, split.remainder);
      },
      py::arg("corpus"), py::arg("per_domain"), py::arg("seed") = 0);

  py::class_<CachedTranslator, std::shared_ptr<CachedTranslator>>(m, "Translator")
      .def("translate",
           [](CachedTranslator& t, const std::string& direction,
              const std::vector<std::string>& texts) {
             const Direction dir = direction == "en-vi" ? Direction::en_to_vi()
                                                        : Direction::vi_to_en();
             return t.translate(dir, texts);
           })
      .def_property_readonly("backend_sentences", [](CachedTranslator& t) {
        return t.inner().sentences_translated();
      });

  m.def("identity_translator", [] { return wrap(std::make_shared<IdentityTranslator>()); });
  m.def(
      "lexicon_translator",
      [](const std::vector<std::pair<std::string, std::string>>& en_vi) {
        return wrap(std::make_shared<LexiconTranslator>(en_vi));
      },
      py::arg("en_vi"));
  m.def(
      "lexicon_translator_from_file",
      [](const std::string& path) { return wrap(std::make_shared<LexiconTranslator>(path)); },
      py::arg("path"));

  m.def(
      "pair_score",
      [](const std::string& en, const std::string& vi, std::shared_ptr<CachedTranslator> t,
         int max_n) {
        BleuConfig config;
        config.max_n = max_n;
        return pair_score({en, Lang::en}, {vi, Lang::vi}, *t, config);
      },
      py::arg("en"), py::arg("vi"), py::arg("translator"), py::arg("max_n") = 4);

  py::class_<Match>(m, "Match")
      .def_readonly("en_index", &Match::en_index)
      .def_readonly("vi_index", &Match::vi_index)
      .def_readonly("score", &Match::score);

  py::class_<AlignmentResult>(m, "AlignmentResult")
      .def_readonly("matches", &AlignmentResult::matches)
      .def_readonly("skipped_en", &AlignmentResult::skipped_en)
      .def_readonly("skipped_vi", &AlignmentResult::skipped_vi)
      .def_readonly("total_score", &AlignmentResult::total_score);

  m.def(
      "align_documents",
      [](const std::vector<std::string>& en_lines, const std::vector<std::string>& vi_lines,
         std::shared_ptr<CachedTranslator> translator, double min_pair_score, int max_n,
         const std::string& domain) {
        DocumentPair pair(make_document(en_lines, Lang::en, domain),
                          make_document(vi_lines, Lang::vi, domain), "python");
        AlignConfig config;
        config.min_pair_score = min_pair_score;
        config.bleu.max_n = max_n;
        return align_documents(pair, *translator, config);
      },
      py::arg("en_lines"), py::arg("vi_lines"), py::arg("translator"),
      py::arg("min_pair_score") = 10.0, py::arg("max_n") = 4, py::arg("domain") = "other");

  m.def(
      "align_to_corpus",
      [](const std::vector<std::string>& en_lines, const std::vector<std::string>& vi_lines,
         std::shared_ptr<CachedTranslator> translator, double min_pair_score,
         const std::string& domain) {
        DocumentPair pair(make_document(en_lines, Lang::en, domain),
                          make_document(vi_lines, Lang::vi, domain), "python");
        AlignConfig config;
        config.min_pair_score = min_pair_score;
        return matches_to_corpus(pair, align_documents(pair, *translator, config));
      },
      py::arg("en_lines"), py::arg("vi_lines"), py::arg("translator"),
      py::arg("min_pair_score") = 10.0, py::arg("domain") = "other");

  m.def(
      "select_top_k",
      [](const Corpus& scored, std::size_t k, bool higher_is_better) {
        return select_top_k(scored, k, higher_is_better);
      },
      py::arg("scored"), py::arg("k"), py::arg("higher_is_better") = true);

  m.def(
      "tune_k",
      [](const Corpus& scored, const std::vector<std::size_t>& candidates,
         const std::function<double(const Corpus&)>& evaluator, bool higher_is_better) {
        return json_to_py(tune_k(scored, candidates, evaluator, higher_is_better).to_json());
      },
      py::arg("scored"), py::arg("k_candidates"), py::arg("evaluator"),
      py::arg("higher_is_better") = true);

  m.def(
      "normalize",
      [](const std::string& text, bool unicode_canonical, bool casefold, bool collapse_whitespace,
         bool strip_punct) {
        NormalizationPolicy policy;
        policy.unicode_canonical = unicode_canonical;
        policy.casefold = casefold;
        policy.collapse_whitespace = collapse_whitespace;
        policy.strip_punct = strip_punct;
        return normalize(text, policy);
      },
      py::arg("text"), py::arg("unicode_canonical") = true, py::arg("casefold") = true,
      py::arg("collapse_whitespace") = true, py::arg("strip_punct") = false);

  m.def(
      "dedup_within",
      [](const Corpus& corpus) {
        auto [out, report] = dedup_within(corpus, {});
        return py::make_tuple(out, json_to_py(report.to_json()));
      },
      py::arg("corpus"));

  m.def(
      "dedup_against",
      [](const Corpus& corpus, const Corpus& reference) {
        auto [out, report] = dedup_against(corpus, reference, {});
        return py::make_tuple(out, json_to_py(report.to_json()));
      },
      py::arg("corpus"), py::arg("reference"));

  m.def(
      "budget_ratio",
      [](const std::vector<std::pair<double, double>>& supervised,
         const std::vector<std::pair<double, double>>& pretraining, double target_bleu) {
        BudgetCurve s, p;
        s.label = "supervised";
        p.label = "pretraining";
        for (const auto& [x, y] : supervised) s.points.push_back({x, y, std::nullopt});
        for (const auto& [x, y] : pretraining) p.points.push_back({x, y, std::nullopt});
        return json_to_py(budget_ratio(s, p, target_bleu).to_json());
      },
      py::arg("supervised"), py::arg("pretraining"), py::arg("target_bleu"));

  m.attr("__version__") = "0.1.0";
}

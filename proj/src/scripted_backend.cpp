#include "foveate/scripted_backend.hpp"

#include <cctype>
#include <sstream>

#include "foveate/rng.hpp"

namespace foveate {

namespace {

long count_rough_tokens(const std::string& text) {
  long n = 0;
  bool in_token = false;
  for (char c : text) {
    bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_token) ++n;
    in_token = !space;
  }
  return n;
}

std::string extract_after(const std::string& haystack, const std::string& marker) {
  auto pos = haystack.find(marker);
  if (pos == std::string::npos) return {};
  pos += marker.size();
  auto end = haystack.find('\n', pos);
  if (end == std::string::npos) end = haystack.size();
  return haystack.substr(pos, end - pos);
}

std::string extract_tail(const std::string& haystack, const std::string& marker) {
  auto pos = haystack.find(marker);
  if (pos == std::string::npos) return {};
  return haystack.substr(pos + marker.size());
}

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> words;
  std::istringstream in(text);
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

std::string first_words(const std::string& text, std::size_t n) {
  auto words = split_words(text);
  if (words.size() > n) words.resize(n);
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

std::string strip_punct(const std::string& word) {
  std::size_t b = 0;
  std::size_t e = word.size();
  while (b < e && std::ispunct(static_cast<unsigned char>(word[b]))) ++b;
  while (e > b && std::ispunct(static_cast<unsigned char>(word[e - 1]))) --e;
  return word.substr(b, e - b);
}

// Distinct words of length >= 4, in first-appearance order; the pool the
// fake extractor draws "foveate elements" from.
std::vector<std::string> content_words(const std::string& text) {
  std::vector<std::string> out;
  for (const auto& raw : split_words(text)) {
    std::string w = strip_punct(raw);
    if (w.size() < 4) continue;
    bool seen = false;
    for (const auto& prev : out) {
      if (prev == w) {
        seen = true;
        break;
      }
    }
    if (!seen) out.push_back(w);
  }
  return out;
}

}  // namespace

ScriptedBackend::ScriptedBackend(std::uint64_t seed, std::size_t embedding_dim)
    : seed_(seed), embedding_dim_(embedding_dim == 0 ? 8 : embedding_dim) {}

std::uint64_t ScriptedBackend::key(const std::string& system,
                                   const std::string& user) {
  std::uint64_t h = fnv1a(system);
  h = fnv1a("\x1f", h);
  return fnv1a(user, h);
}

void ScriptedBackend::script(const std::string& system, const std::string& user,
                             std::vector<Outcome> outcomes) {
  std::lock_guard<std::mutex> lock(mu_);
  auto& queue = scripts_[key(system, user)];
  for (auto& o : outcomes) queue.push_back(std::move(o));
}

void ScriptedBackend::script_reply(const std::string& system,
                                   const std::string& user, std::string text) {
  script(system, user, {Outcome::reply(std::move(text))});
}

void ScriptedBackend::add_rule(std::string user_substring, Responder responder) {
  std::lock_guard<std::mutex> lock(mu_);
  rules_.push_back(Rule{std::move(user_substring), std::move(responder)});
}

void ScriptedBackend::set_default(Responder responder) {
  std::lock_guard<std::mutex> lock(mu_);
  default_responder_ = std::move(responder);
}

void ScriptedBackend::set_embedding(std::string text, std::vector<double> values) {
  std::lock_guard<std::mutex> lock(mu_);
  embedding_table_[std::move(text)] = std::move(values);
}

void ScriptedBackend::fail_next_embed_batches(int n) {
  std::lock_guard<std::mutex> lock(mu_);
  failing_embed_batches_ = n;
}

std::vector<ScriptedBackend::Call> ScriptedBackend::transcript() const {
  std::lock_guard<std::mutex> lock(mu_);
  return transcript_;
}

std::size_t ScriptedBackend::call_count() const {
  std::lock_guard<std::mutex> lock(mu_);
  return transcript_.size();
}

void ScriptedBackend::clear_transcript() {
  std::lock_guard<std::mutex> lock(mu_);
  transcript_.clear();
}

ScriptedBackend::Outcome ScriptedBackend::resolve(const ChatRequest& request) {
  auto it = scripts_.find(key(request.system, request.user));
  if (it != scripts_.end() && !it->second.empty()) {
    if (it->second.size() > 1) {
      Outcome o = std::move(it->second.front());
      it->second.pop_front();
      return o;
    }
    return it->second.front();  // last outcome is sticky
  }
  for (const auto& rule : rules_) {
    if (request.user.find(rule.needle) != std::string::npos) {
      return Outcome::reply(rule.responder(request.system, request.user));
    }
  }
  if (default_responder_) {
    return Outcome::reply(default_responder_(request.system, request.user));
  }
  throw BadResponseError("scripted backend: no script for prompt: " +
                         request.user.substr(0, 80));
}

ChatReply ScriptedBackend::chat_once(const ChatRequest& request) {
  std::lock_guard<std::mutex> lock(mu_);
  Outcome outcome = resolve(request);
  Call call;
  call.system = request.system;
  call.user = request.user;
  call.profile = request.profile;
  switch (outcome.kind) {
    case Outcome::Kind::transport_failure:
      call.failed = true;
      call.response = "<transport-failure>";
      transcript_.push_back(std::move(call));
      throw TransportError("scripted transport failure");
    case Outcome::Kind::auth_failure:
      call.failed = true;
      call.response = "<auth-failure>";
      transcript_.push_back(std::move(call));
      throw AuthError("scripted authentication failure");
    case Outcome::Kind::reply:
      break;
  }
  call.response = outcome.text;
  transcript_.push_back(call);
  ChatReply reply;
  reply.text = outcome.text;
  reply.usage.prompt_tokens =
      count_rough_tokens(request.system) + count_rough_tokens(request.user);
  reply.usage.completion_tokens = count_rough_tokens(outcome.text);
  reply.usage.total_tokens =
      reply.usage.prompt_tokens + reply.usage.completion_tokens;
  return reply;
}

std::vector<EmbeddingVector> ScriptedBackend::embed_once(
    const std::vector<std::string>& texts) {
  std::lock_guard<std::mutex> lock(mu_);
  if (failing_embed_batches_ > 0) {
    --failing_embed_batches_;
    throw TransportError("scripted embedding transport failure");
  }
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    auto it = embedding_table_.find(text);
    if (it != embedding_table_.end()) {
      out.push_back(EmbeddingVector{it->second});
      continue;
    }
    RngStream stream(fnv1a(text) ^ (seed_ * 0x9e3779b97f4a7c15ULL + 0x2545f491ULL));
    EmbeddingVector v;
    v.values.resize(embedding_dim_);
    for (auto& x : v.values) x = 2.0 * stream.next_double() - 1.0;
    if (v.norm() == 0.0) v.values[0] = 1.0;
    out.push_back(std::move(v));
  }
  return out;
}

void ScriptedBackend::install_pipeline_rules() {
  // Foveate element extraction: fabricate the requested number of tagged
  // lines out of the document's own words.
  add_rule("foveate elements", [](const std::string&, const std::string& user) {
    std::string count_str = extract_after(user, "List the ");
    int count = 0;
    for (char c : count_str) {
      if (std::isdigit(static_cast<unsigned char>(c))) {
        count = count * 10 + (c - '0');
      } else {
        break;
      }
    }
    if (count <= 0) count = 4;
    std::string doc = extract_tail(user, "Text:\n");
    auto pool = content_words(doc);
    if (pool.empty()) pool.push_back("detail");
    std::string out;
    for (int i = 0; i < count; ++i) {
      std::string text = pool[static_cast<std::size_t>(i) % pool.size()];
      if (static_cast<std::size_t>(i) >= pool.size()) {
        text += "-" + std::to_string(i);
      }
      out += (i % 2 == 0 ? "entity: " : "attribute: ") + text + "\n";
    }
    return out;
  });

  // Foveate segment extraction: one or two spans lifted from the document.
  add_rule("writing techniques", [](const std::string&, const std::string& user) {
    std::string doc = extract_tail(user, "Text:\n");
    auto words = split_words(doc);
    if (words.size() < 3) return std::string("NONE");
    std::string out = "metaphor: " + first_words(doc, 6) + "\n";
    if (words.size() >= 12) {
      std::string second;
      for (std::size_t i = 6; i < 12; ++i) {
        if (i > 6) second += ' ';
        second += words[i];
      }
      out += "hyperbole: " + second + "\n";
    }
    return out;
  });

  // Reverse synthesis question: ask for the element by name.
  add_rule("Answer phrase:", [](const std::string&, const std::string& user) {
    std::string element = extract_after(user, "Answer phrase: ");
    return "What does the text identify as " + element + "?";
  });

  // Direct synthesis question: mention every group member.
  add_rule("Key phrases:", [](const std::string&, const std::string& user) {
    std::vector<std::string> members;
    std::istringstream in(extract_tail(user, "Key phrases:\n"));
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind("- ", 0) == 0) {
        members.push_back(line.substr(2));
      } else if (!members.empty()) {
        break;
      }
    }
    std::string joined;
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (i) joined += " and ";
      joined += members[i];
    }
    return "How does the text connect " + joined + "?";
  });

  // Transcription synthesis: interrogative rewrite of the excerpt.
  add_rule("Excerpt:", [](const std::string&, const std::string& user) {
    std::string excerpt = extract_after(user, "Excerpt: ");
    return "What does the text mean by \"" + excerpt + "\"?";
  });

  // Answer regeneration: grounded in the document, varies with the question.
  add_rule("Answer the question using only the text",
           [](const std::string&, const std::string& user) {
             std::string question = extract_after(user, "Question: ");
             std::string doc = extract_tail(user, "Text:\n");
             return "According to the text, " + first_words(doc, 10) +
                    ". This addresses: " + first_words(question, 6);
           });

  // Verification: everything passes by default; tests override with their
  // own schedules.
  add_rule("Respond with 'Yes' or 'No'",
           [](const std::string&, const std::string&) { return std::string("Yes"); });

  // Re-synthesis question.
  add_rule("Failed question:", [](const std::string&, const std::string& user) {
    std::string doc = extract_tail(user, "Text:\n");
    return "What further detail does the text give about " + first_words(doc, 5) +
           "?";
  });

  // Judges.
  add_rule("Instruction Set 1:",
           [](const std::string&, const std::string&) { return std::string("1"); });
  add_rule("Ground Truth Answer:", [](const std::string&, const std::string&) {
    return std::string("Correct");
  });
  add_rule("\nAnswer: ", [](const std::string&, const std::string&) {
    return std::string("{\"fluency\": \"high\", \"completeness\": \"high\"}");
  });
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::with_pipeline_rules(
    std::uint64_t seed, std::size_t embedding_dim) {
  auto backend = std::make_shared<ScriptedBackend>(seed, embedding_dim);
  backend->install_pipeline_rules();
  return backend;
}

}  // namespace foveate

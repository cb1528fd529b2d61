#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "foveate/gateway.hpp"

namespace foveate {

// Deterministic in-process backend. Responses are keyed on a stable hash of
// (system, user); rules and a default responder cover prompts that are not
// scripted exactly. Every call is recorded so tests can assert call counts,
// profiles and prompt contents.
class ScriptedBackend : public Backend {
 public:
  using Responder =
      std::function<std::string(const std::string& system, const std::string& user)>;

  struct Outcome {
    enum class Kind { reply, transport_failure, auth_failure };
    Kind kind = Kind::reply;
    std::string text;

    static Outcome reply(std::string t) {
      return Outcome{Kind::reply, std::move(t)};
    }
    static Outcome transport_failure() {
      return Outcome{Kind::transport_failure, {}};
    }
    static Outcome auth_failure() { return Outcome{Kind::auth_failure, {}}; }
  };

  struct Call {
    std::string system;
    std::string user;
    SamplingProfile profile;
    std::string response;
    bool failed = false;
  };

  explicit ScriptedBackend(std::uint64_t seed = 0, std::size_t embedding_dim = 8);

  static std::uint64_t key(const std::string& system, const std::string& user);

  // Exact-key scripts consume outcomes front to back; the last one is sticky.
  void script(const std::string& system, const std::string& user,
              std::vector<Outcome> outcomes);
  void script_reply(const std::string& system, const std::string& user,
                    std::string text);

  // Rules are checked in insertion order after exact-key scripts.
  void add_rule(std::string user_substring, Responder responder);
  void set_default(Responder responder);

  void set_embedding(std::string text, std::vector<double> values);
  void fail_next_embed_batches(int n);

  std::vector<Call> transcript() const;
  std::size_t call_count() const;
  void clear_transcript();

  std::string id() const override { return "scripted"; }
  ChatReply chat_once(const ChatRequest& request) override;
  std::vector<EmbeddingVector> embed_once(
      const std::vector<std::string>& texts) override;

  // Appends rules that answer every pipeline prompt deterministically:
  // extraction lists, synthesis questions, regenerated answers, "Yes"
  // verification verdicts and judge replies. Output depends only on the
  // prompt text, so runs are bit-reproducible.
  void install_pipeline_rules();

  static std::shared_ptr<ScriptedBackend> with_pipeline_rules(
      std::uint64_t seed = 0, std::size_t embedding_dim = 8);

 private:
  struct Rule {
    std::string needle;
    Responder responder;
  };

  Outcome resolve(const ChatRequest& request);

  mutable std::mutex mu_;
  std::uint64_t seed_;
  std::size_t embedding_dim_;
  std::map<std::uint64_t, std::deque<Outcome>> scripts_;
  std::vector<Rule> rules_;
  Responder default_responder_;
  std::map<std::string, std::vector<double>> embedding_table_;
  int failing_embed_batches_ = 0;
  std::vector<Call> transcript_;
};

}  // namespace foveate

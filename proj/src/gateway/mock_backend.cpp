#include "aloe/gateway/mock_backend.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

#include "aloe/common/random.hpp"
#include "aloe/common/text.hpp"

namespace aloe::gateway {

namespace {

constexpr std::array<std::string_view, 24> kStopwords = {
    "the",  "and",  "for",  "with", "has",   "her",  "his",   "who",  "are",  "was",  "she",  "they",
    "their", "from", "that", "this", "you",  "but",   "not",  "very", "him",  "them", "into", "about"};

bool is_stopword(std::string_view w) {
  return std::find(kStopwords.begin(), kStopwords.end(), w) != kStopwords.end();
}

std::vector<std::string> words(std::string_view text, std::size_t min_len) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (cur.size() >= min_len && !is_stopword(cur)) out.push_back(cur);
    cur.clear();
  };
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

// Longest word of at least 4 letters; ties go to the earliest.
std::string keyword(std::string_view text, const std::set<std::string>& exclude = {}) {
  std::string best;
  for (auto& w : words(text, 4)) {
    if (exclude.count(w)) continue;
    if (w.size() > best.size()) best = w;
  }
  return best;
}

const std::string& binding_or_empty(const Bindings& b, std::string_view name) {
  static const std::string empty;
  auto it = b.find(std::string(name));
  return it == b.end() ? empty : it->second;
}

std::uint64_t request_key(const ChatRequest& req, std::uint64_t seed) {
  std::string key;
  key += req.role ? std::string(to_string(*req.role)) : std::string("evaluated");
  key += '\x1f';
  for (const auto& [k, v] : req.bindings) {
    key += k;
    key += '=';
    key += v;
    key += '\x1e';
  }
  key += '\x1f';
  for (const auto& m : req.messages) {
    key += to_string(m.role());
    key += ':';
    key += m.content();
    key += '\x1e';
  }
  key += std::to_string(req.salt);
  return stable_hash(key, seed);
}

std::size_t count_role(const History& h, MessageRole role) {
  return static_cast<std::size_t>(
      std::count_if(h.begin(), h.end(), [&](const ChatMessage& m) { return m.role() == role; }));
}

const ChatMessage* last_user(const History& h) {
  for (auto it = h.rbegin(); it != h.rend(); ++it) {
    if (it->role() == MessageRole::User) return &*it;
  }
  return nullptr;
}

template <std::size_t N>
std::string_view pick(const std::array<std::string_view, N>& options, Rng& rng) {
  return options[rng.below(N)];
}

std::string fill(std::string_view pattern, std::string_view word) {
  std::string out(pattern);
  const auto pos = out.find("{}");
  if (pos != std::string::npos) out.replace(pos, 2, word);
  return out;
}

std::string role_play(const ChatRequest& req, Rng& rng) {
  static constexpr std::array<std::string_view, 8> kOpeners = {
      "hey, so i spent the weekend on {} stuff again",
      "random thought: anyone else obsessed with {}?",
      "ugh, {} took up my whole evening lol",
      "been thinking about {} a lot lately. you?",
      "ok tell me something fun about {}",
      "honestly {} is the best part of my week",
      "quick question, do you know much about {}?",
      "so... {}. thoughts?"};
  const auto clauses = split_clauses(binding_or_empty(req.bindings, binding::kUserProfile));
  const std::size_t turn = count_role(req.messages, MessageRole::Assistant);
  std::string word = clauses.empty() ? std::string() : keyword(clauses[turn % clauses.size()]);
  if (word.empty()) word = "life";
  return fill(pick(kOpeners, rng), word);
}

std::string induction(const ChatRequest& req, Rng&) {
  const auto& history = binding_or_empty(req.bindings, binding::kConversationHistory);
  std::size_t user_turns = 0;
  for (const auto& line : split_lines(history)) {
    if (line.rfind("A:", 0) == 0) ++user_turns;
  }
  const auto profile = split_clauses(binding_or_empty(req.bindings, binding::kUserProfile));
  const auto traits = split_clauses(binding_or_empty(req.bindings, binding::kUserPersonalities));
  const std::size_t np = std::min(user_turns, profile.size());
  const std::size_t nt = std::min(user_turns / 2, traits.size());
  std::vector<std::string> p(profile.begin(), profile.begin() + static_cast<std::ptrdiff_t>(np));
  std::vector<std::string> t(traits.begin(), traits.begin() + static_cast<std::ptrdiff_t>(nt));
  return "Profile: " + (p.empty() ? std::string("None") : join(p, "; ")) +
         "\nPersonalities: " + (t.empty() ? std::string("None") : join(t, "; "));
}

std::string preferred(const ChatRequest& req, Rng& rng) {
  static constexpr std::array<std::string_view, 5> kTailored = {
      "Oh nice! Since you're into {}, you'd probably love hearing more about it. What got you started?",
      "That fits you perfectly, {} always comes up with you! How's it going lately?",
      "Ha, classic you. With all the {} going on, I bet you have stories. Share one?",
      "Love that. Given the {} angle, want to swap some ideas?",
      "Totally get it. {} sounds like your kind of thing, tell me more!"};
  static constexpr std::array<std::string_view, 3> kOpen = {
      "Sounds fun! What do you enjoy most about {}?", "Oh, {}? I'd love to hear more.",
      "Nice, {} is a great topic. How did you get into it?"};
  static const std::set<std::string> kLabels = {"profile", "personalities", "none"};
  const std::string hint = keyword(binding_or_empty(req.bindings, binding::kInferredPersona), kLabels);
  if (!hint.empty()) return fill(pick(kTailored, rng), hint);
  std::string topic = keyword(binding_or_empty(req.bindings, binding::kUserMessage));
  return fill(pick(kOpen, rng), topic.empty() ? "that" : topic);
}

std::string generic_reply(std::string_view message, Rng& rng) {
  static constexpr std::array<std::string_view, 4> kGeneric = {
      "{} is a popular topic. Many people enjoy it for different reasons. Is there anything specific you'd like "
      "to know?",
      "Thanks for sharing about {}. Here are some general thoughts: it depends on your goals and preferences.",
      "Interesting! There is a lot to say about {}. Let me know how I can help.",
      "I can help with {}. Could you clarify what you are looking for?"};
  std::string topic = keyword(message);
  return fill(pick(kGeneric, rng), topic.empty() ? "That" : topic);
}

std::string rejected(const ChatRequest& req, Rng& rng) {
  return generic_reply(binding_or_empty(req.bindings, binding::kUserMessage), rng);
}

std::string judge(const ChatRequest& req, Rng& rng) {
  std::set<std::string> persona;
  for (auto& w : words(binding_or_empty(req.bindings, binding::kUserProfile), 4)) persona.insert(w);
  for (auto& w : words(binding_or_empty(req.bindings, binding::kUserPersonalities), 4)) persona.insert(w);
  std::set<std::string> hits;
  for (auto& w : words(binding_or_empty(req.bindings, binding::kModelResponse), 4)) {
    if (persona.count(w)) hits.insert(w);
  }
  const int score = std::min<int>(5, 1 + static_cast<int>(std::min<std::size_t>(hits.size(), 3)) +
                                         static_cast<int>(rng.below(2)));
  return std::to_string(score);
}

std::string persona_gen(const ChatRequest& req, Rng& rng) {
  std::vector<std::string> pool;
  std::set<std::string> seen;
  for (const auto& line : split_lines(binding_or_empty(req.bindings, binding::kSeedExamples))) {
    for (auto& c : split_clauses(line)) {
      if (seen.insert(c).second) pool.push_back(c);
    }
  }
  if (pool.empty()) return "";
  const std::size_t per_line = std::min<std::size_t>(8, pool.size());
  std::string out;
  for (int i = 0; i < 20; ++i) {
    std::vector<std::string> picked;
    for (std::size_t idx : rng.sample_indices(pool.size(), per_line)) picked.push_back(pool[idx]);
    out += join(picked, ". ");
    out += ".\n";
  }
  return out;
}

std::string evaluated(const ChatRequest& req, Rng& rng) {
  const ChatMessage* last = last_user(req.messages);
  std::string reply = generic_reply(last ? last->content() : std::string_view(), rng);
  // Refer back to earlier user turns so later replies carry more context.
  std::vector<std::string> earlier;
  for (const auto& m : req.messages) {
    if (&m == last || m.role() != MessageRole::User) continue;
    auto k = keyword(m.content());
    if (!k.empty() && std::find(earlier.begin(), earlier.end(), k) == earlier.end()) earlier.push_back(k);
  }
  if (!earlier.empty()) reply += " Also, how is the " + join(earlier, " and ") + " going?";
  return reply;
}

}  // namespace

std::vector<std::string> split_clauses(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    auto t = trim(cur);
    if (!t.empty()) out.push_back(std::move(t));
    cur.clear();
  };
  for (char c : text) {
    if (c == '.' || c == ';' || c == ',' || c == '\n') {
      flush();
    } else {
      cur += c;
    }
  }
  flush();
  return out;
}

std::string MockChatBackend::send(const ChatRequest& request) {
  Rng rng(request_key(request, seed_));
  if (!request.role) return evaluated(request, rng);
  switch (*request.role) {
    case RoleId::RolePlay: return role_play(request, rng);
    case RoleId::Induction: return induction(request, rng);
    case RoleId::Preferred: return preferred(request, rng);
    case RoleId::Rejected: return rejected(request, rng);
    case RoleId::Judge: return judge(request, rng);
    case RoleId::PersonaGen: return persona_gen(request, rng);
  }
  return evaluated(request, rng);
}

std::vector<std::vector<double>> MockEmbeddingBackend::embed(const std::vector<std::string>& texts) {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    std::vector<double> v(dimension_, 0.0);
    auto toks = words(text, 3);
    if (toks.empty()) toks.push_back(text);
    for (const auto& w : toks) {
      const std::uint64_t h = stable_hash(w);
      v[h % dimension_] += ((h >> 63) != 0) ? 1.0 : -1.0;
    }
    bool zero = std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
    if (zero) v[stable_hash(text, 1) % dimension_] = 1.0;
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace aloe::gateway

#include "aloe/gateway/templates.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

#include "aloe/common/error.hpp"

namespace aloe::gateway {

namespace {

bool is_name_char(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == ' ' || c == '\'';
}

// Returns the placeholder name if a well-formed {Name} starts at pos.
std::optional<std::string_view> placeholder_at(std::string_view text, std::size_t pos, std::size_t& end) {
  if (text[pos] != '{' || pos + 1 >= text.size()) return std::nullopt;
  if (!std::isalpha(static_cast<unsigned char>(text[pos + 1]))) return std::nullopt;
  std::size_t i = pos + 1;
  while (i < text.size() && is_name_char(text[i])) ++i;
  if (i >= text.size() || text[i] != '}') return std::nullopt;
  end = i + 1;
  return text.substr(pos + 1, i - pos - 1);
}

constexpr std::string_view kProfileGeneration =
    "Your task is to generate 20 different user profiles. Something you can consider includes but not limited "
    "to age range, occupation, hobbies, family structure, educational background, or any other fun facts. Note "
    "that you don't need to include all of these details for each persona. You can use any kinds of combination "
    "and please think about other aspects other than these.\n"
    "You should include something that can be elicited from a daily and natural conversations. You should not "
    "include too much information about this person's work content and you should not give any description "
    "about the user's personality traits. Focus more on some daily, objective facts about the person "
    "him/herself. Each profile should contain around 8-10 distinct facts about the person. Here are some "
    "examples:\n"
    "{Seed Examples}\n"
    "You should only output the personas in plain text format. Separate each user profile with a new line and "
    "do not include a number for each profile. IMPORTANT: Try to avoid generating similar profiles and avoid "
    "always describing the same type of topic for every persona. You should be creative, diverse and "
    "comprehensive!!";

constexpr std::string_view kPersonalityGeneration =
    "Your task is to generate 20 different descriptions of a user's personality traits such as extroverted or "
    "introverted. You should include something that can be elicited from a daily and natural conversations. "
    "Each description should contain around 8-10 personality traits about the person. Here are some examples:\n"
    "{Seed Examples}\n"
    "You should only output the personality descriptions in plain text format. Separate each description with "
    "a new line and do not include a number for each. IMPORTANT: You should not include any other content that "
    "is beyond personality traits, such as occupation, family structure, etc. Try to avoid generating similar "
    "personality descriptions. You should be creative, diverse and comprehensive!!";

constexpr std::string_view kRolePlay =
    "Your task is to play the role of a person with the following profile and personalities traits and chat "
    "with a chatbot:\n"
    "Profile: {User Profile}\n"
    "Personalities: {User Personalities}\n"
    "Please ignore the gender pronouns in the personalities and use the correct pronouns based on the given "
    "profile.\n"
    "Please follow the requirements:\n"
    "1. You should determine the topic of conversation based on the given profile. You should determine the "
    "conversational styles based on the given personalities.\n"
    "2. IMPORTANTLY!!! You should only reveal partial information about your profile in each round of "
    "conversation instead of disclosing all the provided information at once.\n"
    "3. Keep in mind that you are chatting with a friend instead of a robot or assistant. So do not always seek "
    "for advice or recommendations.\n"
    "4. Do not include any analysis about how you role-play this user. Only output your messages content.\n"
    "Now, initiate the conversation with the chatbot in whatever way you like. Please always be concise in your "
    "questions and responses and remember that you are pretending to be a human now, so you should generate "
    "human-like language.";

constexpr std::string_view kInduction =
    "Analyze a conversation (presented below with 'A' as the user and 'B' as the interaction partner) to "
    "identify aspects of the user's profile and personality traits that have been revealed in the "
    "conversation:\n"
    "{Conversation History}\n"
    "Review the user's profile and personality descriptions below.\n"
    "Profile: {User Profile}\n"
    "Personalities: {User Personalities}\n"
    "Focus specifically on the information mentioned by \"A\" to identify the elements of the profile and "
    "personalities that have been revealed. Use direct evidence from the user's statements to deduce disclosed "
    "details about their profile and personality. If personality traits are not evident, output 'None' for "
    "personalities. If the user's gender is unclear, use 'He/She'.\n"
    "Provide your findings in the following format without additional analysis:\n"
    "Profile: [inferred user profile details]\n"
    "Personalities: [inferred user personality traits]\n"
    "Important!!! Please make conservative judgments, and only infer information that is obvious from the "
    "conversation. You should simply extract partial information in the original sentence structure or "
    "language instead of rephrasing it.";

constexpr std::string_view kPreferred =
    "{User Message} (Hint: Below is the known user profile and personalities based on the conversation "
    "history: {Inferred Persona}. You should implicitly infer the user's preferences about the topic to "
    "discuss, the conversation style, the way others respond to themselves, etc based on these given profile "
    "and personalities.\n"
    "Your task is to generate a response that is tailored to the potential user preferences.\n"
    "Do not include any analysis process and the user preferences you inferred in your response. Just generate "
    "a response that is tailored to the user's potential preferences. Please always be concise in your "
    "questions and responses.)";

constexpr std::string_view kRejected = "{User Message}";

constexpr std::string_view kJudge =
    "You will be given a user's profile, personality, and a message that the user sent to a chatbot. You will "
    "also be given a response from a model. Your task is to carefully evaluate how much the response is "
    "tailored to the user's potential preferences based on the user's profile and personality.\n"
    "Here is the user's profile: {User Profile}\n"
    "Here is the user's personalities: {User Personalities}\n"
    "Here is the user's message: {User Message}\n"
    "Here is the model's response: {Model's Response}\n"
    "You should follow the following criteria for evaluation:\n"
    "1. Is the conversational style of the message tailored to the user's personality?\n"
    "2. Is the content or topic relevant to the user's profile?\n"
    "3. Is the response human-like, engaging, and concise?\n"
    "You should give a score to the response ranging from 1-5, where 1 represents the least tailored to the "
    "user and 5 represents the most user-aligned. Please do not include any analysis about how you evaluate "
    "the responses. Please only output the score from 1-5 without giving any explanations.";

}  // namespace

std::vector<std::string> RoleTemplate::placeholders() const {
  std::vector<std::string> names;
  std::string_view text = prompt;
  for (std::size_t i = 0; i < text.size(); ++i) {
    std::size_t end = 0;
    if (auto name = placeholder_at(text, i, end)) {
      std::string n(*name);
      if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(std::move(n));
      i = end - 1;
    }
  }
  return names;
}

std::string RoleTemplate::render(const Bindings& bindings) const {
  std::string out;
  out.reserve(prompt.size() * 2);
  std::string_view text = prompt;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t end = 0;
    if (auto name = placeholder_at(text, i, end)) {
      auto it = bindings.find(std::string(*name));
      if (it == bindings.end())
        throw Error(ErrorCode::MissingBinding,
                    "template for role " + std::string(to_string(role_id)) + " needs {" + std::string(*name) + "}");
      out += it->second;
      i = end;
    } else {
      out += text[i++];
    }
  }
  return out;
}

std::vector<std::string> binding_names(RoleId role) {
  using namespace binding;
  switch (role) {
    case RoleId::RolePlay: return {std::string(kUserProfile), std::string(kUserPersonalities)};
    case RoleId::Induction:
      return {std::string(kConversationHistory), std::string(kUserProfile), std::string(kUserPersonalities)};
    case RoleId::Preferred: return {std::string(kUserMessage), std::string(kInferredPersona)};
    case RoleId::Rejected: return {std::string(kUserMessage)};
    case RoleId::Judge:
      return {std::string(kUserProfile), std::string(kUserPersonalities), std::string(kUserMessage),
              std::string(kModelResponse)};
    case RoleId::PersonaGen: return {std::string(kSeedExamples)};
  }
  return {};
}

RoleTemplate default_template(RoleId role) {
  switch (role) {
    case RoleId::RolePlay: return {role, std::string(kRolePlay), Placement::System, {1.0, 256}};
    case RoleId::Induction: return {role, std::string(kInduction), Placement::FinalUser, {0.0, 512}};
    case RoleId::Preferred: return {role, std::string(kPreferred), Placement::FinalUser, {1.0, 512}};
    case RoleId::Rejected: return {role, std::string(kRejected), Placement::FinalUser, {1.0, 512}};
    case RoleId::Judge: return {role, std::string(kJudge), Placement::FinalUser, {0.0, 16}};
    case RoleId::PersonaGen: return profile_generation_template();
  }
  throw Error(ErrorCode::InvalidArgument, "unknown role");
}

RoleTemplate profile_generation_template() {
  return {RoleId::PersonaGen, std::string(kProfileGeneration), Placement::FinalUser, {1.0, 4096}};
}

RoleTemplate personality_generation_template() {
  return {RoleId::PersonaGen, std::string(kPersonalityGeneration), Placement::FinalUser, {1.0, 4096}};
}

TemplateRegistry TemplateRegistry::defaults() {
  TemplateRegistry reg;
  for (RoleId r : kAllRoles) reg.set(default_template(r));
  return reg;
}

void TemplateRegistry::set(RoleTemplate tmpl) {
  const auto allowed = binding_names(tmpl.role_id);
  for (const auto& name : tmpl.placeholders()) {
    if (std::find(allowed.begin(), allowed.end(), name) == allowed.end())
      throw Error(ErrorCode::InvalidArgument, "template for role " + std::string(to_string(tmpl.role_id)) +
                                                  " references undefined binding {" + name + "}");
  }
  if (tmpl.sampling.temperature < 0.0 || tmpl.sampling.max_tokens <= 0)
    throw Error(ErrorCode::InvalidArgument, "sampling needs temperature >= 0 and max_tokens > 0");
  const RoleId id = tmpl.role_id;
  templates_.insert_or_assign(id, std::move(tmpl));
}

const RoleTemplate& TemplateRegistry::get(RoleId role) const {
  auto it = templates_.find(role);
  if (it == templates_.end())
    throw Error(ErrorCode::ConfigError, "no template registered for role " + std::string(to_string(role)));
  return it->second;
}

}  // namespace aloe::gateway

#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "aloe/gateway/types.hpp"

namespace aloe::gateway {

using Bindings = std::map<std::string, std::string>;

// Where the rendered prompt goes in the outgoing message list:
//   System    -> [system: prompt] + history
//   FinalUser -> history + [user: prompt]
enum class Placement { System, FinalUser };

// Placeholders are written {Name}; names are letters, spaces and apostrophes,
// e.g. {User Profile} or {Model's Response}.
struct RoleTemplate {
  RoleId role_id = RoleId::RolePlay;
  std::string prompt;
  Placement placement = Placement::System;
  Sampling sampling;

  // Distinct placeholder names in order of first appearance.
  std::vector<std::string> placeholders() const;

  // Single pass substitution; bound values are never rescanned. Throws
  // MissingBinding naming the first unbound placeholder.
  std::string render(const Bindings& bindings) const;
};

namespace binding {
inline constexpr std::string_view kUserProfile = "User Profile";
inline constexpr std::string_view kUserPersonalities = "User Personalities";
inline constexpr std::string_view kConversationHistory = "Conversation History";
inline constexpr std::string_view kUserMessage = "User Message";
inline constexpr std::string_view kInferredPersona = "Inferred Persona";
inline constexpr std::string_view kModelResponse = "Model's Response";
inline constexpr std::string_view kSeedExamples = "Seed Examples";
}  // namespace binding

// Binding names a role's template may reference.
std::vector<std::string> binding_names(RoleId role);

RoleTemplate default_template(RoleId role);
RoleTemplate profile_generation_template();
RoleTemplate personality_generation_template();

// Appended as a user turn when a judge reply could not be parsed.
inline constexpr std::string_view kJudgeReask = "Reply with a single digit from 1 to 5 and nothing else.";
// Appended as a user turn when induction output lacked its labeled lines.
inline constexpr std::string_view kInductionReask =
    "Answer in exactly two lines:\nProfile: [inferred user profile details]\n"
    "Personalities: [inferred user personality traits]";

class TemplateRegistry {
 public:
  // Registry pre-populated with default_template() for all six roles.
  static TemplateRegistry defaults();

  // Throws InvalidArgument if the template references a binding name the
  // role does not define.
  void set(RoleTemplate tmpl);
  const RoleTemplate& get(RoleId role) const;
  bool has(RoleId role) const { return templates_.count(role) != 0; }

 private:
  std::map<RoleId, RoleTemplate> templates_;
};

}  // namespace aloe::gateway

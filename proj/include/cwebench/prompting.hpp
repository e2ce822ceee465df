#ifndef CWEBENCH_PROMPTING_HPP
#define CWEBENCH_PROMPTING_HPP

#include <string>
#include <string_view>

#include "cwebench/corpus.hpp"
#include "cwebench/retriever.hpp"

namespace cwebench {

// Placeholder the user template carries where the test-case source goes.
inline constexpr const char* kSourcePlaceholder = "--Source Code--";

struct Prompt {
  std::string system;
  std::string context;  // rendered retrieval context, may be empty
  std::string user;
  std::string rendered;  // system (+ blank line + context) + blank line + user

  // Context and user question combined; what goes into the chat "user" role.
  std::string user_payload() const;
};

// The stock system prompt and user question template. Both can be overridden
// from files at the CLI for ablations; these are the defaults every run uses.
const std::string& default_system_prompt();
const std::string& default_user_template();

// Substitutes the comment-stripped test-case source (original line structure,
// not whitespace-collapsed) for the placeholder. Empty template = default.
std::string render_user_prompt(const TestCase& test_case, std::string_view user_template = {});

Prompt assemble_prompt(std::string system, const ContextBundle& context, std::string user);

}  // namespace cwebench

#endif  // CWEBENCH_PROMPTING_HPP

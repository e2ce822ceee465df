#include "cwebench/prompting.hpp"

namespace cwebench {

namespace {

// Both texts are reproduced exactly as used at run time, including the odd
// "Description:" key inside the JSON example — the models were prompted with
// that typo, and the parser's description-key tolerance exists because of it.
const char* const kSystemPrompt =
    "You are a helpful assistant, you will use the provided context to answer user "
    "questions.\n"
    "Read the given context before answering questions and think step by step. If you can "
    "not answer a user question based on the provided context, inform the user. Do not use "
    "any other information for answering user. Provide a detailed answer to the question.";

const char* const kUserTemplate =
    "I am seeking assistance to analyze provided source code for the purpose of detecting "
    "potential Common Weakness Enumeration (CWE) vulnerabilities. \n"
    "The key requirement is for the analysis results to be exclusively formatted in JSON "
    "enclosed by triple backticks, listing only the CWEs that are detected as 'Present' in "
    "the code, thereby omitting any 'Not Present' entries for a cleaner output. \n"
    "The exact line, or lines, of code which have this CWE vulnerability needs to be "
    "specified in the returned JSON structure, along with a succinct description of what "
    "the vulnerability category is for this source code. \n"
    "The JSON output should enumerate each identified CWE with its identification number, "
    "the exact source code syntax that causes the CWE, and a description of the "
    "vulnerability, as shown in the example structure below:\n"
    "\n"
    "```json\n"
    "{\"findings\": [\n"
    "\t{\n"
    "\t\t\"CWE_Number\": \"CWE-XX\",\n"
    "\t\t\"Status\": \"Present\",\n"
    "\t\t\"Source_Code\": \"Vulnerable source code syntax\",\n"
    "\t\t\"Description:\" \"Summary of the category of software vulnerability, \n"
    "        and why this code is vulnerable\"\n"
    "\t},\n"
    "\t{\n"
    "\t\t\"CWE_Number\": \"CWE-YY\", \n"
    "\t\t\"Status\": \"Present\",\n"
    "\t\t\"Source_Code\": \"Vulnerable source code syntax\",\n"
    "\t\t\"Description:\" \"Summary of the category of software vulnerability, \n"
    "        and why this code is vulnerable\"\n"
    "\t}\n"
    "]\n"
    "}\n"
    "```\n"
    "\n"
    "Source code:\n"
    "```\n"
    "--Source Code--\n"
    "```\n"
    "\n"
    "Re-check that your output contains the required JSON data-structure before emitting "
    "text. ";

}  // namespace

std::string Prompt::user_payload() const {
  if (context.empty()) return user;
  return context + "\n\n" + user;
}

const std::string& default_system_prompt() {
  static const std::string prompt = kSystemPrompt;
  return prompt;
}

const std::string& default_user_template() {
  static const std::string tpl = kUserTemplate;
  return tpl;
}

std::string render_user_prompt(const TestCase& test_case, std::string_view user_template) {
  std::string tpl(user_template.empty() ? default_user_template() : std::string(user_template));
  std::size_t pos = tpl.find(kSourcePlaceholder);
  if (pos == std::string::npos) return tpl;
  tpl.replace(pos, std::string_view(kSourcePlaceholder).size(), test_case.source);
  return tpl;
}

Prompt assemble_prompt(std::string system, const ContextBundle& context, std::string user) {
  Prompt prompt;
  prompt.system = std::move(system);
  prompt.context = context.rendered;
  prompt.user = std::move(user);
  prompt.rendered = prompt.system;
  if (!prompt.context.empty()) {
    prompt.rendered += "\n\n";
    prompt.rendered += prompt.context;
  }
  prompt.rendered += "\n\n";
  prompt.rendered += prompt.user;
  return prompt;
}

}  // namespace cwebench

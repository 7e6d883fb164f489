#pragma once

// Fixed prompt wording. Kept in one place so the text sent to the model can be
// reviewed and changed without touching the builders.

namespace crashrepro::templates {

// --- S2R extraction -------------------------------------------------------

inline constexpr const char* kAvailableActionsHeader = "Available_Actions:";
inline constexpr const char* kAvailableActions =
    "[tap(click), input(set_text), scroll, swipe, rotate, delete, double tap(click), "
    "long tap(click), restart, back]. Generate input when none is given.";

inline constexpr const char* kActionPrimitiveHeader = "Action_Primitive:";
inline constexpr const char* kActionPrimitives =
    "[Tap] [Component], [Scroll] [Direction], [Input] [Component] [Value], "
    "[Rotate] [Component], [Delete] [Component] [Value], [Double-tap] [Component], "
    "[Long-tap] [Component]. The actions you identify should be in the available actions.";

inline constexpr const char* kRetrievalHeader = "Retrieval_Prompt:";
inline constexpr const char* kRetrievalIntro = "Here are some examples for S2R entity extraction.";

inline constexpr const char* kReportHeader = "Current_Bug_Report:";
inline constexpr const char* kReportIntro = "Here are the sentences in current bug report:";
inline constexpr const char* kReportOutputFormat =
    "For each sentence, write a line \"Sentence N:\" followed by its S2R entities, one per "
    "line, numbered, in bracket notation.";

// --- JSON repair ----------------------------------------------------------

inline constexpr const char* kRepairSuffix =
    "\n\nYour previous answer could not be used. Answer again with ONLY a JSON array of "
    "action objects, for example [{\"action\": \"click\", \"feature\": \"OK\"}], and no "
    "other text.";

// --- Replay ---------------------------------------------------------------

inline constexpr const char* kReplayTaskHeader = "## Task";
inline constexpr const char* kReplayTask =
    "You are reproducing a crash in an Android app from its bug report. Work through the "
    "steps to reproduce on the current screen. Each turn, choose the next action(s) to "
    "perform on the screen shown below. If a step names an element that is not on the "
    "current screen, navigate to the screen that contains it. After each turn you receive "
    "feedback on whether your actions were executed.";
inline constexpr const char* kReplayGenerateInput =
    "Generate input when none is given: invent a plausible value for any input step "
    "without a value.";
inline constexpr const char* kReplayReportHeader = "## Bug report";
inline constexpr const char* kReplayEntitiesHeader = "## S2R entities";
inline constexpr const char* kReplayScreenHeader = "## Current UI screen";
inline constexpr const char* kReplayKnowledgeHeader = "## App knowledge";
inline constexpr const char* kReplayHistoryHeader = "## Execution feedback";
inline constexpr const char* kReplayOutputHeader = "## Output format";
inline constexpr const char* kReplayOutput =
    "Respond with a JSON array of action objects and nothing else, for example:\n"
    "[{\"action\": \"set_text\", \"feature\": \"URL\", \"input_text\": \"abc\"}, "
    "{\"action\": \"click\", \"feature\": \"OK\"}]\n"
    "Allowed actions: click, long_click, double_click, set_text, scroll, swipe, rotate, "
    "back, restart. \"feature\" is the text, content description or resource id of the "
    "target element. set_text needs \"input_text\"; scroll and swipe need \"direction\" "
    "(up, down, left, right).";

// --- Exploration summaries --------------------------------------------------

inline constexpr const char* kElementSummaryIntro =
    "Summarize the functionality of a UI element in an Android app.";
inline constexpr const char* kElementSummaryAsk =
    "In two or three sentences, describe what this screen offers and what interacting with "
    "the element accomplishes.";
inline constexpr const char* kStateSummaryIntro = "Describe the function of this Android UI screen.";
inline constexpr const char* kStateSummaryAsk = "Answer in one or two sentences.";

}  // namespace crashrepro::templates

//! Prompt templates and their rendering into chat messages.

use serde::{Deserialize, Serialize};

use super::{ChatMessage, Role};

pub const SUMMARY_TEMPLATE: &str = "Please summarize the suggestions: {suggestions} given and output the results organized with \"subtitle\" and \"content\" that is corresponding to the subtitle, format like:\"subtitle: Patience with Diagnosis; content: The patience with Diagnosis\", and return a title that describes all the content.";

pub const QUESTIONS_TEMPLATE: &str = "As someone with mental health issues, please ask three questions about the {current statement} from three different perspectives: what, why and how to do.";

pub const ANSWER_TEMPLATE: &str =
    "As someone with expertise in mental health, please provide a brief answer to the question.";

/// Appended to a summary prompt when the first response could not be parsed.
pub const SUMMARY_RESTATE_SUFFIX: &str = "\n\nPlease restate your answer with one line \"Title: ...\" followed by pairs of lines \"Subtitle: ...\" and \"Content: ...\".";

/// Prefix of the prior answer appended to a questions prompt.
pub const CONTEXT_PREFIX: &str = "\n\nPrevious response: ";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptName {
    Summary,
    Questions,
    Answer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PromptTemplate {
    pub name: PromptName,
    pub text: &'static str,
    pub placeholders: &'static [&'static str],
}

pub const SUMMARY: PromptTemplate =
    PromptTemplate { name: PromptName::Summary, text: SUMMARY_TEMPLATE, placeholders: &["suggestions"] };
pub const QUESTIONS: PromptTemplate =
    PromptTemplate { name: PromptName::Questions, text: QUESTIONS_TEMPLATE, placeholders: &["current statement"] };
pub const ANSWER: PromptTemplate = PromptTemplate { name: PromptName::Answer, text: ANSWER_TEMPLATE, placeholders: &[] };

impl PromptTemplate {
    /// Substitutes `{name}` placeholders. Unknown names are left alone.
    pub fn render(&self, values: &[(&str, &str)]) -> String {
        let mut out = self.text.to_string();
        for (name, value) in values {
            debug_assert!(self.placeholders.contains(name), "{name} is not a placeholder of {:?}", self.name);
            out = out.replace(&format!("{{{name}}}"), value);
        }
        out
    }
}

/// Joins folder entries into the `{suggestions}` text, terminating each
/// entry as a sentence.
pub fn join_suggestions<'a, I: IntoIterator<Item = &'a str>>(entries: I) -> String {
    entries
        .into_iter()
        .map(str::trim)
        .filter(|e| !e.is_empty())
        .map(|e| {
            if e.ends_with(['.', '!', '?']) {
                e.to_string()
            } else {
                format!("{e}.")
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn summary_messages(suggestions: &str, restate: bool) -> Vec<ChatMessage> {
    let mut prompt = SUMMARY.render(&[("suggestions", suggestions)]);
    if restate {
        prompt.push_str(SUMMARY_RESTATE_SUFFIX);
    }
    vec![ChatMessage::new(Role::User, prompt)]
}

pub fn questions_messages(selected_text: &str, context: Option<&str>) -> Vec<ChatMessage> {
    let mut prompt = QUESTIONS.render(&[("current statement", selected_text.trim())]);
    if let Some(ctx) = context.map(str::trim).filter(|c| !c.is_empty()) {
        prompt.push_str(CONTEXT_PREFIX);
        prompt.push_str(ctx);
    }
    vec![ChatMessage::new(Role::User, prompt)]
}

pub fn answer_messages(question: &str, selected_text: &str) -> Vec<ChatMessage> {
    let mut user = question.trim().to_string();
    if !selected_text.trim().is_empty() {
        user.push_str("\n\nSelected content: ");
        user.push_str(selected_text.trim());
    }
    vec![ChatMessage::new(Role::System, ANSWER.render(&[])), ChatMessage::new(Role::User, user)]
}

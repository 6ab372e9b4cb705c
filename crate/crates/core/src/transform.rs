//! Task oracles mapping a declarative to its target output: identity,
//! hierarchical question formation (front the matrix auxiliary), and linear
//! question formation (front the linearly first auxiliary; used only as a
//! reference in evaluation, never as a training target).

use crate::grammar::SentenceAnnotation;

/// Task marker, appended as the final token of every input and target
/// sequence; doubles as the end-of-sequence token on both sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TaskToken {
    Ident,
    Quest,
}

impl TaskToken {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskToken::Ident => "IDENT",
            TaskToken::Quest => "QUEST",
        }
    }

    pub fn from_str(s: &str) -> Option<TaskToken> {
        match s {
            "IDENT" => Some(TaskToken::Ident),
            "QUEST" => Some(TaskToken::Quest),
            _ => None,
        }
    }
}

/// Identity task: the declarative unchanged.
pub fn identity_task(annotation: &SentenceAnnotation) -> Vec<String> {
    assert!(!annotation.tokens.is_empty(), "empty annotation");
    annotation.tokens.clone()
}

/// Hierarchical rule: move the matrix clause's auxiliary to the front and
/// replace the final "." with "?".
pub fn hierarchical_question(annotation: &SentenceAnnotation) -> Vec<String> {
    front_auxiliary(annotation, annotation.main_aux_index)
}

/// Linear rule: move the linearly first auxiliary to the front and replace
/// the final "." with "?".
pub fn linear_question(annotation: &SentenceAnnotation) -> Vec<String> {
    front_auxiliary(annotation, annotation.aux_indices[0])
}

fn front_auxiliary(annotation: &SentenceAnnotation, aux_index: usize) -> Vec<String> {
    assert!(!annotation.aux_indices.is_empty(), "no auxiliary to front");
    let tokens = &annotation.tokens;
    let mut out = Vec::with_capacity(tokens.len());
    out.push(tokens[aux_index].clone());
    for (i, tok) in tokens.iter().enumerate() {
        if i == aux_index {
            continue;
        }
        if i == tokens.len() - 1 {
            debug_assert_eq!(tok, ".");
            out.push("?".to_string());
        } else {
            out.push(tok.clone());
        }
    }
    out
}

/// Target tokens for a task, before the task token is appended.
pub fn apply_task(task: TaskToken, annotation: &SentenceAnnotation) -> Vec<String> {
    match task {
        TaskToken::Ident => identity_task(annotation),
        TaskToken::Quest => hierarchical_question(annotation),
    }
}

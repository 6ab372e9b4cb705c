//! Membership checking for the fragments, by deterministic descent over the
//! fixed clause shape (the category of the next token always determines the
//! continuation, so no backtracking is needed). This is not a general CFG
//! parser; it recognizes exactly the shapes the built-in grammars generate,
//! including the number-agreement constraints of the agreement language.

use super::{
    Grammar, LexicalCategory, Modifier, Number, SentenceAnnotation, SentenceType, Symbol,
    Transitivity,
};

/// Parse a declarative token sequence. Returns its annotation when the
/// sentence is derivable from `grammar`, `None` otherwise.
pub fn parse(grammar: &Grammar, tokens: &[String]) -> Option<SentenceAnnotation> {
    let mut cur = Cursor { grammar, tokens, pos: 0 };

    cur.eat(LexicalCategory::Det)?;
    let subject_noun = cur.eat(LexicalCategory::N)?;
    let subject_number = grammar.lexicon.number_of(&subject_noun)?;

    let (subject_mod, rc_subject_number) = cur.modifier(subject_number)?;

    let main_aux_index = cur.pos;
    cur.eat_aux(subject_number)?;

    let (transitivity, object_mod) = match cur.category()? {
        LexicalCategory::Vintrans => {
            cur.advance();
            (Transitivity::Intransitive, None)
        }
        LexicalCategory::Vtrans => {
            cur.advance();
            cur.eat(LexicalCategory::Det)?;
            let object_noun = cur.eat(LexicalCategory::N)?;
            let object_number = grammar.lexicon.number_of(&object_noun)?;
            let (m, _) = cur.modifier(object_number)?;
            (Transitivity::Transitive, Some(m))
        }
        _ => return None,
    };

    if cur.next_token()? != "." {
        return None;
    }
    cur.advance();
    if cur.pos != tokens.len() {
        return None;
    }

    let aux_indices: Vec<usize> = tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| grammar.lexicon.category_of(t) == Some(LexicalCategory::Aux))
        .map(|(i, _)| i)
        .collect();

    Some(SentenceAnnotation {
        tokens: tokens.to_vec(),
        main_aux_index,
        aux_indices,
        subject_noun_index: 1,
        subject_number,
        rc_subject_number,
        sentence_type: SentenceType { subject_mod, transitivity, object_mod },
    })
}

/// Whether `tokens` is a well-formed auxiliary-fronted question: an auxiliary,
/// then a derivable declarative with exactly that auxiliary removed, ending in
/// "?" instead of ".". Accepts questions formed by fronting any of the
/// declarative's auxiliaries.
pub fn question_derivable(grammar: &Grammar, tokens: &[String]) -> bool {
    reinsertion_points(grammar, tokens)
        .map(|points| !points.is_empty())
        .unwrap_or(false)
}

/// Like [`question_derivable`], but the fronted auxiliary must come from the
/// matrix clause (the hierarchical rule's output).
pub fn question_derivable_hierarchical(grammar: &Grammar, tokens: &[String]) -> bool {
    reinsertion_points(grammar, tokens)
        .map(|points| {
            points
                .iter()
                .any(|(insert_at, ann)| ann.main_aux_index == *insert_at)
        })
        .unwrap_or(false)
}

/// All ways of moving the fronted auxiliary back into the body so that the
/// result is a derivable declarative.
fn reinsertion_points(
    grammar: &Grammar,
    tokens: &[String],
) -> Option<Vec<(usize, SentenceAnnotation)>> {
    let (first, rest) = tokens.split_first()?;
    if grammar.lexicon.category_of(first) != Some(LexicalCategory::Aux) {
        return None;
    }
    let (last, body) = rest.split_last()?;
    if last != "?" {
        return None;
    }
    let mut points = Vec::new();
    for insert_at in 0..=body.len() {
        let mut candidate = Vec::with_capacity(tokens.len());
        candidate.extend_from_slice(&body[..insert_at]);
        candidate.push(first.clone());
        candidate.extend_from_slice(&body[insert_at..]);
        candidate.push(".".to_string());
        if let Some(ann) = parse(grammar, &candidate) {
            points.push((insert_at, ann));
        }
    }
    Some(points)
}

struct Cursor<'a> {
    grammar: &'a Grammar,
    tokens: &'a [String],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn next_token(&self) -> Option<&'a str> {
        self.tokens.get(self.pos).map(String::as_str)
    }

    fn category(&self) -> Option<LexicalCategory> {
        self.grammar.lexicon.category_of(self.next_token()?)
    }

    fn advance(&mut self) {
        self.pos += 1;
    }

    fn eat(&mut self, cat: LexicalCategory) -> Option<String> {
        let tok = self.next_token()?;
        if self.grammar.lexicon.category_of(tok) == Some(cat) {
            self.advance();
            Some(tok.to_string())
        } else {
            None
        }
    }

    /// Consume an auxiliary; in the agreement language it must agree with the
    /// given governing number.
    fn eat_aux(&mut self, governing: Number) -> Option<String> {
        let tok = self.next_token()?;
        if self.grammar.lexicon.category_of(tok) != Some(LexicalCategory::Aux) {
            return None;
        }
        if self.grammar.agreement && self.grammar.lexicon.number_of(tok) != Some(governing) {
            return None;
        }
        self.advance();
        Some(tok.to_string())
    }

    /// Optional noun-phrase modifier at the cursor. Returns the modifier kind
    /// and, for relative clauses, the number of the noun governing the
    /// clause-internal auxiliary.
    fn modifier(&mut self, head_number: Number) -> Option<(Modifier, Option<Number>)> {
        match self.category() {
            Some(LexicalCategory::P) => {
                self.advance();
                self.eat(LexicalCategory::Det)?;
                self.eat(LexicalCategory::N)?;
                Some((Modifier::Pp, None))
            }
            Some(LexicalCategory::Rel) => {
                self.advance();
                let rc_number = self.relative_clause_body(head_number)?;
                Some((Modifier::Rc, Some(rc_number)))
            }
            _ => Some((Modifier::None, None)),
        }
    }

    /// Relative-clause body after the relativizer. Two shapes: a subject
    /// relative (Aux V ...) whose auxiliary is governed by the head noun, or
    /// an object relative (Det N Aux V) with clause-internal agreement.
    fn relative_clause_body(&mut self, head_number: Number) -> Option<Number> {
        match self.category()? {
            LexicalCategory::Aux => {
                self.eat_aux(head_number)?;
                match self.category()? {
                    LexicalCategory::Vintrans => {
                        self.advance();
                    }
                    LexicalCategory::Vtrans => {
                        self.advance();
                        self.eat(LexicalCategory::Det)?;
                        self.eat(LexicalCategory::N)?;
                    }
                    _ => return None,
                }
                Some(head_number)
            }
            LexicalCategory::Det => {
                self.advance();
                let inner_noun = self.eat(LexicalCategory::N)?;
                let inner_number = self.grammar.lexicon.number_of(&inner_noun)?;
                self.eat_aux(inner_number)?;
                let verb_cat = self.category()?;
                if verb_cat != self.grammar.object_rc_verb_category() {
                    return None;
                }
                self.advance();
                Some(inner_number)
            }
            _ => None,
        }
    }
}

impl Grammar {
    /// Verb category of the object-relative rule (intransitive as printed;
    /// transitive under [`super::GrammarOptions::object_rc_transitive`]).
    pub fn object_rc_verb_category(&self) -> LexicalCategory {
        for p in &self.productions {
            let flat_object_rc = p.lhs.starts_with("RC")
                && matches!(p.rhs.get(1), Some(Symbol::Cat(LexicalCategory::Det, _)));
            let split_object_rc = p.lhs == "Subj_RC";
            if flat_object_rc || split_object_rc {
                if let Some(Symbol::Cat(cat, _)) = p.rhs.last() {
                    return *cat;
                }
            }
        }
        LexicalCategory::Vintrans
    }
}

//! Syntactic annotations read off a derivation tree: auxiliary positions, the
//! matrix subject, number features, and the sentence-type triple used for
//! frequency reporting.

use super::{Grammar, LexicalCategory, Number, ParseTree, Symbol};

/// Noun-phrase modifier shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Modifier {
    None,
    Pp,
    Rc,
}

impl Modifier {
    pub fn label(self) -> &'static str {
        match self {
            Modifier::None => "none",
            Modifier::Pp => "PP",
            Modifier::Rc => "RC",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Transitivity {
    Intransitive,
    Transitive,
}

/// The (subject-modifier, transitivity, object-modifier) triple; the object
/// slot is `None` for intransitive sentences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SentenceType {
    pub subject_mod: Modifier,
    pub transitivity: Transitivity,
    pub object_mod: Option<Modifier>,
}

impl SentenceType {
    pub fn label(&self) -> String {
        match self.transitivity {
            Transitivity::Intransitive => format!("intrans/subj_{}", self.subject_mod.label()),
            Transitivity::Transitive => format!(
                "trans/subj_{}/obj_{}",
                self.subject_mod.label(),
                self.object_mod.unwrap_or(Modifier::None).label()
            ),
        }
    }

    /// The twelve types in the frequency tables' reporting order:
    /// intransitive rows (no modifiers, PP on subject, RC on subject), then
    /// transitive rows (no modifiers, PP on subject, PP on object, RC on
    /// subject, RC on object, then the two-modifier combinations).
    pub fn all() -> Vec<SentenceType> {
        use Modifier::{None as NoMod, Pp, Rc};
        let intrans = |s| SentenceType {
            subject_mod: s,
            transitivity: Transitivity::Intransitive,
            object_mod: None,
        };
        let trans = |s, o| SentenceType {
            subject_mod: s,
            transitivity: Transitivity::Transitive,
            object_mod: Some(o),
        };
        vec![
            intrans(NoMod),
            intrans(Pp),
            intrans(Rc),
            trans(NoMod, NoMod),
            trans(Pp, NoMod),
            trans(NoMod, Pp),
            trans(Rc, NoMod),
            trans(NoMod, Rc),
            trans(Pp, Pp),
            trans(Pp, Rc),
            trans(Rc, Pp),
            trans(Rc, Rc),
        ]
    }
}

/// Everything the downstream stages need to know about one declarative
/// sentence, derived from its parse.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceAnnotation {
    /// Declarative tokens, ending in ".".
    pub tokens: Vec<String>,
    /// Position of the matrix-clause auxiliary.
    pub main_aux_index: usize,
    /// Positions of all auxiliaries, in linear order.
    pub aux_indices: Vec<usize>,
    /// Position of the matrix subject head noun (always 1 in these fragments).
    pub subject_noun_index: usize,
    /// Morphological number of the matrix subject noun.
    pub subject_number: Number,
    /// Number of the noun governing the subject relative clause's auxiliary,
    /// when the subject has one.
    pub rc_subject_number: Option<Number>,
    pub sentence_type: SentenceType,
}

impl SentenceAnnotation {
    pub fn main_aux(&self) -> &str {
        &self.tokens[self.main_aux_index]
    }

    pub fn first_aux(&self) -> &str {
        &self.tokens[self.aux_indices[0]]
    }

    pub fn subject_noun(&self) -> &str {
        &self.tokens[self.subject_noun_index]
    }

    /// Token at index 3; exists in every sentence of the fragments (minimum
    /// length is five tokens).
    pub fn fourth_word(&self) -> &str {
        &self.tokens[3]
    }

    pub fn sentence(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Read the annotation off a derivation of `grammar`.
pub fn annotate(grammar: &Grammar, tree: &ParseTree) -> SentenceAnnotation {
    let tokens = tree.tokens();
    let (subject, vp) = clause_children(grammar, tree);

    let aux_indices: Vec<usize> = tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| grammar.lexicon.category_of(t) == Some(LexicalCategory::Aux))
        .map(|(i, _)| i)
        .collect();

    // The matrix auxiliary is the first token of the VP subtree.
    let subject_len = subject.token_count();
    let main_aux_index = subject_len;
    debug_assert!(aux_indices.contains(&main_aux_index));
    debug_assert_eq!(
        grammar.lexicon.category_of(&tokens[main_aux_index]),
        Some(LexicalCategory::Aux)
    );

    let subject_noun_index = 1;
    let subject_number = grammar
        .lexicon
        .number_of(&tokens[subject_noun_index])
        .expect("subject head is a noun");

    let (subject_mod, rc_subject_number) = np_modifier(grammar, subject, subject_number);
    let _ = vp;
    let (transitivity, object_mod) = vp_shape(grammar, vp);

    SentenceAnnotation {
        tokens,
        main_aux_index,
        aux_indices,
        subject_noun_index,
        subject_number,
        rc_subject_number,
        sentence_type: SentenceType { subject_mod, transitivity, object_mod },
    }
}

/// The sentence-type triple, as reported in the frequency tables.
pub fn classify_sentence_type(annotation: &SentenceAnnotation) -> SentenceType {
    annotation.sentence_type
}

/// Subject NP node and VP node of the matrix clause (S -> NP VP ".", possibly
/// through number-split rules).
fn clause_children<'t>(grammar: &Grammar, tree: &'t ParseTree) -> (&'t ParseTree, &'t ParseTree) {
    let ParseTree::Node { children, .. } = tree else {
        panic!("expected a clause node");
    };
    let _ = grammar;
    debug_assert_eq!(children.len(), 3);
    (&children[0], &children[1])
}

/// Modifier kind of a noun-phrase node, plus (for relative clauses) the number
/// of the noun that governs the clause-internal auxiliary.
fn np_modifier(grammar: &Grammar, np: &ParseTree, head_number: Number) -> (Modifier, Option<Number>) {
    let ParseTree::Node { production, children, .. } = np else {
        panic!("expected an NP node");
    };
    let rhs = &grammar.productions[*production].rhs;
    // Number-split wrapper (NP -> NP_sg | NP_pl) defers to its child.
    if rhs.len() == 1 {
        return np_modifier(grammar, &children[0], head_number);
    }
    match rhs.get(2) {
        None => (Modifier::None, None),
        Some(Symbol::Nt(name)) if name.starts_with("PP") => (Modifier::Pp, None),
        Some(Symbol::Nt(name)) if name.starts_with("RC") => {
            let rc_number = rc_subject_number(grammar, &children[2], head_number);
            (Modifier::Rc, Some(rc_number))
        }
        Some(other) => panic!("unexpected NP modifier symbol {other:?}"),
    }
}

fn rc_subject_number(grammar: &Grammar, rc: &ParseTree, head_number: Number) -> Number {
    let ParseTree::Node { production, children, .. } = rc else {
        panic!("expected an RC node");
    };
    let rhs = &grammar.productions[*production].rhs;
    match &rhs[1] {
        // Subject relative: the head noun is the clause's subject.
        Symbol::Cat(LexicalCategory::Aux, _) => head_number,
        // Object relative, flat form: Rel Det N Aux V.
        Symbol::Cat(LexicalCategory::Det, _) => {
            let ParseTree::Leaf(n) = &children[2] else { panic!("expected noun leaf") };
            grammar.lexicon.number_of(n).expect("RC-internal noun")
        }
        // Object relative through Subj_RC: Rel Subj_RC with Subj_RC -> Det N Aux V.
        Symbol::Nt(_) => {
            let ParseTree::Node { children: inner, .. } = &children[1] else {
                panic!("expected Subj_RC node");
            };
            let ParseTree::Leaf(n) = &inner[1] else { panic!("expected noun leaf") };
            grammar.lexicon.number_of(n).expect("RC-internal noun")
        }
        other => panic!("unexpected RC shape {other:?}"),
    }
}

fn vp_shape(grammar: &Grammar, vp: &ParseTree) -> (Transitivity, Option<Modifier>) {
    let ParseTree::Node { production, children, .. } = vp else {
        panic!("expected a VP node");
    };
    let rhs = &grammar.productions[*production].rhs;
    if rhs.len() == 2 {
        (Transitivity::Intransitive, None)
    } else {
        let object = &children[2];
        let object_number = object_head_number(grammar, object);
        let (m, _) = np_modifier(grammar, object, object_number);
        (Transitivity::Transitive, Some(m))
    }
}

fn object_head_number(grammar: &Grammar, np: &ParseTree) -> Number {
    let ParseTree::Node { children, .. } = np else { panic!("expected an NP node") };
    if children.len() == 1 {
        return object_head_number(grammar, &children[0]);
    }
    let ParseTree::Leaf(n) = &children[1] else { panic!("expected noun leaf") };
    grammar.lexicon.number_of(n).expect("object head is a noun")
}

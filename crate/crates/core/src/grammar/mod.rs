//! The two artificial English fragments.
//!
//! Both languages share one non-recursive shape: a subject noun phrase with at
//! most one modifier (prepositional phrase or relative clause), an auxiliary
//! plus verb, and for transitive verbs an object noun phrase with at most one
//! modifier. Modifier-internal noun phrases are never modified, so the
//! language is finite. The no-agreement fragment uses the auxiliaries
//! can/will/could/would freely; the agreement fragment uses do/don't (plural)
//! and does/doesn't (singular) and enforces number agreement between every
//! subject and its auxiliary via number-split rules.

mod annotate;
mod recognize;
mod sample;

pub use annotate::{annotate, classify_sentence_type, Modifier, SentenceAnnotation, SentenceType, Transitivity};
pub use recognize::{parse, question_derivable, question_derivable_hierarchical};
pub use sample::{sample_tree, ParseTree};

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GrammarError {
    #[error("unknown word: {0}")]
    UnknownWord(String),
    #[error("invalid grammar: {0}")]
    Invalid(String),
}

/// Part-of-speech inventory. `Punct` covers "." and "?"; `Task` covers the
/// IDENT/QUEST task tokens appended by dataset assembly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LexicalCategory {
    Det,
    N,
    Vintrans,
    Vtrans,
    Aux,
    P,
    Rel,
    Punct,
    Task,
}

impl LexicalCategory {
    pub fn name(self) -> &'static str {
        match self {
            LexicalCategory::Det => "Det",
            LexicalCategory::N => "N",
            LexicalCategory::Vintrans => "V_intrans",
            LexicalCategory::Vtrans => "V_trans",
            LexicalCategory::Aux => "Aux",
            LexicalCategory::P => "P",
            LexicalCategory::Rel => "Rel",
            LexicalCategory::Punct => "Punct",
            LexicalCategory::Task => "Task",
        }
    }
}

/// Number feature carried by nouns (morphological) and, in the agreement
/// language, by auxiliaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Number {
    Singular,
    Plural,
}

impl Number {
    pub fn suffix(self) -> &'static str {
        match self {
            Number::Singular => "sg",
            Number::Plural => "pl",
        }
    }
}

/// Word inventory with category and number features. Every word belongs to
/// exactly one category.
#[derive(Debug, Clone)]
pub struct Lexicon {
    entries: Vec<(String, LexicalCategory, Option<Number>)>,
    index: HashMap<String, usize>,
}

impl Lexicon {
    pub fn new(entries: Vec<(String, LexicalCategory, Option<Number>)>) -> Self {
        let mut index = HashMap::new();
        for (i, (word, _, _)) in entries.iter().enumerate() {
            let prev = index.insert(word.clone(), i);
            assert!(prev.is_none(), "word {word:?} listed twice");
        }
        Lexicon { entries, index }
    }

    pub fn category_of(&self, word: &str) -> Option<LexicalCategory> {
        self.index.get(word).map(|&i| self.entries[i].1)
    }

    pub fn number_of(&self, word: &str) -> Option<Number> {
        self.index.get(word).and_then(|&i| self.entries[i].2)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    /// Words of a category, optionally restricted to a number feature, in
    /// listing order.
    pub fn words(&self, cat: LexicalCategory, number: Option<Number>) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|(_, c, n)| *c == cat && (number.is_none() || *n == number))
            .map(|(w, _, _)| w.as_str())
            .collect()
    }

    pub fn category_size(&self, cat: LexicalCategory, number: Option<Number>) -> usize {
        self.words(cat, number).len()
    }

    /// Content words only: no punctuation, no task tokens.
    pub fn lexical_word_count(&self) -> usize {
        self.entries
            .iter()
            .filter(|(_, c, _)| !matches!(c, LexicalCategory::Punct | LexicalCategory::Task))
            .count()
    }

    /// Fragment vocabulary: content words plus "." and "?" (task tokens are
    /// counted separately, as part of the model vocabulary).
    pub fn fragment_vocabulary_size(&self) -> usize {
        self.entries
            .iter()
            .filter(|(_, c, _)| !matches!(c, LexicalCategory::Task))
            .count()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, LexicalCategory, Option<Number>)> {
        self.entries.iter().map(|(w, c, n)| (w.as_str(), *c, *n))
    }
}

/// Right-hand-side symbol of a production.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Symbol {
    /// Nonterminal, expanded by this grammar's productions.
    Nt(&'static str),
    /// A lexical slot: any word of `cat`, restricted to `number` when set.
    Cat(LexicalCategory, Option<Number>),
    /// A literal token (sentence-final punctuation).
    Lit(&'static str),
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Nt(name) => write!(f, "{name}"),
            Symbol::Cat(cat, None) => write!(f, "{}", cat.name()),
            Symbol::Cat(cat, Some(n)) => write!(f, "{}_{}", cat.name(), n.suffix()),
            Symbol::Lit(tok) => write!(f, "{tok}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Production {
    pub lhs: &'static str,
    pub rhs: Vec<Symbol>,
    pub weight: f64,
}

impl Production {
    fn new(lhs: &'static str, rhs: Vec<Symbol>) -> Self {
        Production { lhs, rhs, weight: 1.0 }
    }
}

/// Options for grammar construction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GrammarOptions {
    /// The printed grammar gives object relative clauses an intransitive verb
    /// ("who the newt will sleep"), while every worked example of an object
    /// relative uses a transitive one ("that the newt will confuse"). When
    /// set, the object-relative rule takes a transitive verb instead. Off by
    /// default.
    pub object_rc_transitive: bool,
}

/// Which of the two language fragments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Language {
    NoAgreement,
    Agreement,
}

impl Language {
    pub fn label(self) -> &'static str {
        match self {
            Language::NoAgreement => "no_agreement",
            Language::Agreement => "agreement",
        }
    }

    pub fn grammar(self) -> Grammar {
        self.grammar_with(GrammarOptions::default())
    }

    pub fn grammar_with(self, opts: GrammarOptions) -> Grammar {
        match self {
            Language::NoAgreement => no_agreement_with(opts),
            Language::Agreement => agreement_with(opts),
        }
    }
}

impl std::str::FromStr for Language {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "no_agreement" => Ok(Language::NoAgreement),
            "agreement" => Ok(Language::Agreement),
            other => Err(format!("unknown language {other:?} (expected \"agreement\" or \"no_agreement\")")),
        }
    }
}

/// A weighted, non-recursive context-free grammar over the shared lexicon.
/// Immutable after construction; shareable across threads.
#[derive(Debug, Clone)]
pub struct Grammar {
    pub start: &'static str,
    pub productions: Vec<Production>,
    pub lexicon: Lexicon,
    pub agreement: bool,
    id: String,
    by_lhs: HashMap<&'static str, Vec<usize>>,
}

impl Grammar {
    pub fn new(
        start: &'static str,
        productions: Vec<Production>,
        lexicon: Lexicon,
        agreement: bool,
        id: impl Into<String>,
    ) -> Result<Self, GrammarError> {
        let mut by_lhs: HashMap<&'static str, Vec<usize>> = HashMap::new();
        for (i, p) in productions.iter().enumerate() {
            by_lhs.entry(p.lhs).or_default().push(i);
        }
        let g = Grammar { start, productions, lexicon, agreement, id: id.into(), by_lhs };
        g.validate()?;
        Ok(g)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn productions_for(&self, nt: &str) -> &[usize] {
        self.by_lhs.get(nt).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Override the weight of one production (weights within an lhs are equal
    /// unless configured otherwise).
    pub fn set_weight(&mut self, production: usize, weight: f64) {
        assert!(weight >= 0.0, "weights must be nonnegative");
        self.productions[production].weight = weight;
    }

    fn validate(&self) -> Result<(), GrammarError> {
        if self.productions_for(self.start).is_empty() {
            return Err(GrammarError::Invalid(format!("start symbol {} has no productions", self.start)));
        }
        for p in &self.productions {
            for sym in &p.rhs {
                match sym {
                    Symbol::Nt(name) => {
                        if self.productions_for(name).is_empty() {
                            return Err(GrammarError::Invalid(format!("nonterminal {name} has no productions")));
                        }
                    }
                    Symbol::Cat(cat, num) => {
                        if self.lexicon.category_size(*cat, *num) == 0 {
                            return Err(GrammarError::Invalid(format!("empty lexical slot {sym}")));
                        }
                    }
                    Symbol::Lit(_) => {}
                }
            }
        }
        // Non-recursion: no nonterminal may reach itself.
        for nt in self.by_lhs.keys() {
            let mut seen = HashSet::new();
            if self.reaches(nt, nt, &mut seen) {
                return Err(GrammarError::Invalid(format!("recursion through {nt}")));
            }
        }
        Ok(())
    }

    fn reaches(&self, from: &str, target: &str, seen: &mut HashSet<&'static str>) -> bool {
        for &pi in self.productions_for(from) {
            for sym in &self.productions[pi].rhs {
                if let Symbol::Nt(name) = sym {
                    if *name == target {
                        return true;
                    }
                    if seen.insert(name) && self.reaches(name, target, seen) {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Exact number of derivable declarative sentences, by dynamic programming
    /// over the (non-recursive) grammar.
    pub fn language_size(&self) -> u128 {
        let mut memo = HashMap::new();
        self.count_nt(self.start, &mut memo)
    }

    fn count_nt(&self, nt: &'static str, memo: &mut HashMap<&'static str, u128>) -> u128 {
        if let Some(&c) = memo.get(nt) {
            return c;
        }
        let mut total = 0u128;
        for &pi in self.productions_for(nt) {
            let mut prod = 1u128;
            for sym in &self.productions[pi].rhs {
                prod *= match sym {
                    Symbol::Nt(name) => self.count_nt(name, memo),
                    Symbol::Cat(cat, num) => self.lexicon.category_size(*cat, *num) as u128,
                    Symbol::Lit(_) => 1,
                };
            }
            total += prod;
        }
        memo.insert(nt, total);
        total
    }

    /// All structural skeletons: every way of expanding the start symbol down
    /// to a sequence of lexical slots and literals, ignoring word choice.
    pub fn skeletons(&self) -> Vec<Vec<Symbol>> {
        self.expand_symbol(&Symbol::Nt(self.start))
    }

    fn expand_symbol(&self, sym: &Symbol) -> Vec<Vec<Symbol>> {
        match sym {
            Symbol::Nt(name) => {
                let mut out = Vec::new();
                for &pi in self.productions_for(name) {
                    let mut partial: Vec<Vec<Symbol>> = vec![Vec::new()];
                    for s in &self.productions[pi].rhs {
                        let exps = self.expand_symbol(s);
                        let mut next = Vec::with_capacity(partial.len() * exps.len());
                        for base in &partial {
                            for e in &exps {
                                let mut row = base.clone();
                                row.extend(e.iter().cloned());
                                next.push(row);
                            }
                        }
                        partial = next;
                    }
                    out.extend(partial);
                }
                out
            }
            other => vec![vec![other.clone()]],
        }
    }

    /// Longest derivable sentence, in tokens (including final punctuation).
    pub fn max_sentence_len(&self) -> usize {
        self.skeletons().iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Distinct words that can occur at a given token index, across all
    /// skeletons.
    pub fn words_at_index(&self, index: usize) -> HashSet<&str> {
        let mut words = HashSet::new();
        for skel in self.skeletons() {
            if let Some(sym) = skel.get(index) {
                match sym {
                    Symbol::Cat(cat, num) => words.extend(self.lexicon.words(*cat, *num)),
                    Symbol::Lit(tok) => {
                        words.insert(*tok);
                    }
                    Symbol::Nt(_) => unreachable!("skeletons contain no nonterminals"),
                }
            }
        }
        words
    }

    /// Plain-text export: one production per line, then one lexicon line per
    /// category bucket the grammar mentions.
    pub fn export(&self) -> String {
        let mut out = String::new();
        for p in &self.productions {
            out.push_str(p.lhs);
            out.push_str(" ->");
            for sym in &p.rhs {
                out.push(' ');
                out.push_str(&sym.to_string());
            }
            let w = if p.weight.fract() == 0.0 {
                format!("{}", p.weight as i64)
            } else {
                format!("{}", p.weight)
            };
            out.push_str(&format!(" [{w}]\n"));
        }
        let mut buckets: BTreeMap<String, Vec<&str>> = BTreeMap::new();
        for p in &self.productions {
            for sym in &p.rhs {
                if let Symbol::Cat(cat, num) = sym {
                    buckets
                        .entry(sym.to_string())
                        .or_insert_with(|| self.lexicon.words(*cat, *num));
                }
            }
        }
        for (name, words) in buckets {
            out.push_str(&format!("{}: {}\n", name, words.join(" ")));
        }
        out
    }
}

fn base_entries() -> Vec<(String, LexicalCategory, Option<Number>)> {
    use LexicalCategory::*;
    let mut entries = Vec::new();
    for w in ["the", "some", "my", "your", "our", "her"] {
        entries.push((w.to_string(), Det, None));
    }
    // Nouns in printed order: singular/plural pairs.
    for stem in [
        "newt", "orangutan", "peacock", "quail", "raven", "salamander", "tyrannosaurus",
        "unicorn", "vulture", "walrus", "xylophone", "yak", "zebra",
    ] {
        entries.push((stem.to_string(), N, Some(Number::Singular)));
        let plural = if stem.ends_with('s') { format!("{stem}es") } else { format!("{stem}s") };
        entries.push((plural, N, Some(Number::Plural)));
    }
    for w in ["giggle", "smile", "sleep", "swim", "wait", "move", "change", "read", "eat"] {
        entries.push((w.to_string(), Vintrans, None));
    }
    for w in [
        "entertain", "amuse", "high_five", "applaud", "confuse", "admire", "accept",
        "remember", "comfort",
    ] {
        entries.push((w.to_string(), Vtrans, None));
    }
    for w in ["around", "near", "with", "upon", "by", "behind", "above", "below"] {
        entries.push((w.to_string(), P, None));
    }
    for w in ["who", "that"] {
        entries.push((w.to_string(), Rel, None));
    }
    entries.push((".".to_string(), Punct, None));
    entries.push(("?".to_string(), Punct, None));
    entries.push(("IDENT".to_string(), Task, None));
    entries.push(("QUEST".to_string(), Task, None));
    entries
}

fn no_agreement_lexicon() -> Lexicon {
    let mut entries = base_entries();
    let at = entries.iter().position(|(_, c, _)| *c == LexicalCategory::P).unwrap();
    let aux: Vec<_> = ["can", "will", "could", "would"]
        .iter()
        .map(|w| (w.to_string(), LexicalCategory::Aux, None))
        .collect();
    entries.splice(at..at, aux);
    Lexicon::new(entries)
}

fn agreement_lexicon() -> Lexicon {
    let mut entries = base_entries();
    let at = entries.iter().position(|(_, c, _)| *c == LexicalCategory::P).unwrap();
    let aux = vec![
        ("do".to_string(), LexicalCategory::Aux, Some(Number::Plural)),
        ("don't".to_string(), LexicalCategory::Aux, Some(Number::Plural)),
        ("does".to_string(), LexicalCategory::Aux, Some(Number::Singular)),
        ("doesn't".to_string(), LexicalCategory::Aux, Some(Number::Singular)),
    ];
    entries.splice(at..at, aux);
    Lexicon::new(entries)
}

/// The no-agreement grammar, exactly as printed: ten productions over
/// {S, NP, VP, PP, RC}.
pub fn no_agreement() -> Grammar {
    no_agreement_with(GrammarOptions::default())
}

pub fn no_agreement_with(opts: GrammarOptions) -> Grammar {
    use LexicalCategory::*;
    use Symbol::*;
    let object_rc_verb = if opts.object_rc_transitive { Cat(Vtrans, None) } else { Cat(Vintrans, None) };
    let productions = vec![
        Production::new("S", vec![Nt("NP"), Nt("VP"), Lit(".")]),
        Production::new("NP", vec![Cat(Det, None), Cat(N, None)]),
        Production::new("NP", vec![Cat(Det, None), Cat(N, None), Nt("PP")]),
        Production::new("NP", vec![Cat(Det, None), Cat(N, None), Nt("RC")]),
        Production::new("VP", vec![Cat(Aux, None), Cat(Vintrans, None)]),
        Production::new("VP", vec![Cat(Aux, None), Cat(Vtrans, None), Nt("NP")]),
        Production::new("PP", vec![Cat(P, None), Cat(Det, None), Cat(N, None)]),
        Production::new("RC", vec![Cat(Rel, None), Cat(Aux, None), Cat(Vintrans, None)]),
        Production::new("RC", vec![Cat(Rel, None), Cat(Det, None), Cat(N, None), Cat(Aux, None), object_rc_verb]),
        Production::new("RC", vec![Cat(Rel, None), Cat(Aux, None), Cat(Vtrans, None), Cat(Det, None), Cat(N, None)]),
    ];
    let id = grammar_id("no_agreement", opts);
    Grammar::new("S", productions, no_agreement_lexicon(), false, id).expect("built-in grammar is valid")
}

/// The agreement grammar: the same shape with number-split S, NP, VP, and RC
/// rules so that every clause's auxiliary agrees with its own subject.
pub fn agreement() -> Grammar {
    agreement_with(GrammarOptions::default())
}

pub fn agreement_with(opts: GrammarOptions) -> Grammar {
    use LexicalCategory::*;
    use Number::*;
    use Symbol::*;
    let object_rc_verb = if opts.object_rc_transitive { Cat(Vtrans, None) } else { Cat(Vintrans, None) };
    let mut productions = vec![
        Production::new("S", vec![Nt("NP_sg"), Nt("VP_sg"), Lit(".")]),
        Production::new("S", vec![Nt("NP_pl"), Nt("VP_pl"), Lit(".")]),
        Production::new("NP", vec![Nt("NP_sg")]),
        Production::new("NP", vec![Nt("NP_pl")]),
    ];
    for (np, vp, rc, num) in [
        ("NP_sg", "VP_sg", "RC_sg", Singular),
        ("NP_pl", "VP_pl", "RC_pl", Plural),
    ] {
        productions.push(Production::new(np, vec![Cat(Det, None), Cat(N, Some(num))]));
        productions.push(Production::new(np, vec![Cat(Det, None), Cat(N, Some(num)), Nt("PP")]));
        productions.push(Production::new(np, vec![Cat(Det, None), Cat(N, Some(num)), Nt(rc)]));
        productions.push(Production::new(vp, vec![Cat(Aux, Some(num)), Cat(Vintrans, None)]));
        productions.push(Production::new(vp, vec![Cat(Aux, Some(num)), Cat(Vtrans, None), Nt("NP")]));
        productions.push(Production::new(rc, vec![Cat(Rel, None), Cat(Aux, Some(num)), Cat(Vintrans, None)]));
        productions.push(Production::new(rc, vec![Cat(Rel, None), Nt("Subj_RC")]));
        productions.push(Production::new(
            rc,
            vec![Cat(Rel, None), Cat(Aux, Some(num)), Cat(Vtrans, None), Cat(Det, None), Cat(N, None)],
        ));
    }
    productions.push(Production::new("PP", vec![Cat(P, None), Cat(Det, None), Cat(N, None)]));
    for num in [Singular, Plural] {
        productions.push(Production::new(
            "Subj_RC",
            vec![Cat(Det, None), Cat(N, Some(num)), Cat(Aux, Some(num)), object_rc_verb.clone()],
        ));
    }
    let id = grammar_id("agreement", opts);
    Grammar::new("S", productions, agreement_lexicon(), true, id).expect("built-in grammar is valid")
}

fn grammar_id(base: &str, opts: GrammarOptions) -> String {
    if opts.object_rc_transitive {
        format!("{base}+trans_obj_rc")
    } else {
        base.to_string()
    }
}

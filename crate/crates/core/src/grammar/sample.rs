//! Derivation sampling. Each nonterminal expands by a weighted draw over its
//! productions (uniform under the default equal weights) and each lexical slot
//! by a uniform draw over the matching words.

use rand::Rng;

use super::{Grammar, Symbol};

/// A derivation tree. Interior nodes record which production expanded them so
/// annotations can be read off the derivation without re-parsing.
#[derive(Debug, Clone, PartialEq)]
pub enum ParseTree {
    Node {
        symbol: &'static str,
        production: usize,
        children: Vec<ParseTree>,
    },
    Leaf(String),
}

impl ParseTree {
    pub fn tokens(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_tokens(&mut out);
        out
    }

    fn collect_tokens(&self, out: &mut Vec<String>) {
        match self {
            ParseTree::Leaf(tok) => out.push(tok.clone()),
            ParseTree::Node { children, .. } => {
                for c in children {
                    c.collect_tokens(out);
                }
            }
        }
    }

    pub fn token_count(&self) -> usize {
        match self {
            ParseTree::Leaf(_) => 1,
            ParseTree::Node { children, .. } => children.iter().map(ParseTree::token_count).sum(),
        }
    }
}

/// Draw one derivation from the grammar. Deterministic given the RNG state.
pub fn sample_tree<R: Rng>(grammar: &Grammar, rng: &mut R) -> ParseTree {
    expand(grammar, &Symbol::Nt(grammar.start), rng)
}

fn expand<R: Rng>(grammar: &Grammar, sym: &Symbol, rng: &mut R) -> ParseTree {
    match sym {
        Symbol::Nt(name) => {
            let pi = pick_production(grammar, name, rng);
            let children = grammar.productions[pi]
                .rhs
                .iter()
                .map(|s| expand(grammar, s, rng))
                .collect();
            ParseTree::Node { symbol: name, production: pi, children }
        }
        Symbol::Cat(cat, num) => {
            let words = grammar.lexicon.words(*cat, *num);
            let w = words[rng.random_range(0..words.len())];
            ParseTree::Leaf(w.to_string())
        }
        Symbol::Lit(tok) => ParseTree::Leaf(tok.to_string()),
    }
}

fn pick_production<R: Rng>(grammar: &Grammar, nt: &str, rng: &mut R) -> usize {
    let candidates = grammar.productions_for(nt);
    debug_assert!(!candidates.is_empty(), "no productions for {nt}");
    let total: f64 = candidates.iter().map(|&i| grammar.productions[i].weight).sum();
    let mut draw = rng.random::<f64>() * total;
    for &i in candidates {
        draw -= grammar.productions[i].weight;
        if draw <= 0.0 {
            return i;
        }
    }
    *candidates.last().unwrap()
}

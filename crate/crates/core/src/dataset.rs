//! Dataset assembly: rejection sampling with global uniqueness on the
//! declarative string, uniform task assignment, and the withheld case
//! (question formation on subject relative clauses) routed to the
//! generalization split.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use thiserror::Error;

use crate::grammar::{
    annotate, sample_tree, Grammar, Modifier, SentenceAnnotation, SentenceType,
};
use crate::rng::SeedRng;
use crate::transform::{apply_task, TaskToken};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("draw budget of {budget} exhausted after filling {filled} of {requested} examples")]
    Exhausted { budget: u64, filled: usize, requested: usize },
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One supervised example: declarative plus task token in, oracle output plus
/// task token out.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub input: Vec<String>,
    pub target: Vec<String>,
    pub annotation: SentenceAnnotation,
    pub task: TaskToken,
}

impl Example {
    pub fn new(annotation: SentenceAnnotation, task: TaskToken) -> Example {
        let mut input = annotation.tokens.clone();
        input.push(task.as_str().to_string());
        let mut target = apply_task(task, &annotation);
        target.push(task.as_str().to_string());
        Example { input, target, annotation, task }
    }

    pub fn is_withheld_type(&self) -> bool {
        self.task == TaskToken::Quest && self.annotation.sentence_type.subject_mod == Modifier::Rc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSizes {
    pub train: usize,
    pub test: usize,
    pub generalization: usize,
}

impl SplitSizes {
    pub fn paper() -> SplitSizes {
        SplitSizes { train: 120_000, test: 10_000, generalization: 10_000 }
    }

    pub fn total(&self) -> usize {
        self.train + self.test + self.generalization
    }
}

#[derive(Debug, Clone)]
pub struct DatasetSplits {
    pub train: Vec<Example>,
    pub test: Vec<Example>,
    pub generalization: Vec<Example>,
    pub seed: u64,
    pub grammar_id: String,
    /// Total derivation draws consumed, including rejected duplicates.
    pub draws: u64,
}

/// Build the three splits.
///
/// Each draw samples a derivation, rejects duplicate declaratives (the
/// uniqueness key is the declarative string, within and across splits), and
/// assigns a task uniformly. Subject-RC sentences assigned QUEST belong to
/// the withheld cell: they go to the generalization split while it has room
/// and are discarded afterwards. Everything else fills train and test in
/// proportion to their remaining capacity. Deterministic given the seed.
pub fn build_splits(
    grammar: &Grammar,
    sizes: SplitSizes,
    seed: u64,
    rng: &mut SeedRng,
) -> Result<DatasetSplits, DatasetError> {
    // Generous budget: the fragments are many orders of magnitude larger than
    // any requested size, so only a pathological grammar/size combination
    // (or the finite unmodified-intransitive pool) rejects heavily.
    let budget = 100 * sizes.total() as u64 + 1_000_000;
    let mut seen: HashSet<String> = HashSet::with_capacity(sizes.total() * 2);
    let mut train = Vec::with_capacity(sizes.train);
    let mut test = Vec::with_capacity(sizes.test);
    let mut gen = Vec::with_capacity(sizes.generalization);
    let mut draws = 0u64;

    while train.len() < sizes.train || test.len() < sizes.test || gen.len() < sizes.generalization
    {
        if draws >= budget {
            let filled = train.len() + test.len() + gen.len();
            return Err(DatasetError::Exhausted { budget, filled, requested: sizes.total() });
        }
        draws += 1;

        let tree = sample_tree(grammar, rng);
        let annotation = annotate(grammar, &tree);
        let sentence = annotation.sentence();
        if seen.contains(&sentence) {
            continue;
        }
        let task = if rng.random::<f64>() < 0.5 { TaskToken::Ident } else { TaskToken::Quest };
        let example = Example::new(annotation, task);

        if example.is_withheld_type() {
            if gen.len() < sizes.generalization {
                seen.insert(sentence);
                gen.push(example);
            }
            continue;
        }

        let train_room = sizes.train - train.len();
        let test_room = sizes.test - test.len();
        if train_room + test_room == 0 {
            continue;
        }
        seen.insert(sentence);
        let to_train = (rng.random::<f64>() * (train_room + test_room) as f64) < train_room as f64;
        if to_train {
            train.push(example);
        } else {
            test.push(example);
        }
    }

    Ok(DatasetSplits {
        train,
        test,
        generalization: gen,
        seed,
        grammar_id: grammar.id().to_string(),
        draws,
    })
}

/// Serialize one split: one example per line, input tokens, a tab, target
/// tokens, tokens space-separated, UTF-8.
pub fn serialize(examples: &[Example]) -> String {
    let mut out = String::new();
    for ex in examples {
        let _ = writeln!(out, "{}\t{}", ex.input.join(" "), ex.target.join(" "));
    }
    out
}

pub fn write_split(path: &Path, examples: &[Example]) -> Result<(), DatasetError> {
    std::fs::write(path, serialize(examples))?;
    Ok(())
}

/// Parse a serialized split, re-deriving annotations with the grammar's
/// recognizer (the fragments are unambiguous, so the parse is exact).
pub fn load_split(path: &Path, grammar: &Grammar) -> Result<Vec<Example>, DatasetError> {
    let text = std::fs::read_to_string(path)?;
    parse_split(&text, grammar, &path.display().to_string())
}

pub fn parse_split(
    text: &str,
    grammar: &Grammar,
    path: &str,
) -> Result<Vec<Example>, DatasetError> {
    let fail = |line: usize, message: String| DatasetError::Parse {
        path: path.to_string(),
        line,
        message,
    };
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let (input_str, target_str) = line
            .split_once('\t')
            .ok_or_else(|| fail(lineno, "missing tab separator".to_string()))?;
        let input: Vec<String> = input_str.split(' ').map(str::to_string).collect();
        let target: Vec<String> = target_str.split(' ').map(str::to_string).collect();
        let task_tok = input.last().ok_or_else(|| fail(lineno, "empty input".to_string()))?;
        let task = TaskToken::from_str(task_tok)
            .ok_or_else(|| fail(lineno, format!("input does not end in a task token: {task_tok:?}")))?;
        let declarative = &input[..input.len() - 1];
        let annotation = crate::grammar::parse(grammar, declarative)
            .ok_or_else(|| fail(lineno, format!("not a sentence of {}: {input_str:?}", grammar.id())))?;
        let expected = Example::new(annotation, task);
        if expected.target != target {
            return Err(fail(lineno, format!("target does not match the {} oracle", task.as_str())));
        }
        out.push(expected);
    }
    Ok(out)
}

/// Word-to-id table over the dataset files; ids follow first occurrence in
/// train, then test, then generalization (inputs before targets per line).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    pub words: Vec<String>,
}

impl Vocabulary {
    pub fn from_splits(splits: &DatasetSplits) -> Vocabulary {
        let mut words = Vec::new();
        let mut seen = HashSet::new();
        for split in [&splits.train, &splits.test, &splits.generalization] {
            for ex in split {
                for tok in ex.input.iter().chain(ex.target.iter()) {
                    if seen.insert(tok.clone()) {
                        words.push(tok.clone());
                    }
                }
            }
        }
        Vocabulary { words }
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (i, w) in self.words.iter().enumerate() {
            let _ = writeln!(out, "{w}\t{i}");
        }
        out
    }

    pub fn parse(text: &str, path: &str) -> Result<Vocabulary, DatasetError> {
        let mut words = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let (word, id) = line.split_once('\t').ok_or_else(|| DatasetError::Parse {
                path: path.to_string(),
                line: i + 1,
                message: "missing tab separator".to_string(),
            })?;
            let id: usize = id.parse().map_err(|_| DatasetError::Parse {
                path: path.to_string(),
                line: i + 1,
                message: format!("bad id {id:?}"),
            })?;
            if id != i {
                return Err(DatasetError::Parse {
                    path: path.to_string(),
                    line: i + 1,
                    message: format!("non-contiguous id {id} at line {}", i + 1),
                });
            }
            words.push(word.to_string());
        }
        Ok(Vocabulary { words })
    }
}

/// Sentence-type-by-task frequency table over one split, rows in reporting
/// order (the twelve sentence types), columns IDENT and QUEST.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyReport {
    pub rows: Vec<(SentenceType, f64, f64)>,
    pub total: usize,
}

pub fn frequency_report(examples: &[Example]) -> FrequencyReport {
    let types = SentenceType::all();
    let mut counts = vec![(0usize, 0usize); types.len()];
    for ex in examples {
        let idx = types
            .iter()
            .position(|t| *t == ex.annotation.sentence_type)
            .expect("sentence type is one of the twelve");
        match ex.task {
            TaskToken::Ident => counts[idx].0 += 1,
            TaskToken::Quest => counts[idx].1 += 1,
        }
    }
    let n = examples.len().max(1) as f64;
    let rows = types
        .into_iter()
        .zip(counts)
        .map(|(t, (i, q))| (t, i as f64 / n, q as f64 / n))
        .collect();
    FrequencyReport { rows, total: examples.len() }
}

impl FrequencyReport {
    pub fn cell(&self, sentence_type: SentenceType, task: TaskToken) -> f64 {
        let row = self
            .rows
            .iter()
            .find(|(t, _, _)| *t == sentence_type)
            .expect("sentence type is one of the twelve");
        match task {
            TaskToken::Ident => row.1,
            TaskToken::Quest => row.2,
        }
    }

    pub fn sum(&self) -> f64 {
        self.rows.iter().map(|(_, i, q)| i + q).sum()
    }
}

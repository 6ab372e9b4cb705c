//! Sequence-to-sequence model: an encoder RNN reads the input (task token
//! included) into a final hidden state, which initializes a decoder RNN that
//! emits one word per step until it produces a task token. Optional attention
//! gives the decoder a learned weighted sum of the intermediate encoder
//! states at every step.

mod cell;

pub use cell::{CellKind, CellParams, State};

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use rand::Rng;
use thiserror::Error;

use crate::dataset::Example;
use crate::nn::{argmax, checkpoint, NodeId, ParamId, ParamStore, Scalar, Shape, Tape, Tensor};
use crate::rng::{self, stream, RNG_ALGORITHM};

pub const SOS_TOKEN: &str = "<sos>";
pub const INIT_SCHEME: &str = "uniform(-1/sqrt(fan_in), 1/sqrt(fan_in))";

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("unknown token {0:?}")]
    UnknownToken(String),
    #[error("input of {len} tokens exceeds max_input_len {max}")]
    InputTooLong { len: usize, max: usize },
    #[error("training diverged at batch {batch}: non-finite loss")]
    Diverged { batch: usize },
    #[error("checkpoint mismatch: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Hyperparameters of one run. Defaults follow the experimental setup:
/// 256-dimensional embeddings and hidden states, dropout 0.1, 30,000 batches
/// of 5, teacher-forcing ratio 0.5, and a learning rate keyed to the cell
/// (0.01 for GRU/LSTM, 0.001 for SRN) unless overridden.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub cell: CellKind,
    pub attention: bool,
    pub hidden_dim: usize,
    pub embedding_dim: usize,
    pub dropout_p: f64,
    pub learning_rate: Option<f64>,
    pub batches: usize,
    pub batch_size: usize,
    pub teacher_forcing_ratio: f64,
    pub max_input_len: usize,
    pub max_decode_len: usize,
    pub seed: u64,
}

impl ModelConfig {
    pub fn new(cell: CellKind, attention: bool) -> ModelConfig {
        ModelConfig {
            cell,
            attention,
            hidden_dim: 256,
            embedding_dim: 256,
            dropout_p: 0.1,
            learning_rate: None,
            batches: 30_000,
            batch_size: 5,
            teacher_forcing_ratio: 0.5,
            max_input_len: 20,
            max_decode_len: 25,
            seed: 0,
        }
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate.unwrap_or_else(|| self.cell.default_learning_rate())
    }

    /// Architecture label, e.g. "gru" or "gru_attn".
    pub fn arch_label(&self) -> String {
        if self.attention {
            format!("{}_attn", self.cell.label())
        } else {
            self.cell.label().to_string()
        }
    }
}

/// Token table shared by the embeddings and the output layer: the dataset
/// vocabulary plus a dedicated start-of-sequence entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocab {
    words: Vec<String>,
    index: HashMap<String, u32>,
    sos: u32,
    ident: u32,
    quest: u32,
}

impl Vocab {
    pub fn new(mut words: Vec<String>) -> Vocab {
        assert!(!words.iter().any(|w| w == SOS_TOKEN), "start token is reserved");
        let find = |words: &[String], w: &str| {
            words.iter().position(|x| x == w).map(|i| i as u32)
        };
        assert!(find(&words, "IDENT").is_some(), "vocabulary must contain IDENT");
        assert!(find(&words, "QUEST").is_some(), "vocabulary must contain QUEST");
        words.push(SOS_TOKEN.to_string());
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();
        let ident = find(&words, "IDENT").unwrap();
        let quest = find(&words, "QUEST").unwrap();
        let sos = (words.len() - 1) as u32;
        Vocab { words, index, sos, ident, quest }
    }

    pub fn from_vocabulary(v: &crate::dataset::Vocabulary) -> Vocab {
        Vocab::new(v.words.clone())
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn sos(&self) -> u32 {
        self.sos
    }

    pub fn is_end(&self, id: u32) -> bool {
        id == self.ident || id == self.quest
    }

    pub fn id(&self, token: &str) -> Result<u32, ModelError> {
        self.index
            .get(token)
            .copied()
            .ok_or_else(|| ModelError::UnknownToken(token.to_string()))
    }

    pub fn token(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn encode_tokens(&self, tokens: &[String]) -> Result<Vec<u32>, ModelError> {
        tokens.iter().map(|t| self.id(t)).collect()
    }

    pub fn decode_tokens(&self, ids: &[u32]) -> Vec<String> {
        ids.iter().map(|&i| self.token(i).to_string()).collect()
    }
}

struct Layout {
    enc_embedding: ParamId,
    dec_embedding: ParamId,
    encoder: CellParams,
    decoder: CellParams,
    attention: Option<(ParamId, ParamId)>,
    out_w: ParamId,
    out_b: ParamId,
}

/// Encoder states for one input: `hidden[0]` is the all-zeros E_0 and
/// `hidden[i]` the state after consuming token i. LSTMs also carry the final
/// cell state for the decoder handoff.
pub struct EncoderStates {
    pub hidden: Vec<NodeId>,
    pub final_cell: Option<NodeId>,
}

pub struct Seq2Seq<T> {
    pub config: ModelConfig,
    pub vocab: Vocab,
    pub store: ParamStore<T>,
    layout: Layout,
}

impl<T: Scalar> Seq2Seq<T> {
    /// Fresh model with parameters drawn from the config seed's init stream.
    pub fn new(config: ModelConfig, vocab: Vocab) -> Seq2Seq<T> {
        let mut store = ParamStore::new();
        let mut rng = rng::from_seed_stream(config.seed, stream::MODEL_INIT);
        let layout = Self::build_layout(&config, &vocab, &mut store, &mut rng);
        Seq2Seq { config, vocab, store, layout }
    }

    fn build_layout<R: Rng>(
        config: &ModelConfig,
        vocab: &Vocab,
        store: &mut ParamStore<T>,
        rng: &mut R,
    ) -> Layout {
        let v = vocab.len();
        let h = config.hidden_dim;
        let e = config.embedding_dim;
        let attn_dim = if config.attention { h } else { 0 };
        let enc_embedding =
            store.add_uniform("encoder.embedding", Shape::Matrix(v, e), e, rng);
        let dec_embedding =
            store.add_uniform("decoder.embedding", Shape::Matrix(v, e), e, rng);
        let encoder = CellParams::init(store, "encoder", config.cell, h, e, 0, rng);
        let decoder = CellParams::init(store, "decoder", config.cell, h, e, attn_dim, rng);
        let attention = config.attention.then(|| {
            let cols = h + e;
            let w = store.add_uniform(
                "decoder.attention.w",
                Shape::Matrix(config.max_input_len, cols),
                cols,
                rng,
            );
            let b = store.add_uniform(
                "decoder.attention.b",
                Shape::Vector(config.max_input_len),
                cols,
                rng,
            );
            (w, b)
        });
        let out_w = store.add_uniform("output.w", Shape::Matrix(v, h), h, rng);
        let out_b = store.add_uniform("output.b", Shape::Vector(v), h, rng);
        Layout { enc_embedding, dec_embedding, encoder, decoder, attention, out_w, out_b }
    }

    pub fn check_input_len(&self, len: usize) -> Result<(), ModelError> {
        if len > self.config.max_input_len {
            return Err(ModelError::InputTooLong { len, max: self.config.max_input_len });
        }
        Ok(())
    }

    /// Run the encoder over an id sequence. Returns n+1 hidden states for n
    /// tokens, E_0 (all zeros) included.
    pub fn encode<'s, R: Rng>(
        &'s self,
        tape: &mut Tape<'s, T>,
        input: &[u32],
        training: bool,
        rng: &mut R,
    ) -> EncoderStates {
        let h = self.config.hidden_dim;
        let zero_h = tape.zeros(h);
        let mut state = State {
            hidden: zero_h,
            cell: (self.config.cell == CellKind::Lstm).then(|| tape.zeros(h)),
        };
        let mut hidden = Vec::with_capacity(input.len() + 1);
        hidden.push(state.hidden);
        let table = tape.param(self.layout.enc_embedding);
        for &tok in input {
            let emb = tape.row(table, tok as usize);
            let emb = tape.dropout(emb, self.config.dropout_p, training, rng);
            state = self.layout.encoder.step(tape, state, emb, None);
            hidden.push(state.hidden);
        }
        EncoderStates { hidden, final_cell: state.cell }
    }

    /// Attention weights and weighted sum over the encoder states E_1..E_n.
    /// Scores beyond the input length are masked out before normalization.
    pub fn attend<'s>(
        &'s self,
        tape: &mut Tape<'s, T>,
        d_prev: NodeId,
        word_emb: NodeId,
        enc_hidden: &[NodeId],
    ) -> (NodeId, NodeId) {
        let (w_a, b_a) = self.layout.attention.expect("attention parameters present");
        let n = enc_hidden.len();
        assert!(n >= 1, "attention needs at least one encoder state");
        assert!(n <= self.config.max_input_len, "input longer than max_input_len");
        let cat = tape.concat(&[d_prev, word_emb]);
        let scores = tape.affine(w_a, cat, b_a);
        let unmasked = tape.slice(scores, 0, n);
        let weights = tape.softmax(unmasked);
        let mix = tape.attn_mix(weights, enc_hidden);
        (weights, mix)
    }

    fn decode_step<'s, R: Rng>(
        &'s self,
        tape: &mut Tape<'s, T>,
        dec_table: NodeId,
        states: &EncoderStates,
        state: State,
        prev_word: u32,
        training: bool,
        rng: &mut R,
    ) -> (State, NodeId) {
        let emb = tape.row(dec_table, prev_word as usize);
        let emb = tape.dropout(emb, self.config.dropout_p, training, rng);
        let attn = self
            .layout
            .attention
            .is_some()
            .then(|| self.attend(tape, state.hidden, emb, &states.hidden[1..]).1);
        let next = self.layout.decoder.step(tape, state, emb, attn);
        let logits = tape.affine(self.layout.out_w, next.hidden, self.layout.out_b);
        let log_probs = tape.log_softmax(logits);
        (next, log_probs)
    }

    fn decoder_start(&self, states: &EncoderStates) -> State {
        State {
            hidden: *states.hidden.last().expect("at least E_0"),
            cell: states.final_cell,
        }
    }

    /// Teacher-forced/free-running training pass. The forcing coin is tossed
    /// once per sequence; the loss is the mean NLL over target positions.
    pub fn decode_train<'s, R: Rng>(
        &'s self,
        tape: &mut Tape<'s, T>,
        states: &EncoderStates,
        target: &[u32],
        rng: &mut R,
    ) -> NodeId {
        assert!(!target.is_empty(), "empty target");
        let teacher_forcing = rng.random::<f64>() < self.config.teacher_forcing_ratio;
        let dec_table = tape.param(self.layout.dec_embedding);
        let mut state = self.decoder_start(states);
        let mut prev = self.vocab.sos();
        let mut losses = Vec::with_capacity(target.len());
        for &gold in target {
            let (next, log_probs) = self.decode_step(tape, dec_table, states, state, prev, true, rng);
            losses.push(tape.nll(log_probs, gold as usize));
            prev = if teacher_forcing {
                gold
            } else {
                argmax(tape.value(log_probs).data()) as u32
            };
            state = next;
        }
        let total = tape.add_n(&losses);
        tape.scale(total, T::from_f64_lossy(1.0 / target.len() as f64))
    }

    /// Greedy decoding: argmax per step, fed back, stopping after a task
    /// token or `max_decode_len` outputs. Dropout is off.
    pub fn decode_greedy<'s>(&'s self, tape: &mut Tape<'s, T>, states: &EncoderStates) -> Vec<u32> {
        let dec_table = tape.param(self.layout.dec_embedding);
        let mut state = self.decoder_start(states);
        let mut prev = self.vocab.sos();
        let mut out = Vec::new();
        let mut no_rng = NoRng;
        while out.len() < self.config.max_decode_len {
            let (next, log_probs) =
                self.decode_step(tape, dec_table, states, state, prev, false, &mut no_rng);
            let tok = argmax(tape.value(log_probs).data()) as u32;
            out.push(tok);
            if self.vocab.is_end(tok) {
                break;
            }
            prev = tok;
            state = next;
        }
        out
    }

    /// Encode a token sequence and greedily decode; the whole-model answer to
    /// one input.
    pub fn predict(&self, input: &[String]) -> Result<Vec<String>, ModelError> {
        self.check_input_len(input.len())?;
        let ids = self.vocab.encode_tokens(input)?;
        let mut tape = Tape::new(&self.store);
        let states = self.encode(&mut tape, &ids, false, &mut NoRng);
        let out = self.decode_greedy(&mut tape, &states);
        Ok(self.vocab.decode_tokens(&out))
    }

    /// Final encoder hidden state for an input (the sentence encoding).
    pub fn encoding(&self, input: &[String]) -> Result<Vec<T>, ModelError> {
        self.check_input_len(input.len())?;
        let ids = self.vocab.encode_tokens(input)?;
        let mut tape = Tape::new(&self.store);
        let states = self.encode(&mut tape, &ids, false, &mut NoRng);
        Ok(tape.value(*states.hidden.last().unwrap()).data().to_vec())
    }

    pub fn encoder_params(&self) -> &CellParams {
        &self.layout.encoder
    }

    pub fn decoder_params(&self) -> &CellParams {
        &self.layout.decoder
    }

    /// Output layer (weight, bias).
    pub fn output_params(&self) -> (ParamId, ParamId) {
        (self.layout.out_w, self.layout.out_b)
    }

    pub fn attention_params(&self) -> Option<(ParamId, ParamId)> {
        self.layout.attention
    }

    /// Embedding tables (encoder, decoder).
    pub fn embedding_params(&self) -> (ParamId, ParamId) {
        (self.layout.enc_embedding, self.layout.dec_embedding)
    }

    /// Checkpoint manifest entries describing this model.
    pub fn manifest(&self) -> BTreeMap<String, String> {
        let c = &self.config;
        let mut m = BTreeMap::new();
        m.insert("cell".into(), c.cell.label().into());
        m.insert("attention".into(), c.attention.to_string());
        m.insert("hidden_dim".into(), c.hidden_dim.to_string());
        m.insert("embedding_dim".into(), c.embedding_dim.to_string());
        m.insert("dropout".into(), c.dropout_p.to_string());
        m.insert("learning_rate".into(), c.learning_rate().to_string());
        m.insert("batches".into(), c.batches.to_string());
        m.insert("batch_size".into(), c.batch_size.to_string());
        m.insert("teacher_forcing".into(), c.teacher_forcing_ratio.to_string());
        m.insert("max_input_len".into(), c.max_input_len.to_string());
        m.insert("max_decode_len".into(), c.max_decode_len.to_string());
        m.insert("seed".into(), c.seed.to_string());
        m.insert("rng".into(), RNG_ALGORITHM.into());
        m.insert("init".into(), INIT_SCHEME.into());
        let words = &self.vocab.words[..self.vocab.len() - 1];
        m.insert("vocab".into(), words.join(" "));
        m
    }
}

impl Seq2Seq<f32> {
    pub fn save(&self, path: &Path, extra: &BTreeMap<String, String>) -> Result<(), ModelError> {
        let mut manifest = self.manifest();
        for (k, v) in extra {
            manifest.insert(k.clone(), v.clone());
        }
        checkpoint::save(path, &self.store, &manifest)?;
        Ok(())
    }

    /// Rebuild a model from a checkpoint: the manifest pins the config and
    /// vocabulary; tensors are matched by name and shape.
    pub fn load(path: &Path) -> Result<(Seq2Seq<f32>, BTreeMap<String, String>), ModelError> {
        let ckpt = checkpoint::load(path)?;
        let get = |key: &str| {
            ckpt.manifest
                .get(key)
                .cloned()
                .ok_or_else(|| ModelError::Checkpoint(format!("manifest missing {key:?}")))
        };
        let parse_err = |key: &str| ModelError::Checkpoint(format!("bad manifest value for {key:?}"));
        let config = ModelConfig {
            cell: get("cell")?.parse().map_err(|_| parse_err("cell"))?,
            attention: get("attention")?.parse().map_err(|_| parse_err("attention"))?,
            hidden_dim: get("hidden_dim")?.parse().map_err(|_| parse_err("hidden_dim"))?,
            embedding_dim: get("embedding_dim")?.parse().map_err(|_| parse_err("embedding_dim"))?,
            dropout_p: get("dropout")?.parse().map_err(|_| parse_err("dropout"))?,
            learning_rate: Some(get("learning_rate")?.parse().map_err(|_| parse_err("learning_rate"))?),
            batches: get("batches")?.parse().map_err(|_| parse_err("batches"))?,
            batch_size: get("batch_size")?.parse().map_err(|_| parse_err("batch_size"))?,
            teacher_forcing_ratio: get("teacher_forcing")?.parse().map_err(|_| parse_err("teacher_forcing"))?,
            max_input_len: get("max_input_len")?.parse().map_err(|_| parse_err("max_input_len"))?,
            max_decode_len: get("max_decode_len")?.parse().map_err(|_| parse_err("max_decode_len"))?,
            seed: get("seed")?.parse().map_err(|_| parse_err("seed"))?,
        };
        let vocab = Vocab::new(get("vocab")?.split(' ').map(str::to_string).collect());
        let mut model: Seq2Seq<f32> = Seq2Seq::new(config, vocab);
        let mut by_name: HashMap<&str, &Tensor<f32>> =
            ckpt.tensors.iter().map(|(n, t)| (n.as_str(), t)).collect();
        for id in model.store.ids().collect::<Vec<_>>() {
            let name = model.store.get(id).name.clone();
            let tensor = by_name.remove(name.as_str()).ok_or_else(|| {
                ModelError::Checkpoint(format!("checkpoint missing tensor {name:?}"))
            })?;
            if tensor.shape() != model.store.value(id).shape() {
                return Err(ModelError::Checkpoint(format!("shape mismatch for {name:?}")));
            }
            model.store.get_mut(id).value = tensor.clone();
        }
        if let Some(extra) = by_name.keys().next() {
            return Err(ModelError::Checkpoint(format!("unexpected tensor {extra:?}")));
        }
        Ok((model, ckpt.manifest))
    }
}

/// Training output: the model plus the per-batch mean loss trace.
pub struct TrainOutcome<T> {
    pub model: Seq2Seq<T>,
    pub losses: Vec<f64>,
}

/// Train a fresh model on examples drawn uniformly with replacement,
/// `batch_size` per batch, one SGD step per batch. Aborts with an error if
/// the loss goes non-finite.
pub fn train_run<T: Scalar>(
    config: &ModelConfig,
    vocab: Vocab,
    train: &[Example],
) -> Result<TrainOutcome<T>, ModelError> {
    let model: Seq2Seq<T> = Seq2Seq::new(config.clone(), vocab);
    train_model(model, train)
}

/// Continue training an existing (typically fresh) model; exposed so tests
/// can rig models before training.
pub fn train_model<T: Scalar>(
    mut model: Seq2Seq<T>,
    train: &[Example],
) -> Result<TrainOutcome<T>, ModelError> {
    let config = model.config.clone();
    let mut rng = rng::from_seed_stream(config.seed, stream::TRAIN);
    assert!(!train.is_empty() || config.batches == 0, "no training data");

    // Tokenize once; the hot loop works on ids.
    let mut encoded = Vec::with_capacity(train.len());
    for ex in train {
        model.check_input_len(ex.input.len())?;
        encoded.push((
            model.vocab.encode_tokens(&ex.input)?,
            model.vocab.encode_tokens(&ex.target)?,
        ));
    }

    let lr = T::from_f64_lossy(config.learning_rate());
    let inv_batch = T::from_f64_lossy(1.0 / config.batch_size as f64);
    let mut losses = Vec::with_capacity(config.batches);

    for batch in 0..config.batches {
        if !model.store.all_finite() {
            return Err(ModelError::Diverged { batch });
        }
        let mut batch_loss = 0.0f64;
        for _ in 0..config.batch_size {
            let (input, target) = &encoded[rng.random_range(0..encoded.len())];
            let mut tape = Tape::new(&model.store);
            let states = model.encode(&mut tape, input, true, &mut rng);
            let loss = model.decode_train(&mut tape, &states, target, &mut rng);
            batch_loss += tape.value(loss).item().to_f64_lossy();
            let updates = tape.backward(loss, inv_batch);
            model.store.accumulate(updates);
        }
        batch_loss /= config.batch_size as f64;
        if !batch_loss.is_finite() {
            return Err(ModelError::Diverged { batch });
        }
        losses.push(batch_loss);
        model.store.sgd_step(lr);
    }
    Ok(TrainOutcome { model, losses })
}

/// RNG stand-in for paths where no randomness may be consumed (inference).
struct NoRng;

impl rand::RngCore for NoRng {
    fn next_u32(&mut self) -> u32 {
        unreachable!("inference must not draw randomness")
    }

    fn next_u64(&mut self) -> u64 {
        unreachable!("inference must not draw randomness")
    }

    fn fill_bytes(&mut self, _dest: &mut [u8]) {
        unreachable!("inference must not draw randomness")
    }
}

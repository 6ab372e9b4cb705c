use auxinv_core::dataset::{build_splits, SplitSizes};
use auxinv_core::rng;
use auxinv_core::rnn::{train_run, CellKind, ModelConfig, Vocab};

fn main() {
    let g = auxinv_core::grammar::no_agreement();
    let mut r = rng::from_seed_stream(1, rng::stream::DATA);
    let splits = build_splits(&g, SplitSizes { train: 40, test: 5, generalization: 5 }, 1, &mut r).unwrap();
    let mut words = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for ex in &splits.train {
        for t in ex.input.iter().chain(&ex.target) {
            if seen.insert(t.clone()) { words.push(t.clone()); }
        }
    }
    for t in ["IDENT", "QUEST"] { if seen.insert(t.to_string()) { words.push(t.to_string()); } }
    let vocab = Vocab::new(words);

    let mut cfg = ModelConfig::new(CellKind::Gru, false);
    cfg.hidden_dim = 16; cfg.embedding_dim = 16; cfg.batches = 4000; cfg.seed = 5;
    let out = train_run::<f32>(&cfg, vocab, &splits.train).unwrap();
    for i in (0..out.losses.len()).step_by(250) {
        let w: f64 = out.losses[i..(i+250).min(out.losses.len())].iter().sum::<f64>() / 250.0;
        println!("batch {i:5}: {w:.4}");
    }
}

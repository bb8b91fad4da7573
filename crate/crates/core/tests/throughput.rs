use std::time::Instant;

use charlid::corpus::{LabelSet, Vocabulary};
use charlid::network::{ModelConfig, ModelParams};
use charlid::numerics::Rng;
use charlid::tasks::predict_chars;
use charlid::Model;

fn time_prediction(model: &Model<f32>, text: &str) -> f64 {
    let mut best = f64::INFINITY;
    for _ in 0..3 {
        let t = Instant::now();
        let p = predict_chars(model, text, None, false).unwrap();
        assert_eq!(p.len(), text.chars().count());
        best = best.min(t.elapsed().as_secs_f64());
    }
    best
}

#[test]
fn prediction_time_is_linear_in_input_length() {
    let vocab = Vocabulary::from_codepoints("abcdefghijklmnopqrstuvwxyz ".chars().collect()).unwrap();
    let labels = LabelSet::new(["eng", "deu", "fra"]).unwrap();
    let config = ModelConfig {
        embed_dim: 32,
        hidden_dim: 64,
        window: 200,
        vocab_size: vocab.len(),
        label_count: 3,
        keep_prob: 0.5,
    };
    let params = ModelParams::init(&config, &mut Rng::new(1)).unwrap();
    let model = Model::new(config, vocab, labels, params).unwrap();
    let mut rng = Rng::new(2);
    let alphabet: Vec<char> = "abcdefghijklmnopqrstuvwxyz ".chars().collect();
    let long: String = (0..256_000).map(|_| alphabet[rng.below(alphabet.len())]).collect();
    let short: String = long.chars().take(25_600).collect();
    time_prediction(&model, &short);
    let ratio = time_prediction(&model, &long) / time_prediction(&model, &short);
    assert!((5.0..=20.0).contains(&ratio), "time ratio {ratio}");
}

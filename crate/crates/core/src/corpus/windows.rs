use crate::corpus::{LabeledStream, Vocabulary, PAD};
use crate::numerics::Rng;

/// One fixed-length training or evaluation unit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    pub char_ids: Vec<u32>,
    pub gold: Vec<u32>,
    /// `false` exactly at padding positions.
    pub loss_mask: Vec<bool>,
}

impl Window {
    pub fn valid_len(&self) -> usize {
        self.loss_mask.iter().filter(|&&m| m).count()
    }
}

/// Splits a stream into consecutive non-overlapping windows. The last window
/// is padded with `PAD` (gold 0, masked out).
pub fn make_windows(stream: &LabeledStream, vocab: &Vocabulary, window: usize) -> Vec<Window> {
    assert!(window > 0, "window length must be positive");
    stream
        .chars()
        .chunks(window)
        .zip(stream.labels().chunks(window))
        .map(|(cs, ls)| {
            let mut char_ids = vocab.encode(cs);
            let mut gold = ls.to_vec();
            let mut loss_mask = vec![true; cs.len()];
            char_ids.resize(window, PAD);
            gold.resize(window, 0);
            loss_mask.resize(window, false);
            Window {
                char_ids,
                gold,
                loss_mask,
            }
        })
        .collect()
}

/// Pads unlabeled ids into windows for inference. Returns the windows and the
/// number of real positions in each.
pub fn window_ids(ids: &[u32], window: usize) -> Vec<(Vec<u32>, usize)> {
    assert!(window > 0, "window length must be positive");
    ids.chunks(window)
        .map(|c| {
            let mut w = c.to_vec();
            w.resize(window, PAD);
            (w, c.len())
        })
        .collect()
}

/// Indices of the windows in one batch. Repeat-flagged entries only fill up
/// the final batch and must not be counted during evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowBatch {
    pub indices: Vec<usize>,
    pub repeat: Vec<bool>,
}

impl WindowBatch {
    pub fn windows<'a>(&self, all: &'a [Window]) -> Vec<&'a Window> {
        self.indices.iter().map(|&i| &all[i]).collect()
    }

    /// Windows that are not repeats.
    pub fn fresh<'a>(&self, all: &'a [Window]) -> Vec<&'a Window> {
        self.indices
            .iter()
            .zip(&self.repeat)
            .filter(|(_, &r)| !r)
            .map(|(&i, _)| &all[i])
            .collect()
    }
}

/// Groups `count` windows into batches of exactly `batch`. When `shuffle` is
/// set the order is a seeded permutation. The last batch is filled by
/// repeating windows from the start of the order.
pub fn batch_windows(count: usize, batch: usize, rng: &mut Rng, shuffle: bool) -> Vec<WindowBatch> {
    assert!(batch > 0, "batch size must be positive");
    let mut order: Vec<usize> = (0..count).collect();
    if shuffle {
        rng.shuffle(&mut order);
    }
    order
        .chunks(batch)
        .map(|chunk| {
            let mut indices = chunk.to_vec();
            let mut repeat = vec![false; chunk.len()];
            let mut k = 0;
            while indices.len() < batch {
                indices.push(order[k % order.len()]);
                repeat.push(true);
                k += 1;
            }
            WindowBatch { indices, repeat }
        })
        .collect()
}

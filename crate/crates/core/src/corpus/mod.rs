//! Corpus ingestion, cleaning, capping, stream construction, vocabulary and
//! windowing.

mod parse;
mod pipeline;
mod vocab;
mod windows;

pub use parse::{
    parse_corpus_file, parse_corpus_str, parse_manifest, parse_manifest_str, ManifestEntry, ParsedCorpus,
    SpeakerGroup,
};
pub(crate) use parse::read_utf8;
pub use pipeline::{
    build_stream, cap_language, cap_lines, dedup_lines, dedup_sources, dominant_script, filter_foreign_script,
    filter_majority_script, interleave, is_line_break, majority_script, split_lines, LabeledStream,
};
pub use vocab::{build_vocab, is_valid_tag, LabelSet, Vocabulary, PAD, UNK};
pub use windows::{batch_windows, make_windows, window_ids, Window, WindowBatch};

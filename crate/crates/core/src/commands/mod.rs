//! Library side of the command line tool: training, prediction, evaluation
//! and corpus building.

mod build;
mod data;
mod evaluate;
mod predict;
mod train;

pub use build::{cmd_build_corpus, BuildOptions, BuildSummary, LanguageSummary};
pub use data::{load_language, split_documents, Delimiter, LanguageLines};
pub use evaluate::{cmd_eval, evaluate_model, EvalOptions, EvalReport};
pub use predict::{cmd_predict, predict_document, PredictOptions};
pub use train::{cmd_train, evaluate_windows, train_lines, EvalPoint, Precision, TrainOutcome, TrainRunConfig, TrainSettings};

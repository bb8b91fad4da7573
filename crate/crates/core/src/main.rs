use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use charlid::commands::{
    cmd_build_corpus, cmd_eval, cmd_predict, cmd_train, BuildOptions, Delimiter, EvalOptions, Precision,
    PredictOptions, TrainRunConfig, TrainSettings,
};
use charlid::numerics::AdamConfig;
use charlid::records::Task;

#[derive(Parser)]
#[command(name = "charlid", version, about = "Character-level language identification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model from a corpus manifest.
    Train(TrainArgs),
    /// Label documents with a trained model.
    Predict(PredictArgs),
    /// Score a model against a labeled corpus.
    Eval(EvalArgs),
    /// Build train/dev/test corpus files from a manifest.
    BuildCorpus(BuildArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Lines of `<tag>\t<large|medium|small>\t<path>[,<path>...]`.
    #[arg(long)]
    manifest: PathBuf,
    /// Where to write the model file.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    max_steps: usize,
    #[arg(long, default_value_t = 1000)]
    eval_every: usize,
    /// Evaluations without improvement before stopping (0 = never).
    #[arg(long, default_value_t = 10)]
    patience: usize,
    #[arg(long, default_value_t = 0.05)]
    dev_fraction: f64,
    #[arg(long, default_value_t = 200)]
    window: usize,
    #[arg(long, default_value_t = 200)]
    embed: usize,
    #[arg(long, default_value_t = 500)]
    hidden: usize,
    #[arg(long, default_value_t = 1e-4)]
    lr: f64,
    #[arg(long, default_value_t = 0.9)]
    beta1: f64,
    #[arg(long, default_value_t = 0.999)]
    beta2: f64,
    #[arg(long, default_value_t = 1e-8)]
    epsilon: f64,
    #[arg(long, default_value_t = 64)]
    batch: usize,
    #[arg(long, default_value_t = 0.5)]
    keep_prob: f64,
    #[arg(long, default_value_t = 1)]
    min_count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// 32 or 64.
    #[arg(long, default_value = "32")]
    precision: Precision,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// Input file; standard input when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    /// mono, multi or spans.
    #[arg(long, default_value = "mono")]
    task: Task,
    #[arg(long, default_value_t = 0.03)]
    threshold: f64,
    /// Comma-separated tags to choose from.
    #[arg(long, value_delimiter = ',')]
    restrict: Option<Vec<String>>,
    #[arg(long, default_value_t = 1)]
    min_span: usize,
    /// blank, line or literal:<text>.
    #[arg(long, default_value = "blank")]
    delimiter: Delimiter,
    #[arg(long, default_value = "32")]
    precision: Precision,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    /// Labeled corpus (`tag\ttext` lines; comma-separated tags for multi).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "mono")]
    task: Task,
    #[arg(long, default_value_t = 0.03)]
    threshold: f64,
    #[arg(long, value_delimiter = ',')]
    restrict: Option<Vec<String>>,
    #[arg(long, default_value_t = 1)]
    min_span: usize,
    #[arg(long, default_value_t = 10)]
    top_k: usize,
    /// Also write the report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long, default_value = "32")]
    precision: Precision,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    dev_fraction: f64,
    #[arg(long, default_value_t = 0.05)]
    test_fraction: f64,
}

fn run(cli: Cli) -> charlid::Result<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Train(a) => {
            let settings = TrainSettings {
                embed_dim: a.embed,
                hidden_dim: a.hidden,
                window: a.window,
                keep_prob: a.keep_prob,
                batch: a.batch,
                adam: AdamConfig {
                    learning_rate: a.lr,
                    beta1: a.beta1,
                    beta2: a.beta2,
                    epsilon: a.epsilon,
                },
                max_steps: a.max_steps,
                eval_every: a.eval_every,
                patience: a.patience,
                seed: a.seed,
                min_count: a.min_count,
            };
            let run = TrainRunConfig {
                manifest: a.manifest,
                out: a.out,
                dev_fraction: a.dev_fraction,
                precision: a.precision,
                settings,
            };
            cmd_train(&run, &mut out)?;
        }
        Command::Predict(a) => {
            let options = PredictOptions {
                model: a.model,
                input: a.input,
                task: a.task,
                threshold: a.threshold,
                restrict: a.restrict,
                min_span: a.min_span,
                delimiter: a.delimiter,
                precision: a.precision,
            };
            cmd_predict(&options, &mut out)?;
        }
        Command::Eval(a) => {
            let options = EvalOptions {
                model: a.model,
                input: a.input,
                task: a.task,
                threshold: a.threshold,
                restrict: a.restrict,
                min_span: a.min_span,
                top_k: a.top_k,
                json: a.json,
                precision: a.precision,
            };
            cmd_eval(&options, &mut out)?;
        }
        Command::BuildCorpus(a) => {
            let options = BuildOptions {
                manifest: a.manifest,
                out_dir: a.out,
                seed: a.seed,
                dev_fraction: a.dev_fraction,
                test_fraction: a.test_fraction,
            };
            let summary = cmd_build_corpus(&options)?;
            let _ = out.write_all(summary.to_text().as_bytes());
        }
    }
    let _ = out.flush();
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

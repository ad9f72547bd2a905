//! `fpe` — batch pipeline for fingerprint-embedding sentiment prediction.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 plugin error.

mod args;
mod config;
mod ops;
mod plugin_serve;

use clap::Parser;

use args::{Cli, Command};
use config::resolve_config;
use fpe_core::ErrorCategory;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };

    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        let code = match e.category() {
            ErrorCategory::Plugin => 3,
            ErrorCategory::Data => 2,
        };
        std::process::exit(code);
    }
}

fn run(cli: Cli) -> fpe_core::Result<()> {
    match cli.command {
        Command::Ingest { common, strict, write } => ops::cmd_ingest(&common, strict, write),
        Command::Label { common, also } => {
            let config = resolve_config(&common, None)?;
            ops::cmd_label(&common, &config, &also)
        }
        Command::Split {
            common,
            test_frac,
            val_frac,
            min_comments,
        } => ops::cmd_split(&common, test_frac, val_frac, min_comments),
        Command::Synth {
            common,
            users,
            articles,
            topics,
            q,
            min_comments_per_user,
            max_comments_per_user,
        } => {
            let config = resolve_config(&common, None)?;
            ops::cmd_synth(
                &common,
                &config,
                users,
                articles,
                topics,
                q,
                min_comments_per_user,
                max_comments_per_user,
            )
        }
        Command::Train { common, manifest } => {
            let config = resolve_config(&common, manifest.as_deref())?;
            ops::cmd_train(&common, &config)
        }
        Command::Evaluate { common, checkpoint } => {
            let config = resolve_config(&common, None)?;
            ops::cmd_evaluate(&common, &config, &checkpoint)
        }
        Command::Sweep { common, lengths } => {
            let config = resolve_config(&common, None)?;
            ops::cmd_sweep(&common, &config, &lengths)
        }
        Command::Buckets {
            common,
            neg_frac,
            pos_frac,
            min_comments,
            checkpoint,
        } => {
            let config = resolve_config(&common, None)?;
            ops::cmd_buckets(&common, &config, neg_frac, pos_frac, min_comments, &checkpoint)
        }
        Command::Neighborhood {
            common,
            checkpoint,
            k,
        } => {
            let config = resolve_config(&common, None)?;
            ops::cmd_neighborhood(&common, &config, &checkpoint, k)
        }
        Command::Report { common } => ops::cmd_report(&common),
        Command::PluginServe { dimension, name } => plugin_serve::serve(dimension, &name),
    }
}

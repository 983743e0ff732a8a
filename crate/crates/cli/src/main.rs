//! `domainweb`: curate domain lists, crawl them, and analyze the results.

mod analyze;
mod config;
mod crawl;
mod curate;
mod error;
mod output;
mod serve;
mod social;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::Context;
use crate::error::CmdResult;

#[derive(Debug, Parser)]
#[command(
    name = "domainweb",
    version,
    about = "Map hyperlink and co-sharing networks among web domains"
)]
struct Cli {
    /// Directory for all outputs [default: out]
    #[arg(long, global = true, value_name = "DIR")]
    output_dir: Option<PathBuf>,

    /// Run seed; every random step derives its own seed from it [default: 42]
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// TOML run configuration; flags take precedence over it
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// More logging (-v info, -vv debug)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the labeled master list from source lists and rankings
    Curate(curate::Args),
    /// Crawl the domains of a master list into a snapshot run
    Crawl(crawl::Args),
    /// Build the domain graph of a crawl run and analyze it
    Analyze(analyze::Args),
    /// Co-sharing graph and domain classifier from share records
    Social(social::Args),
    /// Serve a fixture web corpus over HTTP
    ServeFixtures(serve::Args),
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .format_timestamp(None)
        .init();
}

fn run(cli: Cli) -> CmdResult {
    let ctx = Context::new(cli.seed, cli.output_dir, cli.config.as_deref())?;
    match cli.command {
        Command::Curate(args) => curate::run(&ctx, args),
        Command::Crawl(args) => crawl::run(&ctx, args),
        Command::Analyze(args) => analyze::run(&ctx, args),
        Command::Social(args) => social::run(&ctx, args),
        Command::ServeFixtures(args) => serve::run(&ctx, args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(cli.verbose);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            failure.exit_code()
        }
    }
}

use std::net::IpAddr;
use std::path::PathBuf;

use domainweb_crawler::fixture;
use tokio::net::TcpListener;

use crate::config::{require_dir, Context};
use crate::error::CmdResult;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Corpus root with one directory per host
    dir: PathBuf,

    #[arg(long, default_value_t = 8080)]
    port: u16,

    #[arg(long, default_value = "127.0.0.1")]
    bind: IpAddr,
}

pub fn run(_ctx: &Context, args: Args) -> CmdResult {
    require_dir(&args.dir, "fixture directory")?;
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    runtime.block_on(async {
        let listener = TcpListener::bind((args.bind, args.port)).await?;
        println!(
            "serving {} on http://{}",
            args.dir.display(),
            listener.local_addr()?
        );
        fixture::serve(args.dir, listener).await?;
        Ok(())
    })
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use leo_handover::cli::{self, Overrides};

/// Handover-trigger campaigns for a three-satellite LEO pass.
#[derive(Parser, Debug)]
#[command(name = "leo-ho", version)]
struct Args {
    /// Campaign file (TOML with [scenario], [sweep], [seeds], [output]).
    #[arg(long, required_unless_present = "default_paper")]
    config: Option<PathBuf>,
    /// Start from the built-in default scenario with every sweep grid.
    #[arg(long)]
    default_paper: bool,
    /// Restrict the sweep to one mechanism.
    #[arg(long, value_parser = ["measurement", "distance", "elevation", "timer"])]
    mechanism: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    drops: Option<u32>,
    #[arg(long)]
    users: Option<usize>,
    /// Results CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a path-loss trace CSV.
    #[arg(long)]
    trace_pathloss: Option<PathBuf>,
    /// Also write a per-event trace CSV.
    #[arg(long)]
    events: Option<PathBuf>,
    /// Extra `section.key=value` assignment; repeatable.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
    /// Print the effective campaign file and exit.
    #[arg(long)]
    print_config: bool,
    #[arg(short, long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let overrides = Overrides {
        mechanism: args.mechanism,
        seed: args.seed,
        drops: args.drops,
        users: args.users,
        out: args.out,
        trace_pathloss: args.trace_pathloss,
        events: args.events,
        set: args.set,
    };
    let spec = match cli::parse_config(args.config.as_deref(), &overrides) {
        Ok(spec) => spec,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(cli::exit_code(&e) as u8);
        }
    };
    if args.print_config {
        print!("{}", spec.to_canonical_string());
        return ExitCode::SUCCESS;
    }
    let mut log: Box<dyn std::io::Write> =
        if args.quiet { Box::new(std::io::sink()) } else { Box::new(std::io::stderr()) };
    match cli::run(&spec, &mut log) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}

//! `tilekit`: command-line access to the tiling library.
//!
//! Exit codes: 0 success or true verdict, 1 usage error or malformed input,
//! 2 input contract violation (including dimension mismatches), 3 search
//! exhausted or false verdict.

mod commands;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tilekit::Error;

#[derive(Parser, Debug)]
#[command(name = "tilekit", version, about = "Exact computation with translational tilings of Z^d")]
pub struct Cli {
    /// Machine-readable JSON on stdout (schema "tilekit/1").
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for randomly generated fixtures.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Largest lattice index searched.
    #[arg(long, global = true)]
    pub max_index: Option<u64>,
    /// Draw a patch of the resulting tiling.
    #[arg(long, global = true, value_enum)]
    pub render: Option<RenderKind>,
    /// Half-width of the rendered window.
    #[arg(long, global = true, default_value_t = 6)]
    pub window: i64,
    /// Worker threads for parallel searches (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum RenderKind {
    Ascii,
    Svg,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check that a set (or function) is a joint co-tile of the tiles.
    Verify {
        #[arg(long)]
        tiles: PathBuf,
        #[arg(long)]
        cotile: PathBuf,
        /// Check 1_F * f = level instead of a tiling by a set.
        #[arg(long)]
        level: Option<String>,
    },
    /// Search lattices of index up to --max-index for periodic joint co-tiles.
    Solve {
        #[arg(long)]
        tiles: PathBuf,
        /// Report every co-tile instead of the first.
        #[arg(long)]
        all: bool,
    },
    /// Decide whether a finite subset of Z tiles Z.
    SolveZ {
        #[arg(long)]
        tile: PathBuf,
    },
    /// Independence of a tuple; for d tiles in Z^d also all joint co-tiles.
    Independent {
        #[arg(long, required_unless_present = "random_dim")]
        tiles: Option<PathBuf>,
        /// Enumerate the (finitely many) joint co-tiles of an independent d-tuple.
        #[arg(long)]
        cotiles: bool,
        /// Generate a random independent tuple in this dimension (uses --seed).
        #[arg(long, conflicts_with = "tiles")]
        random_dim: Option<usize>,
        /// Tile size for --random-dim.
        #[arg(long, default_value_t = 2)]
        size: u64,
    },
    /// Check property (★) for a (d-1)-tuple.
    Star {
        #[arg(long)]
        tiles: PathBuf,
    },
    /// Periodic decomposition of a co-tile along the tiles.
    Decompose {
        #[arg(long)]
        tiles: PathBuf,
        #[arg(long)]
        cotile: PathBuf,
        /// Use only the first k tiles.
        #[arg(long)]
        depth: Option<usize>,
        /// Comma-separated levels, one per tile, for level tilings.
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<i64>>,
    },
    /// Check that a tiling equation survives dilation by r.
    Dilate {
        #[arg(long)]
        tile: PathBuf,
        #[arg(long)]
        cotile: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        r: i64,
        #[arg(long, default_value = "1")]
        level: String,
    },
    /// Construct brother tiles sharing a co-tile.
    Brothers {
        #[arg(long)]
        tile: PathBuf,
        #[arg(long)]
        cotile: PathBuf,
    },
    /// Tiles of Z x Z/pZ: classification and co-tile structure.
    Zp {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        tile: PathBuf,
        #[arg(long)]
        cotile: Option<PathBuf>,
    },
    /// Turn a co-tile with d-1 independent periods into a periodic one.
    Lift {
        #[arg(long)]
        tiles: PathBuf,
        /// A piece file: {"period", "region"}.
        #[arg(long)]
        cotile: PathBuf,
    },
    /// Turn a piecewise periodic joint co-tile into a periodic one.
    Piecewise {
        #[arg(long)]
        tiles: PathBuf,
        #[arg(long)]
        pieces: PathBuf,
    },
    /// Common periods of a family of pieces, or the stabilizer of a periodic set.
    Stabilizer {
        #[arg(long, required_unless_present = "cotile")]
        pieces: Option<PathBuf>,
        #[arg(long, conflicts_with = "pieces")]
        cotile: Option<PathBuf>,
    },
}

/// What a subcommand produced: the JSON result, the verdict, and a human summary.
pub struct Outcome {
    pub value: serde_json::Value,
    pub verdict: bool,
    pub summary: String,
}

/// Failures with their exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Library(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Library(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Library(Error::Malformed(_)) => 1,
            Failure::Library(Error::NoCycle) => 3,
            Failure::Library(_) => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self.code() {
            1 => "usage",
            3 => "exhausted",
            _ => "contract",
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Library(e) => write!(f, "{e}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("tilekit: cannot configure threads: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli) {
        Ok(out) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&out.value).expect("JSON values serialize"));
            } else {
                println!("{}", out.summary);
            }
            ExitCode::from(if out.verdict { 0 } else { 3 })
        }
        Err(failure) => {
            if cli.json {
                let v = tilekit::json::object([
                    ("error", serde_json::Value::String(failure.to_string())),
                    ("kind", serde_json::Value::String(failure.kind().into())),
                ]);
                println!("{}", serde_json::to_string_pretty(&v).expect("JSON values serialize"));
            }
            eprintln!("tilekit: {failure}");
            ExitCode::from(failure.code())
        }
    }
}

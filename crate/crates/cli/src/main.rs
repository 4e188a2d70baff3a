use std::process::ExitCode;

use clap::{Parser, Subcommand};
use glp_cli::*;
use glp_core::embed::Countermodel;
use glp_core::jtree::JFrame;
use glp_core::logic::{BandValuation, NodeValuation};

#[derive(Parser)]
#[command(name = "glp", version, about = "Ordinals, Icard topologies and GLP countermodels")]
struct Cli {
    /// Random seed for sampled checks and searches.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Sample and search budget.
    #[arg(long, global = true, default_value_t = 200)]
    budget: usize,
    /// Emit JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate an ordinal expression, e.g. `liter(2, w^(w^3))`.
    Ord { expr: String },
    /// Inspect a band set inside [1, theta].
    Band {
        set: String,
        #[arg(long, default_value = "w^3")]
        theta: String,
        #[arg(long, default_value_t = 1)]
        level: u64,
        /// Number of derived-set iterations.
        #[arg(long, default_value_t = 1)]
        iter: u64,
        /// Report membership and rank of this point.
        #[arg(long)]
        point: Option<String>,
    },
    /// Evaluate a formula on [1, theta] with Icard levels.
    Eval {
        formula: String,
        #[arg(long)]
        theta: String,
        #[arg(long, default_value = "1")]
        levels: String,
        /// JSON object {"0": "<band set>", ...}.
        #[arg(long)]
        val: Option<String>,
    },
    /// Evaluate a formula on a finite frame.
    Kripke {
        formula: String,
        /// JSON {"nodes": n, "rels": [[[x, y], ...], ...]}.
        #[arg(long)]
        frame: String,
        /// JSON object {"0": [nodes], ...}.
        #[arg(long)]
        val: Option<String>,
    },
    /// Build a countermodel for a J-tree.
    Embed {
        #[arg(long)]
        tree: String,
        /// Icard level per relation, e.g. `1,2`.
        #[arg(long, default_value = "1")]
        sigma: String,
        #[arg(long)]
        out: Option<String>,
    },
    /// Verify a countermodel against a formula.
    Verify {
        #[arg(long)]
        cm: String,
        formula: String,
    },
    /// Search for a J-tree model.
    Search {
        formula: String,
        #[arg(long, default_value_t = 5)]
        max_nodes: usize,
        /// Write the tree here.
        #[arg(long)]
        out: Option<String>,
    },
}

fn run(cli: Cli) -> Result<Output, CliError> {
    let cfg = Config {
        seed: cli.seed,
        budget: cli.budget,
        json: cli.json,
    };
    match cli.cmd {
        Cmd::Ord { expr } => cmd_ord(&expr, &cfg),
        Cmd::Band {
            set,
            theta,
            level,
            iter,
            point,
        } => cmd_band(&set, &theta, level, iter, point.as_deref(), &cfg),
        Cmd::Eval {
            formula,
            theta,
            levels,
            val,
        } => {
            let v = match val {
                Some(p) => read_band_valuation(&p)?,
                None => BandValuation::new(),
            };
            cmd_eval(&formula, &theta, &parse_levels(&levels)?, &v, &cfg)
        }
        Cmd::Kripke { formula, frame, val } => {
            let f: JFrame = read_json(&frame)?;
            let v = match val {
                Some(p) => read_node_valuation(&p)?,
                None => NodeValuation::new(),
            };
            cmd_kripke(&formula, &f, &v, &cfg)
        }
        Cmd::Embed { tree, sigma, out } => {
            let f: JFrame = read_json(&tree)?;
            let cm = cmd_embed(&f, &parse_levels(&sigma)?)?;
            if let Some(p) = &out {
                write_json(p, &cm)?;
            }
            Ok(Output {
                text: if cfg.json { serde_json::to_string_pretty(&cm).expect("serializable") } else { describe(&cm) },
                code: EXIT_OK,
            })
        }
        Cmd::Verify { cm, formula } => {
            let cm: Countermodel = read_json(&cm)?;
            cmd_verify(&cm, &formula, &cfg)
        }
        Cmd::Search { formula, max_nodes, out } => {
            let (o, found) = cmd_search(&formula, max_nodes, &cfg)?;
            if let (Some(p), Some(r)) = (&out, &found) {
                write_json(p, &r.frame)?;
            }
            Ok(o)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(o) => {
            println!("{}", o.text);
            ExitCode::from(o.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAIL as u8)
        }
    }
}

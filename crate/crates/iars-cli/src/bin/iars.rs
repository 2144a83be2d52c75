use std::io::Write;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};
use iars_cli::input::{load, load_graph, load_hcg, Source};
use iars_cli::{commands, server, CliError, CliResult};
use iars_core::{Budget, DEFAULT_NODE_LIMIT};

/// Action-relation and release-sequence tools for action graphs.
#[derive(Parser)]
#[command(name = "iars", version)]
struct Cli {
    /// Cap on the number of actions accepted by exponential searches.
    #[arg(long, global = true, default_value_t = Budget::default().max_actions)]
    max_actions: usize,
    /// Cap on search nodes visited by exponential searches.
    #[arg(long, global = true, default_value_t = Budget::default().max_nodes)]
    max_nodes: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a graph and print it in canonical form.
    Parse { graph: String },
    /// List maximal strategies with their goal sets.
    Strategies { graph: String },
    /// Print the action relation as CSV.
    Relation { graph: String },
    /// Minimal nonfaces of a graph, or the face report of a relation.
    Nonfaces { input: String },
    /// Whether every state is reachable as a goal.
    Controllable { graph: String },
    #[command(subcommand)]
    Hcg(HcgCmd),
    /// Acyclic dissection of a strategy against an hcg, as JSON.
    Dissect {
        graph: String,
        #[arg(long)]
        hcg: String,
        #[arg(long)]
        tau: String,
    },
    #[command(subcommand)]
    Iars(IarsCmd),
    /// Interactive reveal session on stdin.
    Reveal { input: String },
    /// Run the JSON HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = server::DEFAULT_TTL.as_secs())]
        ttl_secs: u64,
    },
    #[command(subcommand)]
    Fixtures(FixturesCmd),
}

#[derive(Subcommand)]
enum HcgCmd {
    /// Build an hcg for a fully controllable nondeterministic graph.
    Extract { graph: String },
    /// Check an hcg against a graph.
    Validate { graph: String, hcg: String },
}

#[derive(Subcommand)]
enum IarsCmd {
    /// Sequence from the nondeterministic construction.
    Nondet {
        graph: String,
        #[arg(long)]
        hcg: Option<String>,
        #[arg(long)]
        sigma: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Sequence from the stochastic construction.
    Stoch {
        graph: String,
        #[arg(long)]
        sigma: Option<String>,
        #[arg(long)]
        trace: bool,
    },
    /// Check a sequence against the relation.
    Verify {
        input: String,
        #[arg(long)]
        seq: String,
    },
    /// Exhaustive search for a longest sequence.
    Longest {
        input: String,
        #[arg(long, alias = "sigma")]
        within: Option<String>,
        #[arg(long, default_value_t = DEFAULT_NODE_LIMIT)]
        limit: usize,
    },
}

#[derive(Subcommand)]
enum FixturesCmd {
    List,
    /// Regenerate relations and run constructors over the bundled graphs.
    Run {
        #[arg(long)]
        only: Option<String>,
    },
}

fn run(cli: Cli) -> CliResult<String> {
    let budget = Budget { max_actions: cli.max_actions, max_nodes: cli.max_nodes };
    match cli.cmd {
        Cmd::Parse { graph } => Ok(commands::parse(&load_graph(&graph)?)),
        Cmd::Strategies { graph } => commands::strategies(&load_graph(&graph)?, budget),
        Cmd::Relation { graph } => match load(&graph)? {
            Source::Graph(g) => commands::relation(&g, budget),
            Source::Relation(r) => Ok(r.to_csv()),
        },
        Cmd::Nonfaces { input } => commands::nonfaces(&load(&input)?, budget),
        Cmd::Controllable { graph } => commands::controllable(&load_graph(&graph)?, budget),
        Cmd::Hcg(HcgCmd::Extract { graph }) => commands::hcg_extract(&load_graph(&graph)?, budget),
        Cmd::Hcg(HcgCmd::Validate { graph, hcg }) => commands::hcg_validate(&load_graph(&graph)?, &load_hcg(&hcg)?),
        Cmd::Dissect { graph, hcg, tau } => commands::dissect(&load_graph(&graph)?, &load_hcg(&hcg)?, &tau),
        Cmd::Iars(IarsCmd::Nondet { graph, hcg, sigma, json }) => {
            let h = hcg.as_deref().map(load_hcg).transpose()?;
            commands::iars_nondet(&load_graph(&graph)?, h.as_ref(), sigma.as_deref(), json, budget)
        }
        Cmd::Iars(IarsCmd::Stoch { graph, sigma, trace }) => {
            commands::iars_stoch(&load_graph(&graph)?, sigma.as_deref(), trace, budget)
        }
        Cmd::Iars(IarsCmd::Verify { input, seq }) => commands::iars_verify(&load(&input)?, &seq, budget),
        Cmd::Iars(IarsCmd::Longest { input, within, limit }) => {
            commands::iars_longest(&load(&input)?, within.as_deref(), limit, budget)
        }
        Cmd::Reveal { input } => {
            let rel = match load(&input)? {
                Source::Graph(g) => iars_core::action_relation(&g, budget)?,
                Source::Relation(r) => r,
            };
            commands::reveal_repl(rel, std::io::stdin().lock(), std::io::stdout().lock())?;
            Ok(String::new())
        }
        Cmd::Serve { port, host, ttl_secs } => {
            let state = server::AppState::new(Duration::from_secs(ttl_secs), budget);
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Io { path: "<runtime>".into(), source: e })?;
            rt.block_on(server::serve(&host, port, state))
                .map_err(|e| CliError::Io { path: format!("{host}:{port}"), source: e })?;
            Ok(String::new())
        }
        Cmd::Fixtures(FixturesCmd::List) => Ok(commands::fixtures_list()),
        Cmd::Fixtures(FixturesCmd::Run { only }) => commands::fixtures_run(only.as_deref(), budget),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            let _ = std::io::stdout().write_all(out.as_bytes());
            ExitCode::SUCCESS
        }
        Err(CliError::Rejected(msg)) => {
            println!("{msg}");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::{ArgMatches, CommandFactory, FromArgMatches};

use args::{Cli, Command, OutputArgs};
use commands::{CliError, Outcome};
use output::{OutputSpec, Provenance};

/// `--flag=value` for every argument that has a value, explicit or default.
fn flag_record(cmd: &clap::Command, m: &ArgMatches) -> Vec<(String, String)> {
    let mut flags: Vec<(String, String)> = cmd
        .get_arguments()
        .filter_map(|arg| {
            let id = arg.get_id().as_str();
            let long = arg.get_long()?;
            if matches!(long, "help" | "version") || !m.contains_id(id) {
                return None;
            }
            let raw = m.get_raw(id)?;
            let vals: Vec<String> = raw.map(|v| v.to_string_lossy().into_owned()).collect();
            Some((long.to_string(), vals.join(",")))
        })
        .collect();
    flags.sort();
    flags
}

fn output_spec(o: &OutputArgs) -> OutputSpec {
    OutputSpec {
        format: o.format,
        path: o.output.clone(),
        precision: o.precision as usize,
        plot_dir: o.plot_dir.clone(),
    }
}

fn run(command: &Command) -> Result<(Outcome, &OutputArgs), CliError> {
    Ok(match command {
        Command::Moments(a) => (commands::moments(a)?, &a.out),
        Command::Edgeworth(a) => (commands::edgeworth(a)?, &a.out),
        Command::CornishFisher(a) => (commands::cornish_fisher(a)?, &a.out),
        Command::Lattice(a) => (commands::lattice(a)?, &a.out),
        Command::SampleSize(a) => (commands::sample_size(a)?, &a.out),
        Command::Distances(a) => (commands::distances(a)?, &a.out),
        Command::DemoivreTable(a) => (commands::demoivre_table(a)?, &a.out),
        Command::Roulette(a) => (commands::roulette(a)?, &a.out),
        Command::Simulate(a) => (commands::simulate(a)?, &a.out),
        Command::Income(a) => (commands::income(a)?, &a.out),
    })
}

fn main() -> ExitCode {
    let mut cmd = Cli::command();
    let matches = cmd.clone().get_matches();
    let cli = Cli::from_arg_matches(&matches).unwrap_or_else(|e| e.exit());
    let name = cli.command.name();
    let sub = cmd.find_subcommand_mut(name).expect("subcommand is registered").clone();
    let sub_matches = matches.subcommand_matches(name).expect("subcommand was parsed");

    match run(&cli.command) {
        Ok((outcome, out)) => {
            let prov = Provenance {
                subcommand: name.to_string(),
                flags: flag_record(&sub, sub_matches),
                seed: outcome.seed,
            };
            match output::emit(&output_spec(out), &prov, &outcome.tables) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: cannot write output: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Err(CliError::Usage(msg)) => {
            let mut sub = sub.bin_name(format!("clt-scope {name}"));
            sub.error(clap::error::ErrorKind::ArgumentConflict, msg).exit()
        }
        Err(CliError::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

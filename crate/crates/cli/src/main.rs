use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gridlambda_core::cases::{load_corpus, run_case, target_values};
use gridlambda_core::engine::parse_workbook;
use gridlambda_core::eval::DEFAULT_MAX_RECURSION;
use gridlambda_core::{stdlib, Array, Workbook};

mod render;
mod repl;

#[derive(Parser, Debug)]
#[command(name = "gridlambda", version, about = "Batch spreadsheet formula engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Print evaluation trace lines (`EVAL scope:name #n`) to stderr.
    #[arg(long, global = true)]
    trace: bool,
    #[arg(
        long,
        global = true,
        env = "GRIDLAMBDA_MAX_RECURSION",
        default_value_t = DEFAULT_MAX_RECURSION as u64,
        value_parser = clap::value_parser!(u64).range(1..)
    )]
    max_recursion: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Tsv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Recalculate a workbook and print regions.
    Eval {
        workbook: PathBuf,
        /// Address, range, spill reference or name; repeatable. Defaults to
        /// every sheet's used range.
        #[arg(long = "print", value_name = "REF")]
        print: Vec<String>,
    },
    /// Run every case of a golden corpus directory.
    Corpus {
        #[arg(default_value = "corpus")]
        dir: PathBuf,
    },
    /// Read formulas and workbook statements from stdin.
    Repl {
        /// Workbook to load into the session first.
        workbook: Option<PathBuf>,
    },
    /// List built-in functions with their arity.
    Functions,
}

pub struct Settings {
    pub trace: bool,
    pub max_recursion: usize,
    pub format: Format,
}

impl Settings {
    pub fn apply(&self, wb: &mut Workbook) {
        wb.config.trace = self.trace;
        wb.config.max_recursion = self.max_recursion;
    }
}

pub fn load_workbook(path: &PathBuf) -> Result<Workbook, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_workbook(&text).map_err(|e| format!("{}:{}: {}", path.display(), e.line, e.message))
}

fn print_trace(wb: &mut Workbook) {
    for line in wb.trace_mut().take_lines() {
        eprintln!("{line}");
    }
}

fn cmd_eval(settings: &Settings, path: &PathBuf, print: &[String]) -> ExitCode {
    let mut wb = match load_workbook(path) {
        Ok(wb) => wb,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    settings.apply(&mut wb);
    wb.recalculate();
    print_trace(&mut wb);

    let mut regions: Vec<(String, Array)> = Vec::new();
    if print.is_empty() {
        let sheets: Vec<String> = wb.sheet_names().iter().map(|s| s.to_string()).collect();
        for (i, name) in sheets.iter().enumerate() {
            let id = gridlambda_core::engine::SheetId(i);
            if let Some(r) = wb.used_range(id) {
                let label = format!("{}!{}", render::quote_sheet(name), r.a1());
                regions.push((label, wb.range_values(&r)));
            }
        }
    } else {
        for target in print {
            regions.push((target.clone(), target_values(&mut wb, target)));
        }
        print_trace(&mut wb);
    }

    let mut any_error = false;
    for (i, (label, values)) in regions.iter().enumerate() {
        any_error |= values.iter().any(|s| s.is_error());
        match settings.format {
            Format::Table => {
                println!("{label}");
                print!("{}", render::table(values));
            }
            Format::Tsv => {
                if i > 0 {
                    println!();
                }
                print!("{}", gridlambda_core::cases::format_tsv(values));
            }
        }
    }
    if any_error {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn cmd_corpus(dir: &Path) -> ExitCode {
    let cases = match load_corpus(dir) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let mut failed = 0;
    for case in &cases {
        let report = run_case(case);
        if report.passed() {
            println!("PASS {} ({} cells)", report.name, report.cells_checked);
        } else {
            failed += 1;
            println!("FAIL {} ({} mismatches)", report.name, report.mismatches.len());
            for m in report.mismatches.iter().take(20) {
                println!(
                    "  {} [{},{}]: expected {}, got {}",
                    m.target, m.row, m.col, m.expected, m.actual
                );
            }
        }
    }
    println!("{} passed, {failed} failed", cases.len() - failed);
    if failed > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn cmd_functions() -> ExitCode {
    for b in stdlib::registry() {
        println!("{}\t{}", b.name, b.arity_text());
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let settings = Settings {
        trace: cli.trace,
        max_recursion: cli.max_recursion as usize,
        format: cli.format,
    };
    match &cli.command {
        Command::Eval { workbook, print } => cmd_eval(&settings, workbook, print),
        Command::Corpus { dir } => cmd_corpus(dir),
        Command::Repl { workbook } => repl::run(&settings, workbook.as_ref()),
        Command::Functions => cmd_functions(),
    }
}

use std::io::{self, BufRead, IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use gridlambda_core::Workbook;

use crate::{load_workbook, render, Settings};

/// Handles one input line and returns what to print, or `None` to quit.
pub fn step(wb: &mut Workbook, line: &str) -> Option<String> {
    let line = line.trim();
    if line.is_empty() {
        return Some(String::new());
    }
    match line {
        ":quit" | ":q" => return None,
        ":trace on" => {
            wb.config.trace = true;
            return Some("trace on".into());
        }
        ":trace off" => {
            wb.config.trace = false;
            wb.trace_mut().take_lines();
            return Some("trace off".into());
        }
        ":help" => {
            return Some(
                "=formula | name X := =formula | A1 := input | :trace on|off | :quit".into(),
            )
        }
        _ => {}
    }
    if line.starts_with('=') {
        wb.recalculate();
        wb.trace_mut().take_lines();
        let mut out = match wb.evaluate_formula(line) {
            Ok(v) => render::inline(&v),
            Err(e) => format!("parse error {e}"),
        };
        for t in wb.trace_mut().take_lines() {
            out.push('\n');
            out.push_str(&t);
        }
        return Some(out);
    }
    let Some((lhs, rhs)) = line.split_once(":=") else {
        return Some(format!("error: expected `=formula` or `target := input`, got {line:?}"));
    };
    let (lhs, rhs) = (lhs.trim(), rhs.trim());
    if let Some(name) = lhs.strip_prefix("name ") {
        let formula = if rhs.starts_with('=') { rhs.to_string() } else { format!("={rhs}") };
        return Some(match wb.define_name(name.trim(), &formula) {
            Ok(()) => format!("defined {}", name.trim()),
            Err(e) => format!("error: {e}"),
        });
    }
    let result = wb.address(lhs).and_then(|a| wb.set_input(a, rhs).map(|_| a));
    Some(match result {
        Ok(addr) => {
            wb.recalculate();
            wb.trace_mut().take_lines();
            format!("{} = {}", lhs, wb.value(addr))
        }
        Err(e) => format!("error: {e}"),
    })
}

pub fn run(settings: &Settings, workbook: Option<&PathBuf>) -> ExitCode {
    let mut wb = match workbook.map(load_workbook).transpose() {
        Ok(wb) => wb.unwrap_or_default(),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    settings.apply(&mut wb);
    let interactive = io::stdin().is_terminal();
    let mut stdout = io::stdout();
    let prompt = |out: &mut io::Stdout| {
        if interactive {
            let _ = write!(out, "> ");
            let _ = out.flush();
        }
    };
    prompt(&mut stdout);
    for line in io::stdin().lock().lines() {
        let Ok(line) = line else { break };
        match step(&mut wb, &line) {
            None => break,
            Some(out) if out.is_empty() => {}
            Some(out) => {
                let _ = writeln!(stdout, "{out}");
            }
        }
        prompt(&mut stdout);
    }
    ExitCode::SUCCESS
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn session() {
        let mut wb = Workbook::new();
        assert_eq!(step(&mut wb, "=SEQUENCE(3)").unwrap(), "{1;2;3}");
        assert_eq!(step(&mut wb, "name Addλ := =LAMBDA(x,y,x+y)").unwrap(), "defined Addλ");
        assert_eq!(step(&mut wb, "=REDUCE(0,{1;2;3},Addλ)").unwrap(), "6");
        assert_eq!(step(&mut wb, "A1 := =2*3").unwrap(), "A1 = 6");
        assert!(step(&mut wb, "=1+").unwrap().starts_with("parse error"));
        assert!(step(&mut wb, ":quit").is_none());
    }

    #[test]
    fn trace_toggle() {
        let mut wb = Workbook::new();
        step(&mut wb, ":trace on");
        let out = step(&mut wb, "=LET(x, 1, x + x)").unwrap();
        assert_eq!(out, "2\nEVAL repl:x #1");
    }
}

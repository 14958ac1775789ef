use std::fs;
use std::io::Write;
use std::process::ExitCode;

use forchheimer_cli::{parse_config, OutputFormat};
use forchheimer_core::{run_study, StepDiagnostics};

fn main() -> ExitCode {
    let cfg = match parse_config(std::env::args_os()) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("{msg}");
            return ExitCode::from(2);
        }
    };

    let report = match run_study(&cfg.study) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };

    if let Some(dir) = &cfg.diagnostics {
        if let Err(e) = fs::create_dir_all(dir) {
            eprintln!("error: cannot create {}: {e}", dir.display());
            return ExitCode::FAILURE;
        }
        for row in &report.rows {
            let mut text = String::from(StepDiagnostics::CSV_HEADER);
            text.push('\n');
            for d in &row.diagnostics {
                text.push_str(&d.csv_row());
                text.push('\n');
            }
            let path = dir.join(format!("diagnostics_N{}.csv", row.n));
            if let Err(e) = fs::write(&path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::FAILURE;
            }
        }
    }

    let text = match cfg.format {
        OutputFormat::Csv => report.to_csv(),
        OutputFormat::Markdown => report.to_markdown(),
    };
    let written = match &cfg.out {
        Some(path) => fs::write(path, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}

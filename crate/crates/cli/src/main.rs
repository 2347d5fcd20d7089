use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;

mod config;
mod output;
mod run;

use config::RunConfig;

fn emit(config: &RunConfig, table: &output::Table) -> io::Result<()> {
    match &config.output {
        Some(path) => {
            let mut out = BufWriter::new(File::create(path)?);
            output::write_csv(&mut out, config, table)?;
            out.flush()
        }
        None => {
            let mut out = io::stdout().lock();
            output::write_csv(&mut out, config, table)?;
            out.flush()
        }
    }
}

fn main() -> ExitCode {
    let config = match RunConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if config.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build_global()
        {
            eprintln!("jacobi: {e}");
            return ExitCode::from(2);
        }
    }
    let table = match run::run(&config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("jacobi: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Err(e) = emit(&config, &table) {
        eprintln!("jacobi: cannot write output: {e}");
        return ExitCode::from(2);
    }
    if let Some(msg) = &table.failure {
        eprintln!("jacobi: numerical failure after {} rows: {msg}", table.rows.len());
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}

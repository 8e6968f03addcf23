//! Iteration counts under refinement, written as a CSV report with a
//! residual-history companion file.

use auxamg::cli::{emit_report, format_table, residual_path, run, ReportFormat, RunConfig};
use clap::Parser;

fn main() -> auxamg::Result<()> {
    let cfg = RunConfig::parse_from(["auxamg", "--gen", "poisson2d", "--n", "64,128,256,512,1024"]);
    let reports = run(&cfg)?;
    print!("{}", format_table(&reports));

    let path = std::env::temp_dir().join("auxamg-h-independence.csv");
    emit_report(&reports, ReportFormat::Csv, &path)?;
    println!("wrote {} and {}", path.display(), residual_path(&path).display());
    Ok(())
}

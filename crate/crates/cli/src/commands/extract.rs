use std::fmt::Write as _;
use std::path::PathBuf;

use harsanyi::analysis::extract_salient;
use harsanyi::io::{write_records, Format};
use harsanyi::transform::mobius_inverse;

use super::{concept_rows, effective_counts, render_concepts, write_table};
use crate::args::ExtractArgs;
use crate::error::CliResult;
use crate::rundir::RunDir;
use crate::source::load_values;

pub fn run(args: &ExtractArgs) -> CliResult<PathBuf> {
    let (values, players) = load_values(&args.source)?;
    let counts = effective_counts(&args.m, values.len())?;
    let interactions = mobius_inverse(&values);
    let format = Format::from(args.output.format);

    let mut run = RunDir::create(&args.output.out, args.output.force)?;
    write_table(&mut run, "values", &players, values.as_slice(), format)?;
    write_table(
        &mut run,
        "interactions",
        &players,
        interactions.as_slice(),
        format,
    )?;

    let mut report = String::new();
    let _ = writeln!(
        report,
        "players ({}): {}",
        players.len(),
        players.labels().join(" ")
    );
    let _ = writeln!(
        report,
        "v(x) = {:.4}",
        values.get(harsanyi::SubsetMask::full(values.n()))
    );
    for &m in &counts {
        let salient = extract_salient(&interactions, m)?;
        let rows = concept_rows(&salient, &players, |_| true);
        write_records(
            &run.artifact(format!("salient_M{m}.{}", format.extension())),
            format,
            &rows,
        )?;

        let shown = concept_rows(&salient, &players, |e| e.abs() > args.zero_tol);
        let _ = writeln!(report, "\nM = {m}: {} concepts", shown.len());
        render_concepts(&mut report, &shown, &players);
    }
    std::fs::write(run.artifact("report.txt"), report)
        .map_err(|e| crate::error::CliError::Io(format!("write report: {e}")))?;
    run.finish("extract", args.source.seed, args)
}

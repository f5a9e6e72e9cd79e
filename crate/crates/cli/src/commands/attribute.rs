use std::fmt::Write as _;
use std::path::PathBuf;

use harsanyi::analysis::{attribute_error, TargetInfo};
use harsanyi::io::{write_json, write_records, Format};
use harsanyi::transform::mobius_inverse;
use harsanyi::SubsetMask;

use super::{effective_counts, render_concepts, ConceptRow};
use crate::args::AttributeArgs;
use crate::error::{CliError, CliResult};
use crate::rundir::RunDir;
use crate::source::load_values;

pub fn run(args: &AttributeArgs) -> CliResult<PathBuf> {
    let (values, players) = load_values(&args.source)?;
    let counts = effective_counts(&args.m, values.len())?;
    let interactions = mobius_inverse(&values);
    let full_value = values.get(SubsetMask::full(values.n()));
    let target = TargetInfo {
        word: args.target.clone().unwrap_or_default(),
        value: Some(full_value),
    };
    let format = Format::from(args.output.format);

    let mut run = RunDir::create(&args.output.out, args.output.force)?;
    let mut text = String::new();
    match &args.target {
        Some(word) => {
            let _ = writeln!(text, "target: {word:?}  v(x) = {full_value:.4}");
        }
        None => {
            let _ = writeln!(text, "v(x) = {full_value:.4}");
        }
    }
    for &m in &counts {
        let report = attribute_error(&interactions, m, &players)?.with_target(target.clone());
        let rows: Vec<ConceptRow> = report
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| ConceptRow {
                rank: i + 1,
                mask: e.mask,
                players: e.labels.join(" "),
                effect: e.effect,
            })
            .collect();
        write_records(
            &run.artifact(format!("attribution_M{m}.{}", format.extension())),
            format,
            &rows,
        )?;
        write_json(
            &run.artifact(format!("attribution_M{m}.report.json")),
            &report,
        )?;
        let _ = writeln!(
            text,
            "\nM = {m}: {} concepts with positive effect",
            rows.len()
        );
        render_concepts(&mut text, &rows, &players);
    }
    std::fs::write(run.artifact("attribution.txt"), text)
        .map_err(|e| CliError::Io(format!("write report: {e}")))?;
    run.finish("attribute", args.source.seed, args)
}

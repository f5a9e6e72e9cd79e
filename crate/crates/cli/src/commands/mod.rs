mod attribute;
mod curve;
mod extract;
mod serve;
mod transfer;
mod verify;

pub use attribute::run as attribute;
pub use curve::run as curve;
pub use extract::run as extract;
pub use serve::run as serve;
pub use transfer::run as transfer;
pub use verify::run as verify;

use std::fmt::Write as _;

use serde::Serialize;

use harsanyi::io::{save_table, Format};
use harsanyi::{PlayerSet, SalientSet, SubsetMask};

use crate::error::{CliError, CliResult};
use crate::rundir::RunDir;

/// Clamps each requested salient count to the lattice size, dropping repeats.
pub(crate) fn effective_counts(requested: &[usize], lattice: usize) -> CliResult<Vec<usize>> {
    if requested.is_empty() {
        return Err(CliError::config("--M needs at least one value"));
    }
    let mut out = Vec::new();
    for &m in requested {
        if m == 0 {
            return Err(CliError::config("--M values must be at least 1"));
        }
        let m = m.min(lattice);
        if !out.contains(&m) {
            out.push(m);
        }
    }
    Ok(out)
}

pub(crate) fn write_table(
    run: &mut RunDir,
    stem: &str,
    players: &PlayerSet,
    data: &[f64],
    format: Format,
) -> CliResult<()> {
    let path = run.artifact(format!("{stem}.{}", format.extension()));
    if format == Format::Csv {
        run.artifact(format!("{stem}.header.json"));
    }
    save_table(&path, players.labels(), data)?;
    Ok(())
}

/// One concept per row: rank, mask integer, space-joined labels, effect.
#[derive(Debug, Serialize)]
pub(crate) struct ConceptRow {
    pub rank: usize,
    pub mask: SubsetMask,
    pub players: String,
    pub effect: f64,
}

pub(crate) fn concept_rows(
    salient: &SalientSet,
    players: &PlayerSet,
    keep: impl Fn(f64) -> bool,
) -> Vec<ConceptRow> {
    salient
        .entries()
        .iter()
        .filter(|e| keep(e.effect))
        .enumerate()
        .map(|(i, e)| ConceptRow {
            rank: i + 1,
            mask: e.mask,
            players: players.labels_of(e.mask).join(" "),
            effect: e.effect,
        })
        .collect()
}

/// Two-column concept/effect table.
pub(crate) fn render_concepts(out: &mut String, rows: &[ConceptRow], players: &PlayerSet) {
    let concepts: Vec<String> = rows.iter().map(|r| players.render(r.mask)).collect();
    let width = concepts
        .iter()
        .map(|c| c.chars().count())
        .max()
        .unwrap_or(0)
        .max(7);
    let _ = writeln!(
        out,
        "{:>4}  {:<width$}  {:>10}",
        "rank", "concept", "effect"
    );
    for (row, concept) in rows.iter().zip(&concepts) {
        let _ = writeln!(
            out,
            "{:>4}  {:<width$}  {:>10.4}",
            row.rank, concept, row.effect
        );
    }
}

use std::path::PathBuf;

use serde::Serialize;

use harsanyi::analysis::{matching_curve, strength_curve, Sample, EXHAUSTIVE_MAX_N};
use harsanyi::io::{write_records, Format};
use harsanyi::transform::mobius_inverse;
use harsanyi::SubsetMask;

use super::effective_counts;
use crate::args::CurveArgs;
use crate::error::{CliError, CliResult};
use crate::rundir::RunDir;
use crate::source::load_values;

/// Sample size used when `--sample` is omitted and `n` is too large to enumerate.
const DEFAULT_SAMPLE: usize = 1 << 16;

#[derive(Serialize)]
struct StrengthRow {
    rank: usize,
    mask: SubsetMask,
    players: String,
    abs_effect: f64,
}

#[derive(Serialize)]
struct MatchingRow {
    rank: usize,
    mask: SubsetMask,
    v_real: f64,
    v_approx: f64,
    error: f64,
    windowed_rmse: f64,
}

#[derive(Serialize)]
struct SummaryRow {
    m: usize,
    records: usize,
    mean_rmse: f64,
    max_abs_error: f64,
}

pub(crate) fn parse_sample(raw: Option<&str>, n: usize) -> CliResult<Sample> {
    match raw {
        None if n <= EXHAUSTIVE_MAX_N => Ok(Sample::All),
        None => Ok(Sample::Count(DEFAULT_SAMPLE)),
        Some("all") => Ok(Sample::All),
        Some(k) => k
            .parse()
            .map(Sample::Count)
            .map_err(|_| CliError::config(format!("--sample expects `all` or a count, got {k:?}"))),
    }
}

pub fn run(args: &CurveArgs) -> CliResult<PathBuf> {
    let (values, players) = load_values(&args.source)?;
    let sample = parse_sample(args.sample.as_deref(), values.n())?;
    let counts = effective_counts(&args.m, values.len())?;
    let interactions = mobius_inverse(&values);
    let format = Format::from(args.output.format);
    let ext = format.extension();

    // compute everything before touching the output directory
    let strength: Vec<StrengthRow> = strength_curve(&interactions)
        .into_iter()
        .enumerate()
        .map(|(i, (mask, abs_effect))| StrengthRow {
            rank: i + 1,
            mask,
            players: players.labels_of(mask).join(" "),
            abs_effect,
        })
        .collect();
    let curves = counts
        .iter()
        .map(|&m| {
            matching_curve(
                &values,
                &interactions,
                m,
                args.window_t,
                sample,
                args.source.seed,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut run = RunDir::create(&args.output.out, args.output.force)?;
    write_records(&run.artifact(format!("strength.{ext}")), format, &strength)?;
    let mut summary = Vec::new();
    for curve in &curves {
        let rows: Vec<MatchingRow> = curve
            .records
            .iter()
            .enumerate()
            .map(|(i, r)| MatchingRow {
                rank: i + 1,
                mask: r.mask,
                v_real: r.v_real,
                v_approx: r.v_approx,
                error: r.error,
                windowed_rmse: r.windowed_rmse,
            })
            .collect();
        write_records(
            &run.artifact(format!("matching_M{}.{ext}", curve.salient_count)),
            format,
            &rows,
        )?;
        summary.push(SummaryRow {
            m: curve.salient_count,
            records: rows.len(),
            mean_rmse: curve.mean_rmse(),
            max_abs_error: curve.max_abs_error(),
        });
    }
    write_records(
        &run.artifact(format!("matching_summary.{ext}")),
        format,
        &summary,
    )?;
    run.finish("curve", args.source.seed, args)
}

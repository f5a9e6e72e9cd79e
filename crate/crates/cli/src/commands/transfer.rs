use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use harsanyi::analysis::{
    build_concept_vector, extract_salient, jaccard_similarity, SharedPlayers,
};
use harsanyi::io::{read_json, write_records, Format};
use harsanyi::transform::mobius_inverse;
use harsanyi::Error;

use crate::args::{SourceArgs, TransferArgs};
use crate::error::{CliError, CliResult};
use crate::rundir::RunDir;
use crate::source::load_values;

#[derive(Debug, Deserialize)]
struct Pair {
    a: usize,
    b: usize,
}

#[derive(Debug, Serialize)]
struct SimilarityRow {
    m: usize,
    m_a: usize,
    m_b: usize,
    shared: usize,
    /// Empty when both concept vectors are zero.
    similarity: Option<f64>,
}

pub fn run(args: &TransferArgs) -> CliResult<PathBuf> {
    let pairs: Vec<Pair> = read_json(&args.mapping)
        .map_err(|e| CliError::Io(format!("mapping {}: {e}", args.mapping.display())))?;
    if pairs.is_empty() {
        return Err(CliError::config(
            "shared-word mapping is empty; nothing to compare",
        ));
    }
    if args.m.is_empty() || args.m.contains(&0) {
        return Err(CliError::config("--M values must be at least 1"));
    }

    let (values_a, _) = load_values(&args.source)?;
    let source_b = SourceArgs {
        oracle: args.oracle_b.clone(),
        n: args.n_b.or(args.source.n),
        seed: args.seed_b.unwrap_or(args.source.seed),
        ..args.source.clone()
    };
    let (values_b, _) = load_values(&source_b)?;

    let pairs: Vec<(usize, usize)> = pairs.iter().map(|p| (p.a, p.b)).collect();
    let (shared_a, shared_b) = SharedPlayers::from_pairs(&pairs, values_a.n(), values_b.n())?;
    let inter_a = mobius_inverse(&values_a);
    let inter_b = mobius_inverse(&values_b);

    let mut rows = Vec::new();
    for &m in &args.m {
        let m_a = m.min(inter_a.len());
        let m_b = m.min(inter_b.len());
        let va = build_concept_vector(&extract_salient(&inter_a, m_a)?, &shared_a)?;
        let vb = build_concept_vector(&extract_salient(&inter_b, m_b)?, &shared_b)?;
        let similarity = match jaccard_similarity(&va, &vb) {
            Ok(s) => Some(s),
            Err(Error::UndefinedSimilarity) => None,
            Err(e) => return Err(e.into()),
        };
        match similarity {
            Some(s) => eprintln!("M = {m:>4}  sim = {s:.4}"),
            None => eprintln!("M = {m:>4}  sim undefined (no salient concept over shared words)"),
        }
        rows.push(SimilarityRow {
            m,
            m_a,
            m_b,
            shared: pairs.len(),
            similarity,
        });
    }

    let format = Format::from(args.output.format);
    let mut run = RunDir::create(&args.output.out, args.output.force)?;
    write_records(
        &run.artifact(format!("similarity.{}", format.extension())),
        format,
        &rows,
    )?;
    run.finish("transfer", args.source.seed, args)
}

use std::path::PathBuf;

use serde::Serialize;

use harsanyi::io::{load_table, write_json};
use harsanyi::transform::{
    max_absolute_deviation, max_relative_deviation, mobius_inverse, mobius_inverse_reference,
    zeta_transform, REFERENCE_MAX_N,
};
use harsanyi::SubsetMask;

use crate::args::{ReferenceMode, VerifyArgs};
use crate::error::{CliError, CliResult};
use crate::rundir::RunDir;
use crate::source::load_values;

#[derive(Debug, Serialize)]
struct Check {
    name: &'static str,
    /// `relative` is |a - b| / max(1, |b|); `absolute` is |a - b|.
    measure: &'static str,
    max_deviation: f64,
    mask: SubsetMask,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct Summary {
    n: usize,
    tolerance: f64,
    checks: Vec<Check>,
    pass: bool,
}

fn check(
    name: &'static str,
    measure: &'static str,
    (dev, mask): (f64, SubsetMask),
    tol: f64,
) -> Check {
    Check {
        name,
        measure,
        max_deviation: dev,
        mask,
        pass: dev <= tol,
    }
}

pub fn run(args: &VerifyArgs) -> CliResult<PathBuf> {
    let (values, _) = load_values(&args.source)?;
    let n = values.n();
    let tol = args.tolerance;
    let reference = match args.reference {
        ReferenceMode::On if n > REFERENCE_MAX_N => {
            return Err(CliError::config(format!(
                "brute-force reference refused for n = {n} (limit {REFERENCE_MAX_N})"
            )))
        }
        ReferenceMode::On => true,
        ReferenceMode::Auto => n <= REFERENCE_MAX_N,
        ReferenceMode::Off => false,
    };
    let stored = match &args.interactions {
        Some(path) => {
            let t = load_table(path)
                .map_err(|e| CliError::Io(format!("table {}: {e}", path.display())))?;
            if t.n() != n {
                return Err(CliError::config(format!(
                    "interaction table has n = {}, values have n = {n}",
                    t.n()
                )));
            }
            Some(t.interactions()?)
        }
        None => None,
    };

    let interactions = mobius_inverse(&values);
    let mut checks = vec![check(
        "round_trip",
        "relative",
        max_relative_deviation(zeta_transform(&interactions).as_slice(), values.as_slice())?,
        tol,
    )];
    if reference {
        let slow = mobius_inverse_reference(&values)?;
        checks.push(check(
            "reference",
            "absolute",
            max_absolute_deviation(interactions.as_slice(), slow.as_slice())?,
            tol,
        ));
    }
    if let Some(stored) = &stored {
        checks.push(check(
            "stored_reconstruction",
            "relative",
            max_relative_deviation(zeta_transform(stored).as_slice(), values.as_slice())?,
            tol,
        ));
        checks.push(check(
            "stored_interactions",
            "relative",
            max_relative_deviation(interactions.as_slice(), stored.as_slice())?,
            tol,
        ));
    }

    let pass = checks.iter().all(|c| c.pass);
    let failures: Vec<String> = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| {
            format!(
                "{}: deviation {:e} at mask {} {}",
                c.name,
                c.max_deviation,
                c.mask.bits(),
                c.mask
            )
        })
        .collect();
    for c in &checks {
        eprintln!(
            "{:<22} {:<4} max {} deviation {:.3e} at mask {}",
            c.name,
            if c.pass { "ok" } else { "FAIL" },
            c.measure,
            c.max_deviation,
            c.mask.bits()
        );
    }

    let summary = Summary {
        n,
        tolerance: tol,
        checks,
        pass,
    };
    let mut run = RunDir::create(&args.output.out, args.output.force)?;
    write_json(&run.artifact("verify.json"), &summary)?;
    run.finish("verify", args.source.seed, args)?;
    if pass {
        Ok(args.output.out.clone())
    } else {
        Err(CliError::Analysis(format!(
            "verification failed (tolerance {tol:e}): {}",
            failures.join("; ")
        )))
    }
}

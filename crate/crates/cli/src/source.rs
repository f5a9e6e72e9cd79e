use std::path::PathBuf;
use std::time::Duration;

use harsanyi::io::load_table;
use harsanyi::oracle::{
    evaluate_all, Endpoint, EvalOptions, ExternalConfig, ExternalOracle, Oracle, PlantedConfig,
    TableOracle,
};
use harsanyi::{PlayerSet, ValueTable};

use crate::args::SourceArgs;
use crate::error::{CliError, CliResult};

/// Parsed `--oracle` descriptor.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleSpec {
    Planted(PlantedConfig),
    Table(PathBuf),
    External(Endpoint),
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> CliResult<T> {
    value
        .parse()
        .map_err(|_| CliError::config(format!("planted: bad value {value:?} for {key}")))
}

/// `n` and `seed` come from flags unless the descriptor sets them.
pub fn parse_spec(spec: &str, n: Option<usize>, seed: u64) -> CliResult<OracleSpec> {
    if let Some(params) = spec.strip_prefix("planted:") {
        let mut n = n;
        let mut seed = seed;
        let mut k = None;
        let mut sigma = 0.0;
        let mut floor = harsanyi::oracle::DEFAULT_EFFECT_FLOOR;
        let mut ceiling = harsanyi::oracle::DEFAULT_EFFECT_CEILING;
        let mut noise = 0usize;
        let mut noise_max = 0.05;
        for kv in params.split(',').filter(|s| !s.is_empty()) {
            let (key, value) = kv.split_once('=').ok_or_else(|| {
                CliError::config(format!("planted: expected key=value, got {kv:?}"))
            })?;
            match key.trim() {
                "n" => n = Some(num(key, value)?),
                "k" | "K" => k = Some(num(key, value)?),
                "seed" => seed = num(key, value)?,
                "sigma" => sigma = num(key, value)?,
                "floor" => floor = num(key, value)?,
                "ceiling" => ceiling = num(key, value)?,
                "noise" => noise = num(key, value)?,
                "noise_max" => noise_max = num(key, value)?,
                other => return Err(CliError::config(format!("planted: unknown key {other:?}"))),
            }
        }
        let n = n.ok_or_else(|| CliError::config("planted oracle needs --n or n=<count>"))?;
        let k = k.ok_or_else(|| CliError::config("planted oracle needs k=<count>"))?;
        let cfg = PlantedConfig::new(n, k, seed)
            .sigma(sigma)
            .effect_range(floor, ceiling)
            .noise_interactions(noise, noise_max);
        return Ok(OracleSpec::Planted(cfg));
    }
    if let Some(path) = spec.strip_prefix("table:") {
        return Ok(OracleSpec::Table(PathBuf::from(path)));
    }
    if spec.starts_with("tcp:") || spec.starts_with("exec:") {
        return Ok(OracleSpec::External(Endpoint::parse(spec)?));
    }
    Err(CliError::config(format!(
        "unknown oracle {spec:?}; expected planted:, table:, tcp: or exec:"
    )))
}

/// An opened oracle and its player labels.
pub struct Source {
    pub oracle: Box<dyn Oracle>,
    pub players: PlayerSet,
}

pub fn open(spec: &OracleSpec, n: Option<usize>, args: &SourceArgs) -> CliResult<Source> {
    let oracle: Box<dyn Oracle> = match spec {
        OracleSpec::Planted(cfg) => Box::new(cfg.build()?),
        OracleSpec::Table(path) => {
            let loaded = load_table(path)
                .map_err(|e| CliError::Io(format!("table {}: {e}", path.display())))?;
            let players = loaded.players()?;
            Box::new(TableOracle::with_players(loaded.values()?, &players)?)
        }
        OracleSpec::External(endpoint) => {
            let cfg = ExternalConfig {
                timeout: Duration::from_millis(args.timeout_ms),
                expected_n: n,
            };
            Box::new(ExternalOracle::connect(endpoint, &cfg)?)
        }
    };
    if let Some(n) = n {
        if n != oracle.n() {
            return Err(CliError::config(format!(
                "--n {n} disagrees with the oracle's n = {}",
                oracle.n()
            )));
        }
    }
    let players = match oracle.labels() {
        Some(labels) => PlayerSet::new(labels.to_vec())?,
        None => PlayerSet::anonymous(oracle.n())?,
    };
    Ok(Source { oracle, players })
}

pub fn eval_options(args: &SourceArgs) -> EvalOptions {
    EvalOptions {
        parallelism: args.parallelism,
        batch_size: args.max_in_flight,
        retries: args.retries,
        backoff: Duration::from_millis(50),
    }
}

/// Opens the `--oracle` source and evaluates it on every mask.
pub fn load_values(args: &SourceArgs) -> CliResult<(ValueTable, PlayerSet)> {
    let spec = parse_spec(&args.oracle, args.n, args.seed)?;
    let source = open(&spec, args.n, args)?;
    let values = evaluate_all(source.oracle.as_ref(), &eval_options(args))?;
    Ok((values, source.players))
}

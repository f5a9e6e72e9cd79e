//! Wire-protocol tests against scripted hosts.

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use harsanyi::oracle::{
    evaluate_all, serve, Endpoint, EvalError, EvalOptions, ExternalConfig, ExternalOracle, Oracle,
    OracleError, TableOracle,
};
use harsanyi::{PlayerSet, SubsetMask, ValueTable};

const BATCH_GOLDEN: &str = include_str!("golden/batch64_requests.jsonl");
const SERVE_GOLDEN: &str = include_str!("golden/serve_transcript.jsonl");

/// Accepts one connection and hands it to `script`.
fn scripted_host<F>(script: F) -> (String, JoinHandle<()>)
where
    F: FnOnce(BufReader<TcpStream>, TcpStream) + Send + 'static,
{
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    let handle = thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let reader = BufReader::new(stream.try_clone().unwrap());
        script(reader, stream);
    });
    (format!("tcp:{addr}"), handle)
}

fn handshake(w: &mut TcpStream, n: usize) {
    writeln!(
        w,
        r#"{{"protocol":1,"n":{n},"labels":[],"meta":{{"model":"scripted"}}}}"#
    )
    .unwrap();
}

fn read_lines(r: &mut BufReader<TcpStream>, count: usize) -> Vec<String> {
    (0..count)
        .map(|_| {
            let mut line = String::new();
            r.read_line(&mut line).unwrap();
            line
        })
        .collect()
}

fn config(timeout_ms: u64) -> ExternalConfig {
    ExternalConfig {
        timeout: Duration::from_millis(timeout_ms),
        expected_n: None,
    }
}

fn connect(endpoint: &str, cfg: &ExternalConfig) -> Result<ExternalOracle, OracleError> {
    ExternalOracle::connect(&Endpoint::parse(endpoint).unwrap(), cfg)
}

#[test]
fn handshake_then_single_query_passes_value_through() {
    let (ep, host) = scripted_host(|mut r, mut w| {
        handshake(&mut w, 12);
        let line = read_lines(&mut r, 1).remove(0);
        assert_eq!(line, "{\"id\":0,\"keep\":[]}\n");
        writeln!(w, r#"{{"id":0,"value":-3.125}}"#).unwrap();
    });
    let o = connect(&ep, &config(5_000)).unwrap();
    assert_eq!(o.n(), 12);
    assert_eq!(o.handshake().meta["model"], "scripted");
    assert_eq!(o.query(SubsetMask::EMPTY), Ok(-3.125));
    host.join().unwrap();
}

#[test]
fn batch_of_64_is_matched_by_id_regardless_of_order() {
    let (ep, host) = scripted_host(|mut r, mut w| {
        handshake(&mut w, 12);
        let lines = read_lines(&mut r, 64);
        assert_eq!(lines.concat(), BATCH_GOLDEN);
        for id in (0..64u32).rev() {
            writeln!(w, r#"{{"id":{id},"value":{}}}"#, f64::from(id) * 0.5 - 7.0).unwrap();
        }
    });
    let o = connect(&ep, &config(5_000)).unwrap();
    let masks: Vec<SubsetMask> = (0..64).map(SubsetMask::from_bits).collect();
    let got = o.query_batch(&masks);
    assert_eq!(got.len(), 64);
    for (i, v) in got.into_iter().enumerate() {
        assert_eq!(v, Ok(i as f64 * 0.5 - 7.0));
    }
    host.join().unwrap();
}

#[test]
fn nan_response_is_a_malformed_response_error() {
    let (ep, host) = scripted_host(|mut r, mut w| {
        handshake(&mut w, 2);
        read_lines(&mut r, 1);
        writeln!(w, r#"{{"id":0,"value":NaN}}"#).unwrap();
    });
    let o = connect(&ep, &config(5_000)).unwrap();
    let err = o.query(SubsetMask::from_bits(1)).unwrap_err();
    assert!(matches!(err, OracleError::Malformed(_)), "{err:?}");
    assert!(err.is_protocol());
    host.join().unwrap();
}

#[test]
fn missing_value_and_host_error_records_are_typed() {
    let (ep, host) = scripted_host(|mut r, mut w| {
        handshake(&mut w, 2);
        read_lines(&mut r, 2);
        writeln!(w, r#"{{"id":1,"error":"model exploded"}}"#).unwrap();
        writeln!(w, r#"{{"id":0}}"#).unwrap();
    });
    let o = connect(&ep, &config(5_000)).unwrap();
    let got = o.query_batch(&[SubsetMask::from_bits(0), SubsetMask::from_bits(3)]);
    assert!(matches!(got[0], Err(OracleError::Malformed(_))));
    assert_eq!(
        got[1],
        Err(OracleError::Host {
            id: 1,
            message: "model exploded".into()
        })
    );
    host.join().unwrap();
}

#[test]
fn handshake_n_disagreement_is_rejected() {
    let (ep, host) = scripted_host(|_, mut w| handshake(&mut w, 5));
    let cfg = ExternalConfig {
        expected_n: Some(4),
        ..config(5_000)
    };
    let err = connect(&ep, &cfg).unwrap_err();
    assert_eq!(
        err,
        OracleError::HandshakeMismatch {
            expected: 4,
            found: 5
        }
    );
    assert!(err.is_protocol());
    host.join().unwrap();
}

#[test]
fn bad_protocol_version_is_rejected() {
    let (ep, host) = scripted_host(|_, mut w| {
        writeln!(w, r#"{{"protocol":2,"n":3,"labels":[],"meta":{{}}}}"#).unwrap();
    });
    assert!(matches!(
        connect(&ep, &config(5_000)),
        Err(OracleError::Protocol(_))
    ));
    host.join().unwrap();
}

#[test]
fn silent_host_times_out() {
    let (ep, host) = scripted_host(|mut r, mut w| {
        handshake(&mut w, 3);
        read_lines(&mut r, 1);
        thread::sleep(Duration::from_millis(400));
    });
    let o = connect(&ep, &config(100)).unwrap();
    let err = o.query(SubsetMask::from_bits(2)).unwrap_err();
    assert!(
        matches!(
            err,
            OracleError::Timeout {
                id: 0,
                after_ms: 100
            }
        ),
        "{err:?}"
    );
    assert!(err.is_transport());
    host.join().unwrap();
}

#[test]
fn closed_connection_is_a_transport_error() {
    let (ep, host) = scripted_host(|_, mut w| handshake(&mut w, 3));
    let o = connect(&ep, &config(5_000)).unwrap();
    host.join().unwrap();
    let err = o.query(SubsetMask::from_bits(1)).unwrap_err();
    assert!(err.is_transport(), "{err:?}");
}

#[test]
fn unreachable_endpoint_is_a_transport_error() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    let err = connect(&format!("tcp:{addr}"), &config(1_000)).unwrap_err();
    assert!(err.is_transport(), "{err:?}");
}

fn table_host(table: ValueTable, labels: Vec<String>) -> (String, JoinHandle<()>) {
    scripted_host(move |r, w| {
        let players = PlayerSet::new(labels).unwrap();
        let oracle = TableOracle::with_players(table, &players).unwrap();
        serve(&oracle, serde_json::json!({"source": "table"}), r, w).unwrap();
    })
}

#[test]
fn serve_transcript_matches_golden() {
    let table = ValueTable::from_fn(3, |m| f64::from(m.bits()) * 0.5).unwrap();
    let labels = vec!["the".to_string(), "red".into(), "fox".into()];
    let (ep, host) = table_host(table, labels);
    let addr = ep.strip_prefix("tcp:").unwrap();
    let mut stream = TcpStream::connect(addr).unwrap();
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    writeln!(stream, r#"{{"id":0,"keep":[0,2]}}"#).unwrap();
    writeln!(stream, r#"{{"id":1,"keep":[]}}"#).unwrap();
    writeln!(stream, r#"{{"id":2,"keep":[3]}}"#).unwrap();
    let mut transcript = String::new();
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line).unwrap() == 0 {
            break;
        }
        transcript.push_str(&line);
    }
    assert_eq!(transcript, SERVE_GOLDEN);
    host.join().unwrap();
}

#[test]
fn exhaustive_sweep_over_the_wire_matches_the_table() {
    let table = ValueTable::from_fn(10, |m| (f64::from(m.bits()) * 0.37).sin() * 3.0).unwrap();
    let labels: Vec<String> = (0..10).map(|i| format!("w{i}")).collect();
    let (ep, host) = table_host(table.clone(), labels.clone());
    let o = connect(
        &ep,
        &ExternalConfig {
            expected_n: Some(10),
            ..config(5_000)
        },
    )
    .unwrap();
    assert_eq!(o.labels().unwrap(), labels.as_slice());
    let opts = EvalOptions {
        parallelism: 4,
        batch_size: 64,
        ..EvalOptions::default()
    };
    let got = evaluate_all(&o, &opts).unwrap();
    assert_eq!(got, table);
    drop(o);
    host.join().unwrap();
}

#[test]
fn persistent_host_error_aborts_the_sweep_naming_the_mask() {
    let (ep, host) = scripted_host(|mut r, mut w| {
        handshake(&mut w, 3);
        loop {
            let mut line = String::new();
            if r.read_line(&mut line).unwrap_or(0) == 0 {
                return;
            }
            let req: serde_json::Value = serde_json::from_str(&line).unwrap();
            let id = req["id"].as_u64().unwrap();
            let keep: Vec<u64> = req["keep"]
                .as_array()
                .unwrap()
                .iter()
                .map(|k| k.as_u64().unwrap())
                .collect();
            if keep == [0, 2] {
                writeln!(w, r#"{{"id":{id},"error":"cuda out of memory"}}"#).unwrap();
            } else {
                writeln!(w, r#"{{"id":{id},"value":1.0}}"#).unwrap();
            }
        }
    });
    let o = connect(&ep, &config(5_000)).unwrap();
    let opts = EvalOptions {
        backoff: Duration::from_millis(1),
        batch_size: 2,
        ..EvalOptions::default()
    };
    match evaluate_all(&o, &opts).unwrap_err() {
        EvalError::Failed {
            mask,
            attempts,
            completed,
            source,
        } => {
            assert_eq!(mask, SubsetMask::from_bits(5));
            assert_eq!(attempts, 4);
            assert_eq!(completed, 5);
            assert!(matches!(source, OracleError::Host { .. }));
        }
        other => panic!("unexpected {other:?}"),
    }
    drop(o);
    host.join().unwrap();
}

use std::io::{self, BufReader};
use std::net::TcpListener;

use harsanyi::oracle::serve;

use crate::args::ServeArgs;
use crate::error::{CliError, CliResult};
use crate::source::{open, parse_spec};

pub fn run(args: &ServeArgs) -> CliResult<()> {
    let spec = parse_spec(&args.source.oracle, args.source.n, args.source.seed)?;
    let source = open(&spec, args.source.n, &args.source)?;
    let meta = serde_json::json!({ "oracle": args.source.oracle });
    let io_err = |e: io::Error| CliError::Io(format!("serve: {e}"));
    match &args.listen {
        None => {
            let stdin = io::stdin().lock();
            let stdout = io::stdout().lock();
            serve(source.oracle.as_ref(), meta, stdin, stdout).map_err(io_err)
        }
        Some(addr) => {
            let listener = TcpListener::bind(addr).map_err(io_err)?;
            eprintln!("listening on {}", listener.local_addr().map_err(io_err)?);
            let (stream, _) = listener.accept().map_err(io_err)?;
            let reader = BufReader::new(stream.try_clone().map_err(io_err)?);
            serve(source.oracle.as_ref(), meta, reader, stream).map_err(io_err)
        }
    }
}

//! `pjet-trace [--write] [ROOT]`: checks the traceability table in the book
//! against the source annotations, or rewrites it with `--write`.

use std::path::PathBuf;
use std::process::ExitCode;

fn main() -> ExitCode {
    let mut write = false;
    let mut root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..");
    for arg in std::env::args().skip(1) {
        match arg.as_str() {
            "--write" => write = true,
            "--check" => write = false,
            other => root = PathBuf::from(other),
        }
    }
    let table = match pjet_trace::generate_trace_table(&root) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    let path = pjet_trace::table_path(&root);
    if write {
        if let Err(e) = std::fs::write(&path, table) {
            eprintln!("cannot write {}: {e}", path.display());
            return ExitCode::from(1);
        }
        return ExitCode::SUCCESS;
    }
    match std::fs::read_to_string(&path) {
        Ok(current) if current == table => ExitCode::SUCCESS,
        _ => {
            eprintln!("{} is out of date; rerun with --write", path.display());
            ExitCode::from(1)
        }
    }
}

//! Runs `pmp verify` through the command-line front end, writes a
//! certificate, reads it back and re-runs it.
//!
//! ```text
//! cargo run --release --example certificates
//! ```

use setsep::cli;

fn main() -> std::io::Result<()> {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/data/dblint.json");
    let cert_path = std::env::temp_dir().join("setsep-dblint-cert.json");
    let cert_arg = cert_path.to_string_lossy().into_owned();
    let mut out = Vec::new();
    let code = cli::run(
        ["setsep", "pmp", "verify", data, "--needles", "8", "--cert", &cert_arg],
        &mut out,
    );
    print!("{}", String::from_utf8_lossy(&out));
    println!("exit code {code}");

    let cert = cli::read_certificate(&cert_path)?;
    println!("recorded: {} -> {} (seed {})", cert.command, cert.verdict, cert.seed);
    let again = cli::rerun_certificate(&cert);
    println!("re-run:   {} -> {}", cert.command, again.verdict);
    assert_eq!(again.verdict, cert.verdict);
    Ok(())
}

//! Evaluates the asymptotic exponents over the face-size region, writes the
//! surface as CSV and reports the dominant point.
//!
//! `cargo run --example exponent_surface -- [delta] [P1] [P2] [W2] [out.csv]`

use std::fs::File;
use std::io::BufWriter;

use weighted_l1::exponents::{dominant_point, recoverable, AsymptoticConfig, SearchOptions};

fn arg<T: std::str::FromStr>(i: usize, default: T) -> T {
    std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = AsymptoticConfig::new(arg(1, 0.75), 0.5, 0.5, arg(2, 0.6), arg(3, 0.1), arg(4, 2.0))?;
    let path: String = arg(5, "surface.csv".to_string());

    let (ok, surface) = recoverable(&cfg, 0.0)?;
    surface.write_csv(BufWriter::new(File::create(&path)?))?;
    println!("{} grid points written to {path}", surface.points.len());
    if let Some(p) = surface.max {
        println!("max psi_total = {:.6} at (t1', t2') = ({:.4}, {:.4})", p.psi_total, p.t1p, p.t2p);
    }
    if let Some(d) = dominant_point(&cfg, &SearchOptions::default())? {
        println!(
            "dominant point ({:.4}, {:.4}): psi_com {:.4}, psi_int {:.4}, psi_ext {:.4}",
            d.t1p, d.t2p, d.psi_com, d.psi_int, d.psi_ext
        );
        println!("region starts at t1' + t2' = {:.4}", cfg.min_face_excess());
    }
    println!("recoverable: {ok}");
    Ok(())
}

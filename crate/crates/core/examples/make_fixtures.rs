//! Regenerates the seeded datasets under `tests/fixtures`.
//!
//! cargo run -p bvs-core --example make_fixtures

use std::fs::File;
use std::path::Path;

use bvs_core::{generate_synthetic, write_dataset, ModelSubset, Result};

#[allow(clippy::too_many_arguments)]
fn emit(name: &str, n: usize, k: usize, truth: &str, beta: &[f64], sigma: f64, corr: f64, seed: u64) -> Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let subset: ModelSubset = truth.parse()?;
    let data = generate_synthetic(n, k, &subset, beta, sigma, corr, seed)?;
    write_dataset(&data, File::create(dir.join(name))?)?;
    println!("{name}: n = {n}, k = {k}, truth {subset}");
    Ok(())
}

fn main() -> Result<()> {
    emit("toy_k1.csv", 12, 1, "1", &[1.0, 0.8], 1.0, 0.0, 11)?;
    emit("seeded_n100_k6.csv", 100, 6, "1,2", &[0.5, 1.0, 1.0], 1.0, 0.2, 2024)?;
    emit("n500_k4.csv", 500, 4, "1,2", &[0.0, 0.5, 0.5], 1.0, 0.0, 500)?;
    Ok(())
}

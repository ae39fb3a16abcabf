//! Per-class physical flip rates of the noisy preparation, the input of the
//! decoder's soft information.

use cluster_qec::experiments::ExperimentConfig;
use cluster_qec::lattice::PositionClass;
use cluster_qec::rep_code::calibrate_flip_rate;

fn main() -> cluster_qec::Result<()> {
    let config = ExperimentConfig { d: 4, n: 3, p: 0.015, beta: 1000.0, ..Default::default() };
    let table = calibrate_flip_rate(&config, 2000)?;
    let se = table.standard_errors();
    for (c, (q, se)) in table.rates.rates.iter().zip(se).enumerate() {
        println!("{:>8}: q = {q:.4e} +- {se:.1e}", PositionClass(c).label());
    }
    Ok(())
}

//! Threshold fit on a table drawn from a known scaling law.

use cluster_qec::experiments::{fit_threshold, Ansatz, FitPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> cluster_qec::Result<()> {
    let truth = Ansatz { p_th: 0.015, nu: 1.0, mu: 1.0, a: 0.2, b: 8.0, c: 20.0, d: 0.0 };
    let trials = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut points = Vec::new();
    for d in [4, 6, 8] {
        for k in 0..7 {
            let p = 0.012 + 0.001 * k as f64;
            let q = truth.eval(p, d);
            let failures = (0..trials).filter(|_| rng.gen::<f64>() < q).count() as u64;
            points.push(FitPoint { d, p, failures, trials });
        }
    }
    let fit = fit_threshold(&points)?;
    let f = fit.primary_fit();
    println!("crossing estimate {:.5e}", fit.crossing);
    println!("p_th = {:.5e} +- {:.1e} (truth {:.5e})", f.params.p_th, f.std_errors[0], truth.p_th);
    println!("nu = {:.3} +- {:.3}, chi2/dof = {:.2}", f.params.nu, f.std_errors[1], f.reduced_chi2());
    Ok(())
}
